#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "randgreen/parallel.hpp"

namespace randgreen {

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t n = 0;
};

inline MeanStderr mean_stderr(std::span<const double> xs) {
  MeanStderr r;
  r.n = xs.size();
  if (r.n == 0) return r;
  r.mean = pairwise_sum(xs) / double(r.n);
  if (r.n < 2) return r;
  std::vector<double> dev2(r.n);
  for (std::size_t i = 0; i < r.n; ++i) {
    const double d = xs[i] - r.mean;
    dev2[i] = d * d;
  }
  const double var = pairwise_sum(dev2) / double(r.n - 1);
  r.stderr_ = std::sqrt(var / double(r.n));
  return r;
}

inline double sample_std(std::span<const double> xs) {
  const auto ms = mean_stderr(xs);
  return ms.stderr_ * std::sqrt(double(ms.n));
}

inline double median(std::vector<double> xs) {
  if (xs.empty()) return 0.0;
  const std::size_t mid = xs.size() / 2;
  std::nth_element(xs.begin(), xs.begin() + mid, xs.end());
  double hi = xs[mid];
  if (xs.size() % 2 == 1) return hi;
  std::nth_element(xs.begin(), xs.begin() + mid - 1, xs.begin() + mid);
  return 0.5 * (xs[mid - 1] + hi);
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  std::size_t n = 0;
};

// Ordinary least squares of y against x.
inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  LineFit f;
  f.n = std::min(x.size(), y.size());
  if (f.n < 2) return f;
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < f.n; ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / double(f.n), my = sy / double(f.n);
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < f.n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (f.n > 2) {
    double ss = 0;
    for (std::size_t i = 0; i < f.n; ++i) {
      const double r = y[i] - (f.intercept + f.slope * x[i]);
      ss += r * r;
    }
    f.slope_stderr = std::sqrt(ss / double(f.n - 2) / sxx);
  }
  return f;
}

// Shannon entropy (nats) of a histogram of counts, with the Miller–Madow
// small-sample bias correction (K occupied cells, N observations).
inline double shannon_entropy_mm(std::span<const std::size_t> counts) {
  double total = 0;
  std::size_t occupied = 0;
  for (std::size_t c : counts) {
    total += double(c);
    if (c > 0) ++occupied;
  }
  if (total <= 0 || occupied <= 1) return 0.0;
  double h = 0;
  for (std::size_t c : counts) {
    if (c == 0) continue;
    const double p = double(c) / total;
    h -= p * std::log(p);
  }
  return h + double(occupied - 1) / (2.0 * total);
}

}  // namespace randgreen
