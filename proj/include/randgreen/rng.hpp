#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <utility>

namespace randgreen {

// Counter-based random stream.  A stream is identified by (seed, stream id);
// draws are a pure function of (seed, stream, counter), so sample i of a
// Monte-Carlo experiment can use its own stream and results do not depend on
// the number of worker threads or their scheduling.
//
// Core mixer is the SplitMix64 finalizer, which passes BigCrush as a
// counter hash.

constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream)
      : state_(mix64(seed ^ mix64(stream ^ 0x632be59bd9b4e019ULL))) {}

  std::uint64_t next_u64() { return mix64(state_ += 0x9e3779b97f4a7c15ULL); }

  // [0, 1)
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  // (0, 1]
  double uniform_open() { return double((next_u64() >> 11) + 1) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  double gaussian() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    const double u = uniform_open();
    const double v = uniform();
    const double r = std::sqrt(-2.0 * std::log(u));
    const double t = 6.283185307179586476925286766559 * v;
    cached_ = r * std::sin(t);
    have_cached_ = true;
    return r * std::cos(t);
  }

  std::complex<double> complex_gaussian() {
    return {gaussian(), gaussian()};
  }

  // Uniform on the closed unit disk (rejection-free).
  std::complex<double> unit_disk() {
    const double r = std::sqrt(uniform());
    const double t = 6.283185307179586476925286766559 * uniform();
    return {r * std::cos(t), r * std::sin(t)};
  }

  std::complex<double> unit_circle() {
    const double t = 6.283185307179586476925286766559 * uniform();
    return {std::cos(t), std::sin(t)};
  }

 private:
  std::uint64_t state_;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

// Stable sub-stream ids for the different sampling purposes of one
// experiment.  Keeping them disjoint makes every consumer reproducible
// independently of the others.
namespace stream {
constexpr std::uint64_t tagged(std::uint64_t tag, std::uint64_t index) {
  return mix64(tag) ^ index;
}
constexpr std::uint64_t kDriver = 0x11;
constexpr std::uint64_t kLambda = 0x22;
constexpr std::uint64_t kMeasure = 0x33;
constexpr std::uint64_t kProbe = 0x44;
constexpr std::uint64_t kOrbit = 0x55;
constexpr std::uint64_t kQuadrature = 0x66;
constexpr std::uint64_t kCandidate = 0x77;
}  // namespace stream

}  // namespace randgreen
