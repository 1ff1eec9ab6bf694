#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include "randgreen/drivers.hpp"
#include "randgreen/errors.hpp"
#include "randgreen/maps.hpp"
#include "randgreen/observables.hpp"
#include "randgreen/parallel.hpp"
#include "randgreen/projective.hpp"
#include "randgreen/stats.hpp"

namespace randgreen {

// ---------------------------------------------------------------------------
// Green potential:  g_n(x) = sum_{i=0}^{n} d^{-(i+1)} a_i  with
// a_i = log||f~_i(Z_i)|| along the normalized forward orbit Z_{i+1} =
// f~_i(Z_i)/||.||.  Only unit vectors and scalar logs are held, so the
// recursion is overflow-free for any n.

struct GreenAccumulator {
  ProjPoint point;
  double partial_sum = 0.0;
  int n = -1;          // steps consumed; -1 before the first step
  double scale = 0.0;  // d^{-(n+2)}: weight of the next step

  static GreenAccumulator start(const ProjPoint& x, int d) {
    GreenAccumulator acc;
    acc.point = x;
    acc.scale = 1.0 / double(d);
    return acc;
  }

  // Consumes one map: applies it to the current point and adds the weighted
  // lifted log-norm.  Checkpoint/resume safe: the stored scale is the exact
  // running product, so a resumed accumulator replays the identical
  // floating-point sequence.
  void step(const RationalMap& f) {
    const EvalResult r = evaluate(f, point);
    partial_sum += scale * r.lognorm;
    point = r.point;
    scale /= double(f.d);
    n += 1;
  }
};

struct GreenProfile {
  double g_n = 0.0;
  std::vector<double> profile;  // g_0, ..., g_n
};

inline GreenProfile green_potential(const std::vector<RationalMap>& maps,
                                    const ProjPoint& x, int n) {
  GreenProfile out;
  out.profile.reserve(n + 1);
  GreenAccumulator acc = GreenAccumulator::start(x, maps.front().d);
  for (int i = 0; i <= n; ++i) {
    acc.step(maps[i]);
    out.profile.push_back(acc.partial_sum);
  }
  out.g_n = acc.partial_sum;
  return out;
}

// ---------------------------------------------------------------------------
// Preimage fibers.

// All d preimages (with multiplicity) of y under a nondegenerate k=1 map:
// projective roots of the binary form b P(Z,W) - a Q(Z,W), via companion
// matrix eigenvalues.  Degree drops become the point at infinity [1:0] of
// the chart with matching multiplicity.
inline std::vector<ProjPoint> univariate_preimages(const RationalMap& f,
                                                   const ProjPoint& y) {
  const auto p = binary_coeffs(f, 0);
  const auto q = binary_coeffs(f, 1);
  const std::complex<double> a = y.coords[0], b = y.coords[1];
  const int d = f.d;

  std::vector<std::complex<double>> r(d + 1);  // coeffs of Z^{d-j} W^j
  double rmax = 0;
  for (int j = 0; j <= d; ++j) {
    r[j] = b * p[j] - a * q[j];
    rmax = std::max(rmax, std::abs(r[j]));
  }
  if (rmax < 1e-14) throw DegenerateFiber("fiber form vanished identically");

  std::vector<ProjPoint> roots;
  roots.reserve(d);

  // Leading (Z^d) coefficients below threshold correspond to roots at the
  // infinity of the W=1 chart, i.e. [1:0].
  int lead = 0;
  while (lead <= d && std::abs(r[lead]) < 1e-13 * rmax) ++lead;
  CVec inf_pt(2);
  inf_pt[0] = 1.0;
  inf_pt[1] = 0.0;
  for (int m = 0; m < lead; ++m) roots.push_back(ProjPoint{inf_pt});

  const int deg = d - lead;
  auto push_affine = [&roots](std::complex<double> t) {
    CVec z(2);
    z[0] = t;
    z[1] = 1.0;
    roots.push_back(normalize(z));
  };

  if (deg == 1) {
    push_affine(-r[d] / r[lead]);
  } else if (deg == 2) {
    // stable quadratic formula: larger root via -(b + sgn sqrt(disc))/2a,
    // smaller via the product c/a
    const std::complex<double> a2 = r[lead], b2 = r[lead + 1], c2 = r[lead + 2];
    std::complex<double> s = std::sqrt(b2 * b2 - 4.0 * a2 * c2);
    if (std::real(std::conj(b2) * s) < 0.0) s = -s;
    const std::complex<double> q = -0.5 * (b2 + s);
    if (std::abs(q) > 1e-300) {
      push_affine(q / a2);
      push_affine(c2 / q);
    } else {
      push_affine(0.0);
      push_affine(0.0);
    }
  } else if (deg > 2) {
    // Frobenius companion of the monic dehomogenization in t = Z/W:
    //   t^deg + (r[lead+1]/r[lead]) t^{deg-1} + ... + r[d]/r[lead].
    CMat companion = CMat::Zero(deg, deg);
    for (int i = 1; i < deg; ++i) companion(i, i - 1) = 1.0;
    for (int i = 0; i < deg; ++i) companion(i, deg - 1) = -r[d - i] / r[lead];
    Eigen::ComplexEigenSolver<CMat> solver(companion, /*computeEigenvectors=*/false);
    for (int i = 0; i < deg; ++i) push_affine(solver.eigenvalues()[i]);
  }
  return roots;
}

// Alignment residual ||f~(x) ^ y|| for unit lifts; zero iff f(x) = y.
inline double preimage_residual(const RationalMap& f, const ProjPoint& x,
                                const ProjPoint& y) {
  const CVec w = eval_lift(f, x.coords);
  const double wn = w.norm();
  if (wn < 1e-300) return 1.0;
  double acc = 0;
  for (int i = 0; i <= f.k; ++i)
    for (int j = i + 1; j <= f.k; ++j)
      acc += std::norm(w[i] / wn * y.coords[j] - w[j] / wn * y.coords[i]);
  return std::sqrt(acc);
}

// ---------------------------------------------------------------------------
// Total-degree homotopy continuation for k >= 2 fibers (desk scale k=2, d=2).

struct HomotopyOptions {
  std::complex<double> start_c1{0.82, 0.31};
  std::complex<double> start_c2{-0.46, 0.77};
  std::complex<double> gamma{0.5885, -0.8085};
  int steps = 100;
  double newton_tol = 1e-12;
  double divergence_cutoff = 1e8;
};

namespace detail {

// Affine view of the fiber equations in the chart Z_axis = 1:
//   G_i(z) = f~_i(Z) y_{j*} - f~_{j*}(Z) y_i,  i != j*.
struct FiberSystem {
  const RationalMap* f;
  CVec y;
  int yaxis;
  int zaxis;
  std::array<int, 2> rows;

  CVec lift(const Eigen::Vector2cd& z) const {
    CVec Z = CVec::Zero(3);
    Z[zaxis] = 1.0;
    int c = 0;
    for (int i = 0; i < 3; ++i)
      if (i != zaxis) Z[i] = z[c++];
    return Z;
  }

  Eigen::Vector2cd value(const Eigen::Vector2cd& z) const {
    const CVec Z = lift(z);
    const CVec w = eval_lift(*f, Z);
    Eigen::Vector2cd g;
    for (int r = 0; r < 2; ++r) g[r] = w[rows[r]] * y[yaxis] - w[yaxis] * y[rows[r]];
    return g;
  }

  Eigen::Matrix2cd jacobian(const Eigen::Vector2cd& z) const {
    const CVec Z = lift(z);
    const CMat J = jacobian_lift(*f, Z);
    Eigen::Matrix2cd M;
    int vars[2];
    int c = 0;
    for (int i = 0; i < 3; ++i)
      if (i != zaxis) vars[c++] = i;
    for (int r = 0; r < 2; ++r)
      for (int v = 0; v < 2; ++v)
        M(r, v) = J(rows[r], vars[v]) * y[yaxis] - J(yaxis, vars[v]) * y[rows[r]];
    return M;
  }
};

inline std::optional<Eigen::Vector2cd> track_path(const FiberSystem& sys,
                                                  Eigen::Vector2cd z,
                                                  const HomotopyOptions& opt) {
  // start system S(z) = (z_1^2 - c_1, z_2^2 - c_2), gamma-twisted linear
  // homotopy H = (1-t) gamma S + t G, t -> 1 geometrically.
  const auto s_value = [&](const Eigen::Vector2cd& w) {
    return Eigen::Vector2cd(w[0] * w[0] - opt.start_c1, w[1] * w[1] - opt.start_c2);
  };
  const auto s_jac = [&](const Eigen::Vector2cd& w) {
    Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
    m(0, 0) = 2.0 * w[0];
    m(1, 1) = 2.0 * w[1];
    return m;
  };
  const double rho = std::pow(1e-7, 1.0 / double(opt.steps - 1));
  for (int step = 1; step <= opt.steps; ++step) {
    const double t = step == opt.steps ? 1.0 : 1.0 - std::pow(rho, double(step));
    for (int it = 0; it < 40; ++it) {
      const Eigen::Vector2cd h =
          (1.0 - t) * opt.gamma * s_value(z) + t * sys.value(z);
      const Eigen::Matrix2cd Jh =
          (1.0 - t) * opt.gamma * s_jac(z) + t * sys.jacobian(z);
      const Eigen::Vector2cd delta = Jh.fullPivLu().solve(h);
      z -= delta;
      if (z.norm() > opt.divergence_cutoff) return std::nullopt;
      if (delta.norm() < opt.newton_tol * (1.0 + z.norm())) break;
    }
    if (z.norm() > opt.divergence_cutoff) return std::nullopt;
  }
  // polish at t = 1
  for (int it = 0; it < 60; ++it) {
    const Eigen::Vector2cd g = sys.value(z);
    const Eigen::Vector2cd delta = sys.jacobian(z).fullPivLu().solve(g);
    z -= delta;
    if (delta.norm() < 1e-14 * (1.0 + z.norm())) break;
  }
  if (z.norm() > opt.divergence_cutoff || !z.allFinite()) return std::nullopt;
  return z;
}

}  // namespace detail

// All d^k preimages of y (with multiplicity) for k = 2 by total-degree
// continuation.  Lost paths trigger a chart change before erroring.
inline std::vector<ProjPoint> multivariate_preimages(const RationalMap& f,
                                                     const ProjPoint& y,
                                                     const HomotopyOptions& opt = {}) {
  if (f.k != 2) throw std::invalid_argument("multivariate_preimages: k must be 2");
  const int expected = f.d * f.d;  // d^k

  int yaxis = 0;
  for (int i = 1; i <= f.k; ++i)
    if (std::abs(y.coords[i]) > std::abs(y.coords[yaxis])) yaxis = i;

  int best_found = 0;
  for (int zaxis = 0; zaxis < 3; ++zaxis) {
    detail::FiberSystem sys;
    sys.f = &f;
    sys.y = y.coords;
    sys.yaxis = yaxis;
    sys.zaxis = zaxis;
    int c = 0;
    for (int i = 0; i < 3; ++i)
      if (i != yaxis) sys.rows[c++] = i;

    // start roots: +-sqrt(c_1) x +-sqrt(c_2)
    const std::complex<double> r1 = std::sqrt(opt.start_c1);
    const std::complex<double> r2 = std::sqrt(opt.start_c2);
    std::vector<ProjPoint> endpoints;
    endpoints.reserve(expected);
    bool chart_ok = true;
    for (int s1 = 0; s1 < 2 && chart_ok; ++s1) {
      for (int s2 = 0; s2 < 2 && chart_ok; ++s2) {
        Eigen::Vector2cd z0(s1 ? -r1 : r1, s2 ? -r2 : r2);
        const auto end = detail::track_path(sys, z0, opt);
        if (!end) {
          chart_ok = false;
          break;
        }
        const ProjPoint pt = normalize(sys.lift(*end));
        if (preimage_residual(f, pt, y) > 1e-8) {
          chart_ok = false;
          break;
        }
        endpoints.push_back(pt);
      }
    }
    best_found = std::max(best_found, int(endpoints.size()));
    if (chart_ok && int(endpoints.size()) == expected) return endpoints;
  }
  throw TrackingFailure(expected - best_found);
}

// Groups a preimage list by projective proximity (< 1e-6).
struct PreimageCluster {
  ProjPoint point;
  int multiplicity;
};

inline std::vector<PreimageCluster> cluster_preimages(const std::vector<ProjPoint>& pts) {
  std::vector<PreimageCluster> out;
  for (const auto& p : pts) {
    bool merged = false;
    for (auto& c : out) {
      if (fs_distance(p, c.point) < 1e-6) {
        c.multiplicity += 1;
        merged = true;
        break;
      }
    }
    if (!merged) out.push_back({p, 1});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Inverse-iteration sampling of mu(f_0).

struct MeasureSample {
  ProjPoint point;
  int depth = 0;
  std::vector<int> branch_trace;  // branch index in [0, d^k) per backward step
};

// depth-n sample: x ~ FS volume pulled back through f_n^{-1}, ..., f_0^{-1},
// choosing uniformly among the d^k preimages counted with multiplicity.
// sample i uses stream (seed, kMeasure, i); results are independent of the
// worker count.
inline std::vector<MeasureSample> measure_sample(const std::vector<RationalMap>& maps,
                                                 int depth, int count,
                                                 std::uint64_t seed) {
  std::vector<MeasureSample> out(count);
  const int k = maps.front().k;
  parallel_for(std::size_t(count), [&](std::size_t i) {
    for (int attempt = 0;; ++attempt) {
      Rng rng(seed, stream::tagged(stream::kMeasure, i) ^ mix64(0x900d + attempt));
      MeasureSample s;
      s.depth = depth;
      s.branch_trace.reserve(depth + 1);
      try {
        ProjPoint x = fs_uniform_point(k, rng);
        for (int step = depth; step >= 0; --step) {
          const RationalMap& f = maps[step];
          std::vector<ProjPoint> fiber =
              (k == 1) ? univariate_preimages(f, x) : multivariate_preimages(f, x);
          const int branch = int(rng.next_u64() % fiber.size());
          s.branch_trace.push_back(branch);
          x = fiber[branch];
        }
        s.point = x;
        out[i] = std::move(s);
        return;
      } catch (const TrackingFailure&) {
        if (attempt >= 10) throw;
      }
    }
  });
  return out;
}

// ---------------------------------------------------------------------------
// Invariance bench:  f_* mu(f) = mu(F(f)) at sample level.

struct InvarianceRow {
  std::string observable;
  double discrepancy = 0.0;
  double stderr_ = 0.0;
};

inline std::vector<InvarianceRow> invariance_test(const RationalMap& f,
                                                  const std::vector<MeasureSample>& mu_f,
                                                  const std::vector<MeasureSample>& mu_Ff,
                                                  const std::vector<Observable>& observables) {
  std::vector<ProjPoint> pushed(mu_f.size());
  parallel_for(mu_f.size(),
               [&](std::size_t i) { pushed[i] = evaluate(f, mu_f[i].point).point; });

  std::vector<InvarianceRow> rows;
  rows.reserve(observables.size());
  std::vector<double> lhs(mu_f.size()), rhs(mu_Ff.size());
  for (const auto& obs : observables) {
    for (std::size_t i = 0; i < pushed.size(); ++i) lhs[i] = obs.value(pushed[i]);
    for (std::size_t i = 0; i < mu_Ff.size(); ++i) rhs[i] = obs.value(mu_Ff[i].point);
    const auto a = mean_stderr(lhs);
    const auto b = mean_stderr(rhs);
    rows.push_back({obs.id, std::abs(a.mean - b.mean),
                    std::sqrt(a.stderr_ * a.stderr_ + b.stderr_ * b.stderr_)});
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Sampling the skew-product measure alpha on X = P^N x P^k.

struct AlphaSample {
  RationalMap map;
  ProjPoint point;
};

// Pairs (f, x) with f ~ Lambda and x one mu(f)-point sampled at the given
// depth along f's own forward extension; pairs are independent across index.
inline std::vector<AlphaSample> alpha_sample(const DriverSpec& spec, int depth, int count,
                                             std::uint64_t seed) {
  const auto draws = sample_lambda_draws(spec, seed, count);
  std::vector<AlphaSample> out(count);
  parallel_for(std::size_t(count), [&](std::size_t i) {
    const auto seq = generate_sequence(spec, draws[i].continuation, depth);
    const auto ms = measure_sample(seq, depth, 1, mix64(seed ^ (0x600d + i)));
    out[i] = {seq.front(), ms.front().point};
  });
  return out;
}

}  // namespace randgreen
