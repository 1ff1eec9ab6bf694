#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <vector>

#include "randgreen/polynomials.hpp"
#include "randgreen/projective.hpp"
#include "randgreen/rng.hpp"

namespace randgreen {

// A degree-d self-map of P^k as k+1 homogeneous polynomials.  The full
// coefficient vector is normalized to Euclidean norm 1, which fixes the
// representative of the map as a point of the parameter space P^N and makes
// log||f(Z)|| <= 0 on the unit sphere (Cauchy–Schwarz against the monomial
// vector).
struct RationalMap {
  int k = 0;
  int d = 0;
  std::vector<HomPolynomial> components;
  double coeff_norm = 0.0;  // norm of the raw coefficient vector, diagnostic
};

inline RationalMap make_rational_map(std::vector<HomPolynomial> components) {
  RationalMap f;
  f.k = components.front().nvars() - 1;
  f.d = components.front().degree();
  double sq = 0;
  for (const auto& p : components) sq += p.coeff_sq_norm();
  f.coeff_norm = std::sqrt(sq);
  if (f.coeff_norm < 1e-300) throw ZeroVector{};
  for (auto& p : components) p.scale(1.0 / f.coeff_norm);
  f.components = std::move(components);
  return f;
}

// dim of the parameter space P^N:  N = (k+1) C(d+k, k) - 1.
inline long long param_dimension(int k, int d) {
  return (long long)(k + 1) * binomial(d + k, k) - 1;
}

inline CVec eval_lift(const RationalMap& f, const CVec& z) {
  CVec w(f.k + 1);
  for (int i = 0; i <= f.k; ++i) w[i] = f.components[i].eval(z);
  return w;
}

struct EvalResult {
  ProjPoint point;
  double lognorm;  // log ||f~(Z)|| for the unit lift Z
};

inline EvalResult evaluate(const RationalMap& f, const ProjPoint& x) {
  const CVec w = eval_lift(f, x.coords);
  const double n = w.norm();
  if (n < 1e-300) throw IndeterminacyHit("evaluate: orbit hit an indeterminacy point");
  return {ProjPoint{w / n}, std::log(n)};
}

// Jacobian of the lift, (k+1) x (k+1).
inline CMat jacobian_lift(const RationalMap& f, const CVec& z) {
  CMat J(f.k + 1, f.k + 1);
  for (int i = 0; i <= f.k; ++i)
    for (int j = 0; j <= f.k; ++j) J(i, j) = f.components[i].eval_partial(z, j);
  return J;
}

// Matrix of the Fubini–Study differential of f at x, from the given frame at
// x to the deterministic frame at f(x):  v -> P_{W^perp}(Df~(Z) v) / ||W~||
// restricted to Z^perp, written in the output frame's coordinates.
inline CMat fs_jacobian(const RationalMap& f, const ProjPoint& x,
                        const TangentFrame& frame) {
  const CVec w_raw = eval_lift(f, x.coords);
  const double wn = w_raw.norm();
  if (wn < 1e-300) throw IndeterminacyHit("fs_jacobian: indeterminacy point");
  const ProjPoint fx{w_raw / wn};
  const TangentFrame out = tangent_frame(fx);
  const CMat J = jacobian_lift(f, x.coords);
  CMat M(x.ambient_dim(), x.ambient_dim());
  for (int col = 0; col < frame.vectors.cols(); ++col) {
    CVec push = J * frame.vectors.col(col);
    push -= fx.coords * fx.coords.dot(push);  // project onto W^perp
    push /= wn;
    for (int row = 0; row < out.vectors.cols(); ++row)
      M(row, col) = out.vectors.col(row).dot(push);
  }
  return M;
}

// ---------------------------------------------------------------------------
// Distance to the degenerate set M.

// Sylvester resultant of two binary forms of equal degree d (coefficients in
// descending powers of the first variable).
inline std::complex<double> sylvester_resultant(const std::vector<std::complex<double>>& p,
                                                const std::vector<std::complex<double>>& q) {
  const int d = int(p.size()) - 1;
  const int n = 2 * d;
  CMat s = CMat::Zero(n, n);
  for (int row = 0; row < d; ++row)
    for (int j = 0; j <= d; ++j) s(row, row + j) = p[j];
  for (int row = 0; row < d; ++row)
    for (int j = 0; j <= d; ++j) s(d + row, row + j) = q[j];
  return s.determinant();
}

// Coefficients of component i as a dense binary-form list Z^d, Z^{d-1}W, ..., W^d.
inline std::vector<std::complex<double>> binary_coeffs(const RationalMap& f, int i) {
  std::vector<std::complex<double>> c(f.d + 1);
  for (int j = 0; j <= f.d; ++j) c[j] = f.components[i].coeff({f.d - j, j});
  return c;
}

namespace detail {

// min ||f~(Z)|| over the unit sphere by multistart projected gradient
// descent.  This is a proxy for the distance to M at k >= 2: it vanishes
// exactly on M but is not the projective distance.
inline double sphere_min_norm(const RationalMap& f, int starts = 64) {
  double best = std::numeric_limits<double>::infinity();
  Rng rng(0x5eedULL, 0xd157ULL);  // fixed stream: the proxy is deterministic
  for (int s = 0; s < starts; ++s) {
    CVec z(f.k + 1);
    for (int i = 0; i <= f.k; ++i) z[i] = rng.complex_gaussian();
    z /= z.norm();
    double value = eval_lift(f, z).squaredNorm();
    double step = 0.5;
    for (int iter = 0; iter < 400; ++iter) {
      const CVec w = eval_lift(f, z);
      const CMat J = jacobian_lift(f, z);
      CVec grad = J.adjoint() * w;            // Wirtinger gradient of ||f~||^2
      grad -= z * z.dot(grad);                // tangent projection
      const double gn = grad.norm();
      if (gn < 1e-14) break;
      bool moved = false;
      while (step > 1e-12) {
        CVec cand = z - step * grad;
        cand /= cand.norm();
        const double cand_value = eval_lift(f, cand).squaredNorm();
        if (cand_value < value - 1e-4 * step * gn * gn) {
          z = cand;
          value = cand_value;
          moved = true;
          step = std::min(step * 2.0, 0.5);
          break;
        }
        step *= 0.5;
      }
      if (!moved || step <= 1e-12) break;
      if (value < 1e-30) break;
    }
    best = std::min(best, value);
  }
  return std::sqrt(std::max(0.0, best));
}

}  // namespace detail

// k = 1: |Res(P, Q)|^{1/(2d)} of the normalized components (exact criterion).
// k >= 2: min_{||Z||=1} ||f~(Z)||^{1/d}, a zero-iff-degenerate proxy.
inline double distance_to_degenerate(const RationalMap& f) {
  if (f.k == 1) {
    const auto res = sylvester_resultant(binary_coeffs(f, 0), binary_coeffs(f, 1));
    return std::pow(std::abs(res), 1.0 / (2.0 * f.d));
  }
  return std::pow(detail::sphere_min_norm(f), 1.0 / double(f.d));
}

}  // namespace randgreen
