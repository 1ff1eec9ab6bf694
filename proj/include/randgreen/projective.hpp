#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>

#include "randgreen/errors.hpp"
#include "randgreen/rng.hpp"

namespace randgreen {

using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

// A point of P^k held as a unit-norm homogeneous coordinate vector.
// The representative phase is arbitrary; everything downstream is either
// phase-invariant or phase-covariant.
struct ProjPoint {
  CVec coords;

  int ambient_dim() const { return int(coords.size()) - 1; }
};

inline ProjPoint normalize(const CVec& raw) {
  const double n = raw.norm();
  if (n < 1e-300) throw ZeroVector{};
  return ProjPoint{raw / n};
}

// Fubini–Study distance arccos(|<a,b>|), in [0, pi/2].
inline double fs_distance(const ProjPoint& a, const ProjPoint& b) {
  const double c = std::abs(a.coords.dot(b.coords));
  return std::acos(std::min(1.0, c));
}

// sin of the FS distance: |a ^ b| for unit lifts.  Cheaper than fs_distance
// and monotone in it; used by proximity filters.
inline double chordal_distance(const ProjPoint& a, const ProjPoint& b) {
  const double c = std::min(1.0, std::abs(a.coords.dot(b.coords)));
  return std::sqrt(std::max(0.0, 1.0 - c * c));
}

// Orthonormal basis of the orthogonal complement of x in C^{k+1}, the
// tangent model at x.  Construction is deterministic in the projective
// point: drop the standard axis with the largest |coordinate| (ties to the
// smallest index) and Gram–Schmidt the remaining axes against the lift.
// The result is invariant under rephasing the lift.
struct TangentFrame {
  ProjPoint base;
  CMat vectors;  // (k+1) x k, orthonormal columns, each orthogonal to base
};

inline TangentFrame tangent_frame(const ProjPoint& x) {
  const int n = int(x.coords.size());
  int drop = 0;
  double best = -1.0;
  for (int i = 0; i < n; ++i) {
    const double m = std::abs(x.coords[i]);
    if (m > best + 1e-15) {
      best = m;
      drop = i;
    }
  }
  TangentFrame frame{x, CMat(n, n - 1)};
  int col = 0;
  for (int i = 0; i < n; ++i) {
    if (i == drop) continue;
    CVec v = CVec::Zero(n);
    v[i] = 1.0;
    v -= x.coords * x.coords.dot(v);
    for (int j = 0; j < col; ++j) {
      const CVec u = frame.vectors.col(j);
      v -= u * u.dot(v);
    }
    frame.vectors.col(col++) = v / v.norm();
  }
  return frame;
}

// FS-uniform point: complex gaussian vector, projectivized.
inline ProjPoint fs_uniform_point(int k, Rng& rng) {
  CVec z(k + 1);
  for (int i = 0; i <= k; ++i) z[i] = rng.complex_gaussian();
  return normalize(z);
}

}  // namespace randgreen
