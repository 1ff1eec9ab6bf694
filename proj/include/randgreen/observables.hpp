#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "randgreen/maps.hpp"
#include "randgreen/projective.hpp"

namespace randgreen {

// Smooth test functions on P^k, phase-invariant and bounded by 1.  All are
// built from the Hermitian monomials Z_i conj(Z_j) of a unit lift, so they
// are globally defined and C^infinity.
struct Observable {
  std::string id;
  std::function<double(const ProjPoint&)> value;
};

namespace detail {
inline std::complex<double> pair01(const ProjPoint& x) {
  return x.coords[0] * std::conj(x.coords[1]);
}
inline double bump_at(const ProjPoint& x, const ProjPoint& q, double width) {
  const double c = std::min(1.0, std::abs(x.coords.dot(q.coords)));
  return std::exp(-(1.0 - c * c) / width);
}
}  // namespace detail

inline std::vector<Observable> observable_library(int k) {
  CVec qa = CVec::Zero(k + 1), qb = CVec::Zero(k + 1);
  qa[0] = 1.0;
  qa[1] = 1.0;
  qb[0] = 1.0;
  qb[1] = std::complex<double>(0.0, 1.0);
  const ProjPoint pa = normalize(qa), pb = normalize(qb);
  return {
        {"coord_weight", [](const ProjPoint& x) { return std::norm(x.coords[0]); }},
        {"weight_diff",
         [](const ProjPoint& x) { return std::norm(x.coords[0]) - std::norm(x.coords[1]); }},
        {"corr_re", [](const ProjPoint& x) { return 2.0 * std::real(detail::pair01(x)); }},
        {"corr_im", [](const ProjPoint& x) { return 2.0 * std::imag(detail::pair01(x)); }},
        {"second_re",
         [](const ProjPoint& x) {
           const auto p = detail::pair01(x);
           return 4.0 * std::real(p * p);
         }},
        {"harmonic_mix",
         [](const ProjPoint& x) {
           const auto p = detail::pair01(x);
           return std::real(p) + 2.0 * std::real(p * p);
         }},
        {"bump_a", [pa](const ProjPoint& x) { return detail::bump_at(x, pa, 0.25); }},
        {"bump_b", [pb](const ProjPoint& x) { return detail::bump_at(x, pb, 0.25); }},
  };
}

inline Observable find_observable(int k, const std::string& id) {
  for (auto& obs : observable_library(k))
    if (obs.id == id) return obs;
  throw std::invalid_argument("unknown observable: " + id);
}

// Observables on the skew-product space X = P^N x P^k, taking the pair (f, x).
struct PairObservable {
  std::string id;
  std::function<double(const RationalMap&, const ProjPoint&)> value;
};

inline std::vector<PairObservable> pair_observable_library(int k) {
  return {
      {"fiber_corr_re",
       [k](const RationalMap&, const ProjPoint& x) {
         return find_observable(k, "corr_re").value(x);
       }},
      {"param_bump",
       [k](const RationalMap& f, const ProjPoint& x) {
         // couples the base coordinate (real part of the graded-first
         // coefficient of component 0) with a fiber bump
         const auto c = f.components[0].terms().begin()->second;
         return std::real(c) * find_observable(k, "bump_a").value(x);
       }},
  };
}

}  // namespace randgreen
