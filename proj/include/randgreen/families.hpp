#pragma once

#include <complex>
#include <string>
#include <vector>

#include "randgreen/maps.hpp"
#include "randgreen/polynomials.hpp"

namespace randgreen {

// Parametrized families of candidate maps.  A family descriptor maps a
// complex parameter vector to a coefficient-normalized RationalMap.
//
//   power          no parameters, components Z_i^d
//   quadratic      k=1, d=2, one parameter:  (Z^2 + c W^2, W^2)
//   cubic          k=1, d=3, one parameter:  (Z^3 + c W^3, W^3)
//   power-perturb  k+1 parameters:  Z_i^d + c_i Z_{(i+1) mod (k+1)}^d

inline int family_param_count(const std::string& family, int k) {
  if (family == "power") return 0;
  if (family == "quadratic" || family == "cubic") return 1;
  if (family == "power-perturb") return k + 1;
  throw std::invalid_argument("unknown family: " + family);
}

inline RationalMap make_family_map(const std::string& family, int k, int d,
                                   const std::vector<std::complex<double>>& params) {
  if (int(params.size()) != family_param_count(family, k))
    throw std::invalid_argument("family " + family + ": wrong parameter count");

  const int n = k + 1;
  auto axis = [&](int i, int deg) {
    MultiIndex e(n, 0);
    e[i] = deg;
    return e;
  };

  std::vector<HomPolynomial> comps;
  comps.reserve(n);

  if (family == "power") {
    for (int i = 0; i < n; ++i) comps.push_back(hom_monomial(n, axis(i, d), 1.0));
  } else if (family == "quadratic" || family == "cubic") {
    if (k != 1 || d != (family == "quadratic" ? 2 : 3))
      throw std::invalid_argument(family + " family requires k=1 and matching d");
    HomPolynomial top(n, d);
    top.set_coeff(axis(0, d), 1.0);
    top.set_coeff(axis(1, d), params[0]);
    comps.push_back(top);
    comps.push_back(hom_monomial(n, axis(1, d), 1.0));
  } else {  // power-perturb
    for (int i = 0; i < n; ++i) {
      HomPolynomial p(n, d);
      p.set_coeff(axis(i, d), 1.0);
      MultiIndex other = axis((i + 1) % n, d);
      p.set_coeff(other, p.coeff(other) + params[i]);
      comps.push_back(p);
    }
  }
  return make_rational_map(std::move(comps));
}

}  // namespace randgreen
