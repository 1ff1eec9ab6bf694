#pragma once

#include <complex>
#include <map>
#include <vector>

#include "randgreen/projective.hpp"

namespace randgreen {

// Exponent multi-index over k+1 variables.
using MultiIndex = std::vector<int>;

namespace detail {
inline void enumerate_exponents(int nvars, int degree, MultiIndex& prefix,
                                std::vector<MultiIndex>& out) {
  if (int(prefix.size()) == nvars - 1) {
    prefix.push_back(degree);
    out.push_back(prefix);
    prefix.pop_back();
    return;
  }
  for (int e = degree; e >= 0; --e) {
    prefix.push_back(e);
    enumerate_exponents(nvars, degree - e, prefix, out);
    prefix.pop_back();
  }
}
}  // namespace detail

// All multi-indices of the given total degree, in graded-lexicographic order.
inline std::vector<MultiIndex> exponents_of_degree(int nvars, int degree) {
  std::vector<MultiIndex> out;
  MultiIndex prefix;
  detail::enumerate_exponents(nvars, degree, prefix, out);
  return out;
}

inline long long binomial(int n, int r) {
  if (r < 0 || r > n) return 0;
  long long acc = 1;
  for (int i = 1; i <= r; ++i) acc = acc * (n - r + i) / i;
  return acc;
}

// Homogeneous polynomial in nvars variables.  Terms are stored sparsely;
// every stored exponent sums exactly to the degree.
class HomPolynomial {
 public:
  HomPolynomial(int nvars, int degree) : nvars_(nvars), degree_(degree) {}

  int nvars() const { return nvars_; }
  int degree() const { return degree_; }

  void set_coeff(const MultiIndex& exp, std::complex<double> c) {
    int sum = 0;
    for (int e : exp) sum += e;
    if (int(exp.size()) != nvars_ || sum != degree_)
      throw std::invalid_argument("multi-index does not match degree");
    terms_[exp] = c;
  }

  std::complex<double> coeff(const MultiIndex& exp) const {
    const auto it = terms_.find(exp);
    return it == terms_.end() ? std::complex<double>{0.0} : it->second;
  }

  const std::map<MultiIndex, std::complex<double>>& terms() const { return terms_; }

  std::complex<double> eval(const CVec& z) const {
    std::complex<double> acc = 0.0;
    for (const auto& [exp, c] : terms_) {
      std::complex<double> term = c;
      for (int i = 0; i < nvars_; ++i)
        for (int e = 0; e < exp[i]; ++e) term *= z[i];
      acc += term;
    }
    return acc;
  }

  // d/dz_var, evaluated at z.
  std::complex<double> eval_partial(const CVec& z, int var) const {
    std::complex<double> acc = 0.0;
    for (const auto& [exp, c] : terms_) {
      if (exp[var] == 0) continue;
      std::complex<double> term = c * double(exp[var]);
      for (int i = 0; i < nvars_; ++i) {
        const int e = (i == var) ? exp[i] - 1 : exp[i];
        for (int j = 0; j < e; ++j) term *= z[i];
      }
      acc += term;
    }
    return acc;
  }

  double coeff_sq_norm() const {
    double s = 0;
    for (const auto& [exp, c] : terms_) s += std::norm(c);
    return s;
  }

  void scale(std::complex<double> s) {
    for (auto& [exp, c] : terms_) c *= s;
  }

  friend HomPolynomial operator*(const HomPolynomial& a, const HomPolynomial& b) {
    HomPolynomial p(a.nvars_, a.degree_ + b.degree_);
    for (const auto& [ea, ca] : a.terms_) {
      for (const auto& [eb, cb] : b.terms_) {
        MultiIndex e(a.nvars_);
        for (int i = 0; i < a.nvars_; ++i) e[i] = ea[i] + eb[i];
        p.terms_[e] += ca * cb;
      }
    }
    return p;
  }

  friend HomPolynomial operator+(const HomPolynomial& a, const HomPolynomial& b) {
    HomPolynomial p = a;
    for (const auto& [e, c] : b.terms_) p.terms_[e] += c;
    return p;
  }

 private:
  int nvars_;
  int degree_;
  std::map<MultiIndex, std::complex<double>> terms_;
};

inline HomPolynomial hom_monomial(int nvars, const MultiIndex& exp,
                                  std::complex<double> c) {
  int deg = 0;
  for (int e : exp) deg += e;
  HomPolynomial p(nvars, deg);
  p.set_coeff(exp, c);
  return p;
}

// Substitution p(q_0, ..., q_{n-1}) for homogeneous q_i of equal degree.
// Test and composition utility; cost is exponential in the degree and only
// meant for desk-scale instances.
inline HomPolynomial compose(const HomPolynomial& p,
                             const std::vector<HomPolynomial>& args) {
  const int out_vars = args.front().nvars();
  const int out_deg = p.degree() * args.front().degree();
  HomPolynomial result(out_vars, out_deg);
  for (const auto& [exp, c] : p.terms()) {
    HomPolynomial term(out_vars, 0);
    term.set_coeff(MultiIndex(out_vars, 0), c);
    for (int i = 0; i < p.nvars(); ++i)
      for (int e = 0; e < exp[i]; ++e) term = term * args[i];
    result = result + term;
  }
  return result;
}

}  // namespace randgreen
