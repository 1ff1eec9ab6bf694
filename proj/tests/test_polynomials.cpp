#include <catch2/catch_amalgamated.hpp>

#include "randgreen/polynomials.hpp"
#include "randgreen/rng.hpp"

using namespace randgreen;
using Catch::Approx;

TEST_CASE("exponent enumeration matches the stars-and-bars count") {
  CHECK(exponents_of_degree(2, 2).size() == 3);
  CHECK(exponents_of_degree(3, 2).size() == 6);
  CHECK(exponents_of_degree(3, 3).size() == 10);
  for (const auto& e : exponents_of_degree(3, 3)) {
    int s = 0;
    for (int v : e) s += v;
    CHECK(s == 3);
  }
}

TEST_CASE("set_coeff rejects mismatched multi-indices") {
  HomPolynomial p(2, 2);
  CHECK_THROWS_AS(p.set_coeff({1, 0}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(p.set_coeff({1, 1, 0}, 1.0), std::invalid_argument);
}

TEST_CASE("evaluation is homogeneous of the stated degree") {
  Rng rng(23, 1);
  for (int trial = 0; trial < 20; ++trial) {
    const int nvars = 2 + int(rng.next_u64() % 2);
    const int degree = 2 + int(rng.next_u64() % 2);
    HomPolynomial p(nvars, degree);
    for (const auto& e : exponents_of_degree(nvars, degree))
      p.set_coeff(e, rng.complex_gaussian());

    CVec z(nvars);
    for (int i = 0; i < nvars; ++i) z[i] = rng.complex_gaussian();
    const std::complex<double> lambda = rng.complex_gaussian();

    const auto lhs = p.eval(z * lambda);
    const auto rhs = std::pow(lambda, degree) * p.eval(z);
    CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(rhs)));
  }
}

TEST_CASE("partial derivatives agree with central differences") {
  Rng rng(29, 2);
  HomPolynomial p(3, 3);
  for (const auto& e : exponents_of_degree(3, 3)) p.set_coeff(e, rng.complex_gaussian());

  CVec z(3);
  for (int i = 0; i < 3; ++i) z[i] = rng.complex_gaussian();
  const double h = 1e-6;
  for (int var = 0; var < 3; ++var) {
    CVec zp = z, zm = z;
    zp[var] += h;
    zm[var] -= h;
    const auto fd = (p.eval(zp) - p.eval(zm)) / (2.0 * h);
    CHECK(std::abs(fd - p.eval_partial(z, var)) < 1e-7);
  }
}

TEST_CASE("product of polynomials evaluates to the product of values") {
  Rng rng(31, 3);
  HomPolynomial a(2, 2), b(2, 3);
  for (const auto& e : exponents_of_degree(2, 2)) a.set_coeff(e, rng.complex_gaussian());
  for (const auto& e : exponents_of_degree(2, 3)) b.set_coeff(e, rng.complex_gaussian());
  const HomPolynomial ab = a * b;
  CHECK(ab.degree() == 5);
  for (int i = 0; i < 10; ++i) {
    CVec z(2);
    z << rng.complex_gaussian(), rng.complex_gaussian();
    const auto lhs = ab.eval(z);
    const auto rhs = a.eval(z) * b.eval(z);
    CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(rhs)));
  }
}

TEST_CASE("compose substitutes component polynomials") {
  // p(u, v) = u v,  args (x^2, y^2)  ->  x^2 y^2
  HomPolynomial p(2, 2);
  p.set_coeff({1, 1}, 1.0);
  HomPolynomial g0(2, 2), g1(2, 2);
  g0.set_coeff({2, 0}, 1.0);
  g1.set_coeff({0, 2}, 1.0);
  const auto c = compose(p, {g0, g1});
  CHECK(c.degree() == 4);
  CHECK(std::abs(c.coeff({2, 2}) - 1.0) < 1e-14);

  Rng rng(37, 4);
  for (int i = 0; i < 10; ++i) {
    CVec z(2);
    z << rng.complex_gaussian(), rng.complex_gaussian();
    CVec w(2);
    w << g0.eval(z), g1.eval(z);
    CHECK(std::abs(c.eval(z) - p.eval(w)) < 1e-10 * std::max(1.0, std::abs(p.eval(w))));
  }
}
