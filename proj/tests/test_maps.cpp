#include <catch2/catch_amalgamated.hpp>

#include "randgreen/families.hpp"
#include "randgreen/maps.hpp"

using namespace randgreen;
using Catch::Approx;

namespace {

CVec cvec2(std::complex<double> a, std::complex<double> b) {
  CVec v(2);
  v << a, b;
  return v;
}

RationalMap power_map(int k, int d) {
  return make_family_map("power", k, d, {});
}

RationalMap random_map(int k, int d, Rng& rng) {
  std::vector<HomPolynomial> comps;
  for (int i = 0; i <= k; ++i) {
    HomPolynomial p(k + 1, d);
    for (const auto& e : exponents_of_degree(k + 1, d)) p.set_coeff(e, rng.complex_gaussian());
    comps.push_back(std::move(p));
  }
  return make_rational_map(std::move(comps));
}

}  // namespace

TEST_CASE("coefficient vector is normalized and N matches the dimension formula") {
  Rng rng(41, 1);
  const auto f = random_map(2, 2, rng);
  double sq = 0;
  for (const auto& c : f.components) sq += c.coeff_sq_norm();
  CHECK(std::sqrt(sq) == Approx(1.0).margin(1e-12));

  CHECK(param_dimension(1, 2) == 5);    // 2*3 - 1
  CHECK(param_dimension(2, 2) == 17);   // 3*6 - 1
  CHECK(param_dimension(1, 3) == 7);    // 2*4 - 1
  CHECK(param_dimension(2, 3) == 29);   // 3*10 - 1
}

TEST_CASE("evaluate at the fixed point of the power map") {
  const auto f = power_map(1, 2);  // (Z^2, W^2)/sqrt 2
  const auto r = evaluate(f, normalize(cvec2(1.0, 0.0)));
  CHECK(std::abs(r.point.coords[0]) == Approx(1.0).margin(1e-12));
  CHECK(r.lognorm == Approx(std::log(1.0 / std::sqrt(2.0))).margin(1e-12));
}

TEST_CASE("evaluate at the diagonal point of the power map") {
  // f~(Z,W) = (Z^2, W^2)/sqrt2 at [1:1]/sqrt2: image (1,1)/(2 sqrt2), norm 1/2
  const auto f = power_map(1, 2);
  const auto r = evaluate(f, normalize(cvec2(1.0, 1.0)));
  CHECK(std::abs(r.point.coords[0] - r.point.coords[1]) < 1e-12);
  CHECK(r.lognorm == Approx(std::log(0.5)).margin(1e-12));
}

TEST_CASE("evaluate throws on indeterminacy points of degenerate maps") {
  // (Z^2, ZW): common zero at [0:1]
  HomPolynomial p(2, 2), q(2, 2);
  p.set_coeff({2, 0}, 1.0);
  q.set_coeff({1, 1}, 1.0);
  const auto f = make_rational_map({p, q});
  CHECK_THROWS_AS(evaluate(f, normalize(cvec2(0.0, 1.0))), IndeterminacyHit);
}

TEST_CASE("lognorm is nonpositive for coefficient-normalized maps") {
  Rng rng(43, 2);
  for (int i = 0; i < 50; ++i) {
    const auto f = random_map(1, 2, rng);
    const auto x = fs_uniform_point(1, rng);
    CHECK(evaluate(f, x).lognorm <= 1e-12);
  }
}

TEST_CASE("evaluate commutes with input scaling after projectivization") {
  Rng rng(47, 3);
  const auto f = random_map(2, 2, rng);
  const auto x = fs_uniform_point(2, rng);
  const auto lambda = std::polar(1.0, 2.1);
  const auto a = evaluate(f, x).point;
  const auto b = evaluate(f, ProjPoint{x.coords * lambda}).point;
  CHECK(chordal_distance(a, b) < 1e-12);
}

TEST_CASE("FS derivative of z^2 matches the closed form") {
  // |f'(z)| (1+|z|^2) / (1+|f(z)|^2) with f = z^2
  const auto f = power_map(1, 2);
  auto fs_deriv_at = [&](std::complex<double> z) {
    const auto x = normalize(cvec2(1.0, z));
    const CMat M = fs_jacobian(f, x, tangent_frame(x));
    return std::abs(M(0, 0));
  };
  auto closed_form = [](std::complex<double> z) {
    return 2.0 * std::abs(z) * (1.0 + std::norm(z)) / (1.0 + std::norm(z * z));
  };
  CHECK(fs_deriv_at(1.0) == Approx(2.0).margin(1e-10));
  CHECK(fs_deriv_at(0.0) == Approx(0.0).margin(1e-12));  // critical point
  Rng rng(53, 4);
  for (int i = 0; i < 25; ++i) {
    const std::complex<double> z = 2.0 * rng.complex_gaussian();
    CHECK(fs_deriv_at(z) == Approx(closed_form(z)).margin(1e-9));
  }
}

TEST_CASE("fs_jacobian singular values are invariant under lift rephasing") {
  Rng rng(59, 5);
  const auto f = random_map(2, 2, rng);
  const auto x = fs_uniform_point(2, rng);
  const auto M1 = fs_jacobian(f, x, tangent_frame(x));
  const ProjPoint xr{x.coords * std::polar(1.0, 0.7)};
  const auto M2 = fs_jacobian(f, xr, tangent_frame(xr));
  const auto s1 = M1.jacobiSvd().singularValues();
  const auto s2 = M2.jacobiSvd().singularValues();
  CHECK((s1 - s2).norm() < 1e-10);
}

TEST_CASE("cocycle chain rule: product of step Jacobians equals the composite Jacobian") {
  // k=1 exact route via symbolic composition
  Rng rng(61, 6);
  for (int trial = 0; trial < 10; ++trial) {
    const auto f = random_map(1, 2, rng);
    const auto g = random_map(1, 2, rng);
    const auto gf = make_rational_map(
        {compose(g.components[0], f.components), compose(g.components[1], f.components)});

    const auto x = fs_uniform_point(1, rng);
    const auto frame_x = tangent_frame(x);
    const auto fx = evaluate(f, x).point;
    const CMat J1 = fs_jacobian(f, x, frame_x);
    const CMat J2 = fs_jacobian(g, fx, tangent_frame(fx));
    const CMat Jc = fs_jacobian(gf, x, frame_x);
    // frames are shared at x and at g(f(x)); the middle frame cancels in the
    // product, so moduli must agree
    CHECK(std::abs(std::abs((J2 * J1)(0, 0)) - std::abs(Jc(0, 0))) < 1e-8);
  }
}

TEST_CASE("cocycle chain rule at k=2 against finite differences of the composition") {
  Rng rng(67, 7);
  const auto f = random_map(2, 2, rng);
  const auto g = random_map(2, 2, rng);
  const auto x = fs_uniform_point(2, rng);
  const auto frame_x = tangent_frame(x);
  const auto fx = evaluate(f, x).point;
  const CMat prod = fs_jacobian(g, fx, tangent_frame(fx)) * fs_jacobian(f, x, frame_x);

  // finite differences of the two-step normalized evaluation
  const double h = 1e-6;
  const ProjPoint gfx = evaluate(g, fx).point;
  const TangentFrame out = tangent_frame(gfx);
  CMat fd(2, 2);
  for (int col = 0; col < 2; ++col) {
    const CVec zp = x.coords + h * frame_x.vectors.col(col);
    const CVec zm = x.coords - h * frame_x.vectors.col(col);
    auto push = [&](const CVec& z) {
      CVec w = eval_lift(g, eval_lift(f, z));
      w /= w.norm();
      const auto ip = gfx.coords.dot(w);
      return CVec(w * (std::conj(ip) / std::abs(ip)));
    };
    const CVec diff = (push(zp) - push(zm)) / (2.0 * h);
    for (int row = 0; row < 2; ++row) fd(row, col) = out.vectors.col(row).dot(diff);
  }
  // FD only captures the holomorphic differential along real directions; the
  // imaginary part of the frame direction carries over by C-linearity
  CHECK((prod - fd).norm() < 2e-5 * std::max(1.0, prod.norm()));
}

TEST_CASE("distance to degeneracy, k=1 frozen values") {
  // (Z^2, W^2)/sqrt2: Sylvester determinant 1/4, distance (1/4)^(1/4) = 1/sqrt2
  CHECK(distance_to_degenerate(power_map(1, 2)) == Approx(1.0 / std::sqrt(2.0)).margin(1e-12));

  // (Z^2, ZW): shared root forces a zero resultant
  HomPolynomial p(2, 2), q(2, 2);
  p.set_coeff({2, 0}, 1.0);
  q.set_coeff({1, 1}, 1.0);
  CHECK(distance_to_degenerate(make_rational_map({p, q})) < 1e-12);
}

TEST_CASE("resultant consistency: zero distance iff the components share a root") {
  Rng rng(71, 8);
  for (int trial = 0; trial < 20; ++trial) {
    // build P, Q of degree 2 from explicit root pairs; share a root on odd trials
    const std::complex<double> r1 = rng.complex_gaussian();
    const std::complex<double> r2 = rng.complex_gaussian();
    const std::complex<double> r3 = rng.complex_gaussian();
    const std::complex<double> r4 = (trial % 2 == 1) ? r1 : rng.complex_gaussian();
    // P = (Z - r1 W)(Z - r2 W), Q = (Z - r4 W)(Z - r3 W)
    auto from_roots = [](std::complex<double> a, std::complex<double> b) {
      HomPolynomial p(2, 2);
      p.set_coeff({2, 0}, 1.0);
      p.set_coeff({1, 1}, -(a + b));
      p.set_coeff({0, 2}, a * b);
      return p;
    };
    const auto f = make_rational_map({from_roots(r1, r2), from_roots(r4, r3)});
    const double dist = distance_to_degenerate(f);
    const bool shares_root = trial % 2 == 1;
    if (shares_root)
      CHECK(dist < 1e-7);
    else
      CHECK(dist > 1e-6);
  }
}

TEST_CASE("distance proxy at k=2: diagonal power map against the sphere-minimum oracle") {
  // ||f~(Z)||^2 = (|Z|^4+|W|^4+|T|^4)/3 on the unit sphere is minimized at the
  // balanced point |Z|^2=|W|^2=|T|^2=1/3 (Lagrange), giving min||f~|| = 1/3 and
  // proxy value (1/3)^{1/2}.
  const auto f = power_map(2, 2);
  const double proxy = distance_to_degenerate(f);
  CHECK(proxy == Approx(1.0 / std::sqrt(3.0)).epsilon(1e-6));

  // dense-sampling oracle: no sphere point does better
  Rng rng(73, 9);
  double best = 1e9;
  for (int i = 0; i < 200000; ++i) {
    const auto x = fs_uniform_point(2, rng);
    best = std::min(best, eval_lift(f, x.coords).norm());
  }
  CHECK(proxy * proxy >= best - 1e-4);           // proxy^d is the claimed minimum
  CHECK(best >= proxy * proxy - 1e-4);           // and sampling cannot beat it
}

TEST_CASE("distance proxy vanishes for a degenerate k=2 map") {
  // components sharing the common zero [0:0:1]
  HomPolynomial a(3, 2), b(3, 2), c(3, 2);
  a.set_coeff({2, 0, 0}, 1.0);
  b.set_coeff({0, 2, 0}, 1.0);
  c.set_coeff({1, 1, 0}, 1.0);
  const auto f = make_rational_map({a, b, c});
  CHECK(distance_to_degenerate(f) < 1e-5);
}

TEST_CASE("derivative bound direction: opnorm below C * dist^-p for fitted C, p") {
  // inequality-direction check on the quadratic family: the FS-Jacobian norm
  // must not outgrow a power of 1/dist(f, M)
  Rng rng(79, 10);
  double worst_ratio = 0;
  const double p_exp = 5.0;
  for (int i = 0; i < 200; ++i) {
    const auto f = make_family_map("quadratic", 1, 2, {3.0 * rng.unit_disk()});
    const double dist = distance_to_degenerate(f);
    const auto x = fs_uniform_point(1, rng);
    const CMat M = fs_jacobian(f, x, tangent_frame(x));
    worst_ratio = std::max(worst_ratio, std::abs(M(0, 0)) * std::pow(dist, p_exp));
  }
  // fitted constant: generous but finite
  CHECK(worst_ratio < 1e3);
}
