#include <catch2/catch_amalgamated.hpp>

#include "randgreen/projective.hpp"

using namespace randgreen;
using Catch::Approx;

namespace {
CVec cvec2(std::complex<double> a, std::complex<double> b) {
  CVec v(2);
  v << a, b;
  return v;
}
}  // namespace

TEST_CASE("normalize scales to unit norm") {
  const auto p = normalize(cvec2(2.0, 0.0));
  CHECK(std::abs(p.coords[0] - 1.0) < 1e-12);
  CHECK(std::abs(p.coords[1]) < 1e-12);

  const auto q = normalize(cvec2(1.0, 1.0));
  CHECK(std::abs(q.coords[0] - 1.0 / std::sqrt(2.0)) < 1e-12);
  CHECK(std::abs(q.coords[1] - 1.0 / std::sqrt(2.0)) < 1e-12);
}

TEST_CASE("normalize is idempotent") {
  Rng rng(7, 1);
  for (int i = 0; i < 50; ++i) {
    const auto p = fs_uniform_point(2, rng);
    const auto q = normalize(p.coords);
    CHECK((p.coords - q.coords).norm() < 1e-14);
    CHECK(p.coords.norm() == Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("normalize rejects the zero vector") {
  CHECK_THROWS_AS(normalize(cvec2(0.0, 0.0)), ZeroVector);
}

TEST_CASE("fs_distance reference values") {
  const auto e0 = normalize(cvec2(1.0, 0.0));
  const auto e1 = normalize(cvec2(0.0, 1.0));
  const auto diag = normalize(cvec2(1.0, 1.0));
  CHECK(fs_distance(e0, e0) == Approx(0.0).margin(1e-12));
  CHECK(fs_distance(e0, e1) == Approx(M_PI / 2).margin(1e-12));
  // arccos(1/sqrt 2) by hand
  CHECK(fs_distance(e0, diag) == Approx(M_PI / 4).margin(1e-12));
}

TEST_CASE("fs_distance is symmetric, phase-invariant, and a metric") {
  Rng rng(11, 2);
  for (int i = 0; i < 100; ++i) {
    const auto a = fs_uniform_point(1, rng);
    const auto b = fs_uniform_point(1, rng);
    const auto c = fs_uniform_point(1, rng);
    const double dab = fs_distance(a, b);
    CHECK(dab == Approx(fs_distance(b, a)).margin(1e-14));
    CHECK(dab <= M_PI / 2 + 1e-14);
    // rephasing the lift changes nothing
    const auto phase = std::polar(1.0, rng.uniform(0.0, 6.28));
    CHECK(fs_distance(ProjPoint{a.coords * phase}, b) == Approx(dab).margin(1e-12));
    // triangle inequality
    CHECK(dab <= fs_distance(a, c) + fs_distance(c, b) + 1e-12);
  }
}

TEST_CASE("tangent frames are orthonormal and orthogonal to the base") {
  Rng rng(13, 3);
  for (int k : {1, 2, 3}) {
    for (int i = 0; i < 30; ++i) {
      const auto x = fs_uniform_point(k, rng);
      const auto frame = tangent_frame(x);
      const CMat gram = frame.vectors.adjoint() * frame.vectors;
      CHECK((gram - CMat::Identity(k, k)).norm() < 1e-10);
      for (int j = 0; j < k; ++j)
        CHECK(std::abs(x.coords.dot(frame.vectors.col(j))) < 1e-10);
    }
  }
}

TEST_CASE("tangent frame does not depend on the lift's phase") {
  Rng rng(17, 4);
  const auto x = fs_uniform_point(2, rng);
  const auto f1 = tangent_frame(x);
  const auto f2 = tangent_frame(ProjPoint{x.coords * std::polar(1.0, 1.234)});
  CHECK((f1.vectors - f2.vectors).norm() < 1e-10);
}

TEST_CASE("fs_uniform_point covers both hemispheres evenly") {
  Rng rng(19, 5);
  int north = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i)
    if (std::norm(fs_uniform_point(1, rng).coords[0]) > 0.5) ++north;
  // binomial(n, 1/2): 5 sigma band
  CHECK(std::abs(north - n / 2) < 5.0 * std::sqrt(n / 4.0));
}
