#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "oracles.hpp"
#include "sensprune/counterexample.hpp"
#include "sensprune/error.hpp"

using namespace sensprune;

namespace {

void check_signs(const SpherePointSet& pts, std::size_t target, const std::vector<double>& x,
                 double beta) {
  const std::size_t d = pts.points.cols();
  CHECK(norm2(x) <= beta * (1 + 1e-12));
  CHECK(oracle::dot(pts.points.row(target).data(), x.data(), d) > 0.0);
  for (std::size_t q = 0; q < pts.points.rows(); ++q)
    if (q != target) CHECK(oracle::dot(pts.points.row(q).data(), x.data(), d) < 0.0);
}

SpherePointSet planar_four() {
  SpherePointSet s;
  s.alpha = 2.0;
  s.points = Matrix(4, 3);
  const double r = std::sqrt(3.0);
  for (std::size_t j = 0; j < 4; ++j) {
    const double a = j * std::numbers::pi / 2;
    s.points(j, 0) = r * std::cos(a);
    s.points(j, 1) = r * std::sin(a);
    s.points(j, 2) = 1.0;
  }
  return s;
}

}  // namespace

TEST_CASE("sphere points lie on the prescribed sphere") {
  for (std::size_t d : {3u, 5u, 10u}) {
    for (double alpha : {0.5, 2.0, 7.0}) {
      const auto s = build_sphere_points(16, d, alpha, d * 31 + 1);
      REQUIRE(s.points.rows() == 16);
      REQUIRE(s.points.cols() == d);
      std::set<std::vector<double>> seen;
      for (std::size_t j = 0; j < 16; ++j) {
        const auto row = s.points.row(j);
        CHECK(std::abs(norm2(row) - alpha) <= 1e-12 * std::max(1.0, alpha));
        CHECK(std::abs(row[d - 1] - alpha / 2) <= 1e-12);
        seen.insert(std::vector<double>(row.begin(), row.end()));
      }
      CHECK(seen.size() == 16);
    }
  }
  const auto s = build_sphere_points(5, 3, 2.0, 1);
  for (std::size_t j = 0; j < 5; ++j)
    CHECK(std::hypot(s.points(j, 0), s.points(j, 1)) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
  CHECK_THROWS_AS(build_sphere_points(4, 2, 1.0, 0), Error);
  CHECK_THROWS_AS(build_sphere_points(1, 3, 1.0, 0), Error);
  CHECK_THROWS_AS(build_sphere_points(4, 3, 0.0, 0), Error);
}

TEST_CASE("two antipodal points on the sphere are separable") {
  SpherePointSet s;
  s.alpha = 1.0;
  s.points = Matrix(2, 3, std::vector<double>{std::sqrt(3.0) / 2, 0, 0.5, -std::sqrt(3.0) / 2, 0, 0.5});
  for (std::size_t t = 0; t < 2; ++t) check_signs(s, t, separating_query(s, t, 1.0), 1.0);
}

TEST_CASE("four planar points") {
  const auto s = planar_four();
  const auto x = separating_query(s, 0, 1.0);
  check_signs(s, 0, x, 1.0);
  CHECK(norm2(x) == doctest::Approx(0.5));
  // Scaling keeps every sign.
  for (double f : {1e-6, 0.3, 40.0}) {
    std::vector<double> y = x;
    for (auto& v : y) v *= f;
    check_signs(s, 0, y, 40.0);
  }
  // Independent check that a separator exists: random search over directions.
  Rng rng(3);
  bool found = false;
  for (int t = 0; t < 20000 && !found; ++t) {
    const auto y = oracle::random_ball_point(rng, 3, 1.0);
    bool ok = oracle::dot(s.points.row(0).data(), y.data(), 3) > 0;
    for (std::size_t q = 1; q < 4 && ok; ++q) ok = oracle::dot(s.points.row(q).data(), y.data(), 3) < 0;
    found = ok;
  }
  CHECK(found);
  CHECK(norm2(separating_query(s, 1, 0.2)) == doctest::Approx(0.1));
  CHECK_THROWS_AS(separating_query(s, 4, 1.0), Error);
}

TEST_CASE("coincident points are degenerate") {
  SpherePointSet s = planar_four();
  for (std::size_t c = 0; c < 3; ++c) s.points(1, c) = s.points(0, c);
  try {
    separating_query(s, 0, 1.0);
    FAIL("expected DegenerateSet");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateSet);
  }
}

TEST_CASE("sign conditions hold on random instances") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    for (std::size_t n : {4u, 16u, 64u}) {
      for (std::size_t d : {3u, 10u}) {
        const auto s = build_sphere_points(n, d, 1.0 + seed % 3, seed * 100 + n + d);
        for (std::size_t t = 0; t < n; ++t) check_signs(s, t, separating_query(s, t, 0.7), 0.7);
      }
    }
  }
}

TEST_CASE("every proper subset misses by a ratio of one") {
  const auto s = planar_four();
  const std::vector<std::vector<std::size_t>> subsets{{}, {1}, {1, 2, 3}, {0, 2}, {3}};
  Rng rng(9);
  for (const auto& sub : subsets) {
    for (const auto& phi : {Activation::relu(), Activation::binary_step()}) {
      std::vector<double> u(sub.size());
      for (auto& v : u) v = 10 * rng.uniform();
      const auto w = multiplicative_violation(s, sub, phi, 1.0, u);
      CHECK(std::find(sub.begin(), sub.end(), w.omitted) == sub.end());
      CHECK(w.coreset_sum == 0.0);
      CHECK(w.full_sum > 0.0);
      CHECK(std::abs(w.ratio - 1.0) <= 1e-9);
      for (std::size_t o = 0; o < 4; ++o) {
        if (std::find(sub.begin(), sub.end(), o) != sub.end()) continue;
        CHECK(std::abs(violation_for(s, sub, o, phi, 1.0, u).ratio - 1.0) <= 1e-9);
      }
    }
  }
}

TEST_CASE("activations outside the hypothesis and bad subsets are rejected") {
  const auto s = planar_four();
  const std::vector<std::size_t> sub{0};
  CHECK(Activation::softplus().eval(-1.0) == doctest::Approx(std::log1p(std::exp(-1.0))));
  CHECK(Activation::softplus().eval(-1.0) > 0.0);
  for (const auto& phi : {Activation::softplus(), Activation::sigmoid(), Activation::gauss(),
                          Activation::soft_clip(2.0)}) {
    try {
      multiplicative_violation(s, sub, phi, 1.0);
      FAIL("expected InvalidActivation");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InvalidActivation);
    }
  }
  const auto code_of = [&](std::vector<std::size_t> subset) {
    try {
      multiplicative_violation(s, subset, Activation::relu(), 1.0);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::IoError;
  };
  CHECK(code_of({0, 1, 2, 3}) == ErrorCode::InvalidSubset);
  CHECK(code_of({0, 0}) == ErrorCode::InvalidSubset);
  CHECK(code_of({7}) == ErrorCode::InvalidSubset);
  CHECK_THROWS_AS(violation_for(s, sub, 0, Activation::relu(), 1.0), Error);
}
