#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "walign/errors.hpp"
#include "walign/measures.hpp"

using namespace walign;

namespace {

// Inverse square root of a symmetric positive definite 2x2 matrix from the
// closed-form eigendecomposition.
Matrix inv_sqrt_2x2(double a, double b, double c) {
  const double mid = 0.5 * (a + c);
  const double rad = std::sqrt(0.25 * (a - c) * (a - c) + b * b);
  const double l1 = mid + rad, l2 = mid - rad;
  double v1x, v1y;
  if (std::abs(b) > 1e-300) {
    v1x = b, v1y = l1 - a;
  } else {
    v1x = a >= c ? 1.0 : 0.0, v1y = a >= c ? 0.0 : 1.0;
  }
  const double n1 = std::hypot(v1x, v1y);
  v1x /= n1, v1y /= n1;
  const double v2x = -v1y, v2y = v1x;
  Matrix out(2, 2);
  const double s1 = 1 / std::sqrt(l1), s2 = 1 / std::sqrt(l2);
  out << s1 * v1x * v1x + s2 * v2x * v2x, s1 * v1x * v1y + s2 * v2x * v2y, s1 * v1x * v1y + s2 * v2x * v2y,
      s1 * v1y * v1y + s2 * v2y * v2y;
  return out;
}

}  // namespace

TEST_CASE("new_measure") {
  const auto m = new_measure({{0, 0}, {1, 1}});
  CHECK(m.weights()[0] == 0.5);
  CHECK(m.weights()[1] == 0.5);
  const auto s = new_measure({{1}}, std::vector<double>{1.0});
  CHECK(s.size() == 1);
  CHECK(s.dim() == 1);
  CHECK_THROWS_AS(new_measure({{0}, {1}}, std::vector<double>{0.7, 0.2}), InputError);
  CHECK_THROWS_AS(new_measure({{0}, {1}}, std::vector<double>{1.2, -0.2}), InputError);
  CHECK_THROWS_AS(new_measure({{0, 1}, {1}}), InputError);
  CHECK_THROWS_AS(new_measure({}), InputError);
}

TEST_CASE("whiten") {
  SUBCASE("symmetric pair is already white") {
    const auto w = whiten(new_measure({{-1}, {1}}));
    CHECK(w.points()(0, 0) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(w.points()(0, 1) == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("idempotent") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    Matrix pts(3, 25);
    for (int i = 0; i < pts.size(); ++i) pts.data()[i] = g(rng) * (1 + i % 3);
    const auto once = whiten(DiscreteMeasure::uniform(pts));
    const auto twice = whiten(once);
    CHECK((once.points() - twice.points()).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK(whitening_defect(once) <= 1e-10);
  }
  SUBCASE("three points in the plane match the 2x2 closed form") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-2, 2);
    for (int t = 0; t < 20; ++t) {
      Matrix pts(2, 3);
      for (int i = 0; i < 6; ++i) pts.data()[i] = u(rng);
      Vector w(3);
      w << 0.2, 0.3, 0.5;
      const DiscreteMeasure m(pts, w);
      Vector mean = pts * w;
      Matrix centered = pts.colwise() - mean;
      double a = 0, b = 0, c = 0;
      for (int i = 0; i < 3; ++i) {
        a += w[i] * centered(0, i) * centered(0, i);
        b += w[i] * centered(0, i) * centered(1, i);
        c += w[i] * centered(1, i) * centered(1, i);
      }
      if (a * c - b * b < 1e-6) continue;
      const Matrix expected = inv_sqrt_2x2(a, b, c) * centered;
      CHECK((whiten(m).points() - expected).cwiseAbs().maxCoeff() <= 1e-10);
    }
  }
  SUBCASE("degenerate support") {
    CHECK_THROWS_AS(whiten(new_measure({{0, 0}, {1, 1}, {2, 2}})), DegenerateSupportError);
    CHECK_THROWS_AS(whiten(new_measure({{5}})), DegenerateSupportError);
  }
}

TEST_CASE("pushforward") {
  const auto m = new_measure({{1, 2}, {3, 4}}, std::vector<double>{0.25, 0.75});
  const TransformEntry proj{"p", (Matrix(1, 2) << 1, 0).finished(), Vector::Zero(1), 0.0, std::nullopt};
  const auto p = pushforward(m, proj);
  CHECK(p.dim() == 1);
  CHECK(p.points()(0, 0) == 1.0);
  CHECK(p.points()(0, 1) == 3.0);
  CHECK(p.weights() == m.weights());

  const TransformEntry id{"id", Matrix::Identity(2, 2), Vector::Zero(2), 0.0, std::nullopt};
  CHECK(pushforward(m, id).points() == m.points());

  const auto grid = rotation_grid(4);
  const auto r = pushforward(new_measure({{1, 0}}), grid[1]);
  CHECK(std::abs(r.points()(0, 0)) <= 1e-12);
  CHECK(std::abs(r.points()(1, 0) - 1.0) <= 1e-12);

  const auto dup = pushforward(new_measure({{1, 5}, {1, 7}}), proj);
  CHECK(dup.size() == 2);

  const TransformEntry wrong{"w", Matrix::Identity(3, 3), Vector::Zero(3), 0.0, std::nullopt};
  CHECK_THROWS_AS(pushforward(m, wrong), InputError);
}

TEST_CASE("build_cost_tensor") {
  const TransformFamily id1({{"id", Matrix::Identity(1, 1), Vector::Zero(1), 0.0, std::nullopt}});
  const auto zero = build_cost_tensor(new_measure({{0}}), new_measure({{0}}), id1, CostSpec::squared_euclidean());
  CHECK(zero(0, 0, 0) == 0.0);
  const auto four = build_cost_tensor(new_measure({{1}}), new_measure({{3}}), id1, CostSpec::squared_euclidean());
  CHECK(four(0, 0, 0) == 4.0);

  const TransformFamily proj({{"p", (Matrix(1, 2) << 1, 0).finished(), Vector::Zero(1), 0.0, std::nullopt}});
  const auto inner = build_cost_tensor(new_measure({{1, 1}}), new_measure({{2}}), proj, CostSpec::inner_product(-8));
  CHECK(inner(0, 0, 0) == -16.0);

  const auto p3 = build_cost_tensor(new_measure({{0}}), new_measure({{2}}), id1, CostSpec::power_distance(3));
  CHECK(p3(0, 0, 0) == doctest::Approx(8.0));

  CHECK_THROWS_AS(build_cost_tensor(new_measure({{0, 0}}), new_measure({{0}}), id1, CostSpec::squared_euclidean()),
                  InputError);
  CHECK_THROWS_AS(CostSpec::power_distance(0.5), InputError);
}

TEST_CASE("implicit and materialized tensors agree") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  Matrix x(2, 9), z(2, 7);
  for (int i = 0; i < x.size(); ++i) x.data()[i] = g(rng);
  for (int i = 0; i < z.size(); ++i) z.data()[i] = g(rng);
  const auto mu = DiscreteMeasure::uniform(x), nu = DiscreteMeasure::uniform(z);
  const auto fam = rotation_grid(6);
  for (const auto& cost : {CostSpec::squared_euclidean(), CostSpec::power_distance(1.5), CostSpec::inner_product(2)}) {
    const auto dense = build_cost_tensor(mu, nu, fam, cost);
    const auto lazy = build_cost_tensor(mu, nu, fam, cost, 0);
    CHECK(dense.materialized());
    CHECK_FALSE(lazy.materialized());
    std::vector<double> scratch;
    for (int k = 0; k < 6; ++k)
      for (int i = 0; i < 9; ++i) {
        const auto row = lazy.row(i, k, scratch);
        for (int j = 0; j < 7; ++j) {
          CHECK(dense(i, j, k) == doctest::Approx(lazy(i, j, k)).epsilon(1e-14));
          CHECK(row[j] == doctest::Approx(dense(i, j, k)).epsilon(1e-14));
        }
      }
  }
}

TEST_CASE("rotation_grid") {
  const auto g4 = rotation_grid(4);
  REQUIRE(g4.size() == 4);
  for (int k = 0; k < 4; ++k) {
    CHECK(*g4[k].angle == doctest::Approx(k * std::numbers::pi / 2));
    for (int e = 0; e < 4; ++e) {
      const double v = g4[k].matrix.data()[e];
      CHECK((v == 0.0 || v == 1.0 || v == -1.0));
    }
  }
  CHECK(rotation_grid(40).size() == 40);
  const auto g = rotation_grid(37);
  for (const auto& e : g.entries()) {
    CHECK((e.matrix.transpose() * e.matrix - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(std::abs(e.matrix.determinant() - 1.0) <= 1e-12);
    CHECK(e.penalty == 0.0);
    CHECK(e.offset.isZero());
  }
  CHECK_THROWS_AS(rotation_grid(0), InputError);
}

TEST_CASE("stiefel_validate") {
  CHECK(stiefel_validate(Matrix::Identity(4, 2)));
  for (double th : {0.0, 0.3, 2.0, -1.7}) CHECK(stiefel_validate((Matrix(2, 1) << std::cos(th), std::sin(th)).finished()));
  Matrix rep(3, 2);
  rep << 1, 1, 0, 0, 0, 0;
  CHECK_FALSE(stiefel_validate(rep));
  CHECK_THROWS_AS(stiefel_validate(Matrix::Identity(2, 3)), InputError);
}

TEST_CASE("igw_family") {
  const auto fam = igw_family({Matrix::Zero(2, 1), Matrix::Identity(2, 1), 2.0 * Matrix::Identity(2, 2).leftCols(1)});
  CHECK(fam[0].penalty == 0.0);
  CHECK(fam[1].penalty == 8.0);
  CHECK(fam[2].penalty == 32.0);
  CHECK(fam[1].matrix.rows() == 1);
  CHECK(fam[1].matrix.cols() == 2);
  const auto sq = igw_family({2.0 * Matrix::Identity(2, 2)});
  CHECK(sq[0].penalty == 64.0);
  CHECK_THROWS_AS(igw_family({}), InputError);
  const auto m = pushforward(new_measure({{3, 4}}), fam[0]);
  CHECK(m.points()(0, 0) == 0.0);
}

TEST_CASE("penalties and composition") {
  const auto fam = rotation_grid(3);
  const std::vector<double> pen{0.1, 0.2, 0.3};
  const auto pf = fam.with_penalties(pen);
  CHECK(pf.penalties() == pen);
  CHECK_THROWS_AS(fam.with_penalties(std::vector<double>{1.0}), InputError);
  const auto proj = pf.composed_with((Matrix(1, 2) << 1, 0).finished());
  CHECK(proj.out_dim() == 1);
  CHECK(proj[2].penalty == 0.3);
  CHECK(proj[1].label == fam[1].label);
}
