#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "doctest.h"
#include "walign/errors.hpp"
#include "walign/lp.hpp"

using namespace walign;

namespace {

// Best objective over all basic feasible solutions of max c^T x, G x <= h,
// found by solving every n x n subsystem of active constraints.
double enumerate_vertices(const Eigen::MatrixXd& g, const Eigen::VectorXd& h, const Eigen::VectorXd& c) {
  const int rows = static_cast<int>(g.rows()), n = static_cast<int>(g.cols());
  double best = -kInf;
  std::vector<int> pick(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) pick[i] = i;
  for (;;) {
    Eigen::MatrixXd a(n, n);
    Eigen::VectorXd b(n);
    for (int r = 0; r < n; ++r) a.row(r) = g.row(pick[r]), b[r] = h[pick[r]];
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (lu.isInvertible()) {
      const Eigen::VectorXd x = lu.solve(b);
      if (((g * x - h).array() <= 1e-9).all()) best = std::max(best, c.dot(x));
    }
    int k = n - 1;
    while (k >= 0 && pick[k] == rows - n + k) --k;
    if (k < 0) break;
    ++pick[k];
    for (int r = k + 1; r < n; ++r) pick[r] = pick[r - 1] + 1;
  }
  return best;
}

}  // namespace

TEST_CASE("one-variable examples") {
  LpProblem p;
  p.sense = Sense::Maximize;
  p.add_variable(1.0);
  p.add_row({{0, 1.0}}, Relation::LessEqual, 1.0);
  const auto s = solve_lp(p);
  REQUIRE(s.status == LpStatus::Optimal);
  CHECK(s.primal[0] == doctest::Approx(1.0));
  CHECK(s.objective == doctest::Approx(1.0));
  CHECK(s.row_duals[0] == doctest::Approx(1.0));

  LpProblem q;
  q.sense = Sense::Maximize;
  q.add_variable(1.0);
  q.add_row({{0, 1.0}}, Relation::LessEqual, -1.0);
  CHECK(solve_lp(q).status == LpStatus::Infeasible);
  LpOptions dual;
  dual.route = LpRoute::Dual;
  CHECK(solve_lp(q, dual).status == LpStatus::Infeasible);

  LpProblem u;
  u.sense = Sense::Maximize;
  u.add_variable(1.0);
  u.add_row({{0, 1.0}}, Relation::GreaterEqual, 1.0);
  CHECK(solve_lp(u).status == LpStatus::Unbounded);
  CHECK(solve_lp(u, dual).status == LpStatus::Unbounded);
}

TEST_CASE("random bounded LPs match vertex enumeration") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> coef(-1.0, 1.0), pos(0.1, 1.0), rhs(1.0, 4.0);
  for (int t = 0; t < 40; ++t) {
    const int n = 4, m = 6;
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(m + n, n);
    Eigen::VectorXd h = Eigen::VectorXd::Zero(m + n), c(n);
    LpProblem p;
    p.sense = Sense::Maximize;
    for (int j = 0; j < n; ++j) c[j] = coef(rng), p.add_variable(c[j]);
    for (int r = 0; r < m; ++r) {
      std::vector<LpTerm> terms;
      for (int j = 0; j < n; ++j) {
        // The first rows bound every coordinate; the rest are arbitrary.
        g(r, j) = r < 2 ? pos(rng) : coef(rng);
        terms.push_back({j, g(r, j)});
      }
      h[r] = rhs(rng);
      p.add_row(std::move(terms), Relation::LessEqual, h[r]);
    }
    for (int j = 0; j < n; ++j) g(m + j, j) = -1.0;
    const double oracle = enumerate_vertices(g, h, c);
    for (LpRoute route : {LpRoute::Primal, LpRoute::Dual}) {
      LpOptions opt;
      opt.route = route;
      const auto s = solve_lp(p, opt);
      REQUIRE(s.status == LpStatus::Optimal);
      CHECK(std::abs(s.objective - oracle) <= 1e-9);
      const auto res = lp_residuals(p, s);
      CHECK(res.primal <= 1e-8);
      CHECK(res.dual <= 1e-8);
      CHECK(res.gap <= 1e-7 * (1 + std::abs(s.objective)));
      CHECK(res.complementarity <= 1e-7);
    }
  }
}

TEST_CASE("free, boxed and equality structure") {
  // min x0 - x1 + 2 x2, x0 free, -1 <= x1 <= 2, x2 >= 0,
  // x0 + x1 + x2 = 1, x0 - x2 >= -3.
  LpProblem p;
  p.add_variable(1.0, -kInf, kInf);
  p.add_variable(-1.0, -1.0, 2.0);
  p.add_variable(2.0);
  p.add_row({{0, 1}, {1, 1}, {2, 1}}, Relation::Equal, 1.0);
  p.add_row({{0, 1}, {2, -1}}, Relation::GreaterEqual, -3.0);
  for (LpRoute route : {LpRoute::Primal, LpRoute::Dual}) {
    LpOptions opt;
    opt.route = route;
    const auto s = solve_lp(p, opt);
    REQUIRE(s.status == LpStatus::Optimal);
    // x1 = 2 at its cap, x0 = -1, x2 = 0: objective -3.
    CHECK(s.objective == doctest::Approx(-3.0));
    CHECK(s.primal[0] == doctest::Approx(-1.0));
    CHECK(s.primal[1] == doctest::Approx(2.0));
    const auto res = lp_residuals(p, s);
    CHECK(res.gap <= 1e-9);
    CHECK(res.dual <= 1e-9);
  }
}

TEST_CASE("row duals are sensitivities of the objective") {
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> u(0.2, 1.0);
  for (int t = 0; t < 10; ++t) {
    LpProblem p;
    p.sense = t % 2 ? Sense::Maximize : Sense::Minimize;
    for (int j = 0; j < 3; ++j) p.add_variable(t % 2 ? u(rng) : -u(rng), 0.0, 10.0);
    for (int r = 0; r < 3; ++r) p.add_row({{0, u(rng)}, {1, u(rng)}, {2, u(rng)}}, Relation::LessEqual, 1.0 + r);
    const auto base = solve_lp(p);
    REQUIRE(base.status == LpStatus::Optimal);
    for (int r = 0; r < 3; ++r) {
      LpProblem bumped = p;
      bumped.rows[r].rhs += 1e-6;
      const auto s = solve_lp(bumped);
      CHECK((s.objective - base.objective) / 1e-6 == doctest::Approx(base.row_duals[r]).epsilon(1e-4));
    }
  }
}

TEST_CASE("degenerate transportation polytope terminates") {
  // Uniform 6x6 assignment: highly degenerate under Dantzig pricing.
  const int n = 6;
  LpProblem p;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) p.add_variable(std::abs(i - j) % 3);
  for (int i = 0; i < n; ++i) {
    std::vector<LpTerm> row, col;
    for (int j = 0; j < n; ++j) row.push_back({i * n + j, 1.0}), col.push_back({j * n + i, 1.0});
    p.add_row(row, Relation::Equal, 1.0 / n);
    p.add_row(col, Relation::Equal, 1.0 / n);
  }
  const auto s = solve_lp(p);
  REQUIRE(s.status == LpStatus::Optimal);
  CHECK(std::abs(s.objective) <= 1e-12);
}

TEST_CASE("invalid problems are rejected") {
  LpProblem empty;
  CHECK_THROWS_AS(solve_lp(empty), InputError);
  LpProblem bad;
  bad.add_variable(1.0, 2.0, 1.0);
  CHECK_THROWS_AS(solve_lp(bad), InputError);
  LpProblem ref;
  ref.add_variable(1.0);
  ref.add_row({{3, 1.0}}, Relation::LessEqual, 1.0);
  CHECK_THROWS_AS(solve_lp(ref), InputError);
  LpProblem nan;
  nan.add_variable(std::nan(""));
  CHECK_THROWS_AS(solve_lp(nan), InputError);
}

TEST_CASE("deterministic for a fixed input") {
  LpProblem p;
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int j = 0; j < 8; ++j) p.add_variable(u(rng), 0, 1);
  for (int r = 0; r < 5; ++r) {
    std::vector<LpTerm> terms;
    for (int j = 0; j < 8; ++j) terms.push_back({j, u(rng)});
    p.add_row(terms, Relation::LessEqual, 0.5);
  }
  const auto a = solve_lp(p), b = solve_lp(p);
  CHECK(a.primal == b.primal);
  CHECK(a.row_duals == b.row_duals);
  CHECK(a.iterations == b.iterations);
}
