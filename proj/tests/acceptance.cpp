// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "butterfly.hpp"
#include "walign/alignment.hpp"
#include "walign/euclidean.hpp"
#include "walign/measures.hpp"
#include "walign/ot.hpp"

using namespace walign;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Instance {
  DiscreteMeasure mu, nu;
  CostTensor ct;
};

Vector simplex(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0.1, 1.0);
  Vector w(n);
  for (int i = 0; i < n; ++i) w[i] = u(rng);
  return w / w.sum();
}

Matrix gaussian(std::mt19937_64& rng, int r, int c) {
  std::normal_distribution<double> g;
  Matrix m(r, c);
  for (int i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}

Matrix stiefel(std::mt19937_64& rng, int n, int d) {
  Eigen::HouseholderQR<Matrix> qr(gaussian(rng, n, d));
  return qr.householderQ() * Matrix::Identity(n, d);
}

std::vector<Instance> duality_instances() {
  std::mt19937_64 rng(20240611);
  std::uniform_int_distribution<int> size(5, 30), thetas(2, 12);
  std::uniform_real_distribution<double> cost(0, 10), pen(0, 1);
  std::vector<Instance> out;
  for (int t = 0; t < 50; ++t) {
    const int n = size(rng), m = size(rng), l = thetas(rng);
    std::vector<double> v(static_cast<std::size_t>(n) * m * l), r(static_cast<std::size_t>(l));
    for (double& x : v) x = cost(rng);
    for (double& x : r) x = pen(rng);
    out.push_back({DiscreteMeasure(Matrix::Zero(1, n), simplex(rng, n)),
                   DiscreteMeasure(Matrix::Zero(1, m), simplex(rng, m)), CostTensor(n, m, l, std::move(v), std::move(r))});
  }
  return out;
}

double w2(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  return std::sqrt(std::max(0.0, wasserstein(a.weight_span(), b.weight_span(),
                                             cost_matrix(a, b, CostSpec::squared_euclidean()))
                                     .value));
}

double circular_distance(double u, double v) {
  const double two_pi = 2 * std::numbers::pi;
  const double d = std::fmod(std::abs(u - v), two_pi);
  return std::min(d, two_pi - d);
}

int failures = 0;

void report(int id, const char* title, bool pass, const std::string& detail, double secs) {
  failures += !pass;
  std::printf("[%s] criterion %d, %s: %s (%.1f s)\n", pass ? "PASS" : "FAIL", id, title, detail.c_str(), secs);
  std::fflush(stdout);
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

struct Solved {
  AlignmentDual dual;
  RelaxedPrimal relaxed;
  BruteForce brute;
};

}  // namespace

int main() {
  // 1-3 share the 50 random instances.
  auto t0 = Clock::now();
  const auto instances = duality_instances();
  std::vector<Solved> solved;
  solved.reserve(instances.size());
  double worst_dr = 0, worst_db = 0, worst_rb = 0;
  int tight = 0;
  for (const auto& inst : instances) {
    Solved s{solve_dual(inst.mu, inst.nu, inst.ct), solve_relaxed_primal(inst.mu, inst.nu, inst.ct),
             brute_force(inst.mu, inst.nu, inst.ct)};
    const double dr = std::abs(s.dual.value - s.relaxed.value);
    const double db = std::abs(s.dual.value - s.brute.value);
    const double rb = std::abs(s.relaxed.value - s.brute.value);
    worst_dr = std::max(worst_dr, dr), worst_db = std::max(worst_db, db), worst_rb = std::max(worst_rb, rb);
    tight += dr <= 1e-7 && db <= 1e-7 && rb <= 1e-7;
    solved.push_back(std::move(s));
  }
  report(1, "duality tightness", tight == 50,
         std::to_string(tight) + "/50 agree pairwise; worst |dual-relaxed| " + num(worst_dr) + ", |dual-brute| " +
             num(worst_db) + ", |relaxed-brute| " + num(worst_rb),
         seconds_since(t0));

  t0 = Clock::now();
  int meets = 0, witnessed = 0;
  double worst_witness = 0;
  for (std::size_t t = 0; t < instances.size(); ++t) {
    const auto& inst = instances[t];
    const auto ex = extract_theta(solved[t].dual, inst.ct, inst.mu.weight_span());
    bool meet = false;
    for (int k : ex.k_star)
      meet = meet || std::find(solved[t].brute.k_star.begin(), solved[t].brute.k_star.end(), k) !=
                         solved[t].brute.k_star.end();
    meets += meet;
    witnessed += ex.slack_witness && ex.witness_defect <= 1e-6;
    worst_witness = std::max(worst_witness, ex.witness_defect);
  }
  report(2, "theta* extraction", meets == 50 && witnessed == 50,
         "argmin sets intersect on " + std::to_string(meets) + "/50; slack witness on " + std::to_string(witnessed) +
             "/50 (worst defect " + num(worst_witness) + ")",
         seconds_since(t0));

  t0 = Clock::now();
  {
    std::mt19937_64 rng(3);
    double worst = 0, lowest = kInf;
    int checked = 0;
    for (std::size_t t = 0; t < instances.size(); ++t) {
      const auto& inst = instances[t];
      std::uniform_int_distribution<int> pick(0, inst.ct.thetas() - 1);
      for (int r = 0; r < 3; ++r) {
        const auto g = gap_certificate(pick(rng), inst.mu, inst.nu, inst.ct, solved[t].dual.value);
        worst = std::max(worst, g.identity_defect());
        lowest = std::min({lowest, g.delta, g.g});
        ++checked;
      }
    }
    report(3, "gap identity", worst <= 1e-6 && lowest >= -1e-8,
           std::to_string(checked) + " certificates; worst identity defect " + num(worst) + ", min(delta, G) " +
               num(lowest),
           seconds_since(t0));
  }

  t0 = Clock::now();
  {
    std::mt19937_64 rng(4);
    double worst = 0;
    for (int t = 0; t < 20; ++t) {
      const auto mu = whiten(DiscreteMeasure::uniform(gaussian(rng, 3, 15 + t)));
      const auto nu = whiten(DiscreteMeasure(gaussian(rng, 2, 12 + t), simplex(rng, 12 + t)));
      const Matrix a = stiefel(rng, 3, 2);
      const TransformEntry e{"A", a.transpose(), Vector::Zero(2), 0, std::nullopt};
      const auto ot = wasserstein(mu.weight_span(), nu.weight_span(),
                                  cost_matrix(pushforward(mu, e), nu, CostSpec::squared_euclidean()));
      for (const auto& plan : {product_coupling(mu, nu), ot.plan}) {
        const auto u = updown_check(mu, nu, a, plan);
        worst = std::max(worst, std::abs(u.up_integral - u.down_integral - 1.0));
      }
    }
    report(4, "up/down equivalence", worst <= 1e-9, "40 couplings; worst |up - down - 1| " + num(worst),
           seconds_since(t0));
  }

  t0 = Clock::now();
  {
    std::mt19937_64 rng(5);
    double min_slack = kInf;
    for (int t = 0; t < 20; ++t) {
      const int n = 10 + t % 5, m = 8 + t % 4;
      const double eps = 0.02 + 0.02 * (t % 5);
      const auto mu = whiten(DiscreteMeasure::uniform(gaussian(rng, 3, n)));
      const auto nu = whiten(DiscreteMeasure::uniform(gaussian(rng, 2, m)));
      const auto mu2 = whiten(DiscreteMeasure::uniform(mu.points() + eps * gaussian(rng, 3, n)));
      const auto nu2 = whiten(DiscreteMeasure::uniform(nu.points() + eps * gaussian(rng, 2, m)));
      const Matrix a = stiefel(rng, 3, 2);
      Eigen::HouseholderQR<Matrix> qr(a + eps * gaussian(rng, 3, 2));
      const Matrix a2 = qr.householderQ() * Matrix::Identity(3, 2);
      const TransformEntry ea{"A", a.transpose(), Vector::Zero(2), 0, std::nullopt};
      const TransformEntry eb{"A'", a2.transpose(), Vector::Zero(2), 0, std::nullopt};
      const double lhs = std::abs(w2(pushforward(mu, ea), nu) - w2(pushforward(mu2, eb), nu2));
      const double c = std::sqrt((mu.points().colwise().squaredNorm() * mu.weights())(0));
      const double rhs = c * (a - a2).norm() + w2(mu, mu2) + w2(nu, nu2);
      min_slack = std::min(min_slack, rhs - lhs);
    }
    report(5, "stability bound", min_slack >= -1e-7, "20 quadruples; minimum slack " + num(min_slack),
           seconds_since(t0));
  }

  t0 = Clock::now();
  {
    Vector a(2);
    a << 1.0, 0.0;
    const double step = 2 * std::numbers::pi / 64;
    bool ok = true;
    double worst_angle = 0, worst_value = 0, slowest = 0;
    for (std::uint64_t seed : {7u, 8u, 9u, 10u, 11u}) {
      const auto run0 = Clock::now();
      const auto demo = mixture_demo(a, 2000, seed, 64);
      const double secs = seconds_since(run0);
      const double err = std::min(circular_distance(demo.theta_star_angle, std::numbers::pi / 2),
                                  circular_distance(demo.theta_star_angle, -std::numbers::pi / 2));
      worst_angle = std::max(worst_angle, err);
      worst_value = std::max(worst_value, demo.report.value);
      slowest = std::max(slowest, secs);
      ok = ok && err <= step + 1e-12 && demo.report.value <= 0.05 && secs < 180;
    }
    report(6, "mixture example", ok,
           "5 seeds; worst angle error " + num(worst_angle) + " rad (step " + num(step) + "), worst value " +
               num(worst_value) + ", slowest run " + num(slowest) + " s",
           seconds_since(t0));
  }

  t0 = Clock::now();
  {
    bool ok = true;
    double min_diff = kInf, max_zero = 0;
    for (double c : {0.5, 1.0, 2.0}) {
      double prev = mixture_F(c, -8.0);
      for (int s = 1; s <= 2000; ++s) {
        const double f = mixture_F(c, -8.0 + 16.0 * s / 2000.0);
        min_diff = std::min(min_diff, f - prev);
        prev = f;
      }
    }
    for (int s = 0; s <= 2000; ++s) max_zero = std::max(max_zero, std::abs(mixture_F(0.0, -8.0 + 16.0 * s / 2000.0)));
    ok = min_diff > 0 && max_zero <= 1e-9;
    report(7, "monotone F", ok, "minimum forward difference " + num(min_diff) + ", max |F| at c = 0 " + num(max_zero),
           seconds_since(t0));
  }

  t0 = Clock::now();
  {
    const double truth = 1.0;
    const Matrix shape = butterfly::curve(150);
    const auto mu = DiscreteMeasure::uniform(shape);
    const auto nu = DiscreteMeasure::uniform(butterfly::rotated_subsample(shape, 80, truth, 2024));
    const auto fam = rotation_grid(40);
    const auto ct = build_cost_tensor(mu, nu, fam, CostSpec::squared_euclidean());
    const auto rep = align(mu, nu, fam, ct);
    const double angle = *fam[rep.theta_star].angle;
    Matrix rot(2, 2);
    rot << std::cos(truth), -std::sin(truth), std::sin(truth), std::cos(truth);
    const TransformEntry at_truth{"truth", rot, Vector::Zero(2), 0, truth};
    const double reference = wasserstein(mu.weight_span(), nu.weight_span(),
                                         cost_matrix(pushforward(mu, at_truth), nu, CostSpec::squared_euclidean()))
                                 .value;
    // The curve has no rotational symmetry besides the identity.
    const double err = circular_distance(angle, truth);
    const double rel = std::abs(rep.value - reference) / reference;
    const double secs = seconds_since(t0);
    report(8, "shape registration", err <= 2 * std::numbers::pi / 40 && rel <= 0.10 && secs < 600,
           "theta* = " + num(angle) + " rad vs " + num(truth) + " (error " + num(err) + "); value " + num(rep.value) +
               " vs " + num(reference) + " at the true angle (relative " + num(rel) + "); " + rep.dual.method,
           secs);
  }

  t0 = Clock::now();
  {
    std::mt19937_64 rng(9);
    std::uniform_int_distribution<int> size(1, 12);
    std::uniform_real_distribution<double> u(-10, 10);
    double worst = 0;
    for (int t = 0; t < 100; ++t) {
      const int n = size(rng), m = size(rng);
      CostMatrix c(n, m);
      for (double& v : c.values) v = u(rng);
      std::vector<double> psi(static_cast<std::size_t>(m));
      for (double& v : psi) v = u(rng);
      const auto once = cbar_transform(psi, c);
      const auto thrice = cbar_transform(c_transform(once, c), c);
      for (int i = 0; i < n; ++i) worst = std::max(worst, std::abs(once[i] - thrice[i]));
    }
    report(9, "transform idempotence", worst <= 1e-12, "100 pairs; worst difference " + num(worst), seconds_since(t0));
  }

  std::printf(
      "[EXCLUDED] criterion 10, continuous-measure theorems, convergence rates and entropic behaviour: not "
      "reproducible at desk scale; covered only through the discrete checks above\n");

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
