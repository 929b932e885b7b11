#include "walign/validation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "walign/alignment.hpp"
#include "walign/errors.hpp"
#include "walign/euclidean.hpp"
#include "walign/io.hpp"
#include "walign/lp.hpp"
#include "walign/measures.hpp"
#include "walign/ot.hpp"

namespace walign {

namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

Matrix gaussian_matrix(Rng& rng, int rows, int cols) {
  std::normal_distribution<double> g;
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = g(rng);
  return m;
}

Vector random_weights(Rng& rng, int n) {
  Vector w(n);
  for (int i = 0; i < n; ++i) w[i] = uniform(rng, 0.2, 1.0);
  return w / w.sum();
}

DiscreteMeasure random_cloud(Rng& rng, int dim, int n, bool weighted = false) {
  Matrix pts = gaussian_matrix(rng, dim, n);
  if (!weighted) return DiscreteMeasure::uniform(std::move(pts));
  return DiscreteMeasure(std::move(pts), random_weights(rng, n));
}

Matrix random_stiefel(Rng& rng, int n, int d) {
  Eigen::HouseholderQR<Matrix> qr(gaussian_matrix(rng, n, d));
  return qr.householderQ() * Matrix::Identity(n, d);
}

struct Instance {
  DiscreteMeasure mu, nu;
  CostTensor ct;
};

// Random costs in [0, 10], penalties in [0, 1], random weights; the points are
// placeholders because the cost tensor is given directly.
Instance random_cost_instance(Rng& rng, int n, int m, int l) {
  std::vector<double> values(static_cast<std::size_t>(n) * m * l);
  for (double& v : values) v = uniform(rng, 0.0, 10.0);
  std::vector<double> pen(static_cast<std::size_t>(l));
  for (double& r : pen) r = uniform(rng, 0.0, 1.0);
  DiscreteMeasure mu(Matrix::Zero(1, n), random_weights(rng, n));
  DiscreteMeasure nu(Matrix::Zero(1, m), random_weights(rng, m));
  return {std::move(mu), std::move(nu), CostTensor(n, m, l, std::move(values), std::move(pen))};
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(3);
  s << std::scientific << v;
  return s.str();
}

struct Check {
  bool pass = true;
  double worst = 0.0;
  std::string note;
  void bound(double value, double limit) {
    worst = std::max(worst, value);
    if (!(value <= limit)) pass = false;
  }
  void require(bool ok, const std::string& why) {
    if (!ok && pass) note = why;
    pass = pass && ok;
  }
  std::string detail(const std::string& what) const {
    std::string d = what + " worst " + fmt(worst);
    if (!note.empty()) d += "; " + note;
    return d;
  }
};

using Property = std::function<std::pair<bool, std::string>(Rng&)>;

struct Entry {
  const char* module;
  const char* name;
  Property run;
};

std::vector<Entry> properties() {
  std::vector<Entry> list;

  // core_measures
  list.push_back({"core_measures", "whitening reaches mean 0 and covariance I within 1e-10", [](Rng& rng) {
                    Check c;
                    for (int t = 0; t < 20; ++t) {
                      const int dim = uniform_int(rng, 1, 4);
                      Matrix mix = gaussian_matrix(rng, dim, dim) + 2.0 * Matrix::Identity(dim, dim);
                      Matrix pts = mix * gaussian_matrix(rng, dim, uniform_int(rng, dim + 2, 40));
                      pts.colwise() += Vector::Constant(dim, uniform(rng, -5, 5));
                      const auto n = pts.cols();
                      c.bound(whitening_defect(whiten(DiscreteMeasure(pts, random_weights(rng, static_cast<int>(n))))), 1e-10);
                    }
                    return std::pair{c.pass, c.detail("defect")};
                  }});
  list.push_back({"core_measures", "pushforward preserves total mass exactly", [](Rng& rng) {
                    bool ok = true;
                    for (int t = 0; t < 20; ++t) {
                      const auto m = random_cloud(rng, 3, uniform_int(rng, 1, 30), true);
                      const TransformEntry e{"a", gaussian_matrix(rng, 2, 3), Vector::Zero(2), 0.0, std::nullopt};
                      ok = ok && pushforward(m, e).weights().sum() == m.weights().sum();
                    }
                    return std::pair{ok, std::string(ok ? "20 measures" : "mass changed")};
                  }});
  list.push_back({"core_measures", "squared-distance cost is symmetric in its arguments", [](Rng& rng) {
                    Check c;
                    const auto cost = CostSpec::squared_euclidean();
                    for (int t = 0; t < 200; ++t) {
                      const Vector y = gaussian_matrix(rng, 3, 1), z = gaussian_matrix(rng, 3, 1);
                      c.bound(std::abs(cost({y.data(), 3}, {z.data(), 3}) - cost({z.data(), 3}, {y.data(), 3})), 0.0);
                    }
                    return std::pair{c.pass, c.detail("asymmetry")};
                  }});
  list.push_back({"core_measures", "rotation grids pass the Stiefel check", [](Rng&) {
                    bool ok = true;
                    for (int l : {1, 2, 3, 4, 7, 40, 64}) {
                      const auto grid = rotation_grid(l);
                      for (const auto& e : grid.entries()) ok = ok && stiefel_validate(e.matrix);
                    }
                    return std::pair{ok, std::string("l in {1,2,3,4,7,40,64}")};
                  }});
  list.push_back({"core_measures", "power:2 tensor equals the squared-distance tensor within 1e-12", [](Rng& rng) {
                    Check c;
                    for (int t = 0; t < 5; ++t) {
                      const auto mu = random_cloud(rng, 2, 7), nu = random_cloud(rng, 2, 6);
                      const auto fam = rotation_grid(5);
                      const auto a = build_cost_tensor(mu, nu, fam, CostSpec::squared_euclidean());
                      const auto b = build_cost_tensor(mu, nu, fam, CostSpec::power_distance(2.0));
                      for (int k = 0; k < 5; ++k)
                        for (int i = 0; i < 7; ++i)
                          for (int j = 0; j < 6; ++j) c.bound(std::abs(a(i, j, k) - b(i, j, k)), 1e-12);
                    }
                    return std::pair{c.pass, c.detail("difference")};
                  }});

  // lp_solver
  list.push_back({"lp_solver", "optimal solutions satisfy duality and complementary slackness", [](Rng& rng) {
                    Check c;
                    for (int t = 0; t < 30; ++t) {
                      LpProblem p;
                      p.sense = t % 2 ? Sense::Maximize : Sense::Minimize;
                      const int n = uniform_int(rng, 2, 8), m = uniform_int(rng, 1, 10);
                      for (int j = 0; j < n; ++j) p.add_variable(uniform(rng, -1, 1), t % 3 ? 0.0 : -kInf, 5.0);
                      for (int r = 0; r < m; ++r) {
                        std::vector<LpTerm> terms;
                        for (int j = 0; j < n; ++j) terms.push_back({j, uniform(rng, -1, 1)});
                        p.add_row(std::move(terms), static_cast<Relation>(uniform_int(rng, 0, 2)), uniform(rng, -1, 3));
                      }
                      const auto s = solve_lp(p);
                      if (s.status != LpStatus::Optimal) continue;
                      const auto res = lp_residuals(p, s);
                      c.bound(res.primal, 1e-8);
                      c.bound(res.dual, 1e-8);
                      c.bound(res.gap / (1 + std::abs(s.objective)), 1e-7);
                      c.bound(res.complementarity, 1e-7);
                    }
                    return std::pair{c.pass, c.detail("residual")};
                  }});
  list.push_back({"lp_solver", "positive objective scaling keeps the returned point", [](Rng& rng) {
                    bool ok = true;
                    for (int t = 0; t < 20; ++t) {
                      LpProblem p;
                      const int n = uniform_int(rng, 2, 6);
                      for (int j = 0; j < n; ++j) p.add_variable(uniform(rng, -1, 1), 0.0, kInf);
                      for (int r = 0; r < 5; ++r) {
                        std::vector<LpTerm> terms;
                        for (int j = 0; j < n; ++j) terms.push_back({j, uniform(rng, 0.1, 1)});
                        p.add_row(std::move(terms), Relation::LessEqual, uniform(rng, 1, 3));
                      }
                      LpProblem scaled = p;
                      for (double& v : scaled.objective) v *= 3.5;
                      const auto a = solve_lp(p), b = solve_lp(scaled);
                      ok = ok && a.status == b.status && a.primal == b.primal;
                    }
                    return std::pair{ok, std::string(ok ? "20 LPs" : "point changed")};
                  }});

  // ot_discrete
  list.push_back({"ot_discrete", "weak and strong Kantorovich duality", [](Rng& rng) {
                    Check c;
                    for (int t = 0; t < 15; ++t) {
                      const int n = uniform_int(rng, 1, 12), m = uniform_int(rng, 1, 12);
                      CostMatrix cm(n, m);
                      for (double& v : cm.values) v = uniform(rng, 0, 5);
                      const Vector p = random_weights(rng, n), q = random_weights(rng, m);
                      const auto ot = wasserstein({p.data(), std::size_t(n)}, {q.data(), std::size_t(m)}, cm);
                      double dual = 0;
                      for (int i = 0; i < n; ++i) dual += ot.potentials.phi[i] * p[i];
                      for (int j = 0; j < m; ++j) dual += ot.potentials.psi[j] * q[j];
                      c.bound(std::abs(dual - ot.value), 1e-7);
                      std::vector<double> psi(static_cast<std::size_t>(m));
                      for (double& v : psi) v = uniform(rng, -3, 3);
                      const auto phi = cbar_transform(psi, cm);
                      double weak = 0;
                      for (int i = 0; i < n; ++i) weak += phi[i] * p[i];
                      for (int j = 0; j < m; ++j) weak += psi[j] * q[j];
                      c.bound(weak - ot.value, 1e-8);
                    }
                    return std::pair{c.pass, c.detail("duality defect")};
                  }});
  list.push_back({"ot_discrete", "c-bar c c-bar transform equals the c-bar transform", [](Rng& rng) {
                    Check c;
                    for (int t = 0; t < 50; ++t) {
                      const int n = uniform_int(rng, 1, 9), m = uniform_int(rng, 1, 9);
                      CostMatrix cm(n, m);
                      for (double& v : cm.values) v = uniform(rng, -5, 5);
                      std::vector<double> psi(static_cast<std::size_t>(m));
                      for (double& v : psi) v = uniform(rng, -5, 5);
                      const auto once = cbar_transform(psi, cm);
                      const auto thrice = cbar_transform(c_transform(once, cm), cm);
                      for (int i = 0; i < n; ++i) c.bound(std::abs(once[i] - thrice[i]), 1e-12);
                    }
                    return std::pair{c.pass, c.detail("difference")};
                  }});
  list.push_back({"ot_discrete", "square-root transport cost obeys the triangle inequality", [](Rng& rng) {
                    Check c;
                    const auto cost = CostSpec::squared_euclidean();
                    auto w2 = [&](const DiscreteMeasure& a, const DiscreteMeasure& b) {
                      return std::sqrt(std::max(
                          0.0, wasserstein(a.weight_span(), b.weight_span(), cost_matrix(a, b, cost)).value));
                    };
                    for (int t = 0; t < 10; ++t) {
                      const auto a = random_cloud(rng, 2, uniform_int(rng, 2, 10), true);
                      const auto b = random_cloud(rng, 2, uniform_int(rng, 2, 10), true);
                      const auto d = random_cloud(rng, 2, uniform_int(rng, 2, 10), true);
                      c.bound(w2(a, d) - w2(a, b) - w2(b, d), 1e-7);
                    }
                    return std::pair{c.pass, c.detail("violation")};
                  }});
  list.push_back({"ot_discrete", "stability under perturbation of measures and Stiefel maps", [](Rng& rng) {
                    Check c;
                    const auto cost = CostSpec::squared_euclidean();
                    auto w2 = [&](const DiscreteMeasure& a, const DiscreteMeasure& b) {
                      return std::sqrt(std::max(
                          0.0, wasserstein(a.weight_span(), b.weight_span(), cost_matrix(a, b, cost)).value));
                    };
                    for (int t = 0; t < 10; ++t) {
                      const auto mu = whiten(random_cloud(rng, 3, 12));
                      const auto nu = whiten(random_cloud(rng, 2, 10));
                      const double eps = uniform(rng, 0.01, 0.3);
                      const auto mu2 = whiten(DiscreteMeasure(mu.points() + eps * gaussian_matrix(rng, 3, 12), mu.weights()));
                      const auto nu2 = whiten(DiscreteMeasure(nu.points() + eps * gaussian_matrix(rng, 2, 10), nu.weights()));
                      const Matrix a = random_stiefel(rng, 3, 2);
                      Eigen::HouseholderQR<Matrix> qr(a + eps * gaussian_matrix(rng, 3, 2));
                      const Matrix a2 = qr.householderQ() * Matrix::Identity(3, 2);
                      const TransformEntry ea{"A", a.transpose(), Vector::Zero(2), 0, std::nullopt};
                      const TransformEntry eb{"A'", a2.transpose(), Vector::Zero(2), 0, std::nullopt};
                      const double lhs = std::abs(w2(pushforward(mu, ea), nu) - w2(pushforward(mu2, eb), nu2));
                      const double moment = std::sqrt((mu.points().colwise().squaredNorm() * mu.weights())(0));
                      c.bound(lhs - (moment * (a - a2).norm() + w2(mu, mu2) + w2(nu, nu2)), 1e-7);
                    }
                    return std::pair{c.pass, c.detail("bound violation")};
                  }});

  // alignment
  list.push_back({"alignment", "dual value equals the brute-force minimum over theta within 1e-7", [](Rng& rng) {
                    Check c;
                    for (int t = 0; t < 10; ++t) {
                      auto inst = random_cost_instance(rng, uniform_int(rng, 3, 8), uniform_int(rng, 3, 8),
                                                       uniform_int(rng, 2, 5));
                      const auto d = solve_dual(inst.mu, inst.nu, inst.ct);
                      const auto bf = brute_force(inst.mu, inst.nu, inst.ct);
                      c.bound(std::abs(d.value - bf.value), 1e-7);
                    }
                    return std::pair{c.pass, c.detail("|dual - brute force|")};
                  }});
  list.push_back({"alignment", "dual value equals the relaxed primal value within 1e-7", [](Rng& rng) {
                    Check c;
                    for (int t = 0; t < 10; ++t) {
                      auto inst = random_cost_instance(rng, uniform_int(rng, 3, 8), uniform_int(rng, 3, 8),
                                                       uniform_int(rng, 2, 5));
                      const auto d = solve_dual(inst.mu, inst.nu, inst.ct);
                      const auto rp = solve_relaxed_primal(inst.mu, inst.nu, inst.ct);
                      c.bound(std::abs(d.value - rp.value), 1e-7);
                    }
                    return std::pair{c.pass, c.detail("|dual - relaxed|")};
                  }});
  list.push_back({"alignment", "argmin of the I curve meets the brute-force argmin", [](Rng& rng) {
                    int hits = 0;
                    const int total = 10;
                    for (int t = 0; t < total; ++t) {
                      auto inst = random_cost_instance(rng, uniform_int(rng, 3, 8), uniform_int(rng, 3, 8),
                                                       uniform_int(rng, 2, 5));
                      const auto d = solve_dual(inst.mu, inst.nu, inst.ct);
                      const auto ex = extract_theta(d, inst.ct, inst.mu.weight_span());
                      const auto bf = brute_force(inst.mu, inst.nu, inst.ct);
                      bool meet = false;
                      for (int k : ex.k_star) meet = meet || std::count(bf.k_star.begin(), bf.k_star.end(), k) > 0;
                      hits += meet;
                    }
                    return std::pair{hits == total, std::to_string(hits) + "/" + std::to_string(total) + " intersect"};
                  }});
  list.push_back({"alignment", "cost shift moves the value by the shift and keeps the argmin", [](Rng& rng) {
                    Check c;
                    for (int t = 0; t < 8; ++t) {
                      auto inst = random_cost_instance(rng, uniform_int(rng, 3, 7), uniform_int(rng, 3, 7),
                                                       uniform_int(rng, 2, 4));
                      const double s = uniform(rng, -3, 3);
                      const auto shifted = inst.ct.shifted(s);
                      const auto a = solve_dual(inst.mu, inst.nu, inst.ct);
                      const auto b = solve_dual(inst.mu, inst.nu, shifted);
                      c.bound(std::abs(b.value - a.value - s), 1e-7);
                      const auto ka = extract_theta(a, inst.ct, inst.mu.weight_span()).k_star;
                      const auto kb = extract_theta(b, shifted, inst.mu.weight_span()).k_star;
                      c.require(ka == kb, "argmin changed");
                    }
                    return std::pair{c.pass, c.detail("value defect")};
                  }});
  list.push_back({"alignment", "psi + s, xi - s keeps feasibility and the objective", [](Rng& rng) {
                    Check c;
                    for (int t = 0; t < 8; ++t) {
                      auto inst = random_cost_instance(rng, uniform_int(rng, 3, 7), uniform_int(rng, 3, 7),
                                                       uniform_int(rng, 2, 4));
                      auto d = solve_dual(inst.mu, inst.nu, inst.ct);
                      const double s = uniform(rng, -5, 5);
                      for (double& v : d.psi) v += s;
                      for (double& v : d.xi) v -= s;
                      const auto f = dual_feasibility(d, inst.ct, inst.mu.weight_span());
                      c.bound(f.inequality, 1e-8);
                      c.bound(f.mean, 1e-8);
                      c.bound(std::abs(dual_objective(d, inst.mu.weight_span(), inst.nu.weight_span()) - d.value), 1e-9);
                    }
                    return std::pair{c.pass, c.detail("defect")};
                  }});
  list.push_back({"alignment", "gap identity Delta + G = I(theta0) - min I within 1e-6", [](Rng& rng) {
                    Check c;
                    for (int t = 0; t < 10; ++t) {
                      auto inst = random_cost_instance(rng, uniform_int(rng, 3, 8), uniform_int(rng, 3, 8),
                                                       uniform_int(rng, 2, 5));
                      const auto d = solve_dual(inst.mu, inst.nu, inst.ct);
                      for (int k = 0; k < inst.ct.thetas(); ++k) {
                        const auto g = gap_certificate(k, inst.mu, inst.nu, inst.ct, d.value);
                        c.bound(g.identity_defect(), 1e-6);
                        c.require(g.delta >= -1e-8 && g.g >= -1e-8, "negative gap");
                      }
                    }
                    return std::pair{c.pass, c.detail("identity defect")};
                  }});
  list.push_back({"alignment", "value moves continuously with the source points", [](Rng& rng) {
                    Check c;
                    const auto fam = rotation_grid(12);
                    for (int t = 0; t < 6; ++t) {
                      const auto mu = whiten(random_cloud(rng, 2, 9));
                      const auto nu = whiten(random_cloud(rng, 2, 8));
                      const auto base = solve_dual(mu, nu, build_cost_tensor(mu, nu, fam, CostSpec::squared_euclidean()));
                      for (double eps : {1e-3, 1e-2}) {
                        Matrix noise(2, 9);
                        for (int i = 0; i < 18; ++i) noise.data()[i] = uniform(rng, -eps, eps);
                        const DiscreteMeasure mu2(mu.points() + noise, mu.weights());
                        const auto moved =
                            solve_dual(mu2, nu, build_cost_tensor(mu2, nu, fam, CostSpec::squared_euclidean()));
                        // Rotations are isometries, so every mixture of pushforwards moves by at
                        // most eps * sqrt(2) in W2.
                        const double diff = std::abs(std::sqrt(std::max(moved.value, 0.0)) -
                                                     std::sqrt(std::max(base.value, 0.0)));
                        c.bound(diff - eps * std::sqrt(2.0), 1e-7);
                      }
                    }
                    return std::pair{c.pass, c.detail("excess over bound")};
                  }});

  // euclidean_diagnostics
  list.push_back({"euclidean_diagnostics", "up - down = n - d for every coupling", [](Rng& rng) {
                    Check c;
                    for (int t = 0; t < 10; ++t) {
                      const auto mu = whiten(random_cloud(rng, 3, 10));
                      const auto nu = whiten(random_cloud(rng, 2, 9));
                      const Matrix a = random_stiefel(rng, 3, 2);
                      c.bound(updown_check(mu, nu, a, product_coupling(mu, nu)).defect(), 1e-9);
                      const TransformEntry e{"A", a.transpose(), Vector::Zero(2), 0, std::nullopt};
                      const auto pushed = pushforward(mu, e);
                      const auto ot = wasserstein(mu.weight_span(), nu.weight_span(),
                                                  cost_matrix(pushed, nu, CostSpec::squared_euclidean()));
                      c.bound(updown_check(mu, nu, a, ot.plan).defect(), 1e-9);
                    }
                    return std::pair{c.pass, c.detail("defect")};
                  }});
  list.push_back({"euclidean_diagnostics", "mixture map pushes quantiles onto the normal law (KS <= 0.01)", [](Rng&) {
                    const double cc = 1.0;
                    const int n = 100000;
                    auto mix_cdf = [&](double y) { return 0.5 * std_normal_cdf(y - cc) + 0.5 * std_normal_cdf(y + cc); };
                    std::vector<double> pushed(static_cast<std::size_t>(n));
                    double lo = -12, hi = 12;
                    for (int k = 0; k < n; ++k) {
                      const double u = (k + 0.5) / n;
                      double a = lo, b = hi;
                      for (int it = 0; it < 200 && b - a > 1e-13; ++it) {
                        const double mid = 0.5 * (a + b);
                        (mix_cdf(mid) < u ? a : b) = mid;
                      }
                      pushed[k] = mixture_brenier(cc, 0.5 * (a + b));
                    }
                    std::sort(pushed.begin(), pushed.end());
                    double ks = 0;
                    for (int k = 0; k < n; ++k) {
                      const double f = std_normal_cdf(pushed[k]);
                      ks = std::max({ks, std::abs(f - double(k) / n), std::abs(f - double(k + 1) / n)});
                    }
                    return std::pair{ks <= 0.01, "KS distance " + fmt(ks)};
                  }});
  list.push_back({"euclidean_diagnostics", "F for c = 1 lies strictly between 0 and the envelope t", [](Rng&) {
                    bool ok = true;
                    for (int s = 0; s < 2001; ++s) {
                      const double t = -8.0 + 16.0 * s / 2000.0;
                      if (t == 0.0) continue;
                      const double f = mixture_F(1.0, t);
                      ok = ok && (t > 0 ? (f > 0 && f < t) : (f < 0 && f > t));
                      if (t > 0) ok = ok && mixture_F(0.5, t) < f && f < mixture_F(2.0, t);
                    }
                    return std::pair{ok, std::string("2001-point grid on [-8, 8]")};
                  }});
  list.push_back({"euclidean_diagnostics", "cross-correlation defect vanishes for d = 1 and the identity map",
                  [](Rng& rng) {
                    Check c;
                    for (int t = 0; t < 10; ++t) {
                      const auto mu = random_cloud(rng, 1, 8), nu = random_cloud(rng, 1, 7);
                      const auto ot = wasserstein(mu.weight_span(), nu.weight_span(),
                                                  cost_matrix(mu, nu, CostSpec::squared_euclidean()));
                      c.bound(cross_correlation(ot.plan, nu, mu.points()).defect, 1e-12);
                      const auto z = random_cloud(rng, 2, 6);
                      TransportPlan id(6, 6);
                      for (int j = 0; j < 6; ++j) id(j, j) = 1.0 / 6;
                      c.bound(cross_correlation(id, z, z.points()).defect, 1e-12);
                    }
                    return std::pair{c.pass, c.detail("defect")};
                  }});
  list.push_back({"euclidean_diagnostics", "normal CDF and its inverse meet their error bounds", [](Rng&) {
                    Check c;
                    for (int s = 0; s < 10000; ++s) {
                      const double t = -8.0 + 16.0 * s / 9999.0;
                      c.bound(std::abs(std_normal_cdf(t) + std_normal_cdf(-t) - 1.0), 1e-12);
                      const double u = (s + 0.5) / 10000.0;
                      c.bound(std::abs(std_normal_cdf(std_normal_inv_cdf(u)) - u), 1e-9);
                    }
                    return std::pair{c.pass, c.detail("error")};
                  }});

  // cli-level guarantees checked on the library surface
  list.push_back({"cli", "report is deterministic and schema-stable; SVG has one marker per point", [](Rng& rng) {
                    const auto mu = random_cloud(rng, 2, 8), nu = random_cloud(rng, 2, 6);
                    const auto fam = rotation_grid(8);
                    const auto ct = build_cost_tensor(mu, nu, fam, CostSpec::squared_euclidean());
                    const auto a = report_json(align(mu, nu, fam, ct), fam);
                    const auto b = report_json(align(mu, nu, fam, ct), fam);
                    bool ok = true;
                    for (const char* key : {"value", "thetaStar", "iCurve", "gapCurve", "psi", "planNnz", "timingsMs"})
                      ok = ok && a.contains(key);
                    ok = ok && a["thetaStar"].contains("index") && a["thetaStar"].contains("label");
                    for (const char* key : {"value", "iCurve", "gapCurve", "psi", "perTheta"}) ok = ok && a[key] == b[key];
                    const std::string svg = svg_scatter(nu, pushforward(mu, fam[0]));
                    std::size_t circles = 0;
                    for (std::size_t pos = svg.find("<circle"); pos != std::string::npos; pos = svg.find("<circle", pos + 1))
                      ++circles;
                    ok = ok && circles == 14;
                    return std::pair{ok, std::string(ok ? "keys, repeat run and markers agree" : "mismatch")};
                  }});
  return list;
}

}  // namespace

std::vector<PropertyResult> run_validation_suite(std::uint64_t seed,
                                                 const std::function<void(const PropertyResult&)>& on_result) {
  std::vector<PropertyResult> out;
  std::uint64_t stream = 0;
  for (const auto& entry : properties()) {
    Rng rng(seed + 0x9e3779b97f4a7c15ULL * ++stream);
    PropertyResult r{entry.module, entry.name, false, "", 0.0};
    const auto t0 = std::chrono::steady_clock::now();
    try {
      auto [pass, detail] = entry.run(rng);
      r.pass = pass;
      r.detail = std::move(detail);
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = std::string("exception: ") + e.what();
    }
    r.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    if (on_result) on_result(r);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace walign
