#include "walign/alignment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <numeric>
#include <thread>

#include "walign/errors.hpp"
#include "walign/kernels.hpp"

namespace walign {

namespace {

constexpr double kTieTolerance = 1e-7;

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

void check_shapes(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const CostTensor& ct) {
  if (mu.size() != ct.sources() || nu.size() != ct.targets()) {
    throw_input("cost tensor shape " + std::to_string(ct.sources()) + "x" + std::to_string(ct.targets()) +
                " does not match measures of sizes " + std::to_string(mu.size()) + " and " + std::to_string(nu.size()));
  }
}

// Implicit one-dimensional squared-distance tensors admit envelope
// c-transforms and monotone transport.
bool line_geometry(const CostTensor& ct) {
  const auto* g = ct.geometry();
  if (!g || g->targets.rows() != 1) return false;
  return g->cost.kind() == CostSpec::Kind::SquaredEuclidean ||
         (g->cost.kind() == CostSpec::Kind::PowerDistance && g->cost.parameter() == 2.0);
}

std::span<const double> line_image(const CostTensor& ct, int k) {
  const auto& img = ct.geometry()->images[static_cast<std::size_t>(k)];
  return {img.data(), static_cast<std::size_t>(img.cols())};
}

std::span<const double> line_targets(const CostTensor& ct) {
  const auto& t = ct.geometry()->targets;
  return {t.data(), static_cast<std::size_t>(t.cols())};
}

template <class Fn>
void parallel_for(int count, unsigned threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max(count, 1)));
  if (threads <= 1) {
    for (int k = 0; k < count; ++k) fn(k);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      (void)t;
      for (int k = next++; k < count && !failed; k = next++) {
        try {
          fn(k);
        } catch (...) {
          if (!failed.exchange(true)) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

double weighted_sum(std::span<const double> w, std::span<const double> v) {
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * v[i];
  return s;
}

std::vector<int> argmin_set(const std::vector<double>& v, double tol) {
  const double mn = *std::min_element(v.begin(), v.end());
  std::vector<int> out;
  for (int k = 0; k < static_cast<int>(v.size()); ++k)
    if (v[k] <= mn + tol) out.push_back(k);
  return out;
}

struct Restricted {
  std::vector<double> xi;  // |K| x N, block per theta
  std::vector<double> psi;
  double value = 0.0;
  std::vector<double> mass;  // per member of K
  long iterations = 0;
};

// The dual LP with xi variables only for the thetas in `ks`; ks[0] is the
// reference of the mean rows.
Restricted solve_restricted(const CostTensor& ct, std::span<const double> p, std::span<const double> q,
                            const std::vector<int>& ks, const LpOptions& options) {
  const int n = ct.sources(), m = ct.targets();
  const int nk = static_cast<int>(ks.size());
  LpProblem lp;
  lp.sense = Sense::Maximize;
  for (int t = 0; t < nk; ++t)
    for (int i = 0; i < n; ++i) lp.add_variable(t == 0 ? p[i] : 0.0, -kInf, kInf);
  for (int j = 0; j < m; ++j) lp.add_variable(q[j], -kInf, kInf);
  const int psi0 = nk * n;
  lp.rows.reserve(static_cast<std::size_t>(nk) * n * m + nk);
  std::vector<double> scratch;
  for (int t = 0; t < nk; ++t) {
    const int k = ks[t];
    for (int i = 0; i < n; ++i) {
      const auto row = ct.row(i, k, scratch);
      for (int j = 0; j < m; ++j)
        lp.rows.push_back({{{t * n + i, 1.0}, {psi0 + j, 1.0}}, Relation::LessEqual, row[j] + ct.penalty(k)});
    }
  }
  for (int t = 1; t < nk; ++t) {
    LpRow row{{}, Relation::Equal, 0.0};
    for (int i = 0; i < n; ++i) {
      if (p[i] == 0.0) continue;
      row.terms.push_back({t * n + i, p[i]});
      row.terms.push_back({i, -p[i]});
    }
    lp.rows.push_back(std::move(row));
  }
  const LpSolution sol = solve_lp(lp, options);
  if (sol.status != LpStatus::Optimal) {
    throw SolverError(std::string("alignment dual LP ended with status ") + to_string(sol.status) +
                      (sol.message.empty() ? "" : ": " + sol.message));
  }
  Restricted out;
  out.xi.assign(sol.primal.begin(), sol.primal.begin() + psi0);
  out.psi.assign(sol.primal.begin() + psi0, sol.primal.end());
  out.value = sol.objective;
  out.iterations = sol.iterations;
  out.mass.assign(static_cast<std::size_t>(nk), 0.0);
  const std::size_t block = static_cast<std::size_t>(n) * m;
  for (int t = 0; t < nk; ++t)
    for (std::size_t r = 0; r < block; ++r) out.mass[t] += sol.row_duals[t * block + r];
  return out;
}

AlignmentDual dual_by_active_set(const CostTensor& ct, std::span<const double> p, std::span<const double> q,
                                 std::vector<int> ks, const DualOptions& options, const std::string& method) {
  const int n = ct.sources(), l = ct.thetas();
  long iterations = 0;
  Restricted res;
  std::vector<double> curve;
  double level = 0.0;
  for (int round = 0;; ++round) {
    std::sort(ks.begin(), ks.end());
    res = solve_restricted(ct, p, q, ks, options.lp);
    iterations += res.iterations;
    level = res.value - weighted_sum(q, res.psi);
    curve = i_curve(res.psi, ct, p);
    if (static_cast<int>(ks.size()) == l) break;
    const double tol = 1e-10 * std::max(1.0, std::abs(level));
    std::vector<int> violated;
    for (int k = 0; k < l; ++k)
      if (curve[k] < level - tol && !std::binary_search(ks.begin(), ks.end(), k)) violated.push_back(k);
    if (violated.empty()) break;
    std::stable_sort(violated.begin(), violated.end(), [&](int a, int b) { return curve[a] < curve[b]; });
    const auto add = std::min<std::size_t>(violated.size(), static_cast<std::size_t>(std::max(1, options.thetas_per_round)));
    ks.insert(ks.end(), violated.begin(), violated.begin() + static_cast<std::ptrdiff_t>(add));
  }

  AlignmentDual dual;
  dual.sources = n;
  dual.thetas = l;
  dual.psi = res.psi;
  dual.xi.assign(static_cast<std::size_t>(n) * l, 0.0);
  dual.theta_mass.assign(static_cast<std::size_t>(l), 0.0);
  std::vector<char> active(static_cast<std::size_t>(l), 0);
  for (int t = 0; t < static_cast<int>(ks.size()); ++t) {
    const int k = ks[t];
    active[k] = 1;
    dual.theta_mass[k] = res.mass[t];
    for (int i = 0; i < n; ++i) dual.xi[static_cast<std::size_t>(i) * l + k] = res.xi[static_cast<std::size_t>(t) * n + i];
  }
  for (int k = 0; k < l; ++k) {
    if (active[k]) continue;
    const auto phi = cbar_slice(dual.psi, ct, k);
    for (int i = 0; i < n; ++i) dual.xi[static_cast<std::size_t>(i) * l + k] = phi[i] + ct.penalty(k) - curve[k] + level;
  }
  dual.value = dual_objective(dual, p, q);
  dual.iterations = iterations;
  dual.method = method + " (" + std::to_string(ks.size()) + " of " + std::to_string(l) + " thetas in the LP)";
  return dual;
}

// Kelley cutting planes on the relaxed primal over the theta marginal r:
// f(r) = OT(sum_k r_k (T_k)#mu, nu) with cost c + R, a convex function whose
// subgradients are the I curves of optimal target potentials.
AlignmentDual dual_by_line_cutting_plane(const CostTensor& ct, std::span<const double> p, std::span<const double> q,
                                         const DualOptions& options) {
  const int n = ct.sources(), l = ct.thetas();
  const auto z = line_targets(ct);
  const CostSpec sq = CostSpec::squared_euclidean();

  auto evaluate = [&](const std::vector<double>& r, double& value) {
    std::vector<double> y, w, off;
    double total = 0.0;
    for (int k = 0; k < l; ++k) total += r[k] > 0 ? r[k] : 0.0;
    for (int k = 0; k < l; ++k) {
      if (!(r[k] > 0)) continue;
      const auto img = line_image(ct, k);
      for (int i = 0; i < n; ++i) {
        y.push_back(img[i]);
        w.push_back(r[k] / total * p[i]);
        off.push_back(ct.penalty(k) + ct.shift());
      }
    }
    Line1dResult line = transport_line(y, w, z, q, sq, off);
    value = line.value;
    return line.psi;
  };

  struct Cut {
    std::vector<double> curve;
    double constant;
    std::vector<double> psi;
  };
  std::vector<Cut> cuts;
  double upper = kInf;
  std::vector<double> best_r;
  auto add_cut = [&](const std::vector<double>& r) {
    double value = 0.0;
    auto psi = evaluate(r, value);
    if (value < upper) upper = value, best_r = r;
    auto curve = i_curve(psi, ct, p);
    cuts.push_back({std::move(curve), weighted_sum(q, psi), std::move(psi)});
  };
  for (int k = 0; k < l; ++k) {
    std::vector<double> r(static_cast<std::size_t>(l), 0.0);
    r[k] = 1.0;
    add_cut(r);
  }

  double lower = -kInf;
  std::vector<double> best_psi = cuts.front().psi;
  std::vector<double> r(static_cast<std::size_t>(l), 0.0);
  long iterations = 0;
  int rounds = 0;
  for (; rounds < options.max_cutting_plane_iterations; ++rounds) {
    // min s  s.t.  s - sum_k r_k I_t(k) >= const_t,  sum_k r_k = 1,  r >= 0
    LpProblem master;
    for (int k = 0; k < l; ++k) master.add_variable(0.0, 0.0, kInf);
    const int s = master.add_variable(1.0, -kInf, kInf);
    std::vector<LpTerm> simplex;
    for (int k = 0; k < l; ++k) simplex.push_back({k, 1.0});
    master.add_row(std::move(simplex), Relation::Equal, 1.0);
    for (const auto& cut : cuts) {
      std::vector<LpTerm> terms{{s, 1.0}};
      for (int k = 0; k < l; ++k) terms.push_back({k, -cut.curve[k]});
      master.add_row(std::move(terms), Relation::GreaterEqual, cut.constant);
    }
    const LpSolution sol = solve_lp(master, options.lp);
    if (sol.status != LpStatus::Optimal) {
      throw SolverError(std::string("cutting-plane master LP ended with status ") + to_string(sol.status));
    }
    iterations += sol.iterations;
    r.assign(sol.primal.begin(), sol.primal.begin() + l);

    // Averaging the cut potentials by the master multipliers gives a dual
    // point at least as good as the master bound.
    std::vector<double> psi(static_cast<std::size_t>(ct.targets()), 0.0);
    double weight = 0.0;
    for (std::size_t t = 0; t < cuts.size(); ++t) {
      const double lam = std::max(sol.row_duals[t + 1], 0.0);
      if (lam == 0.0) continue;
      weight += lam;
      for (std::size_t j = 0; j < psi.size(); ++j) psi[j] += lam * cuts[t].psi[j];
    }
    if (weight > 0) {
      for (double& v : psi) v /= weight;
      const auto curve = i_curve(psi, ct, p);
      const double g = *std::min_element(curve.begin(), curve.end()) + weighted_sum(q, psi);
      if (g > lower) lower = g, best_psi = psi;
    }
    if (upper - lower <= options.cutting_plane_tolerance * std::max(1.0, std::abs(upper))) break;
    add_cut(r);
  }

  AlignmentDual dual = dual_from_psi(best_psi, ct, p, q);
  dual.theta_mass = best_r;
  dual.certified_gap = std::max(upper - dual.value, 0.0);
  dual.iterations = iterations;
  dual.method = "cutting plane on the line (" + std::to_string(rounds) + " rounds)";
  return dual;
}

}  // namespace

std::vector<double> cbar_slice(std::span<const double> psi, const CostTensor& ct, int k) {
  if (static_cast<int>(psi.size()) != ct.targets()) throw_input("psi length does not match the target count");
  if (line_geometry(ct)) {
    auto out = cbar_transform_line_sq(psi, line_targets(ct), line_image(ct, k));
    for (double& v : out) v += ct.shift();
    return out;
  }
  std::vector<double> out(static_cast<std::size_t>(ct.sources()));
  std::vector<double> scratch;
  for (int i = 0; i < ct.sources(); ++i) out[i] = kernels::shifted_min(ct.row(i, k, scratch), psi);
  return out;
}

std::vector<double> i_curve(std::span<const double> psi, const CostTensor& ct, std::span<const double> p) {
  if (static_cast<int>(p.size()) != ct.sources()) throw_input("weight length does not match the source count");
  std::vector<double> out(static_cast<std::size_t>(ct.thetas()));
  for (int k = 0; k < ct.thetas(); ++k) out[k] = weighted_sum(p, cbar_slice(psi, ct, k)) + ct.penalty(k);
  return out;
}

double dual_objective(const AlignmentDual& dual, std::span<const double> p, std::span<const double> q) {
  double s = 0.0;
  for (int i = 0; i < dual.sources; ++i) s += dual.xi_at(i, 0) * p[i];
  return s + weighted_sum(q, dual.psi);
}

DualFeasibility dual_feasibility(const AlignmentDual& dual, const CostTensor& ct, std::span<const double> p) {
  DualFeasibility f;
  const int n = dual.sources, l = dual.thetas;
  double ref = 0.0;
  for (int i = 0; i < n; ++i) ref += dual.xi_at(i, 0) * p[i];
  for (int k = 0; k < l; ++k) {
    const auto phi = cbar_slice(dual.psi, ct, k);
    double mean = 0.0;
    for (int i = 0; i < n; ++i) {
      f.inequality = std::max(f.inequality, dual.xi_at(i, k) - ct.penalty(k) - phi[i]);
      mean += dual.xi_at(i, k) * p[i];
    }
    f.mean = std::max(f.mean, std::abs(mean - ref));
  }
  return f;
}

AlignmentDual solve_dual(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const CostTensor& ct,
                         const DualOptions& options) {
  check_shapes(mu, nu, ct);
  const auto p = mu.weight_span();
  const auto q = nu.weight_span();
  DualStrategy strategy = options.strategy;
  const std::size_t rows = static_cast<std::size_t>(ct.sources()) * ct.targets() * ct.thetas();
  if (strategy == DualStrategy::Auto) {
    if (line_geometry(ct))
      strategy = DualStrategy::LineCuttingPlane;
    else
      strategy = rows <= options.full_lp_row_limit ? DualStrategy::FullLp : DualStrategy::ActiveSet;
  }
  if (strategy == DualStrategy::LineCuttingPlane) {
    if (!line_geometry(ct)) throw_input("the line cutting-plane route needs an implicit 1-D squared-distance tensor");
    return dual_by_line_cutting_plane(ct, p, q, options);
  }
  if (strategy == DualStrategy::FullLp) {
    std::vector<int> all(static_cast<std::size_t>(ct.thetas()));
    std::iota(all.begin(), all.end(), 0);
    return dual_by_active_set(ct, p, q, all, options, "full LP");
  }
  const std::vector<double> zero(static_cast<std::size_t>(ct.targets()), 0.0);
  const auto curve = i_curve(zero, ct, p);
  const int start = static_cast<int>(std::min_element(curve.begin(), curve.end()) - curve.begin());
  return dual_by_active_set(ct, p, q, {start}, options, "theta generation");
}

ThetaExtraction extract_theta(const AlignmentDual& dual, const CostTensor& ct, std::span<const double> p) {
  ThetaExtraction out;
  out.i_curve = i_curve(dual.psi, ct, p);
  out.k_star = argmin_set(out.i_curve, kTieTolerance);
  out.witness_defect = kInf;
  for (int k : out.k_star) {
    const auto phi = cbar_slice(dual.psi, ct, k);
    double defect = 0.0;
    for (int i = 0; i < dual.sources; ++i) {
      if (p[i] == 0.0) continue;
      defect = std::max(defect, std::abs(dual.xi_at(i, k) - phi[i] - ct.penalty(k)));
    }
    if (defect < out.witness_defect) out.witness_defect = defect, out.witness = k;
  }
  out.slack_witness = out.witness_defect <= 1e-6;
  if (!out.slack_witness) {
    out.warnings.push_back("no theta in the argmin set has xi equal to its c-bar transform (defect " +
                           std::to_string(out.witness_defect) + ")");
  }
  return out;
}

OtResult theta_transport(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const CostTensor& ct, int k,
                         const LpOptions& options) {
  check_shapes(mu, nu, ct);
  if (k < 0 || k >= ct.thetas()) throw_input("theta index out of range");
  OtResult out;
  if (line_geometry(ct)) {
    const auto y = line_image(ct, k);
    const auto z = line_targets(ct);
    const Line1dResult line = transport_line(y, mu.weight_span(), z, nu.weight_span(), CostSpec::squared_euclidean());
    out.plan = TransportPlan(ct.sources(), ct.targets());
    for (const auto& cell : line.cells) out.plan(cell.i, cell.j) += cell.mass;
    out.potentials.psi = line.psi;
    out.potentials.phi = cbar_transform_line_sq(line.psi, z, y);
    for (double& v : out.potentials.phi) v += ct.shift();
    out.value = line.value + ct.shift();
  } else {
    out = wasserstein(mu.weight_span(), nu.weight_span(), ct.slice(k), options);
  }
  out.value += ct.penalty(k);
  return out;
}

BruteForce brute_force(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const CostTensor& ct, unsigned threads) {
  check_shapes(mu, nu, ct);
  BruteForce out;
  out.per_theta.assign(static_cast<std::size_t>(ct.thetas()), 0.0);
  parallel_for(ct.thetas(), threads, [&](int k) { out.per_theta[k] = theta_transport(mu, nu, ct, k).value; });
  out.value = *std::min_element(out.per_theta.begin(), out.per_theta.end());
  out.k_star = argmin_set(out.per_theta, kTieTolerance);
  return out;
}

RelaxedPrimal solve_relaxed_primal(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const CostTensor& ct,
                                   const LpOptions& options) {
  check_shapes(mu, nu, ct);
  const int n = ct.sources(), m = ct.targets(), l = ct.thetas();
  const auto p = mu.weight_span();
  const auto q = nu.weight_span();
  auto var = [&](int i, int k, int j) { return (i * l + k) * m + j; };

  LpProblem lp;
  lp.objective.resize(static_cast<std::size_t>(n) * l * m);
  std::vector<double> scratch;
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < l; ++k) {
      const auto row = ct.row(i, k, scratch);
      for (int j = 0; j < m; ++j) lp.objective[var(i, k, j)] = row[j] + ct.penalty(k);
    }
  lp.lower.assign(lp.objective.size(), 0.0);
  lp.upper.assign(lp.objective.size(), kInf);
  for (int i = 0; i < n; ++i) {
    LpRow row{{}, Relation::Equal, p[i]};
    for (int k = 0; k < l; ++k)
      for (int j = 0; j < m; ++j) row.terms.push_back({var(i, k, j), 1.0});
    lp.rows.push_back(std::move(row));
  }
  for (int j = 0; j < m; ++j) {
    LpRow row{{}, Relation::Equal, q[j]};
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < l; ++k) row.terms.push_back({var(i, k, j), 1.0});
    lp.rows.push_back(std::move(row));
  }
  // X independent of the theta label: sum_j gamma_ikj = p_i sum_{i',j} gamma_i'kj.
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < l; ++k) {
      LpRow row{{}, Relation::Equal, 0.0};
      for (int i2 = 0; i2 < n; ++i2) {
        const double coef = (i2 == i ? 1.0 : 0.0) - p[i];
        if (coef == 0.0) continue;
        for (int j = 0; j < m; ++j) row.terms.push_back({var(i2, k, j), coef});
      }
      lp.rows.push_back(std::move(row));
    }

  const LpSolution sol = solve_lp(lp, options);
  if (sol.status != LpStatus::Optimal) {
    throw SolverError(std::string("relaxed primal LP ended with status ") + to_string(sol.status) +
                      (sol.message.empty() ? "" : ": " + sol.message));
  }
  RelaxedPrimal out;
  out.sources = n, out.thetas = l, out.targets = m;
  out.gamma.resize(sol.primal.size());
  for (std::size_t t = 0; t < sol.primal.size(); ++t) out.gamma[t] = std::max(sol.primal[t], 0.0);
  out.value = sol.objective;
  out.iterations = sol.iterations;
  out.theta_mass.assign(static_cast<std::size_t>(l), 0.0);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < l; ++k)
      for (int j = 0; j < m; ++j) out.theta_mass[k] += out.gamma[var(i, k, j)];
  return out;
}

std::vector<double> compute_J_psi(std::span<const double> psi, const CostTensor& ct, std::span<const double> p) {
  const int n = ct.sources(), l = ct.thetas();
  const auto curve = i_curve(psi, ct, p);
  const double mn = *std::min_element(curve.begin(), curve.end());
  std::vector<double> out(static_cast<std::size_t>(n) * l);
  for (int k = 0; k < l; ++k) {
    const auto phi = cbar_slice(psi, ct, k);
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i) * l + k] = phi[i] + ct.penalty(k) - curve[k] + mn;
  }
  return out;
}

AlignmentDual dual_from_psi(std::span<const double> psi, const CostTensor& ct, std::span<const double> p,
                            std::span<const double> q) {
  AlignmentDual dual;
  dual.sources = ct.sources();
  dual.thetas = ct.thetas();
  dual.psi.assign(psi.begin(), psi.end());
  dual.xi = compute_J_psi(psi, ct, p);
  dual.value = dual_objective(dual, p, q);
  dual.theta_mass.assign(static_cast<std::size_t>(ct.thetas()), 0.0);
  dual.method = "J transform";
  return dual;
}

GapCertificate gap_certificate(int k0, const OtResult& transport, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                               const CostTensor& ct, double dual_value) {
  check_shapes(mu, nu, ct);
  const auto& psi0 = transport.potentials.psi;
  const auto curve = i_curve(psi0, ct, mu.weight_span());
  const double mn = *std::min_element(curve.begin(), curve.end());
  GapCertificate cert;
  cert.k0 = k0;
  cert.per_theta = transport.value;
  cert.delta = transport.value - dual_value;
  cert.g = dual_value - (mn + weighted_sum(nu.weight_span(), psi0));
  cert.rhs = curve[k0] - mn;
  return cert;
}

GapCertificate gap_certificate(int k0, const DiscreteMeasure& mu, const DiscreteMeasure& nu, const CostTensor& ct,
                               double dual_value, const LpOptions& options) {
  if (k0 < 0 || k0 >= ct.thetas()) throw_input("theta index out of range");
  return gap_certificate(k0, theta_transport(mu, nu, ct, k0, options), mu, nu, ct, dual_value);
}

AlignmentReport align(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const TransformFamily& family,
                      const CostTensor& ct, const DualOptions& options) {
  check_shapes(mu, nu, ct);
  if (family.size() != ct.thetas()) throw_input("family size does not match the cost tensor");
  AlignmentReport rep;
  auto t0 = std::chrono::steady_clock::now();
  rep.dual = solve_dual(mu, nu, ct, options);
  rep.dual_ms = ms_since(t0);

  t0 = std::chrono::steady_clock::now();
  rep.extraction = extract_theta(rep.dual, ct, mu.weight_span());
  rep.i_curve = rep.extraction.i_curve;
  rep.k_star = rep.extraction.k_star;
  rep.value = rep.dual.value;
  rep.theta_ms = ms_since(t0);

  t0 = std::chrono::steady_clock::now();
  const int l = ct.thetas();
  rep.per_theta.assign(static_cast<std::size_t>(l), 0.0);
  rep.gap_curve.assign(static_cast<std::size_t>(l), 0.0);
  rep.g_curve.assign(static_cast<std::size_t>(l), 0.0);
  std::vector<double> defects(static_cast<std::size_t>(l), 0.0);
  parallel_for(l, 0, [&](int k) {
    const OtResult ot = theta_transport(mu, nu, ct, k, options.lp);
    const GapCertificate cert = gap_certificate(k, ot, mu, nu, ct, rep.value);
    rep.per_theta[k] = cert.per_theta;
    rep.gap_curve[k] = cert.delta;
    rep.g_curve[k] = cert.g;
    defects[k] = cert.identity_defect();
  });
  rep.max_identity_defect = *std::max_element(defects.begin(), defects.end());
  rep.brute_force_value = *std::min_element(rep.per_theta.begin(), rep.per_theta.end());

  rep.theta_star = rep.k_star.front();
  for (int k : rep.k_star)
    if (rep.per_theta[k] < rep.per_theta[rep.theta_star]) rep.theta_star = k;
  rep.theta_label = family[rep.theta_star].label;
  OtResult star = theta_transport(mu, nu, ct, rep.theta_star, options.lp);
  rep.plan = std::move(star.plan);
  rep.potentials = std::move(star.potentials);
  rep.certificate_ms = ms_since(t0);

  rep.warnings = rep.extraction.warnings;
  if (rep.dual.certified_gap > 1e-7) {
    rep.warnings.push_back("dual value certified only to within " + std::to_string(rep.dual.certified_gap));
  }
  if (rep.max_identity_defect > 1e-6) {
    rep.warnings.push_back("gap identity defect " + std::to_string(rep.max_identity_defect) + " exceeds 1e-6");
  }
  return rep;
}

}  // namespace walign
