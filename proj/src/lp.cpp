#include "walign/lp.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>

#include "walign/errors.hpp"
#include "walign/kernels.hpp"

namespace walign {

int LpProblem::add_variable(double cost, double lo, double hi) {
  objective.push_back(cost);
  lower.push_back(lo);
  upper.push_back(hi);
  return num_vars() - 1;
}

int LpProblem::add_row(std::vector<LpTerm> terms, Relation relation, double rhs) {
  rows.push_back({std::move(terms), relation, rhs});
  return num_rows() - 1;
}

void LpProblem::validate() const {
  const int n = num_vars();
  if (n < 1) throw_input("LP needs at least one variable");
  if (lower.size() != objective.size() || upper.size() != objective.size()) {
    throw_input("LP bound vectors do not match the variable count");
  }
  for (int j = 0; j < n; ++j) {
    if (!std::isfinite(objective[j])) throw_input("LP objective coefficient " + std::to_string(j) + " is not finite");
    if (std::isnan(lower[j]) || std::isnan(upper[j]) || lower[j] > upper[j] || lower[j] == kInf ||
        upper[j] == -kInf) {
      throw_input("LP variable " + std::to_string(j) + " has invalid bounds");
    }
  }
  for (int r = 0; r < num_rows(); ++r) {
    if (!std::isfinite(rows[r].rhs)) throw_input("LP row " + std::to_string(r) + " has a non-finite right-hand side");
    for (const auto& t : rows[r].terms) {
      if (t.col < 0 || t.col >= n) throw_input("LP row " + std::to_string(r) + " references a missing variable");
      if (!std::isfinite(t.value)) throw_input("LP row " + std::to_string(r) + " has a non-finite coefficient");
    }
  }
}

const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal:
      return "optimal";
    case LpStatus::Infeasible:
      return "infeasible";
    case LpStatus::Unbounded:
      return "unbounded";
    case LpStatus::SolverFailure:
      return "solver failure";
  }
  return "?";
}

namespace {

constexpr double kFeasTol = 1e-9;
constexpr double kPivotTol = 1e-11;

struct Csc {
  int rows = 0, cols = 0;
  std::vector<int> start;
  std::vector<int> index;
  std::vector<double> value;
};

Csc to_csc(const LpProblem& p) {
  Csc a;
  a.rows = p.num_rows();
  a.cols = p.num_vars();
  std::vector<std::map<int, double>> cols(static_cast<std::size_t>(a.cols));
  for (int r = 0; r < a.rows; ++r)
    for (const auto& t : p.rows[r].terms) cols[t.col][r] += t.value;
  a.start.assign(static_cast<std::size_t>(a.cols) + 1, 0);
  for (int j = 0; j < a.cols; ++j) {
    for (const auto& [r, v] : cols[j]) {
      if (v == 0.0) continue;
      a.index.push_back(r);
      a.value.push_back(v);
    }
    a.start[j + 1] = static_cast<int>(a.index.size());
  }
  return a;
}

void row_bounds(const LpRow& row, double& lo, double& hi) {
  switch (row.relation) {
    case Relation::LessEqual:
      lo = -kInf, hi = row.rhs;
      break;
    case Relation::Equal:
      lo = hi = row.rhs;
      break;
    case Relation::GreaterEqual:
      lo = row.rhs, hi = kInf;
      break;
  }
}

// Minimizes cost^T x over A x - s = 0 with bounds on x and on the logicals s.
class Simplex {
 public:
  Simplex(const Csc& a, std::vector<double> cost, std::vector<double> lo, std::vector<double> hi,
          const std::vector<double>& row_lo, const std::vector<double>& row_hi, const LpOptions& opt)
      : a_(a), n_(a.cols), m_(a.rows), cost_(std::move(cost)) {
    lo_ = std::move(lo);
    hi_ = std::move(hi);
    lo_.insert(lo_.end(), row_lo.begin(), row_lo.end());
    hi_.insert(hi_.end(), row_hi.begin(), row_hi.end());
    cost_.resize(static_cast<std::size_t>(n_ + m_), 0.0);
    refactor_interval_ = std::max(opt.refactor_interval, 1);
    if (m_ > 500) refactor_interval_ = std::max(refactor_interval_, m_ / 10);
    max_iterations_ = opt.max_iterations > 0 ? opt.max_iterations : 50L * (m_ + n_) + 10000;
    bland_after_ = 5L * (m_ + n_);
    double cmax = 1.0;
    for (double c : cost_) cmax = std::max(cmax, std::abs(c));
    dual_tol_ = 1e-9 * cmax;
  }

  LpStatus run() {
    initialize();
    if (!art_row_.empty()) {
      phase_cost_.assign(x_.size(), 0.0);
      for (std::size_t t = 0; t < art_row_.size(); ++t) phase_cost_[static_cast<std::size_t>(n_ + m_) + t] = 1.0;
      const LpStatus s = iterate();
      if (s == LpStatus::SolverFailure) return s;
      double infeas = 0.0;
      for (std::size_t t = 0; t < art_row_.size(); ++t) infeas += x_[static_cast<std::size_t>(n_ + m_) + t];
      if (infeas > phase_one_tol_) {
        message_ = "phase one ended with infeasibility " + std::to_string(infeas);
        return LpStatus::Infeasible;
      }
      for (std::size_t t = 0; t < art_row_.size(); ++t) hi_[static_cast<std::size_t>(n_ + m_) + t] = 0.0;
    }
    phase_cost_ = cost_;
    phase_cost_.resize(x_.size(), 0.0);
    return iterate();
  }

  const std::vector<double>& values() const { return x_; }
  const Eigen::VectorXd& multipliers() const { return y_; }
  long iterations() const { return iters_; }
  const std::string& message() const { return message_; }

 private:
  int total() const { return static_cast<int>(x_.size()); }

  double column_dot(int j, const Eigen::VectorXd& y) const {
    if (j < n_) {
      double s = 0.0;
      for (int p = a_.start[j]; p < a_.start[j + 1]; ++p) s += a_.value[p] * y[a_.index[p]];
      return s;
    }
    if (j < n_ + m_) return -y[j - n_];
    const auto t = static_cast<std::size_t>(j - n_ - m_);
    return art_sign_[t] * y[art_row_[t]];
  }

  void add_column(int j, double scale, Eigen::VectorXd& out) const {
    if (j < n_) {
      for (int p = a_.start[j]; p < a_.start[j + 1]; ++p) out[a_.index[p]] += scale * a_.value[p];
    } else if (j < n_ + m_) {
      out[j - n_] -= scale;
    } else {
      const auto t = static_cast<std::size_t>(j - n_ - m_);
      out[art_row_[t]] += scale * art_sign_[t];
    }
  }

  void initialize() {
    x_.assign(static_cast<std::size_t>(n_ + m_), 0.0);
    for (int j = 0; j < n_; ++j) {
      if (std::isfinite(lo_[j]))
        x_[j] = lo_[j];
      else if (std::isfinite(hi_[j]))
        x_[j] = hi_[j];
    }
    Eigen::VectorXd activity = Eigen::VectorXd::Zero(m_);
    for (int j = 0; j < n_; ++j)
      if (x_[j] != 0.0) add_column(j, x_[j], activity);

    double scale = 1.0;
    for (int r = 0; r < m_; ++r) {
      const auto s = static_cast<std::size_t>(n_ + r);
      if (std::isfinite(lo_[s])) scale = std::max(scale, std::abs(lo_[s]));
      if (std::isfinite(hi_[s])) scale = std::max(scale, std::abs(hi_[s]));
    }
    phase_one_tol_ = kFeasTol * scale * std::max(1, m_) ;

    head_.assign(static_cast<std::size_t>(m_), -1);
    Eigen::VectorXd diag(m_);
    for (int r = 0; r < m_; ++r) {
      const auto s = static_cast<std::size_t>(n_ + r);
      const double v = activity[r];
      if (v >= lo_[s] - kFeasTol && v <= hi_[s] + kFeasTol) {
        x_[s] = v;
        head_[r] = n_ + r;
        diag[r] = -1.0;
        continue;
      }
      const double bound = v < lo_[s] ? lo_[s] : hi_[s];
      x_[s] = bound;
      const double sign = bound > v ? 1.0 : -1.0;
      art_row_.push_back(r);
      art_sign_.push_back(sign);
      x_.push_back(std::abs(bound - v));
      lo_.push_back(0.0);
      hi_.push_back(kInf);
      cost_.push_back(0.0);
      head_[r] = total() - 1;
      diag[r] = sign;
    }
    where_.assign(x_.size(), -1);
    for (int r = 0; r < m_; ++r) where_[head_[r]] = r;
    binv_ = diag.cwiseInverse().asDiagonal();
    since_refactor_ = 0;
  }

  bool refactor() {
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(m_, m_);
    for (int r = 0; r < m_; ++r) {
      Eigen::VectorXd col = Eigen::VectorXd::Zero(m_);
      add_column(head_[r], 1.0, col);
      b.col(r) = col;
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(b);
    if (m_ > 0 && !(lu.rcond() > 1e-14)) {
      message_ = "basis matrix became numerically singular";
      return false;
    }
    binv_ = lu.inverse();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m_);
    for (int j = 0; j < total(); ++j)
      if (where_[j] < 0 && x_[j] != 0.0) add_column(j, -x_[j], rhs);
    const Eigen::VectorXd xb = binv_ * rhs;
    for (int r = 0; r < m_; ++r) x_[head_[r]] = xb[r];
    since_refactor_ = 0;
    return true;
  }

  // alpha = B^-1 a_q, accumulated column by column of B^-1.
  void ftran(int q, Eigen::VectorXd& alpha) const {
    const auto m = static_cast<std::size_t>(m_);
    if (q < n_) {
      for (int p = a_.start[q]; p < a_.start[q + 1]; ++p) kern.axpy(a_.value[p], binv_.col(a_.index[p]).data(), alpha.data(), m);
    } else if (q < n_ + m_) {
      kern.axpy(-1.0, binv_.col(q - n_).data(), alpha.data(), m);
    } else {
      const auto t = static_cast<std::size_t>(q - n_ - m_);
      kern.axpy(art_sign_[t], binv_.col(art_row_[t]).data(), alpha.data(), m);
    }
  }

  LpStatus iterate() {
    Eigen::VectorXd cb(m_), alpha(m_);
    for (;;) {
      if (iters_ >= max_iterations_) {
        message_ = "iteration limit reached";
        return LpStatus::SolverFailure;
      }
      if (since_refactor_ >= refactor_interval_ && !refactor()) return LpStatus::SolverFailure;

      for (int r = 0; r < m_; ++r) cb[r] = phase_cost_[head_[r]];
      y_.resize(m_);
      for (int r = 0; r < m_; ++r) y_[r] = kern.dot(binv_.col(r).data(), cb.data(), static_cast<std::size_t>(m_));

      const bool bland = iters_ >= bland_after_;
      int q = -1;
      double dq = 0.0, best = 0.0;
      for (int j = 0; j < total(); ++j) {
        if (where_[j] >= 0 || lo_[j] == hi_[j]) continue;
        const double d = phase_cost_[j] - column_dot(j, y_);
        const bool up = d < -dual_tol_ && x_[j] < hi_[j];
        const bool down = d > dual_tol_ && x_[j] > lo_[j];
        if (!up && !down) continue;
        if (bland) {
          q = j, dq = d;
          break;
        }
        if (std::abs(d) > best) best = std::abs(d), q = j, dq = d;
      }
      if (q < 0) {
        if (since_refactor_ > 0) {
          if (!refactor()) return LpStatus::SolverFailure;
          continue;
        }
        return LpStatus::Optimal;
      }

      const double dir = dq < 0 ? 1.0 : -1.0;
      alpha.setZero();
      ftran(q, alpha);

      const double flip = hi_[q] - lo_[q];  // inf unless both bounds finite
      int r = -1;
      double step = kInf;
      if (bland) {
        for (int i = 0; i < m_; ++i) {
          const double a = dir * alpha[i];
          if (std::abs(a) <= kPivotTol) continue;
          const int b = head_[i];
          double ratio;
          if (a > 0 && std::isfinite(lo_[b]))
            ratio = std::max(0.0, (x_[b] - lo_[b]) / a);
          else if (a < 0 && std::isfinite(hi_[b]))
            ratio = std::max(0.0, (hi_[b] - x_[b]) / -a);
          else
            continue;
          if (ratio < step - 1e-12 || (std::abs(ratio - step) <= 1e-12 && r >= 0 && b < head_[r])) step = ratio, r = i;
        }
      } else {
        double bound1 = kInf;
        for (int i = 0; i < m_; ++i) {
          const double a = dir * alpha[i];
          if (std::abs(a) <= kPivotTol) continue;
          const int b = head_[i];
          if (a > 0 && std::isfinite(lo_[b])) bound1 = std::min(bound1, (x_[b] - lo_[b] + kFeasTol) / a);
          if (a < 0 && std::isfinite(hi_[b])) bound1 = std::min(bound1, (hi_[b] - x_[b] + kFeasTol) / -a);
        }
        double pivot = 0.0;
        for (int i = 0; i < m_; ++i) {
          const double a = dir * alpha[i];
          if (std::abs(a) <= kPivotTol) continue;
          const int b = head_[i];
          double ratio;
          if (a > 0 && std::isfinite(lo_[b]))
            ratio = (x_[b] - lo_[b]) / a;
          else if (a < 0 && std::isfinite(hi_[b]))
            ratio = (hi_[b] - x_[b]) / -a;
          else
            continue;
          if (ratio <= bound1 && std::abs(a) > pivot) pivot = std::abs(a), r = i, step = std::max(ratio, 0.0);
        }
      }

      if (std::isfinite(flip) && flip <= step) {
        x_[q] = dir > 0 ? hi_[q] : lo_[q];
        for (int i = 0; i < m_; ++i) x_[head_[i]] -= dir * flip * alpha[i];
        ++iters_;
        ++since_refactor_;
        continue;
      }
      if (r < 0) {
        if (since_refactor_ > 0) {
          if (!refactor()) return LpStatus::SolverFailure;
          continue;
        }
        message_ = "objective unbounded along variable " + std::to_string(q);
        return LpStatus::Unbounded;
      }

      x_[q] += dir * step;
      for (int i = 0; i < m_; ++i) x_[head_[i]] -= dir * step * alpha[i];
      const int leaving = head_[r];
      x_[leaving] = dir * alpha[r] > 0 ? lo_[leaving] : hi_[leaving];

      const double ar = alpha[r];
      Eigen::VectorXd eta = alpha;
      eta[r] = 0.0;
      for (int c = 0; c < m_; ++c) {
        double* col = binv_.col(c).data();
        const double pr = col[r] / ar;
        if (pr != 0.0) kern.axpy(-pr, eta.data(), col, static_cast<std::size_t>(m_));
        col[r] = pr;
      }

      head_[r] = q;
      where_[q] = r;
      where_[leaving] = -1;
      ++iters_;
      ++since_refactor_;
    }
  }

  const Csc& a_;
  const kernels::KernelTable& kern = kernels::active();
  int n_, m_;
  std::vector<double> cost_, lo_, hi_, x_, phase_cost_;
  std::vector<int> head_, where_, art_row_;
  std::vector<double> art_sign_;
  Eigen::MatrixXd binv_;
  Eigen::VectorXd y_;
  long iters_ = 0, max_iterations_ = 0, bland_after_ = 0;
  int since_refactor_ = 0, refactor_interval_ = 50;
  double dual_tol_ = 1e-9, phase_one_tol_ = 1e-9;
  std::string message_;
};

double objective_value(const LpProblem& p, const std::vector<double>& x) {
  double s = 0.0;
  for (int j = 0; j < p.num_vars(); ++j) s += p.objective[j] * x[j];
  return s;
}

LpSolution solve_primal_route(const LpProblem& p, const LpOptions& opt) {
  const Csc a = to_csc(p);
  const double sign = p.sense == Sense::Maximize ? -1.0 : 1.0;
  std::vector<double> cost(p.objective);
  for (double& c : cost) c *= sign;
  std::vector<double> rlo(static_cast<std::size_t>(p.num_rows())), rhi(rlo.size());
  for (int r = 0; r < p.num_rows(); ++r) row_bounds(p.rows[r], rlo[r], rhi[r]);

  Simplex simplex(a, std::move(cost), p.lower, p.upper, rlo, rhi, opt);
  LpSolution sol;
  sol.status = simplex.run();
  sol.iterations = simplex.iterations();
  sol.message = simplex.message();
  if (sol.status != LpStatus::Optimal) return sol;
  const auto& x = simplex.values();
  sol.primal.assign(x.begin(), x.begin() + p.num_vars());
  sol.row_duals.resize(static_cast<std::size_t>(p.num_rows()));
  for (int r = 0; r < p.num_rows(); ++r) sol.row_duals[r] = sign * simplex.multipliers()[r];
  sol.objective = objective_value(p, sol.primal);
  return sol;
}

// Builds the Lagrangian dual of the minimization form of p:
//   max b^T y + sum l_j lambda_j - sum u_j mu_j
//   s.t. A^T y + lambda - mu = c,  y signed by relation, lambda, mu >= 0.
LpSolution solve_dual_route(const LpProblem& p, const LpOptions& opt) {
  const double sign = p.sense == Sense::Maximize ? -1.0 : 1.0;
  const int n = p.num_vars();
  LpProblem d;
  d.sense = Sense::Maximize;
  std::vector<std::vector<LpTerm>> rows(static_cast<std::size_t>(n));
  for (int r = 0; r < p.num_rows(); ++r) {
    const auto& row = p.rows[r];
    double lo = -kInf, hi = kInf;
    if (row.relation == Relation::LessEqual) hi = 0.0;
    if (row.relation == Relation::GreaterEqual) lo = 0.0;
    const int v = d.add_variable(row.rhs, lo, hi);
    for (const auto& t : row.terms) rows[t.col].push_back({v, t.value});
  }
  for (int j = 0; j < n; ++j) {
    if (std::isfinite(p.lower[j])) rows[j].push_back({d.add_variable(p.lower[j]), 1.0});
    if (std::isfinite(p.upper[j])) rows[j].push_back({d.add_variable(-p.upper[j]), -1.0});
  }
  for (int j = 0; j < n; ++j) d.add_row(std::move(rows[j]), Relation::Equal, sign * p.objective[j]);

  LpOptions inner = opt;
  inner.route = LpRoute::Primal;
  const LpSolution ds = solve_primal_route(d, inner);
  LpSolution sol;
  sol.iterations = ds.iterations;
  sol.message = ds.message;
  if (ds.status == LpStatus::Unbounded) {
    sol.status = LpStatus::Infeasible;
    return sol;
  }
  if (ds.status != LpStatus::Optimal) {
    // An infeasible dual leaves primal unboundedness and infeasibility apart
    // undecided; the caller settles it on the primal route.
    sol.status = LpStatus::SolverFailure;
    return sol;
  }
  sol.status = LpStatus::Optimal;
  sol.primal = ds.row_duals;
  sol.row_duals.resize(static_cast<std::size_t>(p.num_rows()));
  for (int r = 0; r < p.num_rows(); ++r) sol.row_duals[r] = sign * ds.primal[r];
  sol.objective = objective_value(p, sol.primal);
  return sol;
}

}  // namespace

LpSolution solve_lp(const LpProblem& problem, const LpOptions& options) {
  problem.validate();
  LpRoute route = options.route;
  if (route == LpRoute::Auto) route = problem.num_rows() > 2 * problem.num_vars() ? LpRoute::Dual : LpRoute::Primal;
  if (route == LpRoute::Primal) return solve_primal_route(problem, options);
  LpSolution sol = solve_dual_route(problem, options);
  if (sol.status == LpStatus::Infeasible || sol.status == LpStatus::Optimal) return sol;
  const long spent = sol.iterations;
  sol = solve_primal_route(problem, options);
  sol.iterations += spent;
  return sol;
}

LpResiduals lp_residuals(const LpProblem& p, const LpSolution& s) {
  LpResiduals res;
  const int n = p.num_vars();
  const int m = p.num_rows();
  if (static_cast<int>(s.primal.size()) != n || static_cast<int>(s.row_duals.size()) != m) {
    res.primal = res.dual = res.gap = res.complementarity = kInf;
    return res;
  }
  const double sign = p.sense == Sense::Maximize ? -1.0 : 1.0;
  std::vector<double> reduced(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    reduced[j] = sign * p.objective[j];
    res.primal = std::max({res.primal, p.lower[j] - s.primal[j], s.primal[j] - p.upper[j]});
  }
  double dual_obj = 0.0;
  for (int r = 0; r < m; ++r) {
    const auto& row = p.rows[r];
    const double y = sign * s.row_duals[r];
    double act = 0.0;
    for (const auto& t : row.terms) {
      act += t.value * s.primal[t.col];
      reduced[t.col] -= y * t.value;
    }
    const double slack = row.rhs - act;
    if (row.relation == Relation::LessEqual) res.primal = std::max(res.primal, -slack), res.dual = std::max(res.dual, y);
    if (row.relation == Relation::GreaterEqual) res.primal = std::max(res.primal, slack), res.dual = std::max(res.dual, -y);
    if (row.relation == Relation::Equal) res.primal = std::max(res.primal, std::abs(slack));
    res.complementarity = std::max(res.complementarity, std::abs(s.row_duals[r] * slack));
    dual_obj += y * row.rhs;
  }
  for (int j = 0; j < n; ++j) {
    const double d = reduced[j];
    if (d > 0) {
      if (std::isfinite(p.lower[j]))
        dual_obj += d * p.lower[j];
      else
        dual_obj += d * s.primal[j], res.dual = std::max(res.dual, d);
    } else if (d < 0) {
      if (std::isfinite(p.upper[j]))
        dual_obj += d * p.upper[j];
      else
        dual_obj += d * s.primal[j], res.dual = std::max(res.dual, -d);
    }
  }
  res.dual_objective = sign * dual_obj;
  res.gap = std::abs(res.dual_objective - s.objective);
  return res;
}

}  // namespace walign
