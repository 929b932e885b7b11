#pragma once

// Bounded-variable revised simplex for small and medium sparse LPs.

#include <limits>
#include <string>
#include <vector>

namespace walign {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { Minimize, Maximize };
enum class Relation { LessEqual, Equal, GreaterEqual };

struct LpTerm {
  int col;
  double value;
};

struct LpRow {
  std::vector<LpTerm> terms;
  Relation relation = Relation::LessEqual;
  double rhs = 0.0;
};

struct LpProblem {
  Sense sense = Sense::Minimize;
  std::vector<double> objective;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<LpRow> rows;

  int num_vars() const { return static_cast<int>(objective.size()); }
  int num_rows() const { return static_cast<int>(rows.size()); }

  // Returns the index of the new variable.
  int add_variable(double cost, double lo = 0.0, double hi = kInf);
  int add_row(std::vector<LpTerm> terms, Relation relation, double rhs);

  // Throws InputError on out-of-range indices, non-finite data or lo > hi.
  void validate() const;
};

enum class LpStatus { Optimal, Infeasible, Unbounded, SolverFailure };

const char* to_string(LpStatus s);

struct LpSolution {
  LpStatus status = LpStatus::SolverFailure;
  std::vector<double> primal;
  // d(objective)/d(rhs_r), in the sense of the problem as posed.
  std::vector<double> row_duals;
  double objective = 0.0;
  long iterations = 0;
  std::string message;
};

// Which problem the simplex runs on. Auto picks the dual when the problem has
// more than twice as many rows as variables.
enum class LpRoute { Auto, Primal, Dual };

struct LpOptions {
  LpRoute route = LpRoute::Auto;
  int refactor_interval = 50;
  long max_iterations = 0;  // 0: a size-based default
};

LpSolution solve_lp(const LpProblem& problem, const LpOptions& options = {});

struct LpResiduals {
  double primal = 0.0;            // max bound or row violation
  double dual = 0.0;              // max sign violation of row duals and reduced costs
  double gap = 0.0;               // |primal objective - dual objective|
  double complementarity = 0.0;   // max |row_dual * slack|
  double dual_objective = 0.0;
};

LpResiduals lp_residuals(const LpProblem& problem, const LpSolution& solution);

}  // namespace walign
