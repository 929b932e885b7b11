#include "walign/ot.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "walign/errors.hpp"
#include "walign/kernels.hpp"

namespace walign {

std::vector<double> TransportPlan::row_sums() const {
  std::vector<double> out(static_cast<std::size_t>(rows), 0.0);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) out[i] += (*this)(i, j);
  return out;
}

std::vector<double> TransportPlan::col_sums() const {
  std::vector<double> out(static_cast<std::size_t>(cols), 0.0);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) out[j] += (*this)(i, j);
  return out;
}

int TransportPlan::nnz(double threshold) const {
  return static_cast<int>(std::count_if(values.begin(), values.end(), [&](double v) { return v > threshold; }));
}

namespace {

void check_marginals(std::span<const double> p, std::span<const double> q) {
  double sp = 0.0, sq = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw_input("source weights must be finite and nonnegative");
    sp += v;
  }
  for (double v : q) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw_input("target weights must be finite and nonnegative");
    sq += v;
  }
  if (std::abs(sp - sq) > 1e-9) throw_input("source and target weights have different totals");
}

}  // namespace

OtResult wasserstein(std::span<const double> p, std::span<const double> q, const CostMatrix& c,
                     const LpOptions& options) {
  const int n = static_cast<int>(p.size());
  const int m = static_cast<int>(q.size());
  if (n != c.rows || m != c.cols) throw_input("weight lengths do not match the cost matrix shape");
  if (n == 0 || m == 0) throw_input("transport needs nonempty supports");
  check_marginals(p, q);

  LpProblem lp;
  lp.objective = c.values;
  lp.lower.assign(c.values.size(), 0.0);
  lp.upper.assign(c.values.size(), kInf);
  lp.rows.reserve(static_cast<std::size_t>(n + m));
  for (int i = 0; i < n; ++i) {
    LpRow row{{}, Relation::Equal, p[i]};
    row.terms.reserve(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) row.terms.push_back({i * m + j, 1.0});
    lp.rows.push_back(std::move(row));
  }
  for (int j = 0; j < m; ++j) {
    LpRow row{{}, Relation::Equal, q[j]};
    row.terms.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) row.terms.push_back({i * m + j, 1.0});
    lp.rows.push_back(std::move(row));
  }
  const LpSolution sol = solve_lp(lp, options);
  if (sol.status != LpStatus::Optimal) {
    throw SolverError(std::string("transport LP ended with status ") + to_string(sol.status) +
                      (sol.message.empty() ? "" : ": " + sol.message));
  }

  OtResult out;
  out.iterations = sol.iterations;
  out.plan = TransportPlan(n, m);
  for (std::size_t t = 0; t < sol.primal.size(); ++t) out.plan.values[t] = std::max(sol.primal[t], 0.0);
  out.value = 0.0;
  for (std::size_t t = 0; t < c.values.size(); ++t) out.value += out.plan.values[t] * c.values[t];
  out.potentials.psi.assign(sol.row_duals.begin() + n, sol.row_duals.end());
  out.potentials.phi = cbar_transform(out.potentials.psi, c);
  return out;
}

std::vector<double> cbar_transform(std::span<const double> psi, const CostMatrix& c) {
  if (static_cast<int>(psi.size()) != c.cols) throw_input("psi length does not match the cost matrix");
  std::vector<double> out(static_cast<std::size_t>(c.rows));
  for (int i = 0; i < c.rows; ++i) out[i] = kernels::shifted_min(c.row(i), psi);
  return out;
}

std::vector<double> c_transform(std::span<const double> phi, const CostMatrix& c) {
  if (static_cast<int>(phi.size()) != c.rows) throw_input("phi length does not match the cost matrix");
  return cbar_transform(phi, c.transposed());
}

namespace {

std::vector<int> sorted_order(std::span<const double> v) {
  std::vector<int> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return v[a] < v[b]; });
  return idx;
}

}  // namespace

Line1dResult transport_line(std::span<const double> y, std::span<const double> p, std::span<const double> z,
                            std::span<const double> q, const CostSpec& cost, std::span<const double> source_offset) {
  const int n = static_cast<int>(y.size());
  const int m = static_cast<int>(z.size());
  if (n == 0 || m == 0) throw_input("transport needs nonempty supports");
  if (static_cast<int>(p.size()) != n || static_cast<int>(q.size()) != m) throw_input("weight length mismatch");
  if (!source_offset.empty() && static_cast<int>(source_offset.size()) != n) throw_input("offset length mismatch");
  if (cost.kind() == CostSpec::Kind::InnerProduct) throw_input("line transport needs a convex distance cost");
  check_marginals(p, q);

  auto c = [&](int i, int j) {
    const double d = std::abs(y[i] - z[j]);
    double v = cost.kind() == CostSpec::Kind::SquaredEuclidean || cost.parameter() == 2.0 ? d * d
                                                                                          : std::pow(d, cost.parameter());
    if (!source_offset.empty()) v += source_offset[i];
    return v;
  };

  const auto si = sorted_order(y);
  const auto sj = sorted_order(z);
  Line1dResult out;
  out.psi.assign(static_cast<std::size_t>(m), 0.0);
  out.cells.reserve(static_cast<std::size_t>(n + m));
  std::vector<double> phi(static_cast<std::size_t>(n), 0.0);

  int a = 0, b = 0;
  double ra = p[si[0]], rb = q[sj[0]];
  phi[si[0]] = c(si[0], sj[0]);
  for (;;) {
    const int i = si[a], j = sj[b];
    const double mass = std::max(std::min(ra, rb), 0.0);
    out.cells.push_back({i, j, mass});
    out.value += mass * c(i, j);
    if (a == n - 1 && b == m - 1) break;
    const bool advance_source = b == m - 1 || (a < n - 1 && ra <= rb);
    if (advance_source) {
      rb -= mass;
      ++a;
      ra = p[si[a]];
      phi[si[a]] = c(si[a], j) - out.psi[j];
    } else {
      ra -= mass;
      ++b;
      rb = q[sj[b]];
      out.psi[sj[b]] = c(i, sj[b]) - phi[i];
    }
  }
  return out;
}

OtResult wasserstein_1d(const DiscreteMeasure& y, const DiscreteMeasure& z, const CostSpec& cost) {
  if (y.dim() != 1 || z.dim() != 1) throw_input("wasserstein_1d needs one-dimensional measures");
  std::span<const double> ys(y.points().data(), static_cast<std::size_t>(y.size()));
  std::span<const double> zs(z.points().data(), static_cast<std::size_t>(z.size()));
  const Line1dResult line = transport_line(ys, y.weight_span(), zs, z.weight_span(), cost);
  OtResult out;
  out.value = line.value;
  out.plan = TransportPlan(y.size(), z.size());
  for (const auto& cell : line.cells) out.plan(cell.i, cell.j) += cell.mass;
  out.potentials.psi = line.psi;
  if (cost.kind() == CostSpec::Kind::SquaredEuclidean) {
    out.potentials.phi = cbar_transform_line_sq(line.psi, zs, ys);
  } else {
    out.potentials.phi = cbar_transform(line.psi, cost_matrix(y, z, cost));
  }
  return out;
}

std::vector<double> cbar_transform_line_sq(std::span<const double> psi, std::span<const double> z,
                                           std::span<const double> y) {
  const int m = static_cast<int>(z.size());
  if (static_cast<int>(psi.size()) != m || m == 0) throw_input("psi length does not match the target support");
  // Line j: slope -2 z_j, intercept z_j^2 - psi_j. Left to right the minimizing
  // line has decreasing slope, i.e. increasing z.
  std::vector<int> order = sorted_order(z);
  auto intercept = [&](int j) { return z[j] * z[j] - psi[j]; };
  auto meet = [&](int a, int b) {  // abscissa where line b starts to beat line a (z_a < z_b)
    return (intercept(b) - intercept(a)) / (2.0 * (z[b] - z[a]));
  };
  std::vector<int> hull;
  hull.reserve(static_cast<std::size_t>(m));
  for (int j : order) {
    if (!hull.empty() && z[hull.back()] == z[j]) {
      if (intercept(j) >= intercept(hull.back())) continue;
      hull.pop_back();
    }
    while (hull.size() >= 2 && meet(hull[hull.size() - 2], j) <= meet(hull[hull.size() - 2], hull.back())) {
      hull.pop_back();
    }
    hull.push_back(j);
  }
  std::vector<double> breaks(hull.size() > 0 ? hull.size() - 1 : 0);
  for (std::size_t h = 0; h + 1 < hull.size(); ++h) breaks[h] = meet(hull[h], hull[h + 1]);

  std::vector<double> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const auto h = static_cast<std::size_t>(std::upper_bound(breaks.begin(), breaks.end(), y[i]) - breaks.begin());
    const int j = hull[h];
    const double d = y[i] - z[j];
    out[i] = d * d - psi[j];
  }
  return out;
}

}  // namespace walign
