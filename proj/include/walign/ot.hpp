#pragma once

// Exact discrete optimal transport between weighted point sets.

#include <span>
#include <vector>

#include "walign/lp.hpp"
#include "walign/measures.hpp"

namespace walign {

// Dense N x M coupling, row-major.
struct TransportPlan {
  int rows = 0;
  int cols = 0;
  std::vector<double> values;

  TransportPlan() = default;
  TransportPlan(int r, int c) : rows(r), cols(c), values(static_cast<std::size_t>(r) * c, 0.0) {}

  double operator()(int i, int j) const { return values[static_cast<std::size_t>(i) * cols + j]; }
  double& operator()(int i, int j) { return values[static_cast<std::size_t>(i) * cols + j]; }

  std::vector<double> row_sums() const;
  std::vector<double> col_sums() const;
  int nnz(double threshold = 1e-12) const;
};

struct PotentialPair {
  std::vector<double> phi;  // on the source support
  std::vector<double> psi;  // on the target support
};

struct OtResult {
  double value = 0.0;
  TransportPlan plan;
  PotentialPair potentials;
  long iterations = 0;
};

// Solves the transport LP; phi is returned as cbar_transform(psi).
// Throws SolverError if the LP does not reach optimality.
OtResult wasserstein(std::span<const double> p, std::span<const double> q, const CostMatrix& c,
                     const LpOptions& options = {});

// out_i = min_j (C_ij - psi_j)
std::vector<double> cbar_transform(std::span<const double> psi, const CostMatrix& c);
// out_j = min_i (C_ij - phi_i)
std::vector<double> c_transform(std::span<const double> phi, const CostMatrix& c);

// Transport on the line for costs that are convex functions of y - z
// (squared distance, |y - z|^p with p >= 1): the monotone coupling is optimal.
// psi comes from the staircase of the coupling; phi = cbar(psi). source_offset,
// when non-empty, adds a per-source constant to every cost in that row.
struct Line1dResult {
  double value = 0.0;
  std::vector<double> psi;
  struct Cell {
    int i, j;
    double mass;
  };
  std::vector<Cell> cells;
};

Line1dResult transport_line(std::span<const double> y, std::span<const double> p, std::span<const double> z,
                            std::span<const double> q, const CostSpec& cost,
                            std::span<const double> source_offset = {});

OtResult wasserstein_1d(const DiscreteMeasure& y, const DiscreteMeasure& z, const CostSpec& cost);

// min_j ((y_i - z_j)^2 - psi_j) for every y_i, via the lower envelope of the
// lines z_j^2 - psi_j - 2 z_j t. O((N + M) log M).
std::vector<double> cbar_transform_line_sq(std::span<const double> psi, std::span<const double> z,
                                           std::span<const double> y);

}  // namespace walign
