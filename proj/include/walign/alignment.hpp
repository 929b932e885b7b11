#pragma once

// Penalized Wasserstein alignment: min_k OT((T_k)#mu, nu) + R_k, its
// Kantorovich-type dual LP over (xi, psi), and the certificates around it.

#include <span>
#include <string>
#include <vector>

#include "walign/lp.hpp"
#include "walign/measures.hpp"
#include "walign/ot.hpp"

namespace walign {

struct AlignmentDual {
  int sources = 0;
  int thetas = 0;
  std::vector<double> xi;  // N x l, row-major: xi[i * l + k]
  std::vector<double> psi;
  double value = 0.0;
  // Mass the optimal relaxed coupling puts on each theta (the inequality
  // multipliers summed over i, j). Zero for thetas never entered.
  std::vector<double> theta_mass;
  // Upper bound minus value; zero when the LP was solved exactly.
  double certified_gap = 0.0;
  long iterations = 0;
  std::string method;

  double xi_at(int i, int k) const { return xi[static_cast<std::size_t>(i) * thetas + k]; }
};

enum class DualStrategy { Auto, FullLp, ActiveSet, LineCuttingPlane };

struct DualOptions {
  DualStrategy strategy = DualStrategy::Auto;
  LpOptions lp;
  // Auto solves the whole LP at once up to this many inequality rows.
  std::size_t full_lp_row_limit = 20000;
  int thetas_per_round = 4;
  int max_cutting_plane_iterations = 400;
  double cutting_plane_tolerance = 1e-9;
};

AlignmentDual solve_dual(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const CostTensor& ct,
                         const DualOptions& options = {});

// Dual objective sum_i xi_i1 p_i + sum_j psi_j q_j of any (xi, psi).
double dual_objective(const AlignmentDual& dual, std::span<const double> p, std::span<const double> q);

struct DualFeasibility {
  double inequality = 0.0;  // max(xi_ik + psi_j - c_ijk - R_k, 0)
  double mean = 0.0;        // max_k |sum_i xi_ik p_i - sum_i xi_i1 p_i|
};

DualFeasibility dual_feasibility(const AlignmentDual& dual, const CostTensor& ct, std::span<const double> p);

// phi_k(i) = min_j (c_ijk - psi_j), without the penalty.
std::vector<double> cbar_slice(std::span<const double> psi, const CostTensor& ct, int k);

// I_psi(k) = sum_i p_i min_j (c_ijk - psi_j) + R_k for every k.
std::vector<double> i_curve(std::span<const double> psi, const CostTensor& ct, std::span<const double> p);

struct ThetaExtraction {
  std::vector<int> k_star;  // argmin of the I curve within 1e-7
  std::vector<double> i_curve;
  bool slack_witness = false;  // some k in k_star has xi_ik = phi_k(i) + R_k for all i
  int witness = -1;
  double witness_defect = 0.0;
  std::vector<std::string> warnings;
};

ThetaExtraction extract_theta(const AlignmentDual& dual, const CostTensor& ct, std::span<const double> p);

// OT((T_k)#mu, nu) + R_k with its plan and potentials (phi without R_k).
OtResult theta_transport(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const CostTensor& ct, int k,
                         const LpOptions& options = {});

struct BruteForce {
  std::vector<int> k_star;
  double value = 0.0;
  std::vector<double> per_theta;
};

// Per-theta transport solves run on up to `threads` threads (0: hardware).
BruteForce brute_force(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const CostTensor& ct,
                       unsigned threads = 0);

struct RelaxedPrimal {
  double value = 0.0;
  int sources = 0, thetas = 0, targets = 0;
  std::vector<double> gamma;  // N x l x M: gamma[(i * l + k) * M + j]
  std::vector<double> theta_mass;
  long iterations = 0;

  double at(int i, int k, int j) const {
    return gamma[(static_cast<std::size_t>(i) * thetas + k) * targets + j];
  }
};

RelaxedPrimal solve_relaxed_primal(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const CostTensor& ct,
                                   const LpOptions& options = {});

// J_ik = phi_k(i) + R_k - I_psi(k) + min_k I_psi(k), as an N x l row-major array.
std::vector<double> compute_J_psi(std::span<const double> psi, const CostTensor& ct, std::span<const double> p);

// The dual (J_psi, psi) with its objective.
AlignmentDual dual_from_psi(std::span<const double> psi, const CostTensor& ct, std::span<const double> p,
                            std::span<const double> q);

struct GapCertificate {
  int k0 = 0;
  double delta = 0.0;  // per_theta[k0] - dual value
  double g = 0.0;      // dual value - (min_k I_psi0(k) + sum_j psi0_j q_j)
  double rhs = 0.0;    // I_psi0(k0) - min_k I_psi0(k)
  double per_theta = 0.0;
  double identity_defect() const { return std::abs(delta + g - rhs); }
};

GapCertificate gap_certificate(int k0, const DiscreteMeasure& mu, const DiscreteMeasure& nu, const CostTensor& ct,
                               double dual_value, const LpOptions& options = {});

// Same certificate from an already solved per-theta transport.
GapCertificate gap_certificate(int k0, const OtResult& transport, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                               const CostTensor& ct, double dual_value);

struct AlignmentReport {
  int theta_star = 0;
  std::string theta_label;
  std::vector<int> k_star;
  double value = 0.0;
  std::vector<double> i_curve;
  std::vector<double> gap_curve;   // delta at every theta
  std::vector<double> g_curve;     // G at every theta
  std::vector<double> per_theta;   // OT + R at every theta
  double brute_force_value = 0.0;
  TransportPlan plan;
  PotentialPair potentials;
  AlignmentDual dual;
  ThetaExtraction extraction;
  double max_identity_defect = 0.0;
  std::vector<std::string> warnings;
  double dual_ms = 0.0, theta_ms = 0.0, certificate_ms = 0.0;
};

// solve_dual, extract_theta, and per-theta transport with a gap certificate
// at every theta. The canonical theta* is the member of k_star with the
// smallest per-theta objective, ties to the smaller index.
AlignmentReport align(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const TransformFamily& family,
                      const CostTensor& ct, const DualOptions& options = {});

}  // namespace walign
