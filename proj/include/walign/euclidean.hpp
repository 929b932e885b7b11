#pragma once

// Euclidean-case diagnostics: the up/down constant for Stiefel maps, the
// cross-correlation first-order condition, and the normal-mixture example.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "walign/alignment.hpp"
#include "walign/measures.hpp"
#include "walign/ot.hpp"

namespace walign {

struct UpDownCheck {
  double up_integral = 0.0;    // sum gamma_ij |x_i - A z_j|^2
  double down_integral = 0.0;  // sum gamma_ij |A^T x_i - z_j|^2
  double expected_gap = 0.0;   // n - d
  double defect() const { return std::abs(up_integral - down_integral - expected_gap); }
};

// mu in R^n and nu in R^d must be whitened (defect <= 1e-9), A must be n x d
// with orthonormal columns, and gamma must couple mu and nu to 1e-8.
UpDownCheck updown_check(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const Matrix& a,
                         const TransportPlan& gamma);

TransportPlan product_coupling(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

// Column j is sum_i pi_ij y_i / sum_i pi_ij, with y_i the columns of
// source_images. Throws InputError on a column with no mass.
Matrix barycentric_map(const TransportPlan& plan, const Matrix& source_images);

struct CrossCorrelation {
  Matrix matrix;  // C_ab = sum_j q_j Tbar_a(z_j) (z_j)_b
  double defect = 0.0;
};

CrossCorrelation cross_correlation(const TransportPlan& plan, const DiscreteMeasure& nu, const Matrix& source_images);

double std_normal_pdf(double t);
// Absolute error below 1e-12; relative accuracy is kept in the lower tail.
double std_normal_cdf(double t);
// Upper tail 1 - cdf(t), accurate relative to its size for large t.
double std_normal_sf(double t);
// Throws InputError unless 0 < u < 1.
double std_normal_inv_cdf(double u);

// Monotone map pushing 1/2 N(c, 1) + 1/2 N(-c, 1) onto N(0, 1).
double mixture_brenier(double c, double y);
// t - mixture_brenier(c, t)
double mixture_F(double c, double t);

// Samples are drawn with Box-Muller over a 64-bit Mersenne twister.
class NormalSampler {
 public:
  explicit NormalSampler(std::uint64_t seed);
  double operator()();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

struct MixtureDemo {
  DiscreteMeasure mu;  // the mixture sample in R^2
  DiscreteMeasure nu;  // the standardized N(0,1) sample
  TransformFamily family;
  AlignmentReport report;
  double theta_star_angle = 0.0;
  double target_angle = 0.0;     // one of the two angles with lambda orthogonal to a
  double angle_error = 0.0;      // distance from theta* to the nearer of the two, mod 2 pi
  std::vector<std::string> warnings;
};

// Family of projections x -> lambda_theta^T x, lambda_theta = (cos theta, sin theta),
// theta = 2 pi k / l.
TransformFamily projection_grid(int l);

MixtureDemo mixture_demo(const Vector& a, int samples, std::uint64_t seed, int grid,
                         const DualOptions& options = {});

}  // namespace walign
