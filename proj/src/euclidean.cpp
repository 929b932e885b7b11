#include "walign/euclidean.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "walign/errors.hpp"

namespace walign {

namespace {

constexpr double kWhitenedTolerance = 1e-9;

void check_coupling(const TransportPlan& g, const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  if (g.rows != mu.size() || g.cols != nu.size()) throw_input("coupling shape does not match the measures");
  const auto rs = g.row_sums();
  const auto cs = g.col_sums();
  for (int i = 0; i < g.rows; ++i)
    if (std::abs(rs[i] - mu.weights()[i]) > 1e-8) throw_input("coupling row sums do not reproduce the source weights");
  for (int j = 0; j < g.cols; ++j)
    if (std::abs(cs[j] - nu.weights()[j]) > 1e-8) throw_input("coupling column sums do not reproduce the target weights");
}

}  // namespace

UpDownCheck updown_check(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const Matrix& a,
                         const TransportPlan& gamma) {
  if (a.rows() != mu.dim() || a.cols() != nu.dim()) throw_input("A must be n x d for measures in R^n and R^d");
  if (!stiefel_validate(a)) throw_input("A does not have orthonormal columns");
  if (whitening_defect(mu) > kWhitenedTolerance) throw_input("source measure is not whitened");
  if (whitening_defect(nu) > kWhitenedTolerance) throw_input("target measure is not whitened");
  check_coupling(gamma, mu, nu);

  const Matrix az = a * nu.points();                // n x M
  const Matrix atx = a.transpose() * mu.points();   // d x N
  UpDownCheck out;
  out.expected_gap = static_cast<double>(mu.dim() - nu.dim());
  for (int i = 0; i < gamma.rows; ++i) {
    for (int j = 0; j < gamma.cols; ++j) {
      const double w = gamma(i, j);
      if (w == 0.0) continue;
      out.up_integral += w * (mu.points().col(i) - az.col(j)).squaredNorm();
      out.down_integral += w * (atx.col(i) - nu.points().col(j)).squaredNorm();
    }
  }
  return out;
}

TransportPlan product_coupling(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  TransportPlan g(mu.size(), nu.size());
  for (int i = 0; i < mu.size(); ++i)
    for (int j = 0; j < nu.size(); ++j) g(i, j) = mu.weights()[i] * nu.weights()[j];
  return g;
}

Matrix barycentric_map(const TransportPlan& plan, const Matrix& source_images) {
  if (source_images.cols() != plan.rows) throw_input("source image count does not match the plan rows");
  Matrix out = Matrix::Zero(source_images.rows(), plan.cols);
  const auto mass = plan.col_sums();
  for (int j = 0; j < plan.cols; ++j) {
    if (!(mass[j] > 0.0)) throw_input("plan column " + std::to_string(j) + " carries no mass");
    for (int i = 0; i < plan.rows; ++i)
      if (plan(i, j) != 0.0) out.col(j) += plan(i, j) * source_images.col(i);
    out.col(j) /= mass[j];
  }
  return out;
}

CrossCorrelation cross_correlation(const TransportPlan& plan, const DiscreteMeasure& nu, const Matrix& source_images) {
  if (plan.cols != nu.size()) throw_input("plan columns do not match the target measure");
  if (source_images.rows() != nu.dim()) throw_input("source images and target measure have different dimensions");
  const Matrix tbar = barycentric_map(plan, source_images);
  CrossCorrelation out;
  out.matrix = tbar * nu.weights().asDiagonal() * nu.points().transpose();
  for (Eigen::Index a = 0; a < out.matrix.rows(); ++a)
    for (Eigen::Index b = a + 1; b < out.matrix.cols(); ++b)
      out.defect = std::max(out.defect, std::abs(out.matrix(a, b) - out.matrix(b, a)));
  return out;
}

double std_normal_pdf(double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi); }

namespace {

// Phi(x) = 1/2 + pdf(x) * sum_n x^(2n+1) / (2n+1)!!, used for |x| < 4.
double cdf_series(double x) {
  const double x2 = x * x;
  double term = x, sum = x;
  for (int n = 1; n < 200; ++n) {
    term *= x2 / (2 * n + 1);
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return 0.5 + sum * std_normal_pdf(x);
}

// Upper tail for t >= 4 from the continued fraction of the Mills ratio,
// R(t) = 1/(t + 1/(t + 2/(t + 3/(t + ...)))), by the modified Lentz method.
double tail_fraction(double t) {
  constexpr double tiny = 1e-300;
  double f = t, c = t, d = 0.0;
  for (int i = 1; i < 1000; ++i) {
    d = t + i * d;
    if (d == 0.0) d = tiny;
    d = 1.0 / d;
    c = t + i / c;
    if (c == 0.0) c = tiny;
    const double delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std_normal_pdf(t) / f;
}

}  // namespace

double std_normal_cdf(double t) {
  if (std::isnan(t)) return t;
  if (t <= -4.0) return tail_fraction(-t);
  if (t >= 4.0) return 1.0 - tail_fraction(t);
  return cdf_series(t);
}

double std_normal_sf(double t) { return std_normal_cdf(-t); }

namespace {

// Rational approximation (relative error about 1e-9) polished by Halley
// steps; u <= 1/2.
double inv_cdf_lower(double u) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  double x;
  if (u < 0.02425) {
    const double q = std::sqrt(-2.0 * std::log(u));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else {
    const double q = u - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  if (x == 0.0) return 0.0;
  for (int step = 0; step < 2; ++step) {
    const double e = std_normal_cdf(x) - u;
    const double v = e / std_normal_pdf(x);
    x -= v / (1.0 + 0.5 * x * v);
  }
  return x;
}

}  // namespace

double std_normal_inv_cdf(double u) {
  if (!(u > 0.0 && u < 1.0)) throw_input("inverse normal CDF needs 0 < u < 1, got " + std::to_string(u));
  if (u <= 0.5) return inv_cdf_lower(u);
  return -inv_cdf_lower(1.0 - u);
}

double mixture_brenier(double c, double y) {
  c = std::abs(c);
  if (y == 0.0) return 0.0;
  if (y < 0.0) return -mixture_brenier(c, -y);
  // Upper-tail form keeps relative accuracy far from the origin.
  const double s = 0.5 * std_normal_sf(y - c) + 0.5 * std_normal_sf(y + c);
  return -std_normal_inv_cdf(s);
}

double mixture_F(double c, double t) { return t - mixture_brenier(c, t); }

NormalSampler::NormalSampler(std::uint64_t seed) : engine_(seed) {}

double NormalSampler::operator()() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  constexpr double scale = 1.0 / 9007199254740992.0;  // 2^-53
  double u1;
  do {
    u1 = static_cast<double>(engine_() >> 11) * scale;
  } while (u1 == 0.0);
  const double u2 = static_cast<double>(engine_() >> 11) * scale;
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(angle);
  has_spare_ = true;
  return r * std::cos(angle);
}

TransformFamily projection_grid(int l) {
  if (l < 1) throw_input("projection grid needs l >= 1");
  const TransformFamily rot = rotation_grid(l);
  std::vector<TransformEntry> entries;
  for (const auto& e : rot.entries()) {
    // First column of the rotation: lambda = (cos theta, sin theta).
    Matrix lambda = e.matrix.col(0).transpose();
    entries.push_back({e.label, std::move(lambda), Vector::Zero(1), 0.0, e.angle});
  }
  return TransformFamily(std::move(entries));
}

MixtureDemo mixture_demo(const Vector& a, int samples, std::uint64_t seed, int grid, const DualOptions& options) {
  if (a.size() != 2) throw_input("mixture center must be a vector in R^2");
  if (!(a.norm() > 0.0) || !a.allFinite()) throw_input("mixture center must be finite and nonzero");
  if (samples < 100) throw_input("mixture demo needs at least 100 samples");
  if (grid < 1) throw_input("mixture demo needs a positive grid size");

  NormalSampler normal(seed);
  std::mt19937_64 coin(seed ^ 0x9e3779b97f4a7c15ULL);
  Matrix x(2, samples);
  for (int i = 0; i < samples; ++i) {
    const double sign = (coin() >> 63) ? 1.0 : -1.0;
    x(0, i) = sign * a[0] + normal();
    x(1, i) = sign * a[1] + normal();
  }
  Matrix z(1, samples);
  for (int j = 0; j < samples; ++j) z(0, j) = normal();
  const DiscreteMeasure nu = whiten(DiscreteMeasure::uniform(std::move(z)));
  const DiscreteMeasure mu = DiscreteMeasure::uniform(std::move(x));
  const TransformFamily family = projection_grid(grid);
  const CostTensor ct = build_cost_tensor(mu, nu, family, CostSpec::squared_euclidean());

  MixtureDemo demo{mu, nu, family, align(mu, nu, family, ct, options), 0.0, 0.0, 0.0, {}};
  demo.theta_star_angle = *family[demo.report.theta_star].angle;
  const double base = std::atan2(a[1], a[0]);
  const double two_pi = 2.0 * std::numbers::pi;
  auto circular = [&](double u, double v) {
    double d = std::fmod(std::abs(u - v), two_pi);
    return std::min(d, two_pi - d);
  };
  const double t1 = base + std::numbers::pi / 2, t2 = base - std::numbers::pi / 2;
  const double e1 = circular(demo.theta_star_angle, t1), e2 = circular(demo.theta_star_angle, t2);
  demo.target_angle = e1 <= e2 ? t1 : t2;
  demo.angle_error = std::min(e1, e2);
  if (grid < 8) {
    demo.warnings.push_back("grid of " + std::to_string(grid) + " angles is coarse: spacing " +
                            std::to_string(two_pi / grid) + " rad");
  }
  demo.warnings.insert(demo.warnings.end(), demo.report.warnings.begin(), demo.report.warnings.end());
  return demo;
}

}  // namespace walign
