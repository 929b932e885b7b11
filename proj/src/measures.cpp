#include "walign/measures.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "walign/errors.hpp"
#include "walign/kernels.hpp"

namespace walign {

namespace {

constexpr double kWeightSumTolerance = 1e-9;
constexpr double kEigenFloor = 1e-12;

std::string format_angle_label(int k, double angle) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "rot%d:%.6f", k, angle);
  return buf;
}

}  // namespace

DiscreteMeasure::DiscreteMeasure(Matrix points, Vector weights)
    : points_(std::move(points)), weights_(std::move(weights)) {
  if (points_.cols() < 1) throw_input("measure needs at least one point");
  if (points_.rows() < 1) throw_input("points must have dimension >= 1");
  if (weights_.size() != points_.cols()) {
    throw_input("weight count " + std::to_string(weights_.size()) + " does not match point count " +
                std::to_string(points_.cols()));
  }
  if (!points_.allFinite()) throw_input("non-finite point coordinate");
  for (Eigen::Index i = 0; i < weights_.size(); ++i) {
    if (!std::isfinite(weights_[i]) || weights_[i] < 0.0) {
      throw_input("negative or non-finite weight at index " + std::to_string(i));
    }
  }
  const double total = weights_.sum();
  if (std::abs(total - 1.0) > kWeightSumTolerance) {
    throw_input("weights sum to " + std::to_string(total) + ", not 1");
  }
  if (total != 1.0) weights_ /= total;
}

DiscreteMeasure DiscreteMeasure::uniform(Matrix points) {
  const auto n = points.cols();
  if (n < 1) throw_input("measure needs at least one point");
  Vector w = Vector::Constant(n, 1.0 / static_cast<double>(n));
  return DiscreteMeasure(std::move(points), std::move(w));
}

Vector DiscreteMeasure::mean() const { return points_ * weights_; }

Matrix DiscreteMeasure::covariance() const {
  const Matrix centered = points_.colwise() - mean();
  return centered * weights_.asDiagonal() * centered.transpose();
}

DiscreteMeasure new_measure(const std::vector<std::vector<double>>& points,
                            const std::optional<std::vector<double>>& weights) {
  if (points.empty()) throw_input("measure needs at least one point");
  const auto dim = points.front().size();
  if (dim == 0) throw_input("points must have dimension >= 1");
  Matrix pts(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].size() != dim) {
      throw_input("point " + std::to_string(i) + " has dimension " + std::to_string(points[i].size()) +
                  ", expected " + std::to_string(dim));
    }
    for (std::size_t a = 0; a < dim; ++a) pts(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(i)) = points[i][a];
  }
  if (!weights) return DiscreteMeasure::uniform(std::move(pts));
  Vector w = Eigen::Map<const Vector>(weights->data(), static_cast<Eigen::Index>(weights->size()));
  return DiscreteMeasure(std::move(pts), std::move(w));
}

namespace {

DiscreteMeasure whiten_once(const DiscreteMeasure& m) {
  const Vector mean = m.mean();
  const Matrix cov = m.covariance();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  if (eig.info() != Eigen::Success) throw DegenerateSupportError("covariance eigendecomposition failed");
  const Vector& lambda = eig.eigenvalues();
  if (lambda.minCoeff() < kEigenFloor) {
    throw DegenerateSupportError("degenerate support: covariance eigenvalue " +
                                 std::to_string(lambda.minCoeff()) + " below 1e-12");
  }
  const Matrix inv_sqrt =
      eig.eigenvectors() * lambda.cwiseSqrt().cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
  Matrix out = inv_sqrt * (m.points().colwise() - mean);
  return DiscreteMeasure(std::move(out), m.weights());
}

}  // namespace

double whitening_defect(const DiscreteMeasure& m) {
  const double mean_dev = m.mean().cwiseAbs().maxCoeff();
  const Matrix cov = m.covariance();
  const double cov_dev = (cov - Matrix::Identity(cov.rows(), cov.cols())).cwiseAbs().maxCoeff();
  return std::max(mean_dev, cov_dev);
}

DiscreteMeasure whiten(const DiscreteMeasure& m) {
  DiscreteMeasure out = whiten_once(m);
  // A second pass removes the rounding left by an ill-conditioned first one.
  if (whitening_defect(out) > 1e-11) out = whiten_once(out);
  if (whitening_defect(out) > 1e-10) {
    throw DegenerateSupportError("degenerate support: whitening did not reach identity covariance");
  }
  return out;
}

TransformFamily::TransformFamily(std::vector<TransformEntry> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) throw_input("transform family must have at least one entry");
  const auto d = entries_.front().matrix.rows();
  const auto n = entries_.front().matrix.cols();
  if (d < 1 || n < 1) throw_input("transform matrices must be non-empty");
  for (auto& e : entries_) {
    if (e.matrix.rows() != d || e.matrix.cols() != n) throw_input("transform '" + e.label + "' has inconsistent shape");
    if (e.offset.size() == 0) e.offset = Vector::Zero(d);
    if (e.offset.size() != d) throw_input("transform '" + e.label + "' offset has wrong length");
    if (!std::isfinite(e.penalty)) throw_input("transform '" + e.label + "' has a non-finite penalty");
    if (!e.matrix.allFinite() || !e.offset.allFinite()) throw_input("transform '" + e.label + "' is not finite");
  }
}

std::vector<double> TransformFamily::penalties() const {
  std::vector<double> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.penalty);
  return out;
}

TransformFamily TransformFamily::with_penalties(std::span<const double> penalties) const {
  if (penalties.size() != entries_.size()) throw_input("penalty count does not match family size");
  auto copy = entries_;
  for (std::size_t k = 0; k < copy.size(); ++k) copy[k].penalty = penalties[k];
  return TransformFamily(std::move(copy));
}

TransformFamily TransformFamily::composed_with(const Matrix& post) const {
  if (post.cols() != out_dim()) throw_input("post-map columns do not match family output dimension");
  auto copy = entries_;
  for (auto& e : copy) {
    e.matrix = post * e.matrix;
    e.offset = post * e.offset;
  }
  return TransformFamily(std::move(copy));
}

DiscreteMeasure pushforward(const DiscreteMeasure& m, const TransformEntry& entry) {
  if (entry.matrix.cols() != m.dim()) {
    throw_input("transform '" + entry.label + "' expects dimension " + std::to_string(entry.matrix.cols()) +
                ", measure has " + std::to_string(m.dim()));
  }
  Matrix out = (entry.matrix * m.points()).colwise() + entry.offset;
  DiscreteMeasure pushed = m;
  pushed.points_ = std::move(out);
  if (!pushed.points_.allFinite()) throw_input("transform '" + entry.label + "' produced a non-finite point");
  return pushed;
}

TransformFamily rotation_grid(int l) {
  if (l < 1) throw_input("rotation grid needs l >= 1");
  std::vector<TransformEntry> entries;
  entries.reserve(static_cast<std::size_t>(l));
  for (int k = 0; k < l; ++k) {
    const double angle = 2.0 * std::numbers::pi * k / l;
    // Exact values at multiples of pi/2 keep the l = 4 grid integral.
    double c = std::cos(angle), s = std::sin(angle);
    if (4 * k % l == 0) {
      const int quarter = (4 * k / l) % 4;
      const double cs[4] = {1.0, 0.0, -1.0, 0.0};
      const double sn[4] = {0.0, 1.0, 0.0, -1.0};
      c = cs[quarter];
      s = sn[quarter];
    }
    Matrix r(2, 2);
    r << c, -s, s, c;
    entries.push_back({format_angle_label(k, angle), std::move(r), Vector::Zero(2), 0.0, angle});
  }
  return TransformFamily(std::move(entries));
}

bool stiefel_validate(const Matrix& a) {
  if (a.rows() < a.cols()) throw_input("Stiefel check needs n >= d");
  const Matrix gram = a.transpose() * a;
  return (gram - Matrix::Identity(a.cols(), a.cols())).cwiseAbs().maxCoeff() <= 1e-10;
}

TransformFamily igw_family(const std::vector<Matrix>& mats) {
  if (mats.empty()) throw_input("IGW family needs at least one matrix");
  std::vector<TransformEntry> entries;
  entries.reserve(mats.size());
  for (std::size_t k = 0; k < mats.size(); ++k) {
    if (mats[k].rows() != mats.front().rows() || mats[k].cols() != mats.front().cols()) {
      throw_input("IGW matrix " + std::to_string(k) + " has inconsistent shape");
    }
    entries.push_back({"igw" + std::to_string(k), mats[k].transpose(), Vector::Zero(mats[k].cols()),
                       8.0 * mats[k].squaredNorm(), std::nullopt});
  }
  return TransformFamily(std::move(entries));
}

CostSpec CostSpec::power_distance(double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw_input("power cost needs a finite exponent p >= 1");
  return {Kind::PowerDistance, p};
}

CostSpec CostSpec::inner_product(double scale) {
  if (!std::isfinite(scale)) throw_input("inner-product cost needs a finite scale");
  return {Kind::InnerProduct, scale};
}

double CostSpec::operator()(std::span<const double> y, std::span<const double> z) const {
  if (y.size() != z.size()) throw_input("cost arguments have different dimensions");
  switch (kind_) {
    case Kind::SquaredEuclidean: {
      double s = 0.0;
      for (std::size_t a = 0; a < y.size(); ++a) {
        const double d = y[a] - z[a];
        s = s + d * d;
      }
      return s;
    }
    case Kind::PowerDistance: {
      double s = 0.0;
      for (std::size_t a = 0; a < y.size(); ++a) {
        const double d = y[a] - z[a];
        s = s + d * d;
      }
      return parameter_ == 2.0 ? s : std::pow(std::sqrt(s), parameter_);
    }
    case Kind::InnerProduct: {
      double s = 0.0;
      for (std::size_t a = 0; a < y.size(); ++a) s += y[a] * z[a];
      return parameter_ * s;
    }
  }
  return 0.0;
}

std::string CostSpec::describe() const {
  switch (kind_) {
    case Kind::SquaredEuclidean:
      return "sq-euclidean";
    case Kind::PowerDistance:
      return "power:" + std::to_string(parameter_);
    case Kind::InnerProduct:
      return "inner:" + std::to_string(parameter_);
  }
  return "?";
}

CostMatrix::CostMatrix(int r, int c, std::vector<double> v) : rows(r), cols(c), values(std::move(v)) {
  if (values.size() != static_cast<std::size_t>(r) * c) throw_input("cost matrix value count mismatch");
}

CostMatrix CostMatrix::transposed() const {
  CostMatrix t(cols, rows);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) t(j, i) = (*this)(i, j);
  return t;
}

namespace {

std::vector<double> coordinate_major(const Matrix& pts) {
  const auto d = static_cast<std::size_t>(pts.rows());
  const auto m = static_cast<std::size_t>(pts.cols());
  std::vector<double> out(d * m);
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t j = 0; j < m; ++j) out[a * m + j] = pts(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(j));
  return out;
}

// Row of costs from one image point to all targets.
void cost_row(const CostSpec& cost, const double* y, const std::vector<double>& targets_cm, std::size_t dim,
              std::size_t m, double* out) {
  switch (cost.kind()) {
    case CostSpec::Kind::SquaredEuclidean:
      kernels::active().squared_distances(y, targets_cm.data(), dim, m, m, out);
      return;
    case CostSpec::Kind::PowerDistance: {
      kernels::active().squared_distances(y, targets_cm.data(), dim, m, m, out);
      const double p = cost.parameter();
      if (p != 2.0)
        for (std::size_t j = 0; j < m; ++j) out[j] = std::pow(std::sqrt(out[j]), p);
      return;
    }
    case CostSpec::Kind::InnerProduct: {
      for (std::size_t j = 0; j < m; ++j) out[j] = 0.0;
      for (std::size_t a = 0; a < dim; ++a) {
        const double* za = targets_cm.data() + a * m;
        for (std::size_t j = 0; j < m; ++j) out[j] += y[a] * za[j];
      }
      for (std::size_t j = 0; j < m; ++j) out[j] *= cost.parameter();
      return;
    }
  }
}

}  // namespace

CostMatrix cost_matrix(const DiscreteMeasure& y, const DiscreteMeasure& z, const CostSpec& cost) {
  if (y.dim() != z.dim()) throw_input("cost matrix between measures of different dimension");
  CostMatrix out(y.size(), z.size());
  const auto tcm = coordinate_major(z.points());
  for (int i = 0; i < y.size(); ++i) {
    cost_row(cost, y.points().col(i).data(), tcm, static_cast<std::size_t>(y.dim()), static_cast<std::size_t>(z.size()),
             out.values.data() + static_cast<std::size_t>(i) * z.size());
  }
  return out;
}

CostTensor::CostTensor(int n, int m, int l, std::vector<double> values, std::vector<double> penalties)
    : n_(n), m_(m), l_(l), values_(std::move(values)), penalties_(std::move(penalties)) {
  if (n < 1 || m < 1 || l < 1) throw_input("cost tensor dimensions must be positive");
  if (values_.size() != static_cast<std::size_t>(n) * m * l) throw_input("cost tensor value count mismatch");
  if (penalties_.size() != static_cast<std::size_t>(l)) throw_input("penalty count does not match family size");
  for (double v : values_)
    if (!std::isfinite(v)) throw_input("non-finite cost entry");
  for (double r : penalties_)
    if (!std::isfinite(r)) throw_input("non-finite penalty");
}

CostTensor::CostTensor(Geometry geometry, std::vector<double> penalties, bool materialize)
    : penalties_(std::move(penalties)), geometry_(std::move(geometry)) {
  l_ = static_cast<int>(geometry_->images.size());
  if (l_ < 1) throw_input("cost tensor needs at least one transform");
  n_ = static_cast<int>(geometry_->images.front().cols());
  m_ = static_cast<int>(geometry_->targets.cols());
  if (penalties_.size() != static_cast<std::size_t>(l_)) throw_input("penalty count does not match family size");
  for (const auto& img : geometry_->images) {
    if (img.rows() != geometry_->targets.rows()) throw_input("image dimension does not match target dimension");
    if (img.cols() != n_) throw_input("images have inconsistent point counts");
  }
  targets_by_coordinate_ = coordinate_major(geometry_->targets);
  if (materialize) {
    values_.resize(static_cast<std::size_t>(n_) * m_ * l_);
    for (int k = 0; k < l_; ++k)
      for (int i = 0; i < n_; ++i) fill_row(i, k, values_.data() + (static_cast<std::size_t>(k) * n_ + i) * m_);
    for (double v : values_)
      if (!std::isfinite(v)) throw_input("non-finite cost entry");
  }
}

void CostTensor::fill_row(int i, int k, double* out) const {
  const auto& img = geometry_->images[static_cast<std::size_t>(k)];
  cost_row(geometry_->cost, img.col(i).data(), targets_by_coordinate_, static_cast<std::size_t>(img.rows()),
           static_cast<std::size_t>(m_), out);
  if (shift_ != 0.0)
    for (int j = 0; j < m_; ++j) out[j] += shift_;
}

double CostTensor::operator()(int i, int j, int k) const {
  if (materialized()) return values_[(static_cast<std::size_t>(k) * n_ + i) * m_ + j];
  std::vector<double> scratch(static_cast<std::size_t>(m_));
  fill_row(i, k, scratch.data());
  return scratch[static_cast<std::size_t>(j)];
}

std::span<const double> CostTensor::row(int i, int k, std::vector<double>& scratch) const {
  if (materialized()) {
    return {values_.data() + (static_cast<std::size_t>(k) * n_ + i) * m_, static_cast<std::size_t>(m_)};
  }
  scratch.resize(static_cast<std::size_t>(m_));
  fill_row(i, k, scratch.data());
  return {scratch.data(), static_cast<std::size_t>(m_)};
}

CostMatrix CostTensor::slice(int k) const {
  CostMatrix out(n_, m_);
  std::vector<double> scratch;
  for (int i = 0; i < n_; ++i) {
    auto r = row(i, k, scratch);
    std::copy(r.begin(), r.end(), out.values.begin() + static_cast<std::ptrdiff_t>(i) * m_);
  }
  return out;
}

CostTensor CostTensor::shifted(double s) const {
  CostTensor out = *this;
  // Materialized values carry the shift; shift_ keeps the geometric view in step.
  for (double& v : out.values_) v += s;
  out.shift_ += s;
  return out;
}

CostTensor CostTensor::with_penalties(std::vector<double> penalties) const {
  if (penalties.size() != static_cast<std::size_t>(l_)) throw_input("penalty count does not match family size");
  CostTensor out = *this;
  out.penalties_ = std::move(penalties);
  return out;
}

CostTensor build_cost_tensor(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const TransformFamily& fam,
                             const CostSpec& cost, std::size_t materialize_limit) {
  if (fam.in_dim() != mu.dim()) {
    throw_input("family maps dimension " + std::to_string(fam.in_dim()) + " but source measure has dimension " +
                std::to_string(mu.dim()));
  }
  if (fam.out_dim() != nu.dim()) {
    throw_input("family produces dimension " + std::to_string(fam.out_dim()) + " but target measure has dimension " +
                std::to_string(nu.dim()));
  }
  CostTensor::Geometry geo{{}, nu.points(), cost};
  geo.images.reserve(static_cast<std::size_t>(fam.size()));
  for (const auto& e : fam.entries()) geo.images.push_back((e.matrix * mu.points()).colwise() + e.offset);
  const std::size_t entries = static_cast<std::size_t>(mu.size()) * nu.size() * fam.size();
  return CostTensor(std::move(geo), fam.penalties(), entries <= materialize_limit);
}

}  // namespace walign
