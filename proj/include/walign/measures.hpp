#pragma once

// Discrete measures, transformation families, cost functions and the
// (source, target, transform) cost tensor that every solver consumes.

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace walign {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct TransformEntry;

// Weighted finite point set. Points are stored as the columns of a dim x N
// matrix; duplicates are kept as separate atoms.
class DiscreteMeasure {
 public:
  // Weights within 1e-9 of summing to one are renormalized; anything further
  // off, negative, or of the wrong length is rejected with InputError.
  DiscreteMeasure(Matrix points, Vector weights);

  static DiscreteMeasure uniform(Matrix points);

  int size() const { return static_cast<int>(points_.cols()); }
  int dim() const { return static_cast<int>(points_.rows()); }
  const Matrix& points() const { return points_; }
  const Vector& weights() const { return weights_; }
  std::span<const double> weight_span() const {
    return {weights_.data(), static_cast<std::size_t>(weights_.size())};
  }

  Vector mean() const;
  // Population convention: sum_i w_i (x_i - m)(x_i - m)^T.
  Matrix covariance() const;

 private:
  friend DiscreteMeasure pushforward(const DiscreteMeasure& m, const TransformEntry& entry);

  Matrix points_;
  Vector weights_;
};

DiscreteMeasure new_measure(const std::vector<std::vector<double>>& points,
                            const std::optional<std::vector<double>>& weights = std::nullopt);

// Centers and multiplies by the inverse symmetric square root of the
// covariance. Throws DegenerateSupportError if an eigenvalue of the
// covariance falls below 1e-12.
DiscreteMeasure whiten(const DiscreteMeasure& m);

// Max-abs deviation of (mean, covariance) from (0, I).
double whitening_defect(const DiscreteMeasure& m);

struct TransformEntry {
  std::string label;
  Matrix matrix;  // d x n
  Vector offset;  // d
  double penalty = 0.0;
  std::optional<double> angle;  // set for rotation grids

  Vector apply(const Eigen::Ref<const Vector>& x) const { return matrix * x + offset; }
};

class TransformFamily {
 public:
  explicit TransformFamily(std::vector<TransformEntry> entries);

  int size() const { return static_cast<int>(entries_.size()); }
  int in_dim() const { return static_cast<int>(entries_.front().matrix.cols()); }
  int out_dim() const { return static_cast<int>(entries_.front().matrix.rows()); }
  const TransformEntry& operator[](int k) const { return entries_[static_cast<std::size_t>(k)]; }
  const std::vector<TransformEntry>& entries() const { return entries_; }

  std::vector<double> penalties() const;
  TransformFamily with_penalties(std::span<const double> penalties) const;
  // Family of maps x -> post * T_k(x); labels, angles and penalties are kept.
  TransformFamily composed_with(const Matrix& post) const;

 private:
  std::vector<TransformEntry> entries_;
};

DiscreteMeasure pushforward(const DiscreteMeasure& m, const TransformEntry& entry);

// Anticlockwise 2-D rotations by 2*pi*k/l, k = 0..l-1.
TransformFamily rotation_grid(int l);

// True iff A (n x d, n >= d) has orthonormal columns to 1e-10.
bool stiefel_validate(const Matrix& a);

// Inner-product Gromov-Wasserstein family: entry k maps x -> A_k^T x with
// penalty 8 * ||A_k||_F^2.
TransformFamily igw_family(const std::vector<Matrix>& mats);

class CostSpec {
 public:
  enum class Kind { SquaredEuclidean, PowerDistance, InnerProduct };

  static CostSpec squared_euclidean() { return {Kind::SquaredEuclidean, 2.0}; }
  static CostSpec power_distance(double p);
  static CostSpec inner_product(double scale);

  Kind kind() const { return kind_; }
  // Exponent for PowerDistance, scale for InnerProduct.
  double parameter() const { return parameter_; }

  double operator()(std::span<const double> y, std::span<const double> z) const;
  std::string describe() const;

 private:
  CostSpec(Kind kind, double parameter) : kind_(kind), parameter_(parameter) {}
  Kind kind_;
  double parameter_;
};

// Dense row-major N x M matrix of c(y_i, z_j).
struct CostMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> values;

  CostMatrix() = default;
  CostMatrix(int r, int c) : rows(r), cols(c), values(static_cast<std::size_t>(r) * c, 0.0) {}
  CostMatrix(int r, int c, std::vector<double> v);

  double operator()(int i, int j) const { return values[static_cast<std::size_t>(i) * cols + j]; }
  double& operator()(int i, int j) { return values[static_cast<std::size_t>(i) * cols + j]; }
  std::span<const double> row(int i) const {
    return {values.data() + static_cast<std::size_t>(i) * cols, static_cast<std::size_t>(cols)};
  }
  CostMatrix transposed() const;
};

CostMatrix cost_matrix(const DiscreteMeasure& y, const DiscreteMeasure& z, const CostSpec& cost);

// c_ijk = c(T_k x_i, z_j) together with the penalties R_k. Small tensors are
// materialized as a [k][i][j] array; large geometric ones keep the images
// T_k x_i and evaluate rows on demand.
class CostTensor {
 public:
  struct Geometry {
    std::vector<Matrix> images;  // per k: d x N
    Matrix targets;              // d x M
    CostSpec cost;
  };

  CostTensor(int n, int m, int l, std::vector<double> values, std::vector<double> penalties);
  CostTensor(Geometry geometry, std::vector<double> penalties, bool materialize);

  int sources() const { return n_; }
  int targets() const { return m_; }
  int thetas() const { return l_; }
  bool materialized() const { return !values_.empty(); }
  const Geometry* geometry() const { return geometry_ ? &*geometry_ : nullptr; }
  // Constant added to every geometric cost by shifted().
  double shift() const { return shift_; }

  double operator()(int i, int j, int k) const;
  double penalty(int k) const { return penalties_[static_cast<std::size_t>(k)]; }
  std::span<const double> penalties() const { return penalties_; }

  // c_{i,.,k} as a length-M view. For implicit tensors the row is written to
  // scratch and the view aliases it.
  std::span<const double> row(int i, int k, std::vector<double>& scratch) const;

  CostMatrix slice(int k) const;

  // c + s everywhere (penalties untouched).
  CostTensor shifted(double s) const;
  CostTensor with_penalties(std::vector<double> penalties) const;

 private:
  void fill_row(int i, int k, double* out) const;

  int n_ = 0, m_ = 0, l_ = 0;
  std::vector<double> values_;
  std::vector<double> penalties_;
  std::optional<Geometry> geometry_;
  std::vector<double> targets_by_coordinate_;  // d x M row-major
  double shift_ = 0.0;
};

inline constexpr std::size_t kDefaultMaterializeLimit = std::size_t{1} << 24;

CostTensor build_cost_tensor(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                             const TransformFamily& fam, const CostSpec& cost,
                             std::size_t materialize_limit = kDefaultMaterializeLimit);

}  // namespace walign
