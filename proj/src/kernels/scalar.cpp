#include "walign/kernels.hpp"

namespace walign::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double shifted_min_scalar(const double* c, const double* shift, std::size_t n,
                          std::size_t* argmin) {
  double best = c[0] - shift[0];
  std::size_t arg = 0;
  for (std::size_t j = 1; j < n; ++j) {
    const double v = c[j] - shift[j];
    if (v < best) {
      best = v;
      arg = j;
    }
  }
  if (argmin) *argmin = arg;
  return best;
}

void squared_distances_scalar(const double* y, const double* z, std::size_t dim,
                              std::size_t m, std::size_t stride, double* out) {
  for (std::size_t j = 0; j < m; ++j) out[j] = 0.0;
  for (std::size_t a = 0; a < dim; ++a) {
    const double ya = y[a];
    const double* za = z + a * stride;
    for (std::size_t j = 0; j < m; ++j) {
      const double d = ya - za[j];
      out[j] = out[j] + d * d;
    }
  }
}

}  // namespace

const KernelTable& scalar() {
  static const KernelTable table{"scalar", dot_scalar, axpy_scalar, shifted_min_scalar,
                                 squared_distances_scalar};
  return table;
}

}  // namespace walign::kernels
