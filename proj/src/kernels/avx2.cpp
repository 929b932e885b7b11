#include <immintrin.h>

#include "walign/kernels.hpp"

namespace walign::kernels {
namespace {

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  acc0 = _mm256_add_pd(acc0, acc1);
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc0);
  double s = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

// Lane-wise running minimum with first-occurrence indices; the final
// reduction breaks value ties by the smaller index so the result matches the
// scalar scan exactly.
double shifted_min_avx2(const double* c, const double* shift, std::size_t n,
                        std::size_t* argmin) {
  if (n < 8) {
    return scalar().shifted_min(c, shift, n, argmin);
  }
  __m256d best = _mm256_sub_pd(_mm256_loadu_pd(c), _mm256_loadu_pd(shift));
  __m256d best_idx = _mm256_setr_pd(0.0, 1.0, 2.0, 3.0);
  __m256d idx = best_idx;
  const __m256d four = _mm256_set1_pd(4.0);
  std::size_t j = 4;
  for (; j + 4 <= n; j += 4) {
    idx = _mm256_add_pd(idx, four);
    const __m256d v = _mm256_sub_pd(_mm256_loadu_pd(c + j), _mm256_loadu_pd(shift + j));
    const __m256d lt = _mm256_cmp_pd(v, best, _CMP_LT_OQ);
    best = _mm256_blendv_pd(best, v, lt);
    best_idx = _mm256_blendv_pd(best_idx, idx, lt);
  }
  alignas(32) double vals[4];
  alignas(32) double idxs[4];
  _mm256_store_pd(vals, best);
  _mm256_store_pd(idxs, best_idx);
  double m = vals[0];
  std::size_t arg = static_cast<std::size_t>(idxs[0]);
  for (int lane = 1; lane < 4; ++lane) {
    const auto li = static_cast<std::size_t>(idxs[lane]);
    if (vals[lane] < m || (vals[lane] == m && li < arg)) {
      m = vals[lane];
      arg = li;
    }
  }
  for (; j < n; ++j) {
    const double v = c[j] - shift[j];
    if (v < m) {
      m = v;
      arg = j;
    }
  }
  if (argmin) *argmin = arg;
  return m;
}

void squared_distances_avx2(const double* y, const double* z, std::size_t dim,
                            std::size_t m, std::size_t stride, double* out) {
  for (std::size_t j = 0; j < m; ++j) out[j] = 0.0;
  for (std::size_t a = 0; a < dim; ++a) {
    const __m256d ya = _mm256_set1_pd(y[a]);
    const double* za = z + a * stride;
    std::size_t j = 0;
    for (; j + 4 <= m; j += 4) {
      const __m256d d = _mm256_sub_pd(ya, _mm256_loadu_pd(za + j));
      _mm256_storeu_pd(out + j, _mm256_add_pd(_mm256_loadu_pd(out + j), _mm256_mul_pd(d, d)));
    }
    for (; j < m; ++j) {
      const double d = y[a] - za[j];
      out[j] = out[j] + d * d;
    }
  }
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable table{"avx2", dot_avx2, axpy_avx2, shifted_min_avx2,
                                 squared_distances_avx2};
  return table;
}

}  // namespace walign::kernels
