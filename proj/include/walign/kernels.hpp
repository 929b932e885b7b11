#pragma once

// Data-parallel inner loops shared by the simplex solver, the c-transforms
// and cost construction. Each kernel has a scalar reference implementation
// and, on x86-64, an AVX2 variant selected once at startup.

#include <cstddef>
#include <span>

namespace walign::kernels {

struct KernelTable {
  const char* name;

  // Sum of a[i] * b[i].
  double (*dot)(const double* a, const double* b, std::size_t n);

  // y[i] += alpha * x[i].
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);

  // min_j (c[j] - shift[j]); the first index attaining the minimum is
  // written to *argmin when argmin is non-null. n must be positive.
  double (*shifted_min)(const double* c, const double* shift, std::size_t n,
                        std::size_t* argmin);

  // out[j] = sum_a (y[a] - z[a * stride + j])^2 for j < m. z holds the
  // target coordinates coordinate-major: row a, column j.
  void (*squared_distances)(const double* y, const double* z, std::size_t dim,
                            std::size_t m, std::size_t stride, double* out);
};

const KernelTable& scalar();

// nullptr when the build has no AVX2 translation unit or the CPU lacks
// AVX2/FMA.
const KernelTable* avx2();

// The table used by the library. Defaults to the widest supported variant;
// setting WALIGN_KERNELS=scalar in the environment forces the reference path.
const KernelTable& active();

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

inline double shifted_min(std::span<const double> c, std::span<const double> shift,
                          std::size_t* argmin = nullptr) {
  return active().shifted_min(c.data(), shift.data(), c.size(), argmin);
}

}  // namespace walign::kernels
