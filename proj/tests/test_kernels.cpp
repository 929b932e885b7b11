#include <cmath>
#include <cstdlib>
#include <string>
#include <random>
#include <vector>

#include "doctest.h"
#include "walign/kernels.hpp"

using walign::kernels::KernelTable;

namespace {

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n, double lo = -3.0, double hi = 3.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

const KernelTable* simd() { return walign::kernels::avx2(); }

}  // namespace

TEST_CASE("scalar kernels against direct loops") {
  const auto& k = walign::kernels::scalar();
  std::mt19937_64 rng(11);
  for (std::size_t n : {1u, 2u, 5u, 17u, 64u}) {
    const auto a = random_vector(rng, n), b = random_vector(rng, n);
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    CHECK(k.dot(a.data(), b.data(), n) == doctest::Approx(s).epsilon(1e-14));

    auto y = b;
    k.axpy(0.75, a.data(), y.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(y[i] == doctest::Approx(b[i] + 0.75 * a[i]));

    std::size_t arg = 99;
    const double m = k.shifted_min(a.data(), b.data(), n, &arg);
    std::size_t want = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (a[i] - b[i] < a[want] - b[want]) want = i;
    CHECK(arg == want);
    CHECK(m == a[want] - b[want]);
  }
}

TEST_CASE("shifted_min reports the first of tied minima") {
  const std::vector<double> c{3, 1, 2, 1, 1, 5, 1, 0.5, 0.5, 7};
  const std::vector<double> z(c.size(), 0.0);
  for (const KernelTable* k : {&walign::kernels::scalar(), simd()}) {
    if (!k) continue;
    std::size_t arg = 0;
    CHECK(k->shifted_min(c.data(), z.data(), c.size(), &arg) == 0.5);
    CHECK(arg == 7);
    CHECK(k->shifted_min(c.data(), z.data(), 7, &arg) == 1.0);
    CHECK(arg == 1);
  }
}

TEST_CASE("avx2 kernels match the scalar reference") {
  const KernelTable* v = simd();
  if (!v) {
    MESSAGE("AVX2 kernels unavailable on this machine; equivalence not exercised");
    return;
  }
  const auto& s = walign::kernels::scalar();
  std::mt19937_64 rng(12);
  for (std::size_t n = 1; n <= 67; ++n) {
    const auto a = random_vector(rng, n), b = random_vector(rng, n);
    double mag = 0;
    for (std::size_t i = 0; i < n; ++i) mag += std::abs(a[i] * b[i]);
    CHECK(std::abs(v->dot(a.data(), b.data(), n) - s.dot(a.data(), b.data(), n)) <= 4e-16 * n * mag);

    auto y1 = b, y2 = b;
    s.axpy(-1.3, a.data(), y1.data(), n);
    v->axpy(-1.3, a.data(), y2.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(y1[i] - y2[i]) <= 1e-15 * (1 + std::abs(y1[i])));

    // Minima are exact: no rounding beyond the shared subtraction.
    std::size_t i1 = 0, i2 = 0;
    CHECK(v->shifted_min(a.data(), b.data(), n, &i2) == s.shifted_min(a.data(), b.data(), n, &i1));
    CHECK(i1 == i2);
  }
  for (std::size_t dim : {1u, 2u, 3u}) {
    for (std::size_t m : {1u, 3u, 4u, 9u, 33u}) {
      const auto y = random_vector(rng, dim);
      const std::size_t stride = m + 2;
      const auto z = random_vector(rng, dim * stride);
      std::vector<double> o1(m), o2(m);
      s.squared_distances(y.data(), z.data(), dim, m, stride, o1.data());
      v->squared_distances(y.data(), z.data(), dim, m, stride, o2.data());
      CHECK(o1 == o2);
    }
  }
}

TEST_CASE("active table honours the scalar override") {
  const char* env = std::getenv("WALIGN_KERNELS");
  const std::string name = walign::kernels::active().name;
  if (env && std::string(env) == "scalar")
    CHECK(name == "scalar");
  else
    CHECK(name == (simd() ? "avx2" : "scalar"));
}
