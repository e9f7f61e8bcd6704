#include "tasq/kernels.hpp"

#include <cstdlib>
#include <cstring>

#if TASQ_KERNELS_HAVE_AVX2
#include <immintrin.h>
#endif

namespace tasq::kernels {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double sum_scalar(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

double sqdist_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

#if TASQ_KERNELS_HAVE_AVX2

namespace {

__attribute__((target("avx2,fma"))) inline double hsum256(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d shuf = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

}  // namespace

__attribute__((target("avx2,fma"))) double dot_avx2(const double* a, const double* b,
                                                    std::size_t n) {
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
  double acc = hsum256(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

__attribute__((target("avx2,fma"))) double sum_avx2(const double* x, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x + i));
  double acc = hsum256(acc0);
  for (; i < n; ++i) acc += x[i];
  return acc;
}

__attribute__((target("avx2,fma"))) double sqdist_avx2(const double* a, const double* b,
                                                       std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc0 = _mm256_fmadd_pd(d, d, acc0);
  }
  double acc = hsum256(acc0);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

__attribute__((target("avx2,fma"))) void axpy_avx2(double alpha, const double* x, double* y,
                                                   std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

bool avx2_supported() {
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

#else

bool avx2_supported() { return false; }

#endif  // TASQ_KERNELS_HAVE_AVX2

namespace {

constexpr Backend kScalarBackend{"scalar", dot_scalar, sum_scalar, sqdist_scalar, axpy_scalar};

#if TASQ_KERNELS_HAVE_AVX2
constexpr Backend kAvx2Backend{"avx2", dot_avx2, sum_avx2, sqdist_avx2, axpy_avx2};
#endif

const Backend& pick_backend() {
  const char* forced = std::getenv("TASQ_KERNELS");
  if (forced != nullptr && std::strcmp(forced, "scalar") == 0) return kScalarBackend;
#if TASQ_KERNELS_HAVE_AVX2
  if (avx2_supported()) return kAvx2Backend;
#endif
  return kScalarBackend;
}

}  // namespace

const Backend& active_backend() {
  static const Backend& backend = pick_backend();
  return backend;
}

}  // namespace tasq::kernels
