#pragma once

#include <cstddef>

// Double-precision inner-loop kernels used by the model training, clustering
// and curve fitting code. A scalar reference implementation always exists;
// on x86-64 an AVX2+FMA variant is selected at runtime when the CPU supports
// it. The two variants are equivalence-tested against each other; they may
// differ by floating-point reassociation only.
namespace tasq::kernels {

// Scalar reference kernels.
double dot_scalar(const double* a, const double* b, std::size_t n);
double sum_scalar(const double* x, std::size_t n);
double sqdist_scalar(const double* a, const double* b, std::size_t n);
void axpy_scalar(double alpha, const double* x, double* y, std::size_t n);

#if defined(__x86_64__) || defined(__i386__)
#define TASQ_KERNELS_HAVE_AVX2 1
double dot_avx2(const double* a, const double* b, std::size_t n);
double sum_avx2(const double* x, std::size_t n);
double sqdist_avx2(const double* a, const double* b, std::size_t n);
void axpy_avx2(double alpha, const double* x, double* y, std::size_t n);
#else
#define TASQ_KERNELS_HAVE_AVX2 0
#endif

// True when the running CPU can execute the AVX2 variants.
bool avx2_supported();

struct Backend {
  const char* name;
  double (*dot)(const double*, const double*, std::size_t);
  double (*sum)(const double*, std::size_t);
  double (*sqdist)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
};

// The backend picked at startup: AVX2 when supported, unless the environment
// variable TASQ_KERNELS=scalar forces the reference path.
const Backend& active_backend();

inline double dot(const double* a, const double* b, std::size_t n) {
  return active_backend().dot(a, b, n);
}
inline double sum(const double* x, std::size_t n) { return active_backend().sum(x, n); }
inline double sqdist(const double* a, const double* b, std::size_t n) {
  return active_backend().sqdist(a, b, n);
}
inline void axpy(double alpha, const double* x, double* y, std::size_t n) {
  active_backend().axpy(alpha, x, y, n);
}

}  // namespace tasq::kernels
