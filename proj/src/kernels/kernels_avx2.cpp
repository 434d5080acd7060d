// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.

#include "adnet/kernels/kernels.hpp"

#if defined(ADNET_HAVE_AVX2)

#include <immintrin.h>

#include <cmath>

namespace adnet::kernels::detail {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

void axpy_avx2(double* y, double a, const double* x, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vy = _mm256_loadu_pd(y + i);
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy));
  }
  for (; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
}

void lincomb_avx2(double* out, const double* y, double a, const double* x,
                  std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vy = _mm256_loadu_pd(y + i);
    _mm256_storeu_pd(out + i,
                     _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy));
  }
  for (; i < n; ++i) out[i] = std::fma(a, x[i], y[i]);
}

void rk4_finish_avx2(double* y, double dt, const double* k1, const double* k2,
                     const double* k3, const double* k4, std::size_t n) {
  const double h = dt / 6.0;
  const __m256d vh = _mm256_set1_pd(h);
  const __m256d two = _mm256_set1_pd(2.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d acc = _mm256_add_pd(_mm256_loadu_pd(k1 + i), _mm256_loadu_pd(k4 + i));
    const __m256d mid = _mm256_add_pd(_mm256_loadu_pd(k2 + i), _mm256_loadu_pd(k3 + i));
    acc = _mm256_fmadd_pd(two, mid, acc);
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(vh, acc, _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += h * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
}

void generator_panel_avx2(const double* gen, std::size_t states,
                          const double* in, double* out, std::size_t cols) {
  for (std::size_t s = 0; s < states; ++s) {
    double* row = out + s * cols;
    const double* g = gen + s * states;
    std::size_t q = 0;
    for (; q + 8 <= cols; q += 8) {
      __m256d acc0 = _mm256_setzero_pd();
      __m256d acc1 = _mm256_setzero_pd();
      for (std::size_t r = 0; r < states; ++r) {
        const __m256d vg = _mm256_set1_pd(g[r]);
        const double* src = in + r * cols + q;
        acc0 = _mm256_fmadd_pd(vg, _mm256_loadu_pd(src), acc0);
        acc1 = _mm256_fmadd_pd(vg, _mm256_loadu_pd(src + 4), acc1);
      }
      _mm256_storeu_pd(row + q, acc0);
      _mm256_storeu_pd(row + q + 4, acc1);
    }
    for (; q + 4 <= cols; q += 4) {
      __m256d acc = _mm256_setzero_pd();
      for (std::size_t r = 0; r < states; ++r)
        acc = _mm256_fmadd_pd(_mm256_set1_pd(g[r]),
                              _mm256_loadu_pd(in + r * cols + q), acc);
      _mm256_storeu_pd(row + q, acc);
    }
    for (; q < cols; ++q) {
      double acc = 0.0;
      for (std::size_t r = 0; r < states; ++r) acc = std::fma(g[r], in[r * cols + q], acc);
      row[q] = acc;
    }
  }
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double l1_avx2(const double* a, const double* b, std::size_t n) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_add_pd(acc, _mm256_andnot_pd(sign, d));
  }
  double total = hsum(acc);
  for (; i < n; ++i) total += std::abs(a[i] - b[i]);
  return total;
}

double sum_avx2(const double* a, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
  double total = hsum(acc);
  for (; i < n; ++i) total += a[i];
  return total;
}

const KernelTable table{axpy_avx2,     lincomb_avx2, rk4_finish_avx2,
                        generator_panel_avx2, dot_avx2,     l1_avx2,
                        sum_avx2};

}  // namespace

const KernelTable* avx2_table() noexcept { return &table; }

}  // namespace adnet::kernels::detail

#else

namespace adnet::kernels::detail {
const KernelTable* avx2_table() noexcept { return nullptr; }
}  // namespace adnet::kernels::detail

#endif
