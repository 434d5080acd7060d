#include "adnet/kernels/kernels.hpp"

#if defined(__aarch64__) && defined(__ARM_NEON)

#include <arm_neon.h>

#include <cmath>

namespace adnet::kernels::detail {
namespace {

void axpy_neon(double* y, double a, const double* x, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
}

void lincomb_neon(double* out, const double* y, double a, const double* x,
                  std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(out + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) out[i] = std::fma(a, x[i], y[i]);
}

void rk4_finish_neon(double* y, double dt, const double* k1, const double* k2,
                     const double* k3, const double* k4, std::size_t n) {
  const double h = dt / 6.0;
  const float64x2_t vh = vdupq_n_f64(h);
  const float64x2_t two = vdupq_n_f64(2.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t acc = vaddq_f64(vld1q_f64(k1 + i), vld1q_f64(k4 + i));
    acc = vfmaq_f64(acc, two, vaddq_f64(vld1q_f64(k2 + i), vld1q_f64(k3 + i)));
    vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), vh, acc));
  }
  for (; i < n; ++i) y[i] += h * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
}

void generator_panel_neon(const double* gen, std::size_t states,
                          const double* in, double* out, std::size_t cols) {
  for (std::size_t s = 0; s < states; ++s) {
    double* row = out + s * cols;
    const double* g = gen + s * states;
    std::size_t q = 0;
    for (; q + 2 <= cols; q += 2) {
      float64x2_t acc = vdupq_n_f64(0.0);
      for (std::size_t r = 0; r < states; ++r)
        acc = vfmaq_f64(acc, vdupq_n_f64(g[r]), vld1q_f64(in + r * cols + q));
      vst1q_f64(row + q, acc);
    }
    for (; q < cols; ++q) {
      double acc = 0.0;
      for (std::size_t r = 0; r < states; ++r) acc = std::fma(g[r], in[r * cols + q], acc);
      row[q] = acc;
    }
  }
}

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vfmaq_f64(acc, vld1q_f64(a + i), vld1q_f64(b + i));
  double total = vaddvq_f64(acc);
  for (; i < n; ++i) total += a[i] * b[i];
  return total;
}

double l1_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vabdq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  double total = vaddvq_f64(acc);
  for (; i < n; ++i) total += std::abs(a[i] - b[i]);
  return total;
}

double sum_neon(const double* a, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vld1q_f64(a + i));
  double total = vaddvq_f64(acc);
  for (; i < n; ++i) total += a[i];
  return total;
}

const KernelTable table{axpy_neon, lincomb_neon, rk4_finish_neon,
                        generator_panel_neon, dot_neon, l1_neon, sum_neon};

}  // namespace

const KernelTable* neon_table() noexcept { return &table; }

}  // namespace adnet::kernels::detail

#else

namespace adnet::kernels::detail {
const KernelTable* neon_table() noexcept { return nullptr; }
}  // namespace adnet::kernels::detail

#endif
