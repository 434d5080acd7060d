#include "adnet/kernels/kernels.hpp"

#include <cmath>

namespace adnet::kernels::detail {
namespace {

void axpy_scalar(double* y, double a, const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void lincomb_scalar(double* out, const double* y, double a, const double* x,
                    std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = y[i] + a * x[i];
}

void rk4_finish_scalar(double* y, double dt, const double* k1, const double* k2,
                       const double* k3, const double* k4, std::size_t n) {
  const double h = dt / 6.0;
  for (std::size_t i = 0; i < n; ++i)
    y[i] += h * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

void generator_panel_scalar(const double* gen, std::size_t states,
                            const double* in, double* out, std::size_t cols) {
  for (std::size_t s = 0; s < states; ++s) {
    double* row = out + s * cols;
    for (std::size_t q = 0; q < cols; ++q) row[q] = 0.0;
    for (std::size_t r = 0; r < states; ++r) {
      const double g = gen[s * states + r];
      if (g == 0.0) continue;
      const double* src = in + r * cols;
      for (std::size_t q = 0; q < cols; ++q) row[q] += g * src[q];
    }
  }
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double l1_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += std::abs(a[i] - b[i]);
  return acc;
}

double sum_scalar(const double* a, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i];
  return acc;
}

}  // namespace

const KernelTable scalar_table{axpy_scalar,     lincomb_scalar,
                               rk4_finish_scalar, generator_panel_scalar,
                               dot_scalar,      l1_scalar,
                               sum_scalar};

}  // namespace adnet::kernels::detail
