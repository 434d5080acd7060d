#pragma once

// Dense arithmetic kernels behind the pair-density integrator, the field
// reductions and the discrepancy observables. Each kernel has a scalar
// reference implementation and, where the target supports it, an AVX2+FMA
// (x86-64) or NEON (aarch64) variant. The variant is chosen once at startup
// from the running CPU; tests pin each variant and compare it against the
// scalar reference.

#include <cstddef>
#include <span>
#include <string_view>

namespace adnet::kernels {

enum class Isa { Scalar, Avx2, Neon };

std::string_view isa_name(Isa isa) noexcept;

/// True when the variant was compiled in and the CPU can run it.
bool isa_supported(Isa isa) noexcept;

/// Best supported variant on this machine.
Isa detect_isa() noexcept;

Isa active_isa() noexcept;

/// Pins the kernel variant (process-wide). Throws InvalidArgument when the
/// variant is not supported here.
void set_isa(Isa isa);

/// y += a * x
void axpy(std::span<double> y, double a, std::span<const double> x);

/// out = y + a * x
void lincomb(std::span<double> out, std::span<const double> y, double a,
             std::span<const double> x);

/// y += dt/6 * (k1 + 2 k2 + 2 k3 + k4)
void rk4_finish(std::span<double> y, double dt, std::span<const double> k1,
                std::span<const double> k2, std::span<const double> k3,
                std::span<const double> k4);

/// out[s][q] = sum_r gen[s][r] * in[r][q] for an S x S matrix acting on an
/// S x Q panel (all row-major).
void generator_panel(std::span<const double> gen, std::size_t states,
                     std::span<const double> in, std::span<double> out,
                     std::size_t columns);

double dot(std::span<const double> a, std::span<const double> b);

double l1_distance(std::span<const double> a, std::span<const double> b);

double sum(std::span<const double> a);

/// Function table of one variant. Exposed so equivalence tests can call a
/// specific variant without touching the process-wide selection.
struct KernelTable {
  void (*axpy)(double*, double, const double*, std::size_t);
  void (*lincomb)(double*, const double*, double, const double*, std::size_t);
  void (*rk4_finish)(double*, double, const double*, const double*,
                     const double*, const double*, std::size_t);
  void (*generator_panel)(const double*, std::size_t, const double*, double*,
                          std::size_t);
  double (*dot)(const double*, const double*, std::size_t);
  double (*l1_distance)(const double*, const double*, std::size_t);
  double (*sum)(const double*, std::size_t);
};

/// Table for a variant; nullptr when not compiled in.
const KernelTable* table_for(Isa isa) noexcept;

namespace detail {
extern const KernelTable scalar_table;
const KernelTable* avx2_table() noexcept;
const KernelTable* neon_table() noexcept;
}  // namespace detail

}  // namespace adnet::kernels
