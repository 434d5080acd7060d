#include <atomic>
#include <cassert>

#include "adnet/error.hpp"
#include "adnet/kernels/kernels.hpp"

namespace adnet::kernels {
namespace {

bool cpu_has_avx2() noexcept {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{table_for(detect_isa())};
  return table;
}

std::atomic<Isa>& current_isa() {
  static std::atomic<Isa> isa{detect_isa()};
  return isa;
}

const KernelTable& active() { return *current().load(std::memory_order_relaxed); }

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "unknown";
}

bool isa_supported(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar: return true;
    case Isa::Avx2: return detail::avx2_table() != nullptr && cpu_has_avx2();
    case Isa::Neon: return detail::neon_table() != nullptr;
  }
  return false;
}

Isa detect_isa() noexcept {
  if (isa_supported(Isa::Avx2)) return Isa::Avx2;
  if (isa_supported(Isa::Neon)) return Isa::Neon;
  return Isa::Scalar;
}

const KernelTable* table_for(Isa isa) noexcept {
  if (!isa_supported(isa)) return nullptr;
  switch (isa) {
    case Isa::Scalar: return &detail::scalar_table;
    case Isa::Avx2: return detail::avx2_table();
    case Isa::Neon: return detail::neon_table();
  }
  return nullptr;
}

Isa active_isa() noexcept { return current_isa().load(); }

void set_isa(Isa isa) {
  const KernelTable* table = table_for(isa);
  if (table == nullptr)
    fail(ErrorCode::InvalidArgument,
         "kernel variant not supported here: " + std::string(isa_name(isa)));
  current().store(table);
  current_isa().store(isa);
}

void axpy(std::span<double> y, double a, std::span<const double> x) {
  assert(y.size() == x.size());
  active().axpy(y.data(), a, x.data(), y.size());
}

void lincomb(std::span<double> out, std::span<const double> y, double a,
             std::span<const double> x) {
  assert(out.size() == y.size() && y.size() == x.size());
  active().lincomb(out.data(), y.data(), a, x.data(), out.size());
}

void rk4_finish(std::span<double> y, double dt, std::span<const double> k1,
                std::span<const double> k2, std::span<const double> k3,
                std::span<const double> k4) {
  active().rk4_finish(y.data(), dt, k1.data(), k2.data(), k3.data(), k4.data(),
                      y.size());
}

void generator_panel(std::span<const double> gen, std::size_t states,
                     std::span<const double> in, std::span<double> out,
                     std::size_t columns) {
  assert(gen.size() == states * states);
  assert(in.size() == states * columns && out.size() == states * columns);
  active().generator_panel(gen.data(), states, in.data(), out.data(), columns);
}

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return active().dot(a.data(), b.data(), a.size());
}

double l1_distance(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return active().l1_distance(a.data(), b.data(), a.size());
}

double sum(std::span<const double> a) { return active().sum(a.data(), a.size()); }

}  // namespace adnet::kernels
