#include <atomic>
#include <cstdlib>

#include "kernels_impl.hpp"

namespace vortexlab::kernels {
namespace {

bool cpu_has_avx2() noexcept {
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* by_name(std::string_view name) noexcept {
  if (name == "scalar") return &scalar_table();
  if (name == "avx2") return avx2_table();
  if (name == "neon") return neon_table();
  return nullptr;
}

const KernelTable* pick_default() noexcept {
  if (const char* env = std::getenv("VORTEXLAB_KERNELS")) {
    if (const KernelTable* t = by_name(env)) return t;
  }
  if (const KernelTable* t = avx2_table()) return t;
  if (const KernelTable* t = neon_table()) return t;
  return &scalar_table();
}

std::atomic<const KernelTable*>& slot() noexcept {
  static std::atomic<const KernelTable*> current{pick_default()};
  return current;
}

}  // namespace

const KernelTable* avx2_table() noexcept {
  static const KernelTable* table =
      cpu_has_avx2() ? detail::avx2_table_compiled() : nullptr;
  return table;
}

// Advanced SIMD is mandatory on AArch64, so compiled means supported.
const KernelTable* neon_table() noexcept {
  return detail::neon_table_compiled();
}

const KernelTable& active() noexcept {
  return *slot().load(std::memory_order_acquire);
}

bool select(std::string_view name) noexcept {
  const KernelTable* t = by_name(name);
  if (t == nullptr) return false;
  slot().store(t, std::memory_order_release);
  return true;
}

}  // namespace vortexlab::kernels
