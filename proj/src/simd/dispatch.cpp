#include "tsgp/simd/dispatch.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace tsgp::simd {
namespace {

bool cpu_has_avx2() {
#if defined(TSGP_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa detect() {
  if (const char* env = std::getenv("TSGP_SIMD")) {
    const std::string want(env);
    if (want == "scalar") return Isa::kScalar;
    if (want == "avx2" && available(Isa::kAvx2)) return Isa::kAvx2;
    if (want == "neon" && available(Isa::kNeon)) return Isa::kNeon;
  }
  if (available(Isa::kAvx2)) return Isa::kAvx2;
  if (available(Isa::kNeon)) return Isa::kNeon;
  return Isa::kScalar;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

}  // namespace

bool available(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return true;
    case Isa::kAvx2: {
      static const bool ok = detail::avx2_ops() != nullptr && cpu_has_avx2();
      return ok;
    }
    case Isa::kNeon:
      return detail::neon_ops() != nullptr;
  }
  return false;
}

const KernelOps& ops(Isa isa) {
  if (!available(isa)) throw std::invalid_argument(std::string("SIMD variant unavailable: ") + name(isa));
  switch (isa) {
    case Isa::kAvx2:
      return *detail::avx2_ops();
    case Isa::kNeon:
      return *detail::neon_ops();
    case Isa::kScalar:
      break;
  }
  return detail::scalar_ops();
}

Isa active() { return current().load(std::memory_order_relaxed); }

const KernelOps& active_ops() { return ops(active()); }

void set_active(Isa isa) {
  if (!available(isa)) throw std::invalid_argument(std::string("SIMD variant unavailable: ") + name(isa));
  current().store(isa, std::memory_order_relaxed);
}

const char* name(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
    case Isa::kNeon:
      return "neon";
  }
  return "unknown";
}

}  // namespace tsgp::simd
