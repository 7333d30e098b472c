#include "tsgp/kernels.hpp"

namespace tsgp {

std::string_view to_string(KernelFamily f) {
  switch (f) {
    case KernelFamily::kSqExp:
      return "sqexp";
    case KernelFamily::kSqExpArd:
      return "sqexp_ard";
    case KernelFamily::kMatern32:
      return "matern32";
  }
  return "unknown";
}

KernelFamily parse_kernel_family(std::string_view s) {
  if (s == "sqexp" || s == "SqExp") return KernelFamily::kSqExp;
  if (s == "sqexp_ard" || s == "SqExpArd") return KernelFamily::kSqExpArd;
  if (s == "matern32" || s == "Matern32") return KernelFamily::kMatern32;
  throw ConfigError("unknown kernel family '" + std::string(s) + "'");
}

}  // namespace tsgp
