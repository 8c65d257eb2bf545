#include <cstdlib>
#include <string>

#include "fprune/error.hpp"
#include "fprune/kernels.hpp"

namespace fprune::kernels {
namespace {

bool cpu_supports(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(FPRUNE_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::neon:
#if defined(FPRUNE_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& select_active() {
  if (const char* env = std::getenv("FPRUNE_KERNELS"); env != nullptr && *env != '\0') {
    const std::string want(env);
    if (want != "auto") {
      for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon}) {
        if (want == isa_name(isa)) return table(isa);
      }
      throw Error(Errc::invalid_argument, "FPRUNE_KERNELS: unknown kernel set '" + want + "'");
    }
  }
  return table(available_isas().back());
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
  }
  return "unknown";
}

std::vector<Isa> available_isas() {
  std::vector<Isa> out{Isa::scalar};
  for (Isa isa : {Isa::avx2, Isa::neon}) {
    if (cpu_supports(isa)) out.push_back(isa);
  }
  return out;
}

const KernelTable& table(Isa isa) {
  if (!cpu_supports(isa)) {
    throw Error(Errc::invalid_argument,
                "kernel set '" + std::string(isa_name(isa)) + "' is not available on this machine");
  }
  switch (isa) {
#if defined(FPRUNE_HAVE_AVX2)
    case Isa::avx2: return detail::avx2_table();
#endif
#if defined(FPRUNE_HAVE_NEON)
    case Isa::neon: return detail::neon_table();
#endif
    default: return detail::scalar_table();
  }
}

const KernelTable& active() {
  static const KernelTable& chosen = select_active();
  return chosen;
}

}  // namespace fprune::kernels
