#pragma once

// Data-parallel inner loops used by clustering, silhouette, baselines and
// analysis. Every variant accumulates in double; the scalar table is the
// reference the SIMD tables are tested against.

#include <cstddef>
#include <string_view>
#include <vector>

namespace fprune::kernels {

enum class Isa { scalar, avx2, neon };

struct KernelTable {
  Isa isa;
  // sum_i (a[i] - b[i])^2
  double (*sq_l2)(const float* a, const float* b, std::size_t n);
  // sum_i (a[i] - c[i])^2 with a double-precision second operand (centroids)
  double (*sq_l2_mixed)(const float* a, const double* c, std::size_t n);
  double (*dot)(const float* a, const float* b, std::size_t n);
  double (*sq_norm)(const float* a, std::size_t n);
  double (*l1_norm)(const float* a, std::size_t n);
  // acc[i] += a[i]
  void (*accumulate)(double* acc, const float* a, std::size_t n);
};

std::string_view isa_name(Isa isa) noexcept;

/// Variants compiled into this binary that the running CPU supports.
/// The scalar table is always first.
std::vector<Isa> available_isas();

/// Throws fprune::Error if `isa` is not available on this machine.
const KernelTable& table(Isa isa);

/// Table chosen once per process: the widest available ISA, unless the
/// FPRUNE_KERNELS environment variable names another one ("scalar", "avx2",
/// "neon").
const KernelTable& active();

namespace detail {
const KernelTable& scalar_table() noexcept;
#if defined(FPRUNE_HAVE_AVX2)
const KernelTable& avx2_table() noexcept;
#endif
#if defined(FPRUNE_HAVE_NEON)
const KernelTable& neon_table() noexcept;
#endif
}  // namespace detail

}  // namespace fprune::kernels
