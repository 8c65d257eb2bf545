#include "fprune/kernels.hpp"

namespace fprune::kernels::detail {
namespace {

double sq_l2(const float* a, const float* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    acc += d * d;
  }
  return acc;
}

double sq_l2_mixed(const float* a, const double* c, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = static_cast<double>(a[i]) - c[i];
    acc += d * d;
  }
  return acc;
}

double dot(const float* a, const float* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  return acc;
}

double sq_norm(const float* a, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = a[i];
    acc += v * v;
  }
  return acc;
}

double l1_norm(const float* a, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += a[i] < 0.0f ? -static_cast<double>(a[i]) : static_cast<double>(a[i]);
  }
  return acc;
}

void accumulate(double* acc, const float* a, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] += a[i];
}

constexpr KernelTable kScalar{Isa::scalar, sq_l2,   sq_l2_mixed, dot,
                              sq_norm,     l1_norm, accumulate};

}  // namespace

const KernelTable& scalar_table() noexcept { return kScalar; }

}  // namespace fprune::kernels::detail
