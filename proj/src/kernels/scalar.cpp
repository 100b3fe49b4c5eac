#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string_view>

#include "scalar_ops.hpp"

namespace lpwalk {

PowerSpec PowerSpec::make(double p) {
  PowerSpec spec;
  spec.p = p;
  spec.kind = PowerKind::General;
  spec.whole = 0;
  if (p >= 0.0 && p <= 16.0) {
    const double twice = 2.0 * p;
    if (twice == std::floor(twice)) {
      const int t = static_cast<int>(twice);
      spec.whole = t / 2;
      spec.kind = (t % 2 == 0) ? PowerKind::Integer : PowerKind::HalfInteger;
    }
  }
  return spec;
}

namespace detail {

double scalar_abs_max(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double scalar_pow_sum(std::span<const double> v, const PowerSpec& pw, double scale) {
  double sum = 0.0;
  for (double x : v) sum += abs_pow(std::abs(x * scale), pw);
  return sum;
}

double scalar_diff_abs_max(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double scalar_diff_pow_sum(std::span<const double> a, std::span<const double> b, const PowerSpec& pw,
                           double scale) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += abs_pow(std::abs((a[i] - b[i]) * scale), pw);
  return sum;
}

void scalar_axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

StepSums scalar_decomposition_step(std::span<double> s, std::span<const double> x,
                                   const PowerSpec& pw, const PowerSpec& psi_pw) {
  StepSums out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    out.psi_dot += x[i] * psi(s[i], psi_pw);
    s[i] += x[i];
    out.pow_sum += abs_pow(std::abs(s[i]), pw);
  }
  return out;
}

}  // namespace detail

const KernelTable& scalar_kernels() {
  static const KernelTable table{
      "scalar",
      detail::scalar_abs_max,
      detail::scalar_pow_sum,
      detail::scalar_diff_abs_max,
      detail::scalar_diff_pow_sum,
      detail::scalar_axpy,
      detail::scalar_decomposition_step,
  };
  return table;
}

const KernelTable* avx2_kernels() {
#if defined(LPWALK_HAVE_AVX2)
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported ? &detail::kAvx2Table : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active_kernels() {
  static const KernelTable& chosen = []() -> const KernelTable& {
    const char* env = std::getenv("LPWALK_SIMD");
    if (env != nullptr && std::string_view(env) == "scalar") return scalar_kernels();
    if (const KernelTable* t = avx2_kernels()) return *t;
    return scalar_kernels();
  }();
  return chosen;
}

}  // namespace lpwalk
