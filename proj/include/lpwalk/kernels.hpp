#pragma once

#include <cstddef>
#include <span>

namespace lpwalk {

enum class PowerKind { Integer, HalfInteger, General };

/// Classifies an exponent so |x|^p can use multiplies (and one sqrt for
/// half-integers) instead of pow(). Exponents above 16 always use pow().
struct PowerSpec {
  double p = 1.0;
  PowerKind kind = PowerKind::Integer;
  int whole = 1;  // p == whole, or p == whole + 0.5 for HalfInteger

  static PowerSpec make(double p);
};

struct StepSums {
  double psi_dot = 0.0;   // sum_i x_i * psi_p(s_prev_i)
  double pow_sum = 0.0;   // sum_i |s_new_i|^p
};

/// One implementation of the arithmetic inner loops. All sums are plain
/// double accumulations; implementations differ only in summation order.
struct KernelTable {
  const char* name;

  double (*abs_max)(std::span<const double> v);
  /// sum_i |v_i * scale|^p
  double (*pow_sum)(std::span<const double> v, const PowerSpec& pw, double scale);
  double (*diff_abs_max)(std::span<const double> a, std::span<const double> b);
  /// sum_i |(a_i - b_i) * scale|^p
  double (*diff_pow_sum)(std::span<const double> a, std::span<const double> b,
                         const PowerSpec& pw, double scale);
  /// y += alpha * x
  void (*axpy)(double alpha, std::span<const double> x, std::span<double> y);
  /// psi_dot from the old s, then s += x, then pow_sum from the new s.
  /// psi_p(s) = sign(s) |s|^{p-1} with psi_p(0) = 0; `psi` is PowerSpec::make(p - 1).
  StepSums (*decomposition_step)(std::span<double> s, std::span<const double> x,
                                 const PowerSpec& pw, const PowerSpec& psi);
};

const KernelTable& scalar_kernels();
/// nullptr when the build or the running CPU lacks AVX2.
const KernelTable* avx2_kernels();

/// Best table for this CPU, chosen once. LPWALK_SIMD=scalar forces the
/// scalar reference.
const KernelTable& active_kernels();

}  // namespace lpwalk
