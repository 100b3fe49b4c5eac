#pragma once

#include <cmath>

#include "lpwalk/kernels.hpp"

// Element-level operations shared by the scalar table and the AVX2 tails, so
// that per-element results agree bit for bit across implementations. They are
// `static` so each translation unit keeps its own copy compiled with its own
// target flags.
namespace lpwalk::detail {

static inline double ipow(double a, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= a;
  return r;
}

/// |a|^p for a >= 0.
static inline double abs_pow(double a, const PowerSpec& pw) {
  switch (pw.kind) {
    case PowerKind::Integer: return ipow(a, pw.whole);
    case PowerKind::HalfInteger: return ipow(a, pw.whole) * std::sqrt(a);
    case PowerKind::General: return std::pow(a, pw.p);
  }
  return std::pow(a, pw.p);
}

static inline double psi(double s, const PowerSpec& psi_pw) {
  if (s == 0.0) return 0.0;
  const double mag = abs_pow(std::abs(s), psi_pw);
  return s > 0.0 ? mag : -mag;
}

double scalar_abs_max(std::span<const double> v);
double scalar_pow_sum(std::span<const double> v, const PowerSpec& pw, double scale);
double scalar_diff_abs_max(std::span<const double> a, std::span<const double> b);
double scalar_diff_pow_sum(std::span<const double> a, std::span<const double> b, const PowerSpec& pw,
                           double scale);
void scalar_axpy(double alpha, std::span<const double> x, std::span<double> y);
StepSums scalar_decomposition_step(std::span<double> s, std::span<const double> x,
                                   const PowerSpec& pw, const PowerSpec& psi_pw);

#if defined(LPWALK_HAVE_AVX2)
extern const KernelTable kAvx2Table;
#endif

}  // namespace lpwalk::detail
