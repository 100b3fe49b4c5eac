#include "lpwalk/path_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lpwalk/kernels.hpp"

namespace lpwalk {

namespace {

// Clamped so that both 2^-e and 2^e stay finite normals.
int rescale_exponent(double max_abs) {
  return std::clamp(std::ilogb(max_abs), -1020, 1020);
}

constexpr double kSafeLow = 1e-280;
constexpr double kSafeHigh = 1e280;

void check_p(double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw std::invalid_argument("p must be finite and >= 1");
}

}  // namespace

double lp_norm(std::span<const double> v, double p) {
  check_p(p);
  const KernelTable& k = active_kernels();
  const double top = k.abs_max(v);
  if (top == 0.0) return 0.0;
  const int e = rescale_exponent(top);
  const double sum = k.pow_sum(v, PowerSpec::make(p), std::ldexp(1.0, -e));
  return std::ldexp(std::pow(sum, 1.0 / p), e);
}

double lp_norm_pow(std::span<const double> v, double p) {
  check_p(p);
  const KernelTable& k = active_kernels();
  const double top = k.abs_max(v);
  if (top == 0.0) return 0.0;
  const int e = rescale_exponent(top);
  const double sum = k.pow_sum(v, PowerSpec::make(p), std::ldexp(1.0, -e));
  // saturates to inf when the p-th power itself is out of range
  return sum * std::pow(2.0, e * p);
}

double lp_distance(std::span<const double> a, std::span<const double> b, double p) {
  if (a.size() != b.size()) throw std::invalid_argument("lp_distance: size mismatch");
  const KernelTable& k = active_kernels();
  const PowerSpec pw = PowerSpec::make(p);
  const double raw = k.diff_pow_sum(a, b, pw, 1.0);
  if (raw >= kSafeLow && raw <= kSafeHigh) return std::pow(raw, 1.0 / p);
  const double top = k.diff_abs_max(a, b);
  if (top == 0.0) return 0.0;
  const int e = rescale_exponent(top);
  const double sum = k.diff_pow_sum(a, b, pw, std::ldexp(1.0, -e));
  return std::ldexp(std::pow(sum, 1.0 / p), e);
}

FiniteMetricSpace path_metric_space(const GridSnapshot& snapshot) {
  const std::size_t k = snapshot.size();
  const double p = snapshot.config.p;
  FiniteMetricSpace space(k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      space.set(i, j, lp_distance(snapshot.point(i), snapshot.point(j), p));
    }
  }
  space.set_labels(snapshot.times);
  return space;
}

FiniteMetricSpace limit_sample_space(std::size_t m, const LimitSpace& space) {
  if (m < 1) throw std::invalid_argument("limit_sample_space: m must be >= 1");
  FiniteMetricSpace out(m + 1);
  std::vector<double> times(m + 1);
  for (std::size_t i = 0; i <= m; ++i) times[i] = static_cast<double>(i) / static_cast<double>(m);
  for (std::size_t i = 0; i <= m; ++i) {
    for (std::size_t j = 0; j < i; ++j) out.set(i, j, limit_distance(times[i], times[j], space));
  }
  out.set_labels(std::move(times));
  return out;
}

}  // namespace lpwalk
