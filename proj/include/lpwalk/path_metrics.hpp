#pragma once

#include <cstddef>
#include <span>

#include "lpwalk/analytic_limits.hpp"
#include "lpwalk/metric_space.hpp"
#include "lpwalk/walk_engine.hpp"

namespace lpwalk {

/// (sum_i |v_i|^p)^{1/p}, with a power-of-two rescale by the largest entry so
/// tiny or huge coordinates neither underflow nor overflow.
double lp_norm(std::span<const double> v, double p);

/// sum_i |v_i|^p, rescaled the same way as lp_norm.
double lp_norm_pow(std::span<const double> v, double p);

/// ‖a - b‖_p. Accumulates unscaled and redoes the sum rescaled only when the
/// unscaled sum leaves the safe range.
double lp_distance(std::span<const double> a, std::span<const double> b, double p);

/// (m + 1)-point space of grid positions with dist[i][j] = ‖point_j - point_i‖_p
/// and labels t_i.
FiniteMetricSpace path_metric_space(const GridSnapshot& snapshot);

/// (m + 1) points i/m of the limit space.
FiniteMetricSpace limit_sample_space(std::size_t m, const LimitSpace& space);

}  // namespace lpwalk
