#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "lpwalk/analytic_limits.hpp"
#include "lpwalk/increments.hpp"
#include "lpwalk/metric_space.hpp"

namespace lpwalk {

/// One simulation: n steps in dimension d with increments d^{-1/p} (xi_1..xi_d),
/// recorded on the grid t_i = i/m.
struct WalkConfig {
  std::uint64_t n = 1;
  std::uint64_t d = 1;
  double p = 2.0;
  IncrementLaw law;
  SeedSpec seed;
  std::uint64_t m = 1;

  static std::uint64_t default_grid(std::uint64_t n) { return n < 512 ? n : 512; }

  /// Throws std::invalid_argument naming the first violated constraint.
  void validate() const;

  /// Stream draw index of coordinate i of step j (j >= 1).
  std::uint64_t draw_index(std::uint64_t j, std::uint64_t i) const { return (j - 1) * d + i; }
  /// Walk index floor(n * i / m) recorded as grid point i.
  std::uint64_t grid_step(std::uint64_t i) const { return (n * i) / m; }
};

/// Normalized walk positions n^{-1/2} S_{floor(n t_i)} at t_i = i/m.
struct GridSnapshot {
  WalkConfig config;
  std::vector<double> times;   // m + 1 entries
  std::vector<double> coords;  // (m + 1) x d, row-major

  std::size_t size() const { return times.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(config.d); }
  std::span<const double> point(std::size_t i) const {
    return {coords.data() + i * dim(), dim()};
  }
  std::span<double> point(std::size_t i) { return {coords.data() + i * dim(), dim()}; }
};

/// Streams n steps keeping O((m + 2) d) memory. Throws ResourceLimitError when
/// (m + 1) d exceeds memory_cap().
GridSnapshot simulate_grid(const WalkConfig& config);

/// T_j and Q_j for j = 0..n, with T_j + Q_j = ||S_j||_p^p.
struct DecompositionTrace {
  double p = 2.0;
  std::vector<double> t;
  std::vector<double> q;
  std::vector<double> norm_pp;  // ||S_j||_p^p as accumulated by the step kernel
  /// ||S_n||_p^p recomputed from the final position through lp_norm_pow.
  double final_norm_pp = 0.0;
};

/// Q_j = Q_{j-1} + p sum_i X_{j,i} psi_p(S_{j-1,i}) with psi_p(s) = s|s|^{p-2},
/// psi_1 = sign and psi_p(0) = 0; T_j = ||S_j||_p^p - Q_j. Q is accumulated
/// with Neumaier compensation.
DecompositionTrace simulate_decomposition(const WalkConfig& config);

/// |‖point_i‖_p^p - t_i^{p/2} sigma^p M_p| for every grid time.
std::vector<double> pointwise_norm_statistic(const GridSnapshot& snapshot, double sigma);

/// Grid version of sup_t |n^{-p/2}‖S_{floor(nt)}‖_p^p - t^{p/2} sigma^p M_p|, with
/// the deterministic term taken at both ends of every cell.
double sup_norm_statistic(const GridSnapshot& snapshot, double sigma);

struct SupDifference {
  /// Max over labeled pairs i <= j and their cell corners.
  double value = 0.0;
  /// Max over labeled pairs only, |d(i, j) - r(t_i, t_j)|.
  double grid_only = 0.0;
};

/// Sup-difference statistic from a labeled path metric space. Cell i is
/// [t_i, t_{i+1}); the last label is a single point.
SupDifference sup_difference_from_space(const FiniteMetricSpace& path, const LimitSpace& space);

/// sup_{s <= t} |n^{-1/2}‖S_{floor(nt)} - S_{floor(ns)}‖_p - sqrt(t - s) sigma M_p^{1/p}|
/// on the m-grid, corners included. O(m^2 d).
double sup_difference_statistic(const GridSnapshot& snapshot, const LimitSpace& space);

/// Rows `i,t_i,coord_index,value`.
void write_snapshot_csv(std::ostream& out, const GridSnapshot& snapshot);

}  // namespace lpwalk
