#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "lpwalk/analytic_limits.hpp"
#include "lpwalk/metric_space.hpp"

namespace lpwalk {

/// A relation between the points of A and B.
struct Correspondence {
  std::size_t size_a = 0;
  std::size_t size_b = 0;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;

  /// Every point of A and every point of B appears in some pair.
  bool is_total() const;

  static Correspondence identity(std::size_t k);
};

/// max over related (a, b), (a', b') of |d_A(a, a') - d_B(b, b')|.
/// Throws std::invalid_argument unless corr is total and fits A and B.
double distortion(const Correspondence& corr, const FiniteMetricSpace& a,
                  const FiniteMetricSpace& b);

inline constexpr std::size_t kGhExactMaxPoints = 5;

/// Exact Gromov-Hausdorff distance, half the least distortion over
/// correspondences. Distortion only grows when pairs are added, so the search
/// runs over unions graph(f) + graph(g)^T of maps f: A -> B, g: B -> A (every
/// correspondence contains one), with branch-and-bound on the running
/// distortion. Refuses spaces with more than kGhExactMaxPoints points.
double gh_exact_small(const FiniteMetricSpace& a, const FiniteMetricSpace& b);

/// |diam A - diam B| / 2, a lower bound for the GH distance.
double gh_lower_bound_diameter(const FiniteMetricSpace& a, const FiniteMetricSpace& b);

struct GhUpperBound {
  /// max over labeled pairs |d_path(i, j) - r(t_i, t_j)|
  double sup_grid = 0.0;
  /// sigma M_p^{1/p} sqrt(2/m), m = number of grid cells
  double allowance = 0.0;
  /// 2 (sup_grid + allowance)
  double paper_bound = 0.0;
  /// (sup_grid + allowance) / 2, from the correspondence t -> cell label
  double corr_bound = 0.0;
};

/// Upper bounds on GH(path, limit space). Throws for unlabeled spaces or labels
/// outside [0, 1].
GhUpperBound gh_upper_bound_to_limit(const FiniteMetricSpace& path, const LimitSpace& limit);

/// The two-point spaces {0, e_1} and {0, (a^{1/p}, (1-a)^{1/p}, 0, ...)} under
/// the l_p metric. The second distance is evaluated in extended precision and
/// rounded once.
std::pair<FiniteMetricSpace, FiniteMetricSpace> two_point_example(double p, double a);

}  // namespace lpwalk
