#include "lpwalk/gh_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace lpwalk {

bool Correspondence::is_total() const {
  std::vector<char> seen_a(size_a, 0), seen_b(size_b, 0);
  for (const auto& [ia, ib] : pairs) {
    if (ia >= size_a || ib >= size_b) return false;
    seen_a[ia] = 1;
    seen_b[ib] = 1;
  }
  return std::all_of(seen_a.begin(), seen_a.end(), [](char c) { return c != 0; }) &&
         std::all_of(seen_b.begin(), seen_b.end(), [](char c) { return c != 0; });
}

Correspondence Correspondence::identity(std::size_t k) {
  Correspondence c{k, k, {}};
  for (std::size_t i = 0; i < k; ++i) c.pairs.emplace_back(i, i);
  return c;
}

double distortion(const Correspondence& corr, const FiniteMetricSpace& a,
                  const FiniteMetricSpace& b) {
  if (corr.size_a != a.size() || corr.size_b != b.size()) {
    throw std::invalid_argument("distortion: correspondence does not match the spaces");
  }
  if (!corr.is_total()) throw std::invalid_argument("distortion: correspondence is not total");
  double dis = 0.0;
  for (const auto& [a1, b1] : corr.pairs)
    for (const auto& [a2, b2] : corr.pairs) dis = std::max(dis, std::abs(a(a1, a2) - b(b1, b2)));
  return dis;
}

namespace {

class GhSearch {
 public:
  GhSearch(const FiniteMetricSpace& a, const FiniteMetricSpace& b) : a_(a), b_(b) {
    // The full product relation has distortion <= max(diam), so the optimum
    // is either that value or something the search finds strictly below it.
    best_ = std::max(a.diameter(), b.diameter());
    pairs_.reserve(a.size() + b.size());
  }

  double run() {
    extend(0, 0.0);
    return best_;
  }

 private:
  // Step s < |A| chooses f(s); afterwards step |A| + t chooses g(t).
  void extend(std::size_t step, double current) {
    const std::size_t ka = a_.size(), kb = b_.size();
    if (step == ka + kb) {
      best_ = std::min(best_, current);
      return;
    }
    const bool choosing_f = step < ka;
    const std::size_t options = choosing_f ? kb : ka;
    for (std::size_t o = 0; o < options; ++o) {
      const std::size_t ia = choosing_f ? step : o;
      const std::size_t ib = choosing_f ? o : step - ka;
      double next = current;
      for (const auto& [pa, pb] : pairs_) {
        next = std::max(next, std::abs(a_(ia, pa) - b_(ib, pb)));
        if (next >= best_) break;
      }
      if (next >= best_) continue;
      pairs_.emplace_back(ia, ib);
      extend(step + 1, next);
      pairs_.pop_back();
      if (best_ == 0.0) return;
    }
  }

  const FiniteMetricSpace& a_;
  const FiniteMetricSpace& b_;
  std::vector<std::pair<std::size_t, std::size_t>> pairs_;
  double best_;
};

}  // namespace

double gh_exact_small(const FiniteMetricSpace& a, const FiniteMetricSpace& b) {
  if (a.size() == 0 || b.size() == 0) throw std::invalid_argument("gh_exact_small: empty space");
  if (a.size() > kGhExactMaxPoints || b.size() > kGhExactMaxPoints) {
    throw std::invalid_argument("gh_exact_small: spaces are limited to " +
                                std::to_string(kGhExactMaxPoints) + " points");
  }
  return 0.5 * GhSearch(a, b).run();
}

double gh_lower_bound_diameter(const FiniteMetricSpace& a, const FiniteMetricSpace& b) {
  return 0.5 * std::abs(a.diameter() - b.diameter());
}

GhUpperBound gh_upper_bound_to_limit(const FiniteMetricSpace& path, const LimitSpace& limit) {
  if (!path.labels()) throw std::invalid_argument("gh_upper_bound_to_limit: path space has no labels");
  const auto& t = *path.labels();
  for (double v : t) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("gh_upper_bound_to_limit: label outside [0, 1]");
  }
  GhUpperBound out;
  for (std::size_t i = 0; i < path.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      out.sup_grid = std::max(out.sup_grid, std::abs(path(i, j) - limit_distance(t[i], t[j], limit)));

  const double cells = static_cast<double>(std::max<std::size_t>(1, path.size() - 1));
  out.allowance = limit.scale() * std::sqrt(2.0 / cells);
  const double total = out.sup_grid + out.allowance;
  out.paper_bound = 2.0 * total;
  out.corr_bound = 0.5 * total;
  return out;
}

std::pair<FiniteMetricSpace, FiniteMetricSpace> two_point_example(double p, double a) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw std::invalid_argument("two_point_example: p must be >= 1");
  if (!(a > 0.0 && a < 1.0)) throw std::invalid_argument("two_point_example: a must lie in (0, 1)");
  FiniteMetricSpace f(2), h(2);
  f.set(1, 0, 1.0);  // ‖e_1‖_p
  const long double lp = p;
  const long double x = std::pow(static_cast<long double>(a), 1.0L / lp);
  const long double y = std::pow(1.0L - static_cast<long double>(a), 1.0L / lp);
  const long double dist = std::pow(std::pow(x, lp) + std::pow(y, lp), 1.0L / lp);
  h.set(1, 0, static_cast<double>(dist));
  return {std::move(f), std::move(h)};
}

}  // namespace lpwalk
