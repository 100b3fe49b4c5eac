#include "lpwalk/walk_engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>

#include "lpwalk/error.hpp"
#include "lpwalk/kernels.hpp"
#include "lpwalk/path_metrics.hpp"
#include "lpwalk/report_io.hpp"

namespace lpwalk {

namespace {

// long double keeps huge n or d from wrapping around
void check_memory(long double reals, const char* what) {
  const std::size_t cap = memory_cap();
  if (reals > static_cast<long double>(cap)) {
    char need[48];
    std::snprintf(need, sizeof need, "%.0Lf", reals);
    throw ResourceLimitError(std::string(what) + " needs " + need +
                             " reals, above the cap of " + std::to_string(cap) +
                             " (set LPWALK_MEM_CAP to raise it)");
  }
}

/// Neumaier running sum.
struct CompensatedSum {
  double sum = 0.0;
  double carry = 0.0;

  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      carry += (sum - t) + v;
    } else {
      carry += (v - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + carry; }
};

}  // namespace

void WalkConfig::validate() const {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  if (d < 1) throw std::invalid_argument("d must be >= 1");
  if (!std::isfinite(p) || p < 1.0) throw std::invalid_argument("p must be finite and >= 1");
  if (m < 1) throw std::invalid_argument("m must be >= 1");
  if (m > n) {
    throw std::invalid_argument("grid size m (" + std::to_string(m) + ") must not exceed n (" +
                                std::to_string(n) + ")");
  }
  if (law.kind == LawKind::ScaledRademacher && !(law.scale > 0.0 && std::isfinite(law.scale))) {
    throw std::invalid_argument("scaled rademacher needs a finite c > 0");
  }
}

GridSnapshot simulate_grid(const WalkConfig& config) {
  config.validate();
  check_memory((config.m + 1.0L) * config.d, "grid snapshot");

  const KernelTable& k = active_kernels();
  const std::size_t d = static_cast<std::size_t>(config.d);
  const double step_scale = std::pow(static_cast<double>(config.d), -1.0 / config.p);
  const double norm_scale = 1.0 / std::sqrt(static_cast<double>(config.n));
  const CounterStream stream(config.seed);

  GridSnapshot snap;
  snap.config = config;
  snap.times.resize(config.m + 1);
  snap.coords.assign((config.m + 1) * d, 0.0);
  for (std::uint64_t i = 0; i <= config.m; ++i) {
    snap.times[i] = static_cast<double>(i) / static_cast<double>(config.m);
  }

  std::vector<double> s(d, 0.0);
  std::vector<double> xi(d);
  std::uint64_t next = 1;  // grid point 0 is S_0 = 0
  for (std::uint64_t j = 1; j <= config.n; ++j) {
    sample_xi_block(config.law, stream, config.draw_index(j, 0), xi);
    k.axpy(step_scale, xi, s);
    while (next <= config.m && config.grid_step(next) == j) {
      auto dst = snap.point(next);
      for (std::size_t c = 0; c < d; ++c) dst[c] = s[c] * norm_scale;
      ++next;
    }
  }
  return snap;
}

DecompositionTrace simulate_decomposition(const WalkConfig& config) {
  config.validate();
  check_memory(2.0L * config.d + 3.0L * (config.n + 1.0L), "decomposition trace");

  const KernelTable& k = active_kernels();
  const std::size_t d = static_cast<std::size_t>(config.d);
  const double step_scale = std::pow(static_cast<double>(config.d), -1.0 / config.p);
  const PowerSpec pw = PowerSpec::make(config.p);
  const PowerSpec psi_pw = PowerSpec::make(config.p - 1.0);
  const CounterStream stream(config.seed);

  DecompositionTrace trace;
  trace.p = config.p;
  trace.t.assign(config.n + 1, 0.0);
  trace.q.assign(config.n + 1, 0.0);
  trace.norm_pp.assign(config.n + 1, 0.0);

  std::vector<double> s(d, 0.0);
  std::vector<double> x(d);
  CompensatedSum q;
  for (std::uint64_t j = 1; j <= config.n; ++j) {
    sample_xi_block(config.law, stream, config.draw_index(j, 0), x);
    for (double& v : x) v *= step_scale;
    const StepSums sums = k.decomposition_step(s, x, pw, psi_pw);
    q.add(config.p * sums.psi_dot);
    trace.q[j] = q.value();
    trace.norm_pp[j] = sums.pow_sum;
    trace.t[j] = sums.pow_sum - trace.q[j];
  }
  trace.final_norm_pp = lp_norm_pow(s, config.p);
  return trace;
}

std::vector<double> pointwise_norm_statistic(const GridSnapshot& snapshot, double sigma) {
  const double p = snapshot.config.p;
  const double limit = std::pow(sigma, p) * mp_closed_form(p);
  std::vector<double> out(snapshot.size());
  for (std::size_t i = 0; i < snapshot.size(); ++i) {
    const double target = std::pow(snapshot.times[i], 0.5 * p) * limit;
    out[i] = std::abs(lp_norm_pow(snapshot.point(i), p) - target);
  }
  return out;
}

double sup_norm_statistic(const GridSnapshot& snapshot, double sigma) {
  const double p = snapshot.config.p;
  const double limit = std::pow(sigma, p) * mp_closed_form(p);
  const std::size_t k = snapshot.size();
  double best = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double walk = lp_norm_pow(snapshot.point(i), p);
    const double lo = std::pow(snapshot.times[i], 0.5 * p) * limit;
    const double t_hi = i + 1 < k ? snapshot.times[i + 1] : snapshot.times[i];
    const double hi = std::pow(t_hi, 0.5 * p) * limit;
    best = std::max({best, std::abs(walk - lo), std::abs(walk - hi)});
  }
  return best;
}

SupDifference sup_difference_from_space(const FiniteMetricSpace& path, const LimitSpace& space) {
  if (!path.labels()) throw std::invalid_argument("sup_difference needs a labeled path space");
  const auto& t = *path.labels();
  const std::size_t k = path.size();
  const double c = space.scale();
  auto r = [c](double gap) { return c * std::sqrt(std::max(0.0, gap)); };

  SupDifference out;
  for (std::size_t i = 0; i < k; ++i) {
    const double s_next = i + 1 < k ? t[i + 1] : t[i];
    for (std::size_t j = i; j < k; ++j) {
      const double t_next = j + 1 < k ? t[j + 1] : t[j];
      const double w = path(i, j);
      const double at_grid = std::abs(w - r(t[j] - t[i]));
      out.grid_only = std::max(out.grid_only, at_grid);
      out.value = std::max({out.value, at_grid, std::abs(w - r(t_next - t[i])),
                            std::abs(w - r(t[j] - s_next))});
    }
  }
  return out;
}

double sup_difference_statistic(const GridSnapshot& snapshot, const LimitSpace& space) {
  if (std::abs(space.p() - snapshot.config.p) > 0.0) {
    throw std::invalid_argument("sup_difference_statistic: snapshot and limit space differ in p");
  }
  return sup_difference_from_space(path_metric_space(snapshot), space).value;
}

void write_snapshot_csv(std::ostream& out, const GridSnapshot& snapshot) {
  out << "i,t_i,coord_index,value\n";
  for (std::size_t i = 0; i < snapshot.size(); ++i) {
    const auto pt = snapshot.point(i);
    const std::string t = format_double(snapshot.times[i]);
    for (std::size_t c = 0; c < pt.size(); ++c) {
      out << i << ',' << t << ',' << c << ',' << format_double(pt[c]) << '\n';
    }
  }
}

}  // namespace lpwalk
