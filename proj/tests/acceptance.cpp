// Desk-scale acceptance run. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "lpwalk/analytic_limits.hpp"
#include "lpwalk/cli.hpp"
#include "lpwalk/experiments.hpp"
#include "lpwalk/gh_metrics.hpp"
#include "lpwalk/increments.hpp"
#include "lpwalk/path_metrics.hpp"
#include "lpwalk/walk_engine.hpp"

using namespace lpwalk;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

unsigned worker_count() { return std::max(1u, std::thread::hardware_concurrency()); }

double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

/// P(Binomial(n, 1/2) >= k).
double binomial_upper_tail(std::uint64_t n, std::uint64_t k) {
  long double total = 0.0L;
  for (std::uint64_t i = k; i <= n; ++i) {
    const long double log_term = std::lgamma(static_cast<long double>(n) + 1) -
                                 std::lgamma(static_cast<long double>(i) + 1) -
                                 std::lgamma(static_cast<long double>(n - i) + 1) -
                                 static_cast<long double>(n) * std::log(2.0L);
    total += std::exp(log_term);
  }
  return static_cast<double>(total);
}

Outcome mp_closed_form_values() {
  Outcome o;
  const double cases[][2] = {{2.0, 1.0}, {1.0, std::sqrt(2.0 / std::numbers::pi)}, {4.0, 3.0}};
  for (const auto& [p, want] : cases) {
    const double err = rel_err(mp_closed_form(p), want);
    o.require(err <= 1e-12, fmt("p=%g rel err %.3g", p, err));
  }
  if (o.pass) o.detail = "p = 1, 2, 4 within 1e-12";
  return o;
}

Outcome univariate_moment() {
  Outcome o;
  const auto rows = run_moment_convergence(IncrementLaw::rademacher(), 1.0, {10000}, 100000, 2024, worker_count());
  const double limit = std::sqrt(2.0 / std::numbers::pi);
  const double tol = std::max(4 * rows[0].stderr_, 0.01);
  const double gap = std::abs(rows[0].mean - limit);
  o.require(gap <= tol, "outside tolerance");
  o.detail += fmt(" mean %.6f limit %.6f |gap| %.2e tol %.2e", rows[0].mean, limit, gap, tol);
  return o;
}

Outcome bivariate_moment() {
  Outcome o;
  const PairLaw pair{IncrementLaw::rademacher(), 0.5};
  const auto rows = run_bivariate_moment_convergence(pair, 2.0, {10000}, 100000, 2025, worker_count());
  const double limit = 1.0 + 2.0 * 0.25;
  const double tol = std::max(4 * rows[0].stderr_, 0.02);
  const double gap = std::abs(rows[0].mean - limit);
  o.require(gap <= tol, "walk moment outside tolerance");
  o.require(std::abs(bivariate_gaussian_abs_moment(2.0, pair.covariance()) - limit) <= 1e-12,
            "quadrature misses the Wick value");
  int grid_ok = 0, grid_total = 0;
  double worst = 0.0;
  for (double p : {1.0, 1.5, 2.0, 3.0})
    for (double rho : {-0.9, 0.0, 0.5, 0.9}) {
      const auto cov = CovarianceMatrix2::correlation(rho);
      const auto mc = bivariate_moment_mc_oracle(p, cov, 200000, 77 + grid_total);
      const double z = std::abs(mc.estimate - bivariate_gaussian_abs_moment(p, cov)) / mc.std_error;
      worst = std::max(worst, z);
      grid_ok += z <= 4.0;
      ++grid_total;
    }
  o.require(grid_ok == grid_total, "quadrature and MC disagree on the grid");
  o.detail += fmt(" mean %.5f |gap| %.2e tol %.2e; grid %d/%d worst %.2f SE", rows[0].mean, gap, tol, grid_ok,
                  grid_total, worst);
  return o;
}

Outcome decomposition_invariants() {
  Outcome o;
  double worst_resid = 0.0, worst_z = 0.0, worst_viol = 0.0;
  for (const auto& law : {IncrementLaw::rademacher(), IncrementLaw::uniform(), IncrementLaw::centered_exponential()})
    for (double p : {1.0, 1.5, 2.0, 3.0}) {
      WalkConfig cfg{2000, 500, p, law, SeedSpec{31, 0}, 1};
      const auto diag = martingale_diagnostics(cfg, 200, worker_count(), {});
      const double z = std::abs(diag.mean_qn) / diag.se_qn;
      const std::string tag = law.name() + " p=" + fmt("%g", p);
      o.require(diag.t_violation_fraction == 0.0, tag + " T not monotone");
      o.require(diag.max_residual_rel <= 1e-9, tag + fmt(" residual %.3g", diag.max_residual_rel));
      o.require(z <= 4.0, tag + fmt(" mean Q_n at %.2f SE", z));
      worst_resid = std::max(worst_resid, diag.max_residual_rel);
      worst_z = std::max(worst_z, z);
      worst_viol = std::max(worst_viol, diag.t_violation_fraction);
    }
  o.detail += fmt(" 12 cells: violations %g, worst residual %.2e, worst |mean Q_n| %.2f SE", worst_viol,
                  worst_resid, worst_z);
  return o;
}

Outcome p2_closed_form() {
  Outcome o;
  constexpr std::uint64_t n = 1000, d = 200, reps = 100;
  double worst = 0.0;
  for (const auto& law : {IncrementLaw::uniform(), IncrementLaw::centered_exponential()}) {
    std::vector<double> xi(n * d);
    for (std::uint64_t r = 0; r < reps; ++r) {
      const WalkConfig cfg{n, d, 2.0, law, SeedSpec{41, r}, 1};
      const auto trace = simulate_decomposition(cfg);
      sample_xi_block(law, CounterStream(cfg.seed), 0, xi);
      double sum = 0.0;
      for (double v : xi) sum += v * v;
      sum /= static_cast<double>(d);
      worst = std::max(worst, rel_err(trace.t.back(), sum));
    }
  }
  o.require(worst <= 1e-9, "T_n drifts from the summed squared increment norms");
  o.detail += fmt(" %llu replicates x 2 laws, worst rel err %.2e", static_cast<unsigned long long>(reps), worst);
  return o;
}

Outcome sweep_trend() {
  Outcome o;
  SweepPlan plan;
  plan.points = {{100, 100}, {400, 400}, {1600, 1600}};
  plan.ps = {1.0, 2.0, 3.0};
  plan.law = IncrementLaw::rademacher();
  plan.replicates = 100;
  plan.master_seed = 2026;
  plan.statistics = kStatSupDifference | kStatGh;
  const auto report = run_convergence_sweep(plan, worker_count());

  const std::size_t P = plan.ps.size(), K = plan.points.size(), R = plan.replicates;
  auto index = [&](double p) { return std::find(plan.ps.begin(), plan.ps.end(), p) - plan.ps.begin(); };
  auto point_of = [&](std::uint64_t n) {
    for (std::size_t k = 0; k < K; ++k)
      if (plan.points[k].n == n) return k;
    return K;
  };
  std::vector<double> sd(P * K * R, NAN), paper(P * K * R, NAN), corr(P * K * R, NAN);
  for (const auto& row : report.rows) {
    const std::size_t slot = (index(row.p) * K + point_of(row.n)) * R + row.replicate;
    if (row.statistic == "sup_difference") sd[slot] = row.value;
    if (row.statistic == "gh_paper_bound") paper[slot] = row.value;
    if (row.statistic == "gh_corr_bound") corr[slot] = row.value;
  }
  std::size_t factor_bad = 0;
  for (std::size_t i = 0; i < paper.size(); ++i) factor_bad += !(paper[i] == 4.0 * corr[i]);
  o.require(factor_bad == 0, fmt("%zu replicates break paper_bound = 4 corr_bound", factor_bad));

  double worst_pvalue = 0.0;
  for (std::size_t pi = 0; pi < P; ++pi) {
    std::vector<double> medians;
    for (std::size_t k = 0; k < K; ++k) {
      const auto first = sd.begin() + static_cast<std::ptrdiff_t>((pi * K + k) * R);
      medians.push_back(summarize(std::vector<double>(first, first + static_cast<std::ptrdiff_t>(R))).median);
    }
    for (std::size_t k = 0; k + 1 < K; ++k) {
      std::uint64_t wins = 0;
      for (std::size_t r = 0; r < R; ++r) wins += sd[(pi * K + k + 1) * R + r] < sd[(pi * K + k) * R + r];
      const double pvalue = binomial_upper_tail(R, wins);
      worst_pvalue = std::max(worst_pvalue, pvalue);
      const std::string tag = fmt("p=%g step %zu", plan.ps[pi], k);
      o.require(medians[k + 1] < medians[k], tag + " median did not decrease");
      o.require(pvalue < 0.01, tag + fmt(" sign test p=%.3g", pvalue));
    }
    o.detail += fmt(" p=%g medians %.4f>%.4f>%.4f;", plan.ps[pi], medians[0], medians[1], medians[2]);
  }
  o.detail += fmt(" worst sign-test p %.2e", worst_pvalue);
  return o;
}

FiniteMetricSpace random_space(std::mt19937_64& rng, std::size_t k, double p) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<std::vector<double>> pts(k, std::vector<double>(3));
  for (auto& pt : pts)
    for (double& c : pt) c = u(rng);
  FiniteMetricSpace s(k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < i; ++j) s.set(i, j, lp_distance(pts[i], pts[j], p));
  return s;
}

Outcome gh_oracle() {
  Outcome o;
  int zeros = 0;
  for (double p : {1.0, 1.5, 2.0, 3.0})
    for (double a : {0.25, 0.5, 0.9}) {
      const auto [x, y] = two_point_example(p, a);
      const double gh = gh_exact_small(x, y);
      zeros += gh == 0.0;
      o.require(gh == 0.0, fmt("two-point p=%g a=%g gives %.3g", p, a, gh));
    }

  for (double delta : {0.1, 1.0, 7.5}) {
    FiniteMetricSpace one(1), two(2);
    two.set(1, 0, delta);
    o.require(std::abs(gh_exact_small(one, two) - delta / 2) <= 1e-12 * delta, fmt("one-vs-two at %g", delta));
  }

  std::mt19937_64 rng(99);
  std::uniform_int_distribution<std::size_t> size(1, 4);
  const double ps[] = {1.0, 1.5, 2.0, 3.0};
  int sandwich_bad = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const double p = ps[trial % 4];
    const auto a = random_space(rng, size(rng), p);
    const auto b = random_space(rng, size(rng), p);
    const auto c = random_space(rng, size(rng), p);
    const double gh = gh_exact_small(a, b);
    Correspondence all{a.size(), b.size(), {}};
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; j < b.size(); ++j) all.pairs.emplace_back(i, j);
    const double slack = 1e-12;
    const bool ok = gh_lower_bound_diameter(a, b) <= gh + slack && gh <= distortion(all, a, b) / 2 + slack &&
                    gh <= std::max(a.diameter(), b.diameter()) / 2 + slack &&
                    gh <= gh_exact_small(a, c) + gh_exact_small(c, b) + slack &&
                    std::abs(gh - gh_exact_small(b, a)) <= slack;
    sandwich_bad += !ok;
  }
  o.require(sandwich_bad == 0, fmt("%d sandwich failures", sandwich_bad));
  o.detail += fmt(" two-point zeros %d/12, one-vs-two exact, sandwich 200/200 %s", zeros, sandwich_bad ? "no" : "ok");
  return o;
}

Outcome doob_bound() {
  Outcome o;
  const WalkConfig cfg{1000, 200, 2.0, IncrementLaw::rademacher(), SeedSpec{51, 0}, 1};
  const auto diag = run_martingale_check(cfg, 2000, worker_count(), {0.5, 1.0});
  for (const auto& row : diag.doob) {
    o.require(row.frequency <= row.bound, fmt("eps=%g frequency %.4f > bound %.4f", row.epsilon, row.frequency, row.bound));
    o.detail += fmt(" eps=%g freq %.4f bound %.4f;", row.epsilon, row.frequency, row.bound);
  }
  return o;
}

std::string cli_output(std::vector<std::string> args, const char* threads) {
  args.insert(args.end(), {"--threads", threads});
  std::ostringstream out, err;
  if (run_cli(args, out, err) != 0) return "exit failure: " + err.str();
  return out.str();
}

Outcome determinism() {
  Outcome o;
  const std::vector<std::vector<std::string>> runs{
      {"converge", "--points", "100x100,400x400", "--p", "1,2,3", "--replicates", "8", "--seed", "7", "--stats", "all"},
      {"converge", "--points", "60x30", "--p", "1.5", "--law", "cexp", "--replicates", "12", "--format", "json"},
      {"moments", "--n", "100,1000", "--p", "1", "--replicates", "2000"},
      {"bimoments", "--n", "100", "--rho", "0.5", "--replicates", "2000"},
      {"martingale", "--n", "200", "--d", "20", "--replicates", "500"},
  };
  for (const auto& args : runs) {
    const std::string one = cli_output(args, "1");
    for (const char* t : {"2", "5"}) {
      o.require(one == cli_output(args, t) && one.rfind("exit failure", 0) != 0, args[0] + " differs at threads=" + t);
    }
  }
  if (o.pass) o.detail = " 5 commands identical at threads 1, 2, 5";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"mp_closed_form", mp_closed_form_values},
      {"univariate_moment_convergence", univariate_moment},
      {"bivariate_moment_convergence", bivariate_moment},
      {"decomposition_invariants", decomposition_invariants},
      {"p2_closed_form_cross_check", p2_closed_form},
      {"sweep_trend_and_gh_factor", sweep_trend},
      {"gh_oracle", gh_oracle},
      {"doob_bound", doob_bound},
      {"determinism_across_threads", determinism},
  };
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = fn();
    } catch (const std::exception& e) {
      out = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += !out.pass;
    std::printf("%s %s (%.1fs):%s\n", out.pass ? "PASS" : "FAIL", name, secs,
                out.detail.empty() || out.detail[0] == ' ' ? out.detail.c_str() : (" " + out.detail).c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
