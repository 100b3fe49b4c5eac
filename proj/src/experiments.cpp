#include "lpwalk/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "lpwalk/error.hpp"
#include "lpwalk/gh_metrics.hpp"
#include "lpwalk/path_metrics.hpp"

namespace lpwalk {

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
  if (count == 0) return;
  const unsigned workers = static_cast<unsigned>(
      std::min<std::size_t>(count, std::max(1u, threads)));
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::size_t error_index = std::numeric_limits<std::size_t>::max();
  std::exception_ptr error;

  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
      }
    }
  };

  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (error) std::rethrow_exception(error);
}

std::vector<std::string> statistic_names(unsigned flags) {
  std::vector<std::string> names;
  if (flags & kStatPointwise) names.emplace_back("pointwise_t1");
  if (flags & kStatSupNorm) names.emplace_back("sup_norm");
  if (flags & kStatSupDifference) names.emplace_back("sup_difference");
  if (flags & kStatGh) {
    names.emplace_back("gh_paper_bound");
    names.emplace_back("gh_corr_bound");
  }
  return names;
}

unsigned parse_statistics(const std::string& text) {
  if (!text.empty() && text.back() == ',') throw std::invalid_argument("trailing comma in statistics");
  unsigned flags = 0;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item == "pointwise") flags |= kStatPointwise;
    else if (item == "sup_norm") flags |= kStatSupNorm;
    else if (item == "sup_difference") flags |= kStatSupDifference;
    else if (item == "gh") flags |= kStatGh;
    else if (item == "all") flags |= kStatAll;
    else throw std::invalid_argument("unknown statistic '" + item + "'");
  }
  if (flags == 0) throw std::invalid_argument("no statistics selected");
  return flags;
}

std::vector<SweepPoint> parse_points(const std::string& text) {
  if (!text.empty() && text.back() == ',') throw std::invalid_argument("trailing comma in sweep points");
  std::vector<SweepPoint> points;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto x = item.find('x');
    try {
      if (x == std::string::npos) throw std::invalid_argument("missing x");
      std::size_t used_n = 0, used_d = 0;
      const std::string ns = item.substr(0, x), ds = item.substr(x + 1);
      const long long n = std::stoll(ns, &used_n);
      const long long d = std::stoll(ds, &used_d);
      if (used_n != ns.size() || used_d != ds.size() || n < 1 || d < 1) throw std::invalid_argument("range");
      points.push_back({static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(d)});
    } catch (const std::exception&) {
      throw std::invalid_argument("bad sweep point '" + item + "' (expected <n>x<d> with n, d >= 1)");
    }
  }
  if (points.empty()) throw std::invalid_argument("no sweep points given");
  return points;
}

void SweepPlan::validate() const {
  if (points.empty()) throw std::invalid_argument("sweep plan has no points");
  if (ps.empty()) throw std::invalid_argument("sweep plan has no p values");
  if (replicates < 1) throw std::invalid_argument("replicates must be >= 1");
  if (statistics == 0 || (statistics & ~static_cast<unsigned>(kStatAll)) != 0) {
    throw std::invalid_argument("invalid statistic selection");
  }
  for (std::size_t k = 0; k < points.size(); ++k) {
    if (k > 0 && points[k].d < points[k - 1].d) {
      throw std::invalid_argument("sweep dimensions must be nondecreasing along the plan");
    }
    for (double p : ps) {
      WalkConfig cfg{points[k].n, points[k].d, p, law, {master_seed, 0}, grid_for(points[k])};
      cfg.validate();
    }
  }
}

Summary summarize(std::vector<double> values) {
  Summary s;
  const std::size_t count = values.size();
  if (count == 0) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(count);
  if (count > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stderr_ = std::sqrt(ss / static_cast<double>(count - 1) / static_cast<double>(count));
  }
  std::sort(values.begin(), values.end());
  s.median = count % 2 ? values[count / 2] : 0.5 * (values[count / 2 - 1] + values[count / 2]);
  return s;
}

ConvergenceReport run_convergence_sweep(const SweepPlan& plan, unsigned threads) {
  plan.validate();
  const auto names = statistic_names(plan.statistics);
  const std::size_t per_task = names.size();
  const std::size_t npoints = plan.points.size();
  const std::size_t reps = static_cast<std::size_t>(plan.replicates);
  const std::size_t tasks = plan.ps.size() * npoints * reps;
  const double sigma = law_sigma(plan.law);

  std::vector<double> values(tasks * per_task, 0.0);
  parallel_for(tasks, threads, [&](std::size_t task) {
    const std::size_t r = task % reps;
    const std::size_t k = (task / reps) % npoints;
    const std::size_t pi = task / (reps * npoints);
    const SweepPoint& pt = plan.points[k];
    const double p = plan.ps[pi];
    WalkConfig cfg{pt.n, pt.d, p, plan.law, {plan.master_seed, plan.stream_index(k, r)}, plan.grid_for(pt)};

    GridSnapshot snap;
    try {
      snap = simulate_grid(cfg);
    } catch (const ResourceLimitError& e) {
      throw ResourceLimitError("plan point " + std::to_string(pt.n) + "x" + std::to_string(pt.d) +
                               ": " + e.what());
    }
    const LimitSpace limit(sigma, p);
    double* out = values.data() + task * per_task;
    std::size_t slot = 0;
    if (plan.statistics & kStatPointwise) out[slot++] = pointwise_norm_statistic(snap, sigma).back();
    if (plan.statistics & kStatSupNorm) out[slot++] = sup_norm_statistic(snap, sigma);
    if (plan.statistics & (kStatSupDifference | kStatGh)) {
      const FiniteMetricSpace path = path_metric_space(snap);
      if (plan.statistics & kStatSupDifference) out[slot++] = sup_difference_from_space(path, limit).value;
      if (plan.statistics & kStatGh) {
        const GhUpperBound gh = gh_upper_bound_to_limit(path, limit);
        out[slot++] = gh.paper_bound;
        out[slot++] = gh.corr_bound;
      }
    }
  });

  ConvergenceReport report;
  report.rows.reserve(values.size());
  const std::string law = plan.law.name();
  for (std::size_t pi = 0; pi < plan.ps.size(); ++pi) {
    for (std::size_t k = 0; k < npoints; ++k) {
      const SweepPoint& pt = plan.points[k];
      const std::uint64_t m = plan.grid_for(pt);
      const double p = plan.ps[pi];
      for (std::size_t r = 0; r < reps; ++r) {
        const std::size_t task = (pi * npoints + k) * reps + r;
        for (std::size_t s = 0; s < per_task; ++s) {
          report.rows.push_back({law, p, pt.n, pt.d, m, r, plan.master_seed, names[s],
                                 values[task * per_task + s]});
        }
      }
      const double allowance = LimitSpace(sigma, p).scale() * std::sqrt(2.0 / static_cast<double>(m));
      for (std::size_t s = 0; s < per_task; ++s) {
        std::vector<double> column(reps);
        for (std::size_t r = 0; r < reps; ++r) {
          column[r] = values[((pi * npoints + k) * reps + r) * per_task + s];
        }
        const Summary sum = summarize(std::move(column));
        const bool metric_stat = names[s] == "sup_difference" || names[s].starts_with("gh_");
        report.aggregates.push_back({law, p, pt.n, pt.d, m, names[s], sum.median, sum.mean,
                                     sum.stderr_, metric_stat ? allowance : 0.0});
      }
    }
  }
  return report;
}

namespace {

void check_n_list(const std::vector<std::uint64_t>& n_list, std::uint64_t replicates,
                  std::uint64_t min_reps) {
  if (n_list.empty()) throw std::invalid_argument("n list is empty");
  for (auto n : n_list) {
    if (n < 1) throw std::invalid_argument("every n must be >= 1");
  }
  if (replicates < min_reps) {
    throw std::invalid_argument("replicates must be >= " + std::to_string(min_reps));
  }
}

std::vector<MomentRow> summarize_moments(const std::vector<std::uint64_t>& n_list,
                                         const std::vector<double>& values, std::size_t reps,
                                         double limit) {
  std::vector<MomentRow> rows;
  for (std::size_t a = 0; a < n_list.size(); ++a) {
    std::vector<double> column(reps);
    for (std::size_t r = 0; r < reps; ++r) column[r] = values[r * n_list.size() + a];
    const Summary s = summarize(std::move(column));
    rows.push_back({n_list[a], s.mean, s.stderr_, limit});
  }
  return rows;
}

/// S_n for every n in n_list from one stream, extending the running sum.
void prefix_sums(const IncrementLaw& law, const CounterStream& stream,
                 const std::vector<std::uint64_t>& n_list, std::vector<double>& out) {
  std::vector<std::size_t> order(n_list.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto x, auto y) { return n_list[x] < n_list[y]; });
  double sum = 0.0;
  std::uint64_t done = 0;
  out.assign(n_list.size(), 0.0);
  for (std::size_t idx : order) {
    sum += sum_xi_block(law, stream, done, n_list[idx] - done);
    done = n_list[idx];
    out[idx] = sum;
  }
}

}  // namespace

std::vector<MomentRow> run_moment_convergence(const IncrementLaw& law, double p,
                                              const std::vector<std::uint64_t>& n_list,
                                              std::uint64_t replicates, std::uint64_t seed,
                                              unsigned threads) {
  if (!(p > 0.0) || !std::isfinite(p)) throw std::invalid_argument("p must be finite and > 0");
  check_n_list(n_list, replicates, 100);
  const double sigma = law_sigma(law);
  const std::size_t reps = static_cast<std::size_t>(replicates);
  std::vector<double> values(reps * n_list.size());
  parallel_for(reps, threads, [&](std::size_t r) {
    std::vector<double> sums;
    prefix_sums(law, CounterStream(SeedSpec{seed, r}), n_list, sums);
    for (std::size_t a = 0; a < n_list.size(); ++a) {
      const double z = sums[a] / (sigma * std::sqrt(static_cast<double>(n_list[a])));
      values[r * n_list.size() + a] = std::pow(std::abs(z), p);
    }
  });
  return summarize_moments(n_list, values, reps, mp_closed_form(p));
}

CovarianceMatrix2 PairLaw::covariance() const {
  const double var = law_sigma(law) * law_sigma(law);
  return {var, rho * var, var};
}

std::vector<MomentRow> run_bivariate_moment_convergence(const PairLaw& pair, double p,
                                                        const std::vector<std::uint64_t>& n_list,
                                                        std::uint64_t replicates,
                                                        std::uint64_t seed, unsigned threads) {
  if (!(std::abs(pair.rho) <= 1.0)) throw std::invalid_argument("|rho| must be <= 1");
  if (!(p >= 1.0) || !std::isfinite(p)) throw std::invalid_argument("p must be finite and >= 1");
  check_n_list(n_list, replicates, 100);
  const double limit = bivariate_gaussian_abs_moment(p, pair.covariance());
  const double rho_perp = std::sqrt(1.0 - pair.rho * pair.rho);
  const std::size_t reps = static_cast<std::size_t>(replicates);
  std::vector<double> values(reps * n_list.size());
  parallel_for(reps, threads, [&](std::size_t r) {
    std::vector<double> sx, sx2;
    prefix_sums(pair.law, CounterStream(SeedSpec{seed, 2 * r}), n_list, sx);
    prefix_sums(pair.law, CounterStream(SeedSpec{seed, 2 * r + 1}), n_list, sx2);
    for (std::size_t a = 0; a < n_list.size(); ++a) {
      const double root_n = std::sqrt(static_cast<double>(n_list[a]));
      const double s = sx[a] / root_n;
      const double z = (pair.rho * sx[a] + rho_perp * sx2[a]) / root_n;
      values[r * n_list.size() + a] = std::pow(std::abs(s), p) * std::pow(std::abs(z), p);
    }
  });
  return summarize_moments(n_list, values, reps, limit);
}

TraceCheck check_trace(const DecompositionTrace& trace) {
  TraceCheck out;
  double scale = 0.0;
  for (double v : trace.norm_pp) scale = std::max(scale, v);
  scale = std::max(scale, trace.final_norm_pp);
  double worst = 0.0;
  const std::size_t last = trace.t.size() - 1;
  for (std::size_t j = 0; j < trace.t.size(); ++j) {
    worst = std::max(worst, std::abs(trace.t[j] + trace.q[j] - trace.norm_pp[j]));
    if (j > 0 && trace.t[j] - trace.t[j - 1] < -kMonotoneTolerance * std::abs(trace.t[j])) {
      out.monotone = false;
    }
  }
  worst = std::max(worst, std::abs(trace.t[last] + trace.q[last] - trace.final_norm_pp));
  out.residual_rel = scale > 0.0 ? worst / scale : worst;
  return out;
}

MartingaleDiagnostics run_martingale_check(const WalkConfig& config, std::uint64_t replicates,
                                           unsigned threads, std::vector<double> epsilons) {
  if (replicates < 500) throw std::invalid_argument("martingale check needs replicates >= 500");
  return martingale_diagnostics(config, replicates, threads, std::move(epsilons));
}

MartingaleDiagnostics martingale_diagnostics(const WalkConfig& config, std::uint64_t replicates,
                                             unsigned threads, std::vector<double> epsilons) {
  config.validate();
  if (replicates < 2) throw std::invalid_argument("martingale diagnostics need replicates >= 2");
  for (double e : epsilons) {
    if (!(e > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  }
  const std::size_t reps = static_cast<std::size_t>(replicates);
  const std::uint64_t n = config.n;

  std::vector<std::uint64_t> probe_j;
  if (n >= 2) {
    for (std::uint64_t k = 1; k <= 5; ++k) probe_j.push_back(std::max<std::uint64_t>(2, k * n / 5));
    probe_j.erase(std::unique(probe_j.begin(), probe_j.end()), probe_j.end());
  }

  struct PerReplicate {
    bool monotone = true;
    double residual = 0.0;
    double qn = 0.0;
    double sup_q = 0.0;
    std::vector<double> probe_inc, probe_prev;
  };
  std::vector<PerReplicate> per(reps);
  parallel_for(reps, threads, [&](std::size_t r) {
    WalkConfig cfg = config;
    cfg.seed = SeedSpec{config.seed.master_seed, r};
    const DecompositionTrace trace = simulate_decomposition(cfg);
    const TraceCheck chk = check_trace(trace);
    PerReplicate& out = per[r];
    out.monotone = chk.monotone;
    out.residual = chk.residual_rel;
    out.qn = trace.q.back();
    for (double q : trace.q) out.sup_q = std::max(out.sup_q, std::abs(q));
    for (auto j : probe_j) {
      out.probe_inc.push_back(trace.q[j] - trace.q[j - 1]);
      out.probe_prev.push_back(trace.q[j - 1]);
    }
  });

  MartingaleDiagnostics diag;
  diag.replicates = replicates;
  std::vector<double> qn(reps), qn2(reps);
  std::size_t violations = 0;
  for (std::size_t r = 0; r < reps; ++r) {
    if (!per[r].monotone) ++violations;
    diag.max_residual_rel = std::max(diag.max_residual_rel, per[r].residual);
    qn[r] = per[r].qn;
    qn2[r] = per[r].qn * per[r].qn;
  }
  diag.t_violation_fraction = static_cast<double>(violations) / static_cast<double>(reps);
  const Summary sq = summarize(qn), sq2 = summarize(qn2);
  diag.mean_qn = sq.mean;
  diag.se_qn = sq.stderr_;
  diag.mean_qn2 = sq2.mean;
  diag.se_qn2 = sq2.stderr_;
  const double sigma = law_sigma(config.law);
  diag.exact_qn2 = config.p == 2.0 ? 2.0 * std::pow(sigma, 4) * static_cast<double>(n) *
                                         static_cast<double>(n - 1) / static_cast<double>(config.d)
                                   : std::numeric_limits<double>::quiet_NaN();

  const double np = std::pow(static_cast<double>(n), config.p);
  for (double eps : epsilons) {
    const double level = std::pow(static_cast<double>(n), 0.5 * config.p) * eps;
    std::size_t hits = 0;
    for (const auto& pr : per) hits += pr.sup_q >= level ? 1 : 0;
    diag.doob.push_back({eps, static_cast<double>(hits) / static_cast<double>(reps),
                         (diag.mean_qn2 + 4.0 * diag.se_qn2) / (np * eps * eps)});
  }

  for (std::size_t a = 0; a < probe_j.size(); ++a) {
    double mx = 0.0, my = 0.0;
    for (const auto& pr : per) {
      mx += pr.probe_inc[a];
      my += pr.probe_prev[a];
    }
    mx /= static_cast<double>(reps);
    my /= static_cast<double>(reps);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (const auto& pr : per) {
      const double dx = pr.probe_inc[a] - mx, dy = pr.probe_prev[a] - my;
      sxy += dx * dy;
      sxx += dx * dx;
      syy += dy * dy;
    }
    const double corr = (sxx > 0.0 && syy > 0.0) ? sxy / std::sqrt(sxx * syy) : 0.0;
    const double se = (1.0 - corr * corr) / std::sqrt(static_cast<double>(reps - 1));
    diag.probes.push_back({probe_j[a], corr, se});
  }
  return diag;
}

}  // namespace lpwalk
