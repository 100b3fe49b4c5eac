#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "lpwalk/analytic_limits.hpp"
#include "lpwalk/increments.hpp"
#include "lpwalk/walk_engine.hpp"

namespace lpwalk {

/// Runs fn(0), ..., fn(count - 1) on up to `threads` workers. Tasks must write
/// only to their own slots. If tasks throw, the exception of the lowest task
/// index is rethrown after all workers finish.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn);

enum StatisticFlag : unsigned {
  kStatPointwise = 1u << 0,      // pointwise_t1
  kStatSupNorm = 1u << 1,        // sup_norm
  kStatSupDifference = 1u << 2,  // sup_difference
  kStatGh = 1u << 3,             // gh_paper_bound, gh_corr_bound
  kStatAll = kStatPointwise | kStatSupNorm | kStatSupDifference | kStatGh,
};

/// Row names produced by a selection, in report order.
std::vector<std::string> statistic_names(unsigned flags);
/// Parses a comma list of pointwise, sup_norm, sup_difference, gh, all.
unsigned parse_statistics(const std::string& text);

struct SweepPoint {
  std::uint64_t n = 1;
  std::uint64_t d = 1;
};

/// Parses "100x100,400x400".
std::vector<SweepPoint> parse_points(const std::string& text);

struct SweepPlan {
  std::vector<SweepPoint> points;
  std::vector<double> ps{2.0};
  IncrementLaw law;
  std::uint64_t replicates = 1;
  std::uint64_t master_seed = 0;
  /// 0 selects WalkConfig::default_grid(n) per point.
  std::uint64_t m = 0;
  unsigned statistics = kStatSupDifference;

  void validate() const;
  std::uint64_t grid_for(const SweepPoint& pt) const { return m == 0 ? WalkConfig::default_grid(pt.n) : m; }
  /// Stream replicate index of replicate r at point k; p values share streams.
  std::uint64_t stream_index(std::size_t point, std::uint64_t r) const { return point * replicates + r; }
};

struct ReportRow {
  std::string law;
  double p = 0.0;
  std::uint64_t n = 0, d = 0, m = 0;
  std::uint64_t replicate = 0;
  std::uint64_t seed = 0;
  std::string statistic;
  double value = 0.0;
};

struct AggregateRow {
  std::string law;
  double p = 0.0;
  std::uint64_t n = 0, d = 0, m = 0;
  std::string statistic;
  double median = 0.0, mean = 0.0, stderr_ = 0.0;
  double allowance = 0.0;
};

struct ConvergenceReport {
  std::vector<ReportRow> rows;
  std::vector<AggregateRow> aggregates;
};

struct Summary {
  double median = 0.0, mean = 0.0, stderr_ = 0.0;
};
/// Median, mean and standard error (sample sd / sqrt(count)) of the values.
Summary summarize(std::vector<double> values);

/// Rows are ordered by p, then plan point, then replicate, then statistic;
/// aggregates by p, plan point, statistic. Output is independent of threads.
ConvergenceReport run_convergence_sweep(const SweepPlan& plan, unsigned threads = 1);

struct MomentRow {
  std::uint64_t n = 0;
  double mean = 0.0;
  double stderr_ = 0.0;
  double limit = 0.0;
};

/// Mean of |S_n / (sigma sqrt n)|^p over one-dimensional replicates, against M_p.
std::vector<MomentRow> run_moment_convergence(const IncrementLaw& law, double p,
                                              const std::vector<std::uint64_t>& n_list,
                                              std::uint64_t replicates, std::uint64_t seed,
                                              unsigned threads = 1);

/// (X, Y) with Y = rho X + sqrt(1 - rho^2) X', X and X' i.i.d. from `law`.
struct PairLaw {
  IncrementLaw law;
  double rho = 0.0;

  CovarianceMatrix2 covariance() const;
};

/// Mean of |S_n / sqrt n|^p |Z_n / sqrt n|^p against E|eta1 eta2|^p.
std::vector<MomentRow> run_bivariate_moment_convergence(const PairLaw& pair, double p,
                                                        const std::vector<std::uint64_t>& n_list,
                                                        std::uint64_t replicates,
                                                        std::uint64_t seed, unsigned threads = 1);

struct DoobRow {
  double epsilon = 0.0;
  double frequency = 0.0;  // fraction with sup_j |Q_j| >= n^{p/2} epsilon
  double bound = 0.0;      // n^{-p} epsilon^{-2} (mean Q_n^2 + 4 SE)
};

struct ProbeCorrelation {
  std::uint64_t j = 0;
  double correlation = 0.0;  // corr(Q_j - Q_{j-1}, Q_{j-1}) across replicates
  double std_error = 0.0;
};

struct MartingaleDiagnostics {
  std::uint64_t replicates = 0;
  double t_violation_fraction = 0.0;
  double max_residual_rel = 0.0;
  double mean_qn = 0.0, se_qn = 0.0;
  double mean_qn2 = 0.0, se_qn2 = 0.0;
  /// 2 sigma^4 n (n - 1) / d when p == 2, NaN otherwise.
  double exact_qn2 = 0.0;
  std::vector<DoobRow> doob;
  std::vector<ProbeCorrelation> probes;
};

inline constexpr double kMonotoneTolerance = 1e-9;

/// Replicate r uses stream (config.seed.master_seed, r). Requires R >= 500.
MartingaleDiagnostics run_martingale_check(const WalkConfig& config, std::uint64_t replicates,
                                           unsigned threads = 1,
                                           std::vector<double> epsilons = {0.5, 1.0});

/// Same diagnostics without the replicate floor (R >= 2), for smaller batches.
MartingaleDiagnostics martingale_diagnostics(const WalkConfig& config, std::uint64_t replicates,
                                             unsigned threads = 1,
                                             std::vector<double> epsilons = {0.5, 1.0});

/// Per-trace invariant checks shared with the martingale diagnostics.
struct TraceCheck {
  bool monotone = true;
  double residual_rel = 0.0;
};
TraceCheck check_trace(const DecompositionTrace& trace);

}  // namespace lpwalk
