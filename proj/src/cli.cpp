#include "lpwalk/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "lpwalk/analytic_limits.hpp"
#include "lpwalk/error.hpp"
#include "lpwalk/experiments.hpp"
#include "lpwalk/gh_metrics.hpp"
#include "lpwalk/metric_space.hpp"
#include "lpwalk/report_io.hpp"
#include "lpwalk/walk_engine.hpp"

namespace lpwalk {

namespace {

std::vector<double> parse_real_list(const std::string& text, const char* what) {
  if (!text.empty() && text.back() == ',') throw std::invalid_argument(std::string("trailing comma in ") + what);
  std::vector<double> values;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw std::invalid_argument(std::string("bad ") + what + " value '" + item + "'");
    }
  }
  if (values.empty()) throw std::invalid_argument(std::string("empty ") + what + " list");
  return values;
}

std::vector<std::uint64_t> parse_count_list(const std::string& text, const char* what) {
  std::vector<std::uint64_t> values;
  for (double v : parse_real_list(text, what)) {
    if (!(v >= 1.0) || v != std::floor(v) || v > 9.0e15) {
      throw std::invalid_argument(std::string(what) + " values must be positive integers");
    }
    values.push_back(static_cast<std::uint64_t>(v));
  }
  return values;
}

double single_p(const std::string& text) {
  const auto ps = parse_real_list(text, "p");
  if (ps.size() != 1) throw std::invalid_argument("this subcommand takes a single --p");
  return ps.front();
}

std::string join_reals(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
  return s;
}

std::string join_points(const std::vector<SweepPoint>& pts) {
  std::string s;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    s += (i ? "," : "") + std::to_string(pts[i].n) + "x" + std::to_string(pts[i].d);
  }
  return s;
}

/// Writes to --out when given, else to the fallback stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw std::invalid_argument("cannot open output file '" + path + "'");
      stream_ = &file_;
    }
  }
  std::ostream& get() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

WalkConfig walk_config(const CliOptions& o) {
  WalkConfig cfg{o.n, o.d, single_p(o.p), IncrementLaw::parse(o.law), {o.seed, o.replicate},
                 o.m == 0 ? WalkConfig::default_grid(o.n) : o.m};
  cfg.validate();
  return cfg;
}

ConfigEcho walk_echo(const std::string& command, const WalkConfig& cfg, bool with_grid) {
  ConfigEcho echo{{"command", command},
                  {"n", std::to_string(cfg.n)},
                  {"d", std::to_string(cfg.d)},
                  {"p", format_double(cfg.p)},
                  {"law", cfg.law.name()},
                  {"seed", std::to_string(cfg.seed.master_seed)},
                  {"replicate", std::to_string(cfg.seed.replicate_index)}};
  if (with_grid) echo.emplace_back("m", std::to_string(cfg.m));
  return echo;
}

int cmd_mp(const CliOptions& o, std::ostream& out) {
  const double p = single_p(o.p);
  const double v = mp_closed_form(p);
  if (o.format == "json") {
    out << nlohmann::json{{"p", p}, {"m_p", v}}.dump() << '\n';
  } else {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%#.17g", v);
    out << buf << '\n';
  }
  return kExitOk;
}

int cmd_simulate(const CliOptions& o, std::ostream& out) {
  const WalkConfig cfg = walk_config(o);
  const GridSnapshot snap = simulate_grid(cfg);
  const ConfigEcho echo = walk_echo("simulate", cfg, true);
  Sink sink(o.out, out);
  if (o.format == "json") {
    nlohmann::json doc;
    doc["config"] = nlohmann::json::object();
    for (const auto& [k, v] : echo) doc["config"][k] = v;
    doc["times"] = snap.times;
    auto& pts = doc["points"] = nlohmann::json::array();
    for (std::size_t i = 0; i < snap.size(); ++i) {
      const auto pt = snap.point(i);
      pts.push_back(std::vector<double>(pt.begin(), pt.end()));
    }
    sink.get() << doc.dump(1) << '\n';
  } else {
    write_config_echo(sink.get(), echo);
    write_snapshot_csv(sink.get(), snap);
  }
  return kExitOk;
}

int cmd_decompose(const CliOptions& o, std::ostream& out) {
  WalkConfig cfg = walk_config(o);
  const DecompositionTrace trace = simulate_decomposition(cfg);
  const ConfigEcho echo = walk_echo("decompose", cfg, false);
  Sink sink(o.out, out);
  if (o.format == "json") {
    nlohmann::json doc;
    doc["config"] = nlohmann::json::object();
    for (const auto& [k, v] : echo) doc["config"][k] = v;
    doc["t"] = trace.t;
    doc["q"] = trace.q;
    doc["norm_pp"] = trace.norm_pp;
    doc["final_norm_pp"] = trace.final_norm_pp;
    sink.get() << doc.dump(1) << '\n';
  } else {
    write_trace_csv(sink.get(), trace, echo);
  }
  return kExitOk;
}

/// Fills plan fields from a JSON file; flags given on the command line win.
void apply_plan_file(const std::string& path, SweepPlan& plan, const CLI::App& sub) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open plan file '" + path + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("plan file '" + path + "': " + e.what());
  }
  if (!doc.is_object()) throw std::invalid_argument("plan file must hold a JSON object");
  static const std::vector<std::string> known{"points", "p", "law", "replicates", "seed", "m", "statistics"};
  for (const auto& item : doc.items()) {
    if (std::find(known.begin(), known.end(), item.key()) == known.end()) {
      throw std::invalid_argument("plan file: unknown key '" + item.key() + "'");
    }
  }
  auto given = [&](const char* flag) { return sub.count(flag) > 0; };
  try {
    if (doc.contains("points") && !given("--points") && !given("--n")) {
      const auto& pts = doc["points"];
      if (pts.is_string()) {
        plan.points = parse_points(pts.get<std::string>());
      } else {
        plan.points.clear();
        for (const auto& pt : pts) {
          plan.points.push_back({pt.at(0).get<std::uint64_t>(), pt.at(1).get<std::uint64_t>()});
        }
      }
    }
    if (doc.contains("p") && !given("--p")) {
      const auto& p = doc["p"];
      plan.ps = p.is_array() ? p.get<std::vector<double>>() : std::vector<double>{p.get<double>()};
    }
    if (doc.contains("law") && !given("--law")) plan.law = IncrementLaw::parse(doc["law"].get<std::string>());
    if (doc.contains("replicates") && !given("--replicates")) plan.replicates = doc["replicates"].get<std::uint64_t>();
    if (doc.contains("seed") && !given("--seed")) plan.master_seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("m") && !given("--m")) plan.m = doc["m"].get<std::uint64_t>();
    if (doc.contains("statistics") && !given("--stats")) {
      const auto& s = doc["statistics"];
      if (s.is_string()) {
        plan.statistics = parse_statistics(s.get<std::string>());
      } else {
        plan.statistics = 0;
        for (const auto& name : s) plan.statistics |= parse_statistics(name.get<std::string>());
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("plan file '" + path + "': " + e.what());
  }
}

int cmd_converge(const CliOptions& o, const CLI::App& sub, std::ostream& out) {
  SweepPlan plan;
  if (sub.count("--n") || sub.count("--d")) {
    plan.points = {{o.n, o.d}};
  } else {
    plan.points = parse_points(o.points);
  }
  plan.ps = parse_real_list(o.p, "p");
  plan.law = IncrementLaw::parse(o.law);
  plan.replicates = o.replicates;
  plan.master_seed = o.seed;
  plan.m = o.m;
  plan.statistics = parse_statistics(o.stats);
  if (!o.plan.empty()) apply_plan_file(o.plan, plan, sub);
  plan.validate();

  const ConfigEcho echo{{"command", "converge"},
                        {"points", join_points(plan.points)},
                        {"p", join_reals(plan.ps)},
                        {"law", plan.law.name()},
                        {"replicates", std::to_string(plan.replicates)},
                        {"seed", std::to_string(plan.master_seed)},
                        {"m", plan.m == 0 ? "default" : std::to_string(plan.m)},
                        {"statistics", [&] {
                           std::string s;
                           for (const auto& n : statistic_names(plan.statistics)) s += (s.empty() ? "" : ",") + n;
                           return s;
                         }()}};

  const ConvergenceReport report = run_convergence_sweep(plan, o.threads);
  Sink sink(o.out, out);
  if (o.format == "json") {
    sink.get() << report_json(report.rows, report.aggregates, echo);
  } else {
    write_report_csv(sink.get(), report.rows, echo);
  }
  if (!o.aggregate_out.empty()) {
    Sink agg(o.aggregate_out, out);
    if (o.format == "json") {
      agg.get() << report_json({}, report.aggregates, echo);
    } else {
      write_aggregate_csv(agg.get(), report.aggregates, echo);
    }
  }
  return kExitOk;
}

int cmd_moments(const CliOptions& o, bool bivariate, std::ostream& out) {
  const double p = single_p(o.p);
  const IncrementLaw law = IncrementLaw::parse(o.law);
  const auto n_list = parse_count_list(o.n_list, "n");
  ConfigEcho echo{{"command", bivariate ? "bimoments" : "moments"},
                  {"law", law.name()},
                  {"p", format_double(p)},
                  {"n", [&] {
                     std::string s;
                     for (auto n : n_list) s += (s.empty() ? "" : ",") + std::to_string(n);
                     return s;
                   }()},
                  {"replicates", std::to_string(o.replicates)},
                  {"seed", std::to_string(o.seed)}};
  std::vector<MomentRow> rows;
  if (bivariate) {
    echo.emplace_back("rho", format_double(o.rho));
    rows = run_bivariate_moment_convergence({law, o.rho}, p, n_list, o.replicates, o.seed, o.threads);
  } else {
    rows = run_moment_convergence(law, p, n_list, o.replicates, o.seed, o.threads);
  }
  Sink sink(o.out, out);
  if (o.format == "json") {
    sink.get() << moment_json(rows, echo);
  } else {
    write_moment_csv(sink.get(), rows, echo);
  }
  return kExitOk;
}

int cmd_martingale(const CliOptions& o, std::ostream& out) {
  WalkConfig cfg = walk_config(o);
  const auto eps = parse_real_list(o.eps, "eps");
  const MartingaleDiagnostics diag = run_martingale_check(cfg, o.replicates, o.threads, eps);
  ConfigEcho echo = walk_echo("martingale", cfg, false);
  echo.erase(std::remove_if(echo.begin(), echo.end(), [](const auto& kv) { return kv.first == "replicate"; }),
             echo.end());
  echo.emplace_back("replicates", std::to_string(o.replicates));
  echo.emplace_back("eps", join_reals(eps));
  Sink sink(o.out, out);
  if (o.format == "json") {
    sink.get() << martingale_json(diag, echo);
  } else {
    write_martingale_csv(sink.get(), diag, echo);
  }
  return kExitOk;
}

FiniteMetricSpace load_space(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open metric space file '" + path + "'");
  return read_metric_space_csv(in);
}

int cmd_gh(const CliOptions& o, std::ostream& out) {
  FiniteMetricSpace a, b;
  if (o.two_point) {
    if (!o.a_file.empty() || !o.b_file.empty()) {
      throw std::invalid_argument("--two-point-example excludes --a-file/--b-file");
    }
    std::tie(a, b) = two_point_example(single_p(o.p), o.a);
  } else {
    if (o.a_file.empty() || o.b_file.empty()) {
      throw std::invalid_argument("gh needs --two-point-example or both --a-file and --b-file");
    }
    a = load_space(o.a_file);
    b = load_space(o.b_file);
  }
  const double gh = gh_exact_small(a, b);
  if (o.format == "json") {
    out << nlohmann::json{{"gh", gh}, {"lower_bound", gh_lower_bound_diameter(a, b)}}.dump() << '\n';
  } else {
    out << format_double(gh) << '\n';
  }
  return kExitOk;
}

void add_format(CLI::App* sub, CliOptions& o) {
  sub->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
}

void add_walk_flags(CLI::App* sub, CliOptions& o) {
  sub->add_option("--n", o.n, "Number of steps")->capture_default_str();
  sub->add_option("--d", o.d, "Dimension")->capture_default_str();
  sub->add_option("--p", o.p, "Exponent p >= 1")->capture_default_str();
  sub->add_option("--law", o.law, "rademacher, uniform, normal, cexp or rademacher:c=<real>")->capture_default_str();
  sub->add_option("--seed", o.seed, "Master seed")->capture_default_str();
}

}  // namespace

std::unique_ptr<CLI::App> build_app(CliOptions& o) {
  auto app = std::make_unique<CLI::App>("Random walks in l_p and their limit metric space", "lpwalk");
  app->require_subcommand(1);

  auto* mp = app->add_subcommand("mp", "Print M_p = E|Z|^p for a standard normal Z");
  mp->add_option("--p", o.p, "Exponent p >= 0")->required();
  add_format(mp, o);

  auto* sim = app->add_subcommand("simulate", "Simulate one walk and dump its grid snapshot");
  add_walk_flags(sim, o);
  sim->add_option("--replicate", o.replicate, "Replicate stream index")->capture_default_str();
  sim->add_option("--m", o.m, "Grid size (0 = min(n, 512))")->capture_default_str();
  sim->add_option("--out", o.out, "Output file (default stdout)");
  add_format(sim, o);

  auto* dec = app->add_subcommand("decompose", "Trace the T/Q decomposition of one walk");
  add_walk_flags(dec, o);
  dec->add_option("--replicate", o.replicate, "Replicate stream index")->capture_default_str();
  dec->add_option("--out", o.out, "Output file (default stdout)");
  add_format(dec, o);

  auto* conv = app->add_subcommand("converge", "Replicate sweep of path statistics over (n, d) points");
  conv->add_option("--points", o.points, "Sweep points <n>x<d>, comma separated")->capture_default_str();
  conv->add_option("--n", o.n, "Single-point sweep: steps");
  conv->add_option("--d", o.d, "Single-point sweep: dimension");
  conv->add_option("--p", o.p, "Comma list of exponents")->capture_default_str();
  conv->add_option("--law", o.law, "Increment law")->capture_default_str();
  conv->add_option("--seed", o.seed, "Master seed")->capture_default_str();
  conv->add_option("--m", o.m, "Grid size (0 = min(n, 512) per point)")->capture_default_str();
  conv->add_option("--replicates", o.replicates, "Replicates per point")->capture_default_str();
  conv->add_option("--threads", o.threads, "Worker threads")->capture_default_str();
  conv->add_option("--stats", o.stats, "pointwise, sup_norm, sup_difference, gh or all")->capture_default_str();
  conv->add_option("--plan", o.plan, "JSON plan file; explicit flags override it");
  conv->add_option("--out", o.out, "Report file (default stdout)");
  conv->add_option("--aggregate-out", o.aggregate_out, "Aggregate file");
  add_format(conv, o);

  for (const bool bivariate : {false, true}) {
    auto* mom = bivariate
                    ? app->add_subcommand("bimoments", "E|S_n/sqrt n|^p |Z_n/sqrt n|^p for a correlated pair")
                    : app->add_subcommand("moments", "E|S_n/(sigma sqrt n)|^p against M_p");
    mom->add_option("--n", o.n_list, "Comma list of step counts")->capture_default_str();
    mom->add_option("--p", o.p, "Exponent")->capture_default_str();
    mom->add_option("--law", o.law, "Increment law")->capture_default_str();
    mom->add_option("--seed", o.seed, "Master seed")->capture_default_str();
    mom->add_option("--replicates", o.replicates, "Replicates (>= 100)")->capture_default_str();
    mom->add_option("--threads", o.threads, "Worker threads")->capture_default_str();
    if (bivariate) mom->add_option("--rho", o.rho, "Correlation in [-1, 1]")->capture_default_str();
    mom->add_option("--out", o.out, "Output file (default stdout)");
    add_format(mom, o);
  }

  auto* mart = app->add_subcommand("martingale", "Monotonicity, martingale and Doob checks of the T/Q decomposition");
  add_walk_flags(mart, o);
  mart->add_option("--replicates", o.replicates, "Replicates (>= 500)")->capture_default_str();
  mart->add_option("--threads", o.threads, "Worker threads")->capture_default_str();
  mart->add_option("--eps", o.eps, "Comma list of Doob levels")->capture_default_str();
  mart->add_option("--out", o.out, "Output file (default stdout)");
  add_format(mart, o);

  auto* gh = app->add_subcommand("gh", "Exact Gromov-Hausdorff distance of small metric spaces");
  gh->add_flag("--two-point-example", o.two_point, "Use {0, e_1} against {0, (a^{1/p}, (1-a)^{1/p})}");
  gh->add_option("--p", o.p, "Exponent for the two-point example")->capture_default_str();
  gh->add_option("--a", o.a, "Split a in (0, 1) for the two-point example")->capture_default_str();
  gh->add_option("--a-file", o.a_file, "First metric space file");
  gh->add_option("--b-file", o.b_file, "Second metric space file");
  add_format(gh, o);

  return app;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CliOptions opts;
  auto app = build_app(opts);
  try {
    app->parse(std::vector<std::string>(args.rbegin(), args.rend()));
  } catch (const CLI::CallForHelp& e) {
    return app->exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app->exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "lpwalk: " << e.what() << '\n';
    return kExitInvalidConfig;
  }

  CLI::App* sub = app->get_subcommands().front();
  const std::string name = sub->get_name();
  const auto start = std::chrono::steady_clock::now();
  try {
    int code = kExitOk;
    if (name == "mp") code = cmd_mp(opts, out);
    else if (name == "simulate") code = cmd_simulate(opts, out);
    else if (name == "decompose") code = cmd_decompose(opts, out);
    else if (name == "converge") code = cmd_converge(opts, *sub, out);
    else if (name == "moments") code = cmd_moments(opts, false, out);
    else if (name == "bimoments") code = cmd_moments(opts, true, out);
    else if (name == "martingale") code = cmd_martingale(opts, out);
    else if (name == "gh") code = cmd_gh(opts, out);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (name == "converge" || name == "moments" || name == "bimoments" || name == "martingale") {
      err << "# " << name << ": threads=" << opts.threads << " elapsed_s=" << secs << '\n';
    }
    return code;
  } catch (const ResourceLimitError& e) {
    err << "lpwalk " << name << ": resource limit: " << e.what() << '\n';
    return kExitResourceRefusal;
  } catch (const std::invalid_argument& e) {
    err << "lpwalk " << name << ": invalid configuration: " << e.what() << '\n';
    return kExitInvalidConfig;
  } catch (const std::exception& e) {
    err << "lpwalk " << name << ": " << e.what() << '\n';
    return 1;
  }
}

}  // namespace lpwalk
