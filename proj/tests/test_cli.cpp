#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "lpwalk/cli.hpp"
#include "lpwalk/report_io.hpp"

using namespace lpwalk;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("lpwalk_cli_test_" + name);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// A value each option's validator accepts.
std::string sample_value(const std::string& flag) {
  if (flag == "--format") return "json";
  if (flag == "--law") return "uniform";
  if (flag == "--points") return "10x10";
  if (flag == "--stats") return "all";
  if (flag == "--p" || flag == "--eps" || flag == "--rho" || flag == "--a") return "0.5";
  return "3";
}

}  // namespace

TEST_CASE("mp prints 17 significant digits") {
  auto r = run({"mp", "--p", "2"});
  CHECK(r.code == 0);
  CHECK(r.out == "1.0000000000000000\n");
  r = run({"mp", "--p", "1"});
  CHECK(r.out == "0.79788456080286541\n");
  r = run({"mp", "--p", "4", "--format", "json"});
  CHECK(nlohmann::json::parse(r.out)["m_p"].get<double>() == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(run({"mp", "--p", "-1"}).code == kExitInvalidConfig);
  CHECK(run({"mp"}).code == kExitInvalidConfig);
}

TEST_CASE("gh two-point example prints an exact zero") {
  for (const char* p : {"1", "1.5", "2", "3"})
    for (const char* a : {"0.25", "0.5", "0.9"}) {
      const auto r = run({"gh", "--two-point-example", "--p", p, "--a", a});
      CHECK(r.code == 0);
      CHECK(r.out == "0\n");
    }
  CHECK(run({"gh", "--two-point-example", "--p", "2", "--a", "1.5"}).code == kExitInvalidConfig);
  CHECK(run({"gh"}).code == kExitInvalidConfig);
}

TEST_CASE("gh reads metric space files") {
  const auto a = temp_path("a.csv"), b = temp_path("b.csv");
  std::ofstream(a) << "k\n1\n0\n";
  std::ofstream(b) << "k\n2\n0\n3,0\n";
  const auto r = run({"gh", "--a-file", a.string(), "--b-file", b.string()});
  CHECK(r.code == 0);
  CHECK(r.out == "1.5\n");
  std::ofstream(b) << "k\n2\n0\n";
  CHECK(run({"gh", "--a-file", a.string(), "--b-file", b.string()}).code == kExitInvalidConfig);
  CHECK(run({"gh", "--a-file", a.string(), "--b-file", "/nonexistent/x.csv"}).code == kExitInvalidConfig);
}

TEST_CASE("invalid configurations exit 2 with a named constraint") {
  auto r = run({"converge", "--points", "10x10", "--m", "20"});
  CHECK(r.code == kExitInvalidConfig);
  CHECK(r.err.find("must not exceed n") != std::string::npos);
  CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);

  CHECK(run({"converge", "--bogus", "1"}).code == kExitInvalidConfig);
  CHECK(run({"converge", "--points", "10x10", "--law", "cauchy"}).code == kExitInvalidConfig);
  CHECK(run({"converge", "--points", "10x10", "--format", "xml"}).code == kExitInvalidConfig);
  CHECK(run({"simulate", "--n", "5", "--p", "0.5"}).code == kExitInvalidConfig);
  CHECK(run({"martingale", "--n", "5", "--replicates", "10"}).code == kExitInvalidConfig);
  CHECK(run({"moments", "--n", "10,0"}).code == kExitInvalidConfig);
  CHECK(run({"bimoments", "--rho", "2"}).code == kExitInvalidConfig);
  CHECK(run({}).code == kExitInvalidConfig);
  CHECK(run({"frobnicate"}).code == kExitInvalidConfig);
}

TEST_CASE("resource refusals exit 3") {
  ::setenv("LPWALK_MEM_CAP", "50", 1);
  const auto r = run({"simulate", "--n", "10", "--d", "10"});
  ::unsetenv("LPWALK_MEM_CAP");
  CHECK(r.code == kExitResourceRefusal);
  CHECK(r.err.find("LPWALK_MEM_CAP") != std::string::npos);
}

TEST_CASE("help lists exactly the flags the parser accepts") {
  CliOptions opts;
  auto app = build_app(opts);
  const auto subs = app->get_subcommands([](CLI::App*) { return true; });
  CHECK(subs.size() == 8);
  const std::regex flag_re("--[a-z][a-z0-9-]*");
  for (CLI::App* sub : subs) {
    const std::string name = sub->get_name();
    CAPTURE(name);
    const auto help = run({name, "--help"});
    CHECK(help.code == 0);

    std::set<std::string> declared;
    for (const CLI::Option* opt : sub->get_options()) {
      for (const auto& ln : opt->get_lnames()) declared.insert("--" + ln);
    }
    std::set<std::string> listed;
    for (auto it = std::sregex_iterator(help.out.begin(), help.out.end(), flag_re); it != std::sregex_iterator(); ++it) {
      listed.insert(it->str());
    }
    CHECK(listed == declared);

    // every listed flag parses
    for (const auto& flag : listed) {
      if (flag == "--help") continue;
      CliOptions o;
      auto fresh = build_app(o);
      std::vector<std::string> argv{name, flag};
      const CLI::Option* opt = fresh->get_subcommand(name)->get_option(flag);
      if (opt->get_expected_min() > 0) argv.push_back(sample_value(flag));
      if (name == "mp" && flag != "--p") argv.insert(argv.end(), {"--p", "2"});
      std::vector<std::string> reversed(argv.rbegin(), argv.rend());
      CAPTURE(flag);
      CHECK_NOTHROW(fresh->parse(std::vector<std::string>(reversed)));
    }
  }
}

TEST_CASE("converge output is byte-identical across thread counts") {
  const std::vector<std::string> base{"converge", "--points", "50x20,100x40", "--p", "1,2", "--replicates", "6",
                                      "--seed", "5", "--stats", "all"};
  auto args1 = base, args4 = base;
  args1.insert(args1.end(), {"--threads", "1"});
  args4.insert(args4.end(), {"--threads", "4"});
  const auto a = run(args1), b = run(args4);
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  std::istringstream in(a.out);
  const auto rows = read_report_csv(in);
  CHECK(rows.size() == 2 * 2 * 6 * 5);
  CHECK(a.out.find("# points=50x20,100x40\n") != std::string::npos);
  CHECK(a.out.find("# m=default\n") != std::string::npos);
  CHECK(a.out.find("threads") == std::string::npos);
}

TEST_CASE("converge writes report and aggregate files") {
  const auto rep = temp_path("rep.csv"), agg = temp_path("agg.csv");
  const auto r = run({"converge", "--n", "64", "--d", "8", "--replicates", "3", "--stats", "sup_difference",
                      "--out", rep.string(), "--aggregate-out", agg.string()});
  CHECK(r.code == 0);
  CHECK(r.out.empty());
  std::istringstream rin(slurp(rep)), ain(slurp(agg));
  CHECK(read_report_csv(rin).size() == 3);
  const auto aggs = read_aggregate_csv(ain);
  REQUIRE(aggs.size() == 1);
  CHECK(aggs[0].n == 64);
  CHECK(aggs[0].allowance > 0.0);
}

TEST_CASE("converge plan files with flag overrides") {
  const auto plan = temp_path("plan.json");
  std::ofstream(plan) << R"({"points": [[40, 10], [80, 20]], "p": [1.5], "law": "cexp",
                             "replicates": 2, "seed": 9, "statistics": ["sup_norm", "gh"]})";
  const auto from_plan = run({"converge", "--plan", plan.string()});
  const auto from_flags = run({"converge", "--points", "40x10,80x20", "--p", "1.5", "--law", "cexp",
                               "--replicates", "2", "--seed", "9", "--stats", "sup_norm,gh"});
  CHECK(from_plan.code == 0);
  CHECK(from_plan.out == from_flags.out);
  const auto overridden = run({"converge", "--plan", plan.string(), "--replicates", "1"});
  std::istringstream in(overridden.out);
  CHECK(read_report_csv(in).size() == 2 * 1 * 3);

  std::ofstream(plan) << R"({"points": "40x10", "colour": "red"})";
  CHECK(run({"converge", "--plan", plan.string()}).code == kExitInvalidConfig);
  std::ofstream(plan) << "{not json";
  CHECK(run({"converge", "--plan", plan.string()}).code == kExitInvalidConfig);
}

TEST_CASE("simulate and decompose echo their resolved configuration") {
  const auto sim = run({"simulate", "--n", "8", "--d", "2", "--seed", "3"});
  CHECK(sim.code == 0);
  CHECK(sim.out.rfind("# command=simulate\n# n=8\n# d=2\n# p=2\n# law=rademacher\n# seed=3\n# replicate=0\n# m=8\n"
                      "i,t_i,coord_index,value\n",
                      0) == 0);
  CHECK(sim.out == run({"simulate", "--n", "8", "--d", "2", "--seed", "3"}).out);
  const auto js = nlohmann::json::parse(run({"simulate", "--n", "8", "--d", "2", "--format", "json"}).out);
  CHECK(js["points"].size() == 9);
  CHECK(js["points"][0][1].get<double>() == 0.0);

  const auto dec = run({"decompose", "--n", "20", "--d", "3", "--p", "1.5"});
  CHECK(dec.code == 0);
  CHECK(dec.out.find("j,t,q,norm_pp\n0,0,0,0\n") != std::string::npos);
}

TEST_CASE("moment subcommands") {
  const auto m = run({"moments", "--law", "normal", "--p", "2", "--n", "10,100", "--replicates", "200"});
  CHECK(m.code == 0);
  CHECK(m.out.find("n,mean,stderr,limit\n10,") != std::string::npos);
  const auto b = run({"bimoments", "--rho", "0.5", "--p", "2", "--n", "10", "--replicates", "200", "--format", "json"});
  CHECK(b.code == 0);
  CHECK(nlohmann::json::parse(b.out)["rows"][0]["limit"].get<double>() == doctest::Approx(1.5).epsilon(1e-10));
  CHECK(nlohmann::json::parse(b.out)["config"]["rho"] == "0.5");
}

TEST_CASE("martingale subcommand") {
  const auto a = run({"martingale", "--n", "50", "--d", "5", "--replicates", "500", "--threads", "1"});
  const auto b = run({"martingale", "--n", "50", "--d", "5", "--replicates", "500", "--threads", "3"});
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out.find("t_violation_fraction,0\n") != std::string::npos);
  CHECK(a.out.find("exact_qn2,980\n") != std::string::npos);  // 2 * 50 * 49 / 5
}
