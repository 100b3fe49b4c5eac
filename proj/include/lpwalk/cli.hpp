#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace CLI {
class App;
}

namespace lpwalk {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalidConfig = 2;
inline constexpr int kExitResourceRefusal = 3;

/// Flat flag set shared by every subcommand. Each subcommand binds the subset
/// it uses; text-valued fields hold comma lists parsed after the fact.
struct CliOptions {
  std::uint64_t n = 1000;
  std::string n_list = "100,1000,10000";
  std::uint64_t d = 100;
  std::string p = "2";
  std::string law = "rademacher";
  std::uint64_t seed = 0;
  std::uint64_t replicate = 0;
  std::uint64_t m = 0;
  std::uint64_t replicates = 100;
  unsigned threads = 1;
  std::string out;
  std::string aggregate_out;
  std::string format = "csv";
  std::string points = "100x100,400x400,1600x1600";
  std::string stats = "all";
  std::string plan;
  double rho = 0.0;
  std::string eps = "0.5,1";
  bool two_point = false;
  double a = 0.5;
  std::string a_file;
  std::string b_file;
};

/// The parser for all subcommands, bound to opts.
std::unique_ptr<CLI::App> build_app(CliOptions& opts);

/// Parses args (without the program name) and dispatches. Results go to `out`
/// unless --out names a file; diagnostics go to `err`. Returns kExitOk,
/// kExitInvalidConfig or kExitResourceRefusal (1 for other failures).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lpwalk
