#include "lpwalk/report_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace lpwalk {

std::string format_double(double v) {
  char buf[32];
  const int len = std::snprintf(buf, sizeof buf, "%.17g", v);
  return {buf, static_cast<std::size_t>(len)};
}

void write_config_echo(std::ostream& out, const ConfigEcho& echo) {
  for (const auto& [key, value] : echo) out << "# " << key << '=' << value << '\n';
}

void write_report_csv(std::ostream& out, const std::vector<ReportRow>& rows, const ConfigEcho& echo) {
  write_config_echo(out, echo);
  out << kReportHeader << '\n';
  for (const auto& r : rows) {
    out << r.law << ',' << format_double(r.p) << ',' << r.n << ',' << r.d << ',' << r.m << ','
        << r.replicate << ',' << r.seed << ',' << r.statistic << ',' << format_double(r.value) << '\n';
  }
}

void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows,
                         const ConfigEcho& echo) {
  write_config_echo(out, echo);
  out << kAggregateHeader << '\n';
  for (const auto& a : rows) {
    out << a.law << ',' << format_double(a.p) << ',' << a.n << ',' << a.d << ',' << a.m << ','
        << a.statistic << ',' << format_double(a.median) << ',' << format_double(a.mean) << ','
        << format_double(a.stderr_) << ',' << format_double(a.allowance) << '\n';
  }
}

void write_moment_csv(std::ostream& out, const std::vector<MomentRow>& rows, const ConfigEcho& echo) {
  write_config_echo(out, echo);
  out << kMomentHeader << '\n';
  for (const auto& r : rows) {
    out << r.n << ',' << format_double(r.mean) << ',' << format_double(r.stderr_) << ','
        << format_double(r.limit) << '\n';
  }
}

void write_trace_csv(std::ostream& out, const DecompositionTrace& trace, const ConfigEcho& echo) {
  write_config_echo(out, echo);
  out << "j,t,q,norm_pp\n";
  for (std::size_t j = 0; j < trace.t.size(); ++j) {
    out << j << ',' << format_double(trace.t[j]) << ',' << format_double(trace.q[j]) << ','
        << format_double(trace.norm_pp[j]) << '\n';
  }
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream in(line);
  std::string f;
  while (std::getline(in, f, ',')) fields.push_back(f);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_real(const std::string& s, std::size_t line_no) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw std::invalid_argument("line " + std::to_string(line_no) + ": bad real '" + s + "'");
  }
  return v;
}

std::uint64_t parse_count(const std::string& s, std::size_t line_no) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw std::invalid_argument("line " + std::to_string(line_no) + ": bad integer '" + s + "'");
  }
  return v;
}

/// Calls row(fields, line_no) for each data line after checking the header.
template <typename RowFn>
void read_table(std::istream& in, const char* header, std::size_t columns, RowFn row) {
  std::string line;
  std::size_t line_no = 0;
  bool seen_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (!seen_header) {
      if (line != header) {
        throw std::invalid_argument("line " + std::to_string(line_no) + ": expected header '" +
                                    header + "'");
      }
      seen_header = true;
      continue;
    }
    const auto fields = split_fields(line);
    if (fields.size() != columns) {
      throw std::invalid_argument("line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(columns) + " fields");
    }
    row(fields, line_no);
  }
  if (!seen_header) throw std::invalid_argument("missing header");
}

nlohmann::json echo_json(const ConfigEcho& echo) {
  nlohmann::json cfg = nlohmann::json::object();
  for (const auto& [key, value] : echo) cfg[key] = value;
  return cfg;
}

}  // namespace

std::vector<ReportRow> read_report_csv(std::istream& in) {
  std::vector<ReportRow> rows;
  read_table(in, kReportHeader, 9, [&](const auto& f, std::size_t ln) {
    rows.push_back({f[0], parse_real(f[1], ln), parse_count(f[2], ln), parse_count(f[3], ln),
                    parse_count(f[4], ln), parse_count(f[5], ln), parse_count(f[6], ln), f[7],
                    parse_real(f[8], ln)});
  });
  return rows;
}

std::vector<AggregateRow> read_aggregate_csv(std::istream& in) {
  std::vector<AggregateRow> rows;
  read_table(in, kAggregateHeader, 10, [&](const auto& f, std::size_t ln) {
    rows.push_back({f[0], parse_real(f[1], ln), parse_count(f[2], ln), parse_count(f[3], ln),
                    parse_count(f[4], ln), f[5], parse_real(f[6], ln), parse_real(f[7], ln),
                    parse_real(f[8], ln), parse_real(f[9], ln)});
  });
  return rows;
}

std::string report_json(const std::vector<ReportRow>& rows, const std::vector<AggregateRow>& aggs,
                        const ConfigEcho& echo) {
  nlohmann::json doc;
  doc["config"] = echo_json(echo);
  auto& jr = doc["rows"] = nlohmann::json::array();
  for (const auto& r : rows) {
    jr.push_back({{"law", r.law}, {"p", r.p}, {"n", r.n}, {"d", r.d}, {"m", r.m},
                  {"replicate", r.replicate}, {"seed", r.seed}, {"statistic", r.statistic},
                  {"value", r.value}});
  }
  auto& ja = doc["aggregates"] = nlohmann::json::array();
  for (const auto& a : aggs) {
    ja.push_back({{"law", a.law}, {"p", a.p}, {"n", a.n}, {"d", a.d}, {"m", a.m},
                  {"statistic", a.statistic}, {"median", a.median}, {"mean", a.mean},
                  {"stderr", a.stderr_}, {"allowance", a.allowance}});
  }
  return doc.dump(1) + "\n";
}

std::string moment_json(const std::vector<MomentRow>& rows, const ConfigEcho& echo) {
  nlohmann::json doc;
  doc["config"] = echo_json(echo);
  auto& jr = doc["rows"] = nlohmann::json::array();
  for (const auto& r : rows) {
    jr.push_back({{"n", r.n}, {"mean", r.mean}, {"stderr", r.stderr_}, {"limit", r.limit}});
  }
  return doc.dump(1) + "\n";
}

namespace {

std::vector<std::pair<std::string, double>> martingale_quantities(const MartingaleDiagnostics& d) {
  std::vector<std::pair<std::string, double>> q{
      {"replicates", static_cast<double>(d.replicates)},
      {"t_violation_fraction", d.t_violation_fraction},
      {"max_residual_rel", d.max_residual_rel},
      {"mean_qn", d.mean_qn},
      {"se_qn", d.se_qn},
      {"mean_qn2", d.mean_qn2},
      {"se_qn2", d.se_qn2},
  };
  if (!std::isnan(d.exact_qn2)) q.emplace_back("exact_qn2", d.exact_qn2);
  for (const auto& row : d.doob) {
    const std::string eps = format_double(row.epsilon);
    q.emplace_back("doob_frequency_eps=" + eps, row.frequency);
    q.emplace_back("doob_bound_eps=" + eps, row.bound);
  }
  for (const auto& pr : d.probes) {
    const std::string j = std::to_string(pr.j);
    q.emplace_back("probe_corr_j=" + j, pr.correlation);
    q.emplace_back("probe_se_j=" + j, pr.std_error);
  }
  return q;
}

}  // namespace

void write_martingale_csv(std::ostream& out, const MartingaleDiagnostics& diag, const ConfigEcho& echo) {
  write_config_echo(out, echo);
  out << "quantity,value\n";
  for (const auto& [name, value] : martingale_quantities(diag)) {
    out << name << ',' << format_double(value) << '\n';
  }
}

std::string martingale_json(const MartingaleDiagnostics& diag, const ConfigEcho& echo) {
  nlohmann::json doc;
  doc["config"] = echo_json(echo);
  doc["replicates"] = diag.replicates;
  doc["t_violation_fraction"] = diag.t_violation_fraction;
  doc["max_residual_rel"] = diag.max_residual_rel;
  doc["mean_qn"] = diag.mean_qn;
  doc["se_qn"] = diag.se_qn;
  doc["mean_qn2"] = diag.mean_qn2;
  doc["se_qn2"] = diag.se_qn2;
  doc["exact_qn2"] = std::isnan(diag.exact_qn2) ? nlohmann::json() : nlohmann::json(diag.exact_qn2);
  auto& doob = doc["doob"] = nlohmann::json::array();
  for (const auto& r : diag.doob) {
    doob.push_back({{"epsilon", r.epsilon}, {"frequency", r.frequency}, {"bound", r.bound}});
  }
  auto& probes = doc["probes"] = nlohmann::json::array();
  for (const auto& pr : diag.probes) {
    probes.push_back({{"j", pr.j}, {"correlation", pr.correlation}, {"std_error", pr.std_error}});
  }
  return doc.dump(1) + "\n";
}

}  // namespace lpwalk
