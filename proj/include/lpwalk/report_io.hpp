#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "lpwalk/experiments.hpp"

namespace lpwalk {

/// printf "%.17g": enough digits to round-trip every double.
std::string format_double(double v);

/// Resolved configuration, written as `# key=value` lines ahead of a CSV header.
using ConfigEcho = std::vector<std::pair<std::string, std::string>>;

void write_config_echo(std::ostream& out, const ConfigEcho& echo);

inline constexpr const char* kReportHeader = "law,p,n,d,m,replicate,seed,statistic,value";
inline constexpr const char* kAggregateHeader = "law,p,n,d,m,statistic,median,mean,stderr,allowance";
inline constexpr const char* kMomentHeader = "n,mean,stderr,limit";

void write_report_csv(std::ostream& out, const std::vector<ReportRow>& rows, const ConfigEcho& echo);
void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows,
                         const ConfigEcho& echo);
void write_moment_csv(std::ostream& out, const std::vector<MomentRow>& rows, const ConfigEcho& echo);
void write_trace_csv(std::ostream& out, const DecompositionTrace& trace, const ConfigEcho& echo);

/// Reads a report CSV, skipping `#` lines. Throws std::invalid_argument when
/// the header or a row does not match the schema.
std::vector<ReportRow> read_report_csv(std::istream& in);
std::vector<AggregateRow> read_aggregate_csv(std::istream& in);

/// JSON document {"config": {...}, "<key>": [...]} for each table.
std::string report_json(const std::vector<ReportRow>& rows, const std::vector<AggregateRow>& aggs,
                        const ConfigEcho& echo);
std::string moment_json(const std::vector<MomentRow>& rows, const ConfigEcho& echo);
std::string martingale_json(const MartingaleDiagnostics& diag, const ConfigEcho& echo);
/// `quantity,value` rows.
void write_martingale_csv(std::ostream& out, const MartingaleDiagnostics& diag, const ConfigEcho& echo);

}  // namespace lpwalk
