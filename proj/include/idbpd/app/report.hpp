#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "idbpd/metrics.hpp"
#include "idbpd/solver.hpp"

namespace idbpd::app {

/// One trace.csv row. Column order is fixed:
/// k,f,g_plus,stationarity,slackness,lambda,d_norm,wallclock_ns
struct TraceRow {
  int k = 0;
  double f = 0.0;
  double g_plus = 0.0;
  double stationarity = 0.0;
  double slackness = 0.0;
  double lambda = 0.0;
  double d_norm = 0.0;
  std::int64_t wallclock_ns = 0;

  bool operator==(const TraceRow&) const = default;
};

inline constexpr const char* kTraceHeader =
    "k,f,g_plus,stationarity,slackness,lambda,d_norm,wallclock_ns";

/// Shortest decimal string that parses back to the same double.
std::string format_double(double v);

std::vector<TraceRow> trace_rows(const IterateTrace& trace, const std::vector<KktReport>& reports);

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& rows);
/// Throws ConfigError naming the offending line.
std::vector<TraceRow> parse_trace_csv(std::istream& in);

struct RunSummary {
  std::string name;
  std::string method;
  std::string status = "completed";  // or "aborted"
  std::optional<std::string> abort_reason;
  std::optional<long> abort_iteration;
  std::size_t best_index = 0;
  int best_k = 0;
  KktReport best;
  double best_lambda = 0.0;
  KktReport final_report;
  int iterations = 0;
  std::size_t recorded = 0;
  OracleCounts calls;
  double wall_seconds = 0.0;
  std::string config_hash;
  std::optional<double> threshold_r;
  nlohmann::json extra = nlohmann::json::object();
};

/// Best iterate and final residuals from per-entry reports. Requires a
/// nonempty trace.
RunSummary summarize(const IterateTrace& trace, const std::vector<KktReport>& reports);

nlohmann::json to_json(const RunSummary& s);
nlohmann::json to_json(const KktReport& r);

/// One line of a comparison panel.
struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

/// Values at or below this are drawn at the floor on log axes.
inline constexpr double kLogFloor = 1e-16;

/// Self-contained SVG line chart with a log10 y-axis. The config hash goes
/// into the <metadata> element.
void write_panel_svg(std::ostream& out, const std::string& title, const std::string& x_label,
                     const std::vector<Series>& series, const std::string& config_hash);

/// Long format: series,x,value.
void write_panel_csv(std::ostream& out, const std::vector<Series>& series);

void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace idbpd::app
