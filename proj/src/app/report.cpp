#include "idbpd/app/report.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace idbpd::app {

using nlohmann::json;

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

std::vector<TraceRow> trace_rows(const IterateTrace& trace, const std::vector<KktReport>& reports) {
  if (reports.size() != trace.entries.size())
    throw std::invalid_argument("one KKT report per trace entry required");
  std::vector<TraceRow> rows;
  rows.reserve(reports.size());
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const TraceEntry& e = trace.entries[i];
    const KktReport& r = reports[i];
    rows.push_back({e.k, r.f_value, r.infeasibility, r.stationarity, r.slackness, e.lambda, e.d_norm,
                    e.wallclock_ns});
  }
  return rows;
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& rows) {
  out << kTraceHeader << '\n';
  for (const TraceRow& r : rows) {
    out << r.k << ',' << format_double(r.f) << ',' << format_double(r.g_plus) << ','
        << format_double(r.stationarity) << ',' << format_double(r.slackness) << ','
        << format_double(r.lambda) << ',' << format_double(r.d_norm) << ',' << r.wallclock_ns << '\n';
  }
}

namespace {

template <typename T>
T parse_cell(const std::string& cell, std::size_t line) {
  T value{};
  const char* end = cell.data() + cell.size();
  const auto res = std::from_chars(cell.data(), end, value);
  if (res.ec != std::errc() || res.ptr != end)
    throw ConfigError("trace.csv:" + std::to_string(line) + ": bad value '" + cell + "'");
  return value;
}

}  // namespace

std::vector<TraceRow> parse_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader)
    throw ConfigError("trace.csv:1: unexpected header");
  std::vector<TraceRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != 8)
      throw ConfigError("trace.csv:" + std::to_string(line_no) + ": expected 8 columns");
    TraceRow r;
    r.k = parse_cell<int>(cells[0], line_no);
    r.f = parse_cell<double>(cells[1], line_no);
    r.g_plus = parse_cell<double>(cells[2], line_no);
    r.stationarity = parse_cell<double>(cells[3], line_no);
    r.slackness = parse_cell<double>(cells[4], line_no);
    r.lambda = parse_cell<double>(cells[5], line_no);
    r.d_norm = parse_cell<double>(cells[6], line_no);
    r.wallclock_ns = parse_cell<std::int64_t>(cells[7], line_no);
    rows.push_back(r);
  }
  return rows;
}

RunSummary summarize(const IterateTrace& trace, const std::vector<KktReport>& reports) {
  if (trace.entries.empty() || reports.size() != trace.entries.size())
    throw std::invalid_argument("summarize needs a nonempty trace with one report per entry");
  RunSummary s;
  s.method = trace.method;
  s.best_index = best_index(reports);
  s.best_k = trace.entries[s.best_index].k;
  s.best = reports[s.best_index];
  s.best_lambda = trace.entries[s.best_index].lambda;
  s.final_report = reports.back();
  s.iterations = trace.iterations;
  s.recorded = trace.entries.size();
  s.calls = trace.calls;
  s.wall_seconds = static_cast<double>(trace.entries.back().wallclock_ns) * 1e-9;
  return s;
}

json to_json(const KktReport& r) {
  return {{"stationarity", r.stationarity}, {"infeasibility", r.infeasibility},
          {"slackness", r.slackness},       {"f", r.f_value},
          {"g", r.g_value},                 {"max_residual", r.max_residual()}};
}

json to_json(const RunSummary& s) {
  json j;
  j["name"] = s.name;
  j["method"] = s.method;
  j["status"] = s.status;
  if (s.abort_reason) j["abort"] = {{"reason", *s.abort_reason}, {"iteration", s.abort_iteration.value_or(-1)}};
  j["best"] = to_json(s.best);
  j["best"]["index"] = s.best_index;
  j["best"]["k"] = s.best_k;
  j["best"]["lambda"] = s.best_lambda;
  j["final"] = to_json(s.final_report);
  j["iterations"] = s.iterations;
  j["recorded"] = s.recorded;
  j["oracle_calls"] = {{"phi", s.calls.phi},
                       {"psi", s.calls.psi},
                       {"grad", s.calls.grad},
                       {"exact", s.calls.exact},
                       {"total", s.calls.total()}};
  j["wall_seconds"] = s.wall_seconds;
  j["config_hash"] = s.config_hash;
  if (s.threshold_r) j["threshold_r"] = *s.threshold_r;
  if (!s.extra.empty()) j["extra"] = s.extra;
  return j;
}

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fixed(double v) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(2);
  s << v;
  return s.str();
}

constexpr std::array<const char*, 8> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                 "#9467bd", "#8c564b", "#e377c2", "#17becf"};

}  // namespace

void write_panel_svg(std::ostream& out, const std::string& title, const std::string& x_label,
                     const std::vector<Series>& series, const std::string& config_hash) {
  constexpr double kWidth = 640, kHeight = 420;
  constexpr double kLeft = 70, kRight = 170, kTop = 40, kBottom = 50;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;

  double x_min = INFINITY, x_max = -INFINITY, e_min = INFINITY, e_max = -INFINITY;
  auto log_of = [](double v) { return std::log10(std::max(std::isfinite(v) ? std::abs(v) : kLogFloor, kLogFloor)); };
  for (const Series& s : series)
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      x_min = std::min(x_min, s.x[i]);
      x_max = std::max(x_max, s.x[i]);
      e_min = std::min(e_min, log_of(s.y[i]));
      e_max = std::max(e_max, log_of(s.y[i]));
    }
  if (!std::isfinite(x_min)) x_min = 0, x_max = 1, e_min = -1, e_max = 0;
  if (x_max <= x_min) x_max = x_min + 1;
  e_min = std::floor(e_min);
  e_max = std::ceil(e_max);
  if (e_max <= e_min) e_max = e_min + 1;

  auto px = [&](double x) { return kLeft + (x - x_min) / (x_max - x_min) * plot_w; };
  auto py = [&](double e) { return kTop + (e_max - e) / (e_max - e_min) * plot_h; };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  out << "<metadata>config_hash=" << xml_escape(config_hash) << "; y_axis=log10; floor="
      << format_double(kLogFloor) << "</metadata>\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
      << xml_escape(title) << "</text>\n";
  out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w << "\" height=\"" << plot_h
      << "\" fill=\"none\" stroke=\"black\"/>\n";

  const int decades = static_cast<int>(e_max - e_min);
  const int step = std::max(1, decades / 8);
  for (int e = static_cast<int>(e_min); e <= static_cast<int>(e_max); e += step) {
    const double y = py(e);
    out << "<line x1=\"" << kLeft << "\" x2=\"" << kLeft + plot_w << "\" y1=\"" << fixed(y) << "\" y2=\""
        << fixed(y) << "\" stroke=\"#ddd\"/>\n";
    out << "<text x=\"" << kLeft - 6 << "\" y=\"" << fixed(y + 4) << "\" text-anchor=\"end\">1e" << e
        << "</text>\n";
  }
  for (int i = 0; i <= 4; ++i) {
    const double xv = x_min + (x_max - x_min) * i / 4.0;
    out << "<text x=\"" << fixed(px(xv)) << "\" y=\"" << kTop + plot_h + 16
        << "\" text-anchor=\"middle\">" << format_double(std::round(xv * 100) / 100) << "</text>\n";
  }
  out << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 10 << "\" text-anchor=\"middle\">"
      << xml_escape(x_label) << "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % kPalette.size()];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < series[s].x.size() && i < series[s].y.size(); ++i)
      out << fixed(px(series[s].x[i])) << ',' << fixed(py(log_of(series[s].y[i]))) << ' ';
    out << "\"/>\n";
    const double ly = kTop + 14 + 16 * static_cast<double>(s);
    out << "<line x1=\"" << kLeft + plot_w + 10 << "\" x2=\"" << kLeft + plot_w + 30 << "\" y1=\"" << ly
        << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << kLeft + plot_w + 34 << "\" y=\"" << ly + 4 << "\">" << xml_escape(series[s].name)
        << "</text>\n";
  }
  out << "</svg>\n";
}

void write_panel_csv(std::ostream& out, const std::vector<Series>& series) {
  out << "series,x,value\n";
  for (const Series& s : series)
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i)
      out << s.name << ',' << format_double(s.x[i]) << ',' << format_double(s.y[i]) << '\n';
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace idbpd::app
