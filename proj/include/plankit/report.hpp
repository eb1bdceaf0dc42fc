#pragma once

#include "plankit/error.hpp"
#include "plankit/metrics.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace plankit {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Mean and unbiased (n - 1) standard deviation; NaN mean when there are no
/// samples, std 0 for a single sample.
struct Aggregate {
  double mean = kNaN;
  double std = kNaN;

  static Aggregate of(const std::vector<double>& xs) {
    Aggregate a;
    if (xs.empty()) return a;
    double sum = 0.0;
    for (double x : xs) sum += x;
    a.mean = sum / static_cast<double>(xs.size());
    if (xs.size() == 1) {
      a.std = 0.0;
      return a;
    }
    double ss = 0.0;
    for (double x : xs) ss += (x - a.mean) * (x - a.mean);
    a.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    return a;
  }
};

/// One line of the results table. `epsilon` and `rho` are text because
/// they may be absent ("nan") or a schedule ("n^-0.7").
struct ReportRow {
  std::string algorithm;
  std::string epsilon = "nan";
  std::string rho = "nan";
  double gamma = 1.0;
  Aggregate runtime;
  Aggregate actions;
  double convergence_pct = kNaN;
  Aggregate discover;
  Aggregate init_ctg_time;  // in physical actions since the first learning action
  double init_ctg_pct = kNaN;
  double shortest = kNaN;
  double longest = kNaN;
};

namespace detail {

inline bool same_number(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

}  // namespace detail

inline bool operator==(const Aggregate& a, const Aggregate& b) {
  return detail::same_number(a.mean, b.mean) && detail::same_number(a.std, b.std);
}

inline bool operator==(const ReportRow& a, const ReportRow& b) {
  using detail::same_number;
  return a.algorithm == b.algorithm && a.epsilon == b.epsilon && a.rho == b.rho && same_number(a.gamma, b.gamma) &&
         a.runtime == b.runtime && a.actions == b.actions && same_number(a.convergence_pct, b.convergence_pct) &&
         a.discover == b.discover && a.init_ctg_time == b.init_ctg_time &&
         same_number(a.init_ctg_pct, b.init_ctg_pct) && same_number(a.shortest, b.shortest) &&
         same_number(a.longest, b.longest);
}

/// Shortest text that parses back to the same double; "nan", "inf", "-inf"
/// for the non-finite values.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, end);
}

inline double parse_number(std::string_view s) {
  if (s == "nan") return kNaN;
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size())
    throw Error("CsvParseError", "not a number: '" + std::string(s) + "'");
  return v;
}

inline const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols{
      "algorithm",     "epsilon",     "rho",          "gamma",        "runtime_mean",       "runtime_std",
      "actions_mean",  "actions_std", "convergence_pct", "discover_mean", "discover_std",   "init_ctg_time_mean",
      "init_ctg_time_std", "init_ctg_pct", "shortest", "longest"};
  return cols;
}

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline std::vector<std::string> csv_cells(const ReportRow& r) {
  return {r.algorithm,
          r.epsilon,
          r.rho,
          format_number(r.gamma),
          format_number(r.runtime.mean),
          format_number(r.runtime.std),
          format_number(r.actions.mean),
          format_number(r.actions.std),
          format_number(r.convergence_pct),
          format_number(r.discover.mean),
          format_number(r.discover.std),
          format_number(r.init_ctg_time.mean),
          format_number(r.init_ctg_time.std),
          format_number(r.init_ctg_pct),
          format_number(r.shortest),
          format_number(r.longest)};
}

/// Header plus one CRLF-free line per row; fields quoted per RFC 4180 when
/// they contain a comma, quote or line break.
inline std::string emit_csv(const std::vector<ReportRow>& rows) {
  std::ostringstream os;
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  for (const auto& r : rows) {
    const auto cells = csv_cells(r);
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << csv_field(cells[i]);
    os << '\n';
  }
  return os.str();
}

/// RFC 4180 records: quoted fields may hold commas, doubled quotes and line
/// breaks; CRLF and LF both end a record.
inline std::vector<std::vector<std::string>> parse_csv_records(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> rec;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"' && field.empty()) {
      quoted = true;
      field_started = true;
    } else if (c == ',') {
      rec.push_back(std::move(field));
      field.clear();
      field_started = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      rec.push_back(std::move(field));
      field.clear();
      records.push_back(std::move(rec));
      rec.clear();
      field_started = false;
    } else {
      field += c;
      field_started = true;
    }
  }
  if (quoted) throw Error("CsvParseError", "unterminated quoted field");
  if (field_started || !field.empty()) {
    rec.push_back(std::move(field));
    records.push_back(std::move(rec));
  }
  return records;
}

inline std::vector<ReportRow> parse_csv(std::string_view text) {
  const auto records = parse_csv_records(text);
  if (records.empty() || records.front() != csv_columns()) throw Error("CsvParseError", "unexpected CSV header");
  std::vector<ReportRow> rows;
  for (std::size_t k = 1; k < records.size(); ++k) {
    const auto& f = records[k];
    if (f.size() != csv_columns().size())
      throw Error("CsvParseError", "record " + std::to_string(k + 1) + " has " + std::to_string(f.size()) + " fields");
    ReportRow r;
    r.algorithm = f[0];
    r.epsilon = f[1];
    r.rho = f[2];
    r.gamma = parse_number(f[3]);
    r.runtime = {parse_number(f[4]), parse_number(f[5])};
    r.actions = {parse_number(f[6]), parse_number(f[7])};
    r.convergence_pct = parse_number(f[8]);
    r.discover = {parse_number(f[9]), parse_number(f[10])};
    r.init_ctg_time = {parse_number(f[11]), parse_number(f[12])};
    r.init_ctg_pct = parse_number(f[13]);
    r.shortest = parse_number(f[14]);
    r.longest = parse_number(f[15]);
    rows.push_back(std::move(r));
  }
  return rows;
}

namespace detail {

inline std::string pm(const Aggregate& a) { return format_number(a.mean) + " ± " + format_number(a.std); }

}  // namespace detail

/// Markdown table in the layout of the published result tables.
inline std::string emit_markdown(const std::vector<ReportRow>& rows) {
  std::ostringstream os;
  os << "| Algorithm | ε | ρ | γ | Run Time (s) | Actions | Convergence | Goal Discovered (actions) | "
        "Optimal Initial Cost-to-Go Time (actions) | Initial Cost-to-Go Convergence | Shortest Path | Longest Path |\n";
  os << "|---|---|---|---|---|---|---|---|---|---|---|---|\n";
  for (const auto& r : rows) {
    os << "| " << r.algorithm << " | " << r.epsilon << " | " << r.rho << " | " << format_number(r.gamma) << " | "
       << detail::pm(r.runtime) << " | " << detail::pm(r.actions) << " | " << format_number(r.convergence_pct)
       << " % | " << detail::pm(r.discover) << " | " << detail::pm(r.init_ctg_time) << " | "
       << format_number(r.init_ctg_pct) << " % | " << format_number(r.shortest) << " | " << format_number(r.longest)
       << " |\n";
  }
  return os.str();
}

}  // namespace plankit
