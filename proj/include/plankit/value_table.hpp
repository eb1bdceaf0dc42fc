#pragma once

#include "plankit/problem.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace plankit {

/// Cost-to-go per state; std::nullopt marks UNREACHABLE (no path to X_G).
template <class Scalar>
struct ValueTable {
  std::vector<std::optional<Scalar>> value;

  ValueTable() = default;
  explicit ValueTable(std::size_t n) : value(n) {}

  std::size_t size() const { return value.size(); }
  bool reachable(StateId x) const { return value.at(x.index()).has_value(); }
  const std::optional<Scalar>& operator[](StateId x) const { return value.at(x.index()); }
  std::optional<Scalar>& operator[](StateId x) { return value.at(x.index()); }

  friend bool operator==(const ValueTable&, const ValueTable&) = default;
};

/// Lossy conversion of an exact table for comparisons against float tables.
template <class Scalar>
ValueTable<double> to_double_table(const ValueTable<Scalar>& t) {
  ValueTable<double> out(t.size());
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t.value[i]) out.value[i] = to_double(*t.value[i]);
  return out;
}

/// pi: X -> U. States without any available action hold kTerminate.
struct Policy {
  std::vector<ActionId> action;

  ActionId operator()(StateId x) const { return action.at(x.index()); }
  friend bool operator==(const Policy&, const Policy&) = default;
};

struct PlannerStats {
  std::uint64_t sweeps = 0;
  std::uint64_t backups = 0;            // (x, u) evaluations
  std::uint64_t simulated_actions = 0;  // physical actions spent acquiring the model
  double residual = 0.0;                // max change during the last sweep
};

inline std::string format_value(const Rational& v) { return to_string(v); }
inline std::string format_value(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

/// CSV with header `state,row,col,value`; row/col are empty for non-grid
/// problems and unreachable states print `inf`.
template <class Scalar>
std::string value_table_csv(const PlanningProblem& p, const ValueTable<Scalar>& t) {
  std::ostringstream os;
  os << "state,row,col,value\n";
  for (std::uint32_t x = 0; x < t.size(); ++x) {
    os << x << ',';
    if (p.grid()) {
      const auto [r, c] = p.grid()->cell.at(x);
      os << r << ',' << c;
    } else {
      os << ',';
    }
    os << ',';
    if (t.value[x])
      os << format_value(*t.value[x]);
    else
      os << "inf";
    os << '\n';
  }
  return os.str();
}

}  // namespace plankit
