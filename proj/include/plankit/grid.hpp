#pragma once

#include "plankit/problem.hpp"

#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace plankit {

namespace detail {

inline std::string at_position(std::size_t line, std::size_t col) {
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

inline std::vector<std::string> split_map_rows(std::string_view text) {
  std::vector<std::string> rows;
  std::string current;
  for (char c : text) {
    if (c == '\n') {
      rows.push_back(std::move(current));
      current.clear();
    } else if (c != '\r') {
      current.push_back(c);
    }
  }
  if (!current.empty()) rows.push_back(std::move(current));
  return rows;
}

}  // namespace detail

/// Parses a 4-connected grid map.
///
/// Characters: '#' obstacle, '.' free, 'S' start (exactly one), 'G' goal
/// (one or more). Every non-obstacle cell becomes a state, numbered in
/// row-major order; moves N/E/S/W to in-bounds free cells cost 1; goals get
/// the TERMINATE action. Errors name the offending line and column (1-based).
inline PlanningProblem parse_grid_map(std::string_view text, std::string name = {}) {
  std::vector<std::string> rows = detail::split_map_rows(text);
  if (rows.empty()) throw Error("EmptyMap", "map has no rows");
  const std::size_t width = rows.front().size();
  if (width == 0) throw Error("NonRectangular", "map row at line 1 is empty");
  for (std::size_t r = 0; r < rows.size(); ++r)
    if (rows[r].size() != width)
      throw Error("NonRectangular", "row at " + detail::at_position(r + 1, rows[r].size() + 1) +
                                        " has length " + std::to_string(rows[r].size()) +
                                        ", expected " + std::to_string(width));

  std::vector<std::vector<std::int64_t>> index(rows.size(), std::vector<std::int64_t>(width, -1));
  GridLayout layout;
  layout.rows = rows;
  std::optional<StateId> start;
  std::vector<StateId> goals;
  std::uint32_t next = 0;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      const char ch = rows[r][c];
      switch (ch) {
        case '#':
          continue;
        case '.':
        case 'S':
        case 'G':
          break;
        default:
          throw Error("InvalidCharacter", std::string("unexpected character '") + ch + "' at " +
                                              detail::at_position(r + 1, c + 1));
      }
      StateId id(next++);
      index[r][c] = id.value;
      layout.cell.emplace_back(static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(c));
      if (ch == 'S') {
        if (start)
          throw Error("MultipleStart", "second start cell at " + detail::at_position(r + 1, c + 1));
        start = id;
      } else if (ch == 'G') {
        goals.push_back(id);
      }
    }
  }
  if (!start) throw Error("NoStart", "map has no 'S' cell (" + std::to_string(rows.size()) + " lines)");
  if (goals.empty()) throw Error("NoGoal", "map has no 'G' cell (" + std::to_string(rows.size()) + " lines)");

  ProblemBuilder b(next);
  b.set_initial(*start).set_action_names({"N", "E", "S", "W"}).set_name(std::move(name));
  for (StateId g : goals) b.add_goal(g);
  const int dr[4] = {-1, 0, 1, 0};
  const int dc[4] = {0, 1, 0, -1};
  for (std::uint32_t s = 0; s < next; ++s) {
    const auto [r, c] = layout.cell[s];
    for (std::uint8_t a = 0; a < 4; ++a) {
      const std::int64_t nr = static_cast<std::int64_t>(r) + dr[a];
      const std::int64_t nc = static_cast<std::int64_t>(c) + dc[a];
      if (nr < 0 || nc < 0 || nr >= static_cast<std::int64_t>(rows.size()) ||
          nc >= static_cast<std::int64_t>(width))
        continue;
      const std::int64_t target = index[nr][nc];
      if (target < 0) continue;
      b.add_action(StateId(s), ActionId(a), StateId(static_cast<std::uint32_t>(target)), Rational(1));
    }
  }
  b.set_grid(std::move(layout));
  return std::move(b).build();
}

/// Inverse of parse_grid_map for grid-backed problems: newline-terminated rows.
inline std::string serialize_grid_map(const PlanningProblem& p) {
  if (!p.grid()) throw Error("NotAGrid", "problem was not parsed from a grid map");
  std::string out;
  for (const auto& row : p.grid()->rows) {
    out += row;
    out += '\n';
  }
  return out;
}

inline PlanningProblem load_grid_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("ProblemLoadError", "cannot open map file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string name = path;
  if (auto slash = name.find_last_of('/'); slash != std::string::npos) name = name.substr(slash + 1);
  return parse_grid_map(ss.str(), name);
}

}  // namespace plankit
