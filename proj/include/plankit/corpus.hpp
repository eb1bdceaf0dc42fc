#pragma once

#include "plankit/grid.hpp"

#include <string_view>
#include <vector>

namespace plankit {

struct CorpusMap {
  std::string_view name;
  std::string_view text;
};

/// Built-in grid maps shared by the tests, the benchmarks and `corpus generate`.
inline const std::vector<CorpusMap>& corpus_maps() {
  static const std::vector<CorpusMap> maps{
      {"line",
       R"(S......G
)"},
      {"open_room",
       R"(S.......
........
........
........
........
........
........
.......G
)"},
      {"single_wall",
       R"(S.........
..........
....#.....
....#.....
....#.....
....#.....
....#.....
....#.....
....#.....
....#....G
)"},
      {"maze",
       R"(S.#......
..#.###..
..#...#..
..###.#.#
......#..
#####.##.
......#..
.####.#.#
......#.G
)"},
      {"spiral",
       R"(...........
.#########.
.#.......#.
.#.#####.#.
.#.#...#.#.
.#.#.G.#.#.
.#.#.###.#.
.#.#.....#.
.#.#######.
.#.........
S#.........
)"},
      {"narrow_corridor",
       R"(S....#.........
.....#.........
...............
.....#.........
.....#........G
)"},
      {"four_rooms",
       R"(S....#.....
.....#.....
...........
.....#.....
.....#.....
##.####.###
.....#.....
.....#.....
...........
.....#.....
.....#....G
)"},
      {"dead_ends",
       R"(S..#.....
.#.#.###.
.#...#...
.####.#.#
......#..
.##.#.##.
.#..#....
.#.####.#
...#....G
)"},
      {"two_goals",
       R"(G...#....
....#....
....S....
....#....
....#...G
)"},
      {"scattered",
       R"(S........#..##.
.......##......
.........#..#..
........##....#
..#...#........
............#..
.......#.......
#....#.#.##..#.
.#.#...#.....##
...#......#....
.#..#....###...
....#.....#....
..#...........#
.#.#...........
............#.G
)"},
      {"field_40",
       R"(S.......................................
........................................
..............................#.........
..............................#.........
..............................#.........
..............................#.........
..............................#.........
..............................#.........
....############..............#.........
..............................#.........
..............................#.........
..............................#.........
..............................#.........
..............................#.........
........................................
........................................
......................##############....
........................................
........................................
........................................
........................................
........................................
........................................
........................................
......##############....................
........................................
............#...........................
............#...........................
............#...........................
............#...........................
............#...........................
............#...........................
............#.......##############......
............#...........................
............#...........................
............#...........................
............#...........................
............#...........................
........................................
.......................................G
)"},
  };
  return maps;
}

inline PlanningProblem corpus_problem(std::string_view name) {
  for (const auto& m : corpus_maps())
    if (m.name == name) return parse_grid_map(m.text, std::string(m.name));
  throw Error("ProblemLoadError", "no corpus map named '" + std::string(name) + "'");
}

}  // namespace plankit
