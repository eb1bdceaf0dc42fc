#pragma once

#include <cstdint>
#include <optional>

namespace plankit {

/// Path lengths at or above this value mean "the greedy rollout never
/// reached the goal".
inline constexpr std::uint64_t kPathCap = 100002;

/// Measurements of one planning or learning run. Action indices are
/// 1-based counts of physical actions since the first learning action.
struct TrialMetrics {
  double wall_time_s = 0.0;
  std::uint64_t action_count = 0;
  bool converged_whole_space = false;
  bool initial_ctg_converged = false;
  std::optional<std::uint64_t> discover_goal_action_index;
  std::optional<std::uint64_t> initial_ctg_action_index;
  std::optional<std::uint64_t> shortest_path;
  std::optional<std::uint64_t> longest_path;

  friend bool operator==(const TrialMetrics&, const TrialMetrics&) = default;
};

}  // namespace plankit
