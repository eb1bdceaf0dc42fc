#pragma once

#include "plankit/qlearn.hpp"
#include "plankit/report.hpp"

#include <nlohmann/json.hpp>

namespace plankit {

namespace detail {

template <class T>
nlohmann::json optional_json(const std::optional<T>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

template <class Scalar>
nlohmann::json scalar_json(const Scalar& v) {
  if constexpr (std::is_same_v<Scalar, Rational>)
    return v.denominator() == 1 ? nlohmann::json(v.numerator()) : nlohmann::json(to_string(v));
  else
    return nlohmann::json(v);
}

}  // namespace detail

inline nlohmann::json to_json(const TrialMetrics& m) {
  return {{"wall_time_s", m.wall_time_s},
          {"action_count", m.action_count},
          {"converged_whole_space", m.converged_whole_space},
          {"initial_ctg_converged", m.initial_ctg_converged},
          {"discover_goal_action_index", detail::optional_json(m.discover_goal_action_index)},
          {"initial_ctg_action_index", detail::optional_json(m.initial_ctg_action_index)},
          {"shortest_path", detail::optional_json(m.shortest_path)},
          {"longest_path", detail::optional_json(m.longest_path)}};
}

/// Metrics, per-episode trace and the learned cost-to-go (null = no actions).
template <class Scalar>
nlohmann::json to_json(const PlanningProblem& p, const LearnRunResult<Scalar>& r) {
  nlohmann::json episodes = nlohmann::json::array();
  for (const auto& e : r.trace) episodes.push_back({{"steps", e.steps}, {"goal_reached", e.goal_reached}});
  nlohmann::json values = nlohmann::json::array();
  for (std::uint32_t x = 0; x < p.num_states(); ++x) {
    const auto v = r.table.min_value(StateId(x));
    values.push_back(v ? detail::scalar_json(*v) : nlohmann::json(nullptr));
  }
  return {{"metrics", to_json(r.metrics)},
          {"initial_ctg_episode", detail::optional_json(r.initial_ctg_episode)},
          {"whole_space_action_index", detail::optional_json(r.whole_space_action_index)},
          {"episodes", std::move(episodes)},
          {"values", std::move(values)}};
}

}  // namespace plankit
