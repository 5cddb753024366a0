#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "drugmcts/actions.hpp"
#include "drugmcts/parse.hpp"

namespace drugmcts {

struct RelativeReward {
  std::string p_star;
  double r_relative = 0.0;
  std::map<std::string, int> selection_counts;
  int parseable = 0;
  /// No sample parsed; p_star is the rollout's own selection and r_relative is 0.
  bool fallback = false;
};

struct AbsoluteReward {
  double r_absolute = 0.0;
  int yes_count = 0;
  int k = 0;
};

struct RewardBreakdown {
  std::string p_star;
  std::map<std::string, int> selection_counts;
  int yes_count = 0;
  int k = 0;
  double r_relative = 0.0;
  double r_absolute = 0.0;
  double r_final = 0.0;
  std::vector<std::string> flags;
};

nlohmann::json to_json(const RewardBreakdown& b);
RewardBreakdown reward_from_json(const nlohmann::json& j);

/// Modal selection (ties: smallest id) and its share of the parseable selections.
/// Unparseable samples are nullopt and drop out of the denominator.
RelativeReward tally_selections(const std::vector<std::optional<std::string>>& selections,
                                const std::string& rollout_selection);

/// Share of affirmative replies among k; indeterminate counts as not affirmative.
AbsoluteReward tally_yes_no(const std::vector<YesNo>& replies);

/// combined: (r_relative + r_absolute) / 2; relative_only: r_relative.
/// Throws std::invalid_argument for inputs outside [0, 1].
double final_reward(double r_relative, double r_absolute, RewardMode mode);

/// Re-asks the Decision agent k times with the protein-selection question.
/// `stream_offset` positions the samples in the backend's stream.
RelativeReward relative_reward(const SearchContext& ctx, const AgentEnv& env,
                               std::uint64_t stream_offset, int rollout = -1);

/// k yes/no judgments on whether `p_star` interacts with the query molecule.
AbsoluteReward absolute_reward(const std::string& p_star, const SearchContext& ctx,
                               const AgentEnv& env, std::uint64_t stream_offset, int rollout = -1);

/// Full terminal evaluation. Skips the absolute queries in relative_only mode.
RewardBreakdown evaluate_terminal(const SearchContext& ctx, const AgentEnv& env,
                                  std::uint64_t stream_offset, int rollout = -1);

}  // namespace drugmcts
