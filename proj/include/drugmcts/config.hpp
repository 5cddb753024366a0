#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace drugmcts {

/// Node kinds along the agent pipeline. kRoot holds the retrieval output.
enum class Action { kRoot, kMoleculeAnalysis, kMoleculeSelection, kInteractionAnalysis,
                    kProteinSelection, kEnd };

inline constexpr std::array<Action, 6> kAllActions = {
    Action::kRoot, Action::kMoleculeAnalysis, Action::kMoleculeSelection,
    Action::kInteractionAnalysis, Action::kProteinSelection, Action::kEnd};

/// Short tags used in files: Root, A2 .. A6.
std::string action_tag(Action a);
Action action_from_tag(const std::string& tag);

enum class RewardMode { kCombined, kRelativeOnly };
enum class SelectionPool { kReference, kCandidates };
enum class TopKMode { kGt, kGtPlus3 };

std::string to_string(RewardMode m);
std::string to_string(SelectionPool p);
std::string to_string(TopKMode m);
RewardMode reward_mode_from_string(const std::string& s);
SelectionPool selection_pool_from_string(const std::string& s);
TopKMode topk_mode_from_string(const std::string& s);

struct Ablation {
  bool enable_molecule_analysis = true;
  bool enable_interaction_analysis = true;
};

/// Children generated per expansion, indexed by the action being generated.
struct Branching {
  int molecule_analysis = 4;
  int molecule_selection = 4;
  int interaction_analysis = 4;
  int protein_selection = 1;
  int end = 1;

  int for_action(Action a) const;
};

struct YesNoLexicon {
  std::vector<std::string> affirmative = {"yes", "yeah", "yep", "affirmative"};
  std::vector<std::string> negative = {"no", "nope", "negative"};
};

struct HttpSettings {
  std::string base_url = "http://localhost:8000/v1";
  std::string model = "Qwen2.5-7B-Instruct";
  int max_retries = 3;
  double backoff_initial_s = 0.5;
  double timeout_s = 120.0;
  std::string api_key_env = "DRUGMCTS_API_KEY";
};

struct SearchConfig {
  int rollouts = 12;
  double temperature = 0.8;
  int k_samples = 4;
  double exploration_c = 1.41421356;
  Branching branching;
  std::uint64_t seed = 0;
  RewardMode reward_mode = RewardMode::kCombined;
  Ablation ablation;
  SelectionPool selection_pool = SelectionPool::kReference;
  TopKMode topk_mode = TopKMode::kGt;

  /// Sampling rounds spent looking for distinct answers during one expansion.
  int distinct_batches = 3;
  /// Literature snippets per protein carried into prompts.
  int literature_budget = 2;
  /// Reward samples in one n=k request (true) or k single requests.
  bool batched_reward_samples = true;
  std::optional<int> max_tokens;
  YesNoLexicon lexicon;
  HttpSettings http;

  /// Throws ConfigError when an invariant is broken.
  void validate() const;
};

/// Fields absent from `j` keep the values already in `base`. Unknown keys are rejected.
SearchConfig config_from_json(const nlohmann::json& j, SearchConfig base = {});
nlohmann::json to_json(const SearchConfig& c);

}  // namespace drugmcts
