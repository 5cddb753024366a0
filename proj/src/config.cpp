#include "drugmcts/config.hpp"

#include <set>

#include "drugmcts/error.hpp"

namespace drugmcts {

using nlohmann::json;

std::string action_tag(Action a) {
  switch (a) {
    case Action::kRoot: return "Root";
    case Action::kMoleculeAnalysis: return "A2";
    case Action::kMoleculeSelection: return "A3";
    case Action::kInteractionAnalysis: return "A4";
    case Action::kProteinSelection: return "A5";
    case Action::kEnd: return "A6";
  }
  return "?";
}

Action action_from_tag(const std::string& tag) {
  for (auto a : kAllActions) {
    if (action_tag(a) == tag) return a;
  }
  throw ConfigError("unknown action tag '" + tag + "'");
}

std::string to_string(RewardMode m) {
  return m == RewardMode::kCombined ? "combined" : "relative_only";
}
std::string to_string(SelectionPool p) {
  return p == SelectionPool::kReference ? "reference" : "candidates";
}
std::string to_string(TopKMode m) { return m == TopKMode::kGt ? "gt" : "gt_plus_3"; }

RewardMode reward_mode_from_string(const std::string& s) {
  if (s == "combined") return RewardMode::kCombined;
  if (s == "relative_only" || s == "relative-only") return RewardMode::kRelativeOnly;
  throw ConfigError("unknown reward mode '" + s + "'");
}

SelectionPool selection_pool_from_string(const std::string& s) {
  if (s == "reference") return SelectionPool::kReference;
  if (s == "candidates") return SelectionPool::kCandidates;
  throw ConfigError("unknown selection pool '" + s + "'");
}

TopKMode topk_mode_from_string(const std::string& s) {
  if (s == "gt") return TopKMode::kGt;
  if (s == "gt_plus_3" || s == "gt+3") return TopKMode::kGtPlus3;
  throw ConfigError("unknown top-k mode '" + s + "'");
}

int Branching::for_action(Action a) const {
  switch (a) {
    case Action::kMoleculeAnalysis: return molecule_analysis;
    case Action::kMoleculeSelection: return molecule_selection;
    case Action::kInteractionAnalysis: return interaction_analysis;
    case Action::kProteinSelection: return protein_selection;
    case Action::kEnd: return end;
    case Action::kRoot: break;
  }
  return 1;
}

void SearchConfig::validate() const {
  if (rollouts < 1) throw ConfigError("rollouts must be >= 1");
  if (temperature < 0.0) throw ConfigError("temperature must be >= 0");
  if (k_samples < 1) throw ConfigError("k_samples must be >= 1");
  if (exploration_c < 0.0) throw ConfigError("exploration_c must be >= 0");
  for (auto a : {Action::kMoleculeAnalysis, Action::kMoleculeSelection,
                 Action::kInteractionAnalysis, Action::kProteinSelection}) {
    if (branching.for_action(a) < 1) {
      throw ConfigError("branching for " + action_tag(a) + " must be >= 1");
    }
  }
  if (branching.end != 1) throw ConfigError("branching for A6 must be 1");
  if (distinct_batches < 1) throw ConfigError("distinct_batches must be >= 1");
  if (literature_budget < 0) throw ConfigError("literature_budget must be >= 0");
  if (max_tokens && *max_tokens < 1) throw ConfigError("max_tokens must be positive");
  if (http.max_retries < 1) throw ConfigError("http.max_retries must be >= 1");
}

namespace {

void reject_unknown(const json& j, std::initializer_list<const char*> known, const char* where) {
  std::set<std::string> k(known.begin(), known.end());
  for (const auto& [key, _] : j.items()) {
    if (!k.count(key)) throw ConfigError(std::string(where) + ": unknown key '" + key + "'");
  }
}

template <class T>
void take(const json& j, const char* key, T& out) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

}  // namespace

SearchConfig config_from_json(const json& j, SearchConfig c) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown(j,
                 {"rollouts", "temperature", "k_samples", "exploration_c", "branching", "seed",
                  "reward_mode", "ablation", "selection_pool", "topk_mode", "distinct_batches",
                  "literature_budget", "batched_reward_samples", "max_tokens", "yes_no_lexicon",
                  "http"},
                 "config");
  take(j, "rollouts", c.rollouts);
  take(j, "temperature", c.temperature);
  take(j, "k_samples", c.k_samples);
  take(j, "exploration_c", c.exploration_c);
  take(j, "seed", c.seed);
  take(j, "distinct_batches", c.distinct_batches);
  take(j, "literature_budget", c.literature_budget);
  take(j, "batched_reward_samples", c.batched_reward_samples);
  if (auto it = j.find("max_tokens"); it != j.end()) {
    if (it->is_null()) {
      c.max_tokens.reset();
    } else {
      int v = 0;
      take(j, "max_tokens", v);
      c.max_tokens = v;
    }
  }
  if (auto it = j.find("branching"); it != j.end()) {
    reject_unknown(*it, {"A2", "A3", "A4", "A5", "A6"}, "config.branching");
    take(*it, "A2", c.branching.molecule_analysis);
    take(*it, "A3", c.branching.molecule_selection);
    take(*it, "A4", c.branching.interaction_analysis);
    take(*it, "A5", c.branching.protein_selection);
    take(*it, "A6", c.branching.end);
  }
  if (auto it = j.find("ablation"); it != j.end()) {
    reject_unknown(*it, {"enable_molecule_analysis", "enable_interaction_analysis"},
                   "config.ablation");
    take(*it, "enable_molecule_analysis", c.ablation.enable_molecule_analysis);
    take(*it, "enable_interaction_analysis", c.ablation.enable_interaction_analysis);
  }
  std::string s;
  if (j.contains("reward_mode")) {
    take(j, "reward_mode", s);
    c.reward_mode = reward_mode_from_string(s);
  }
  if (j.contains("selection_pool")) {
    take(j, "selection_pool", s);
    c.selection_pool = selection_pool_from_string(s);
  }
  if (j.contains("topk_mode")) {
    take(j, "topk_mode", s);
    c.topk_mode = topk_mode_from_string(s);
  }
  if (auto it = j.find("yes_no_lexicon"); it != j.end()) {
    reject_unknown(*it, {"affirmative", "negative"}, "config.yes_no_lexicon");
    take(*it, "affirmative", c.lexicon.affirmative);
    take(*it, "negative", c.lexicon.negative);
  }
  if (auto it = j.find("http"); it != j.end()) {
    reject_unknown(*it,
                   {"base_url", "model", "max_retries", "backoff_initial_s", "timeout_s",
                    "api_key_env"},
                   "config.http");
    take(*it, "base_url", c.http.base_url);
    take(*it, "model", c.http.model);
    take(*it, "max_retries", c.http.max_retries);
    take(*it, "backoff_initial_s", c.http.backoff_initial_s);
    take(*it, "timeout_s", c.http.timeout_s);
    take(*it, "api_key_env", c.http.api_key_env);
  }
  c.validate();
  return c;
}

json to_json(const SearchConfig& c) {
  json j;
  j["rollouts"] = c.rollouts;
  j["temperature"] = c.temperature;
  j["k_samples"] = c.k_samples;
  j["exploration_c"] = c.exploration_c;
  j["branching"] = {{"A2", c.branching.molecule_analysis},
                    {"A3", c.branching.molecule_selection},
                    {"A4", c.branching.interaction_analysis},
                    {"A5", c.branching.protein_selection},
                    {"A6", c.branching.end}};
  j["seed"] = c.seed;
  j["reward_mode"] = to_string(c.reward_mode);
  j["ablation"] = {{"enable_molecule_analysis", c.ablation.enable_molecule_analysis},
                   {"enable_interaction_analysis", c.ablation.enable_interaction_analysis}};
  j["selection_pool"] = to_string(c.selection_pool);
  j["topk_mode"] = to_string(c.topk_mode);
  j["distinct_batches"] = c.distinct_batches;
  j["literature_budget"] = c.literature_budget;
  j["batched_reward_samples"] = c.batched_reward_samples;
  j["max_tokens"] = c.max_tokens ? json(*c.max_tokens) : json(nullptr);
  j["yes_no_lexicon"] = {{"affirmative", c.lexicon.affirmative},
                         {"negative", c.lexicon.negative}};
  j["http"] = {{"base_url", c.http.base_url},
               {"model", c.http.model},
               {"max_retries", c.http.max_retries},
               {"backoff_initial_s", c.http.backoff_initial_s},
               {"timeout_s", c.http.timeout_s},
               {"api_key_env", c.http.api_key_env}};
  return j;
}

}  // namespace drugmcts
