#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "drugmcts/actions.hpp"
#include "drugmcts/reward.hpp"
#include "drugmcts/rng.hpp"

namespace drugmcts {

using NodeId = int;

struct SearchNode {
  NodeId id = 0;  // equals the creation index
  Action action = Action::kRoot;
  std::optional<NodeId> parent;
  SearchContext context;
  int visits = 0;             // n_i
  double total_reward = 0.0;  // W_i
  std::vector<NodeId> children;
};

/// Nodes live in creation order; ids index the vector.
class SearchTree {
 public:
  explicit SearchTree(SearchContext root_context);

  const SearchNode& root() const { return nodes_.front(); }
  const SearchNode& node(NodeId id) const { return nodes_.at(static_cast<std::size_t>(id)); }
  SearchNode& node(NodeId id) { return nodes_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const noexcept { return nodes_.size(); }
  const std::vector<SearchNode>& nodes() const noexcept { return nodes_; }

  NodeId add_child(NodeId parent, Action action, SearchContext context);

  /// Root first.
  std::vector<NodeId> path_to(NodeId id) const;

  /// Bookkeeping violations: visit sums, reward bounds, A6 leaves.
  std::vector<std::string> check_invariants() const;

  /// JSON with action, parent, n, W, creation_index per node.
  nlohmann::json snapshot() const;

 private:
  std::vector<SearchNode> nodes_;
};

/// W/n + c * sqrt(ln N / n); +infinity when n = 0.
double uct_score(double total_reward, int visits, int parent_visits, double c);

/// Next pipeline action, or nullopt after A6. Ablations splice out A2 / A4.
std::optional<Action> successor(Action action, const Ablation& ablation);

/// Descends by maximal UCT (ties: lowest creation index) to a childless or A6 node.
NodeId select_leaf(const SearchTree& tree, double exploration_c);

/// Generates the children of `node` for its successor action. Samples are
/// drawn in up to config.distinct_batches rounds; answers whose normalized
/// text repeats are discarded, so fewer children than the branching factor
/// is possible. Throws for A6 nodes.
std::vector<NodeId> expand(SearchTree& tree, NodeId node, const AgentEnv& env, int rollout = -1);

/// Expands and descends by uniform random choice until an A6 node is reached.
NodeId simulate(SearchTree& tree, NodeId node, const AgentEnv& env, SplitMix64& rng,
                int rollout = -1);

/// n += 1 and W += reward on every node of the path. Path must start at the root.
void backpropagate(SearchTree& tree, const std::vector<NodeId>& path, double reward);

struct RolloutOutcome {
  std::vector<NodeId> path;
  std::string p_star;
  double r_relative = 0.0;
  double r_absolute = 0.0;
  double r_final = 0.0;
  RewardBreakdown reward;
};

struct RankedAnswer {
  std::string protein_id;
  double aggregate_score = 0.0;
  int support_count = 0;

  friend bool operator==(const RankedAnswer&, const RankedAnswer&) = default;
};

/// Reward sum per p_star; sorted by score desc, support desc, id asc.
std::vector<RankedAnswer> aggregate_answers(const std::vector<RolloutOutcome>& outcomes);

enum class SearchMode { kMcts, kBaseline, kEnhanced };
std::string to_string(SearchMode m);
SearchMode search_mode_from_string(const std::string& s);

struct SearchResult {
  std::string query_molecule_id;
  SearchMode mode = SearchMode::kMcts;
  int rollouts_requested = 0;
  std::vector<RolloutOutcome> rollout_outcomes;
  std::vector<RankedAnswer> ranked_answers;
  std::int64_t total_tokens = 0;
  /// Set when a backend failure stopped the search early.
  std::optional<std::string> aborted;
};

nlohmann::json to_json(const SearchResult& r);
SearchResult search_result_from_json(const nlohmann::json& j);

struct SearchRun {
  SearchResult result;
  SearchTree tree;
  TraceLog trace;
};

/// Root context from a problem instance (the A1 retrieval output it stores).
SearchContext root_context(const ProblemInstance& instance);

/// Rollout loop: select, simulate (expanding on the way), evaluate the A6
/// node, backpropagate. A BackendError ends the loop early and is recorded
/// in result.aborted; other errors propagate.
SearchRun run_search(const ProblemInstance& instance, const Corpus& corpus, Backend& backend,
                     const TemplateLibrary& templates, const SearchConfig& config);

/// Single Decision-agent prompt over all candidate proteins, no tree.
/// kBaseline lists pocket types only; kEnhanced adds pockets, literature
/// and the query profiles.
SearchRun run_single_shot(const ProblemInstance& instance, const Corpus& corpus, Backend& backend,
                          const TemplateLibrary& templates, const SearchConfig& config,
                          SearchMode mode);

}  // namespace drugmcts
