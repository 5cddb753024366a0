#include "drugmcts/mcts.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "drugmcts/error.hpp"
#include "drugmcts/parse.hpp"

namespace drugmcts {

using nlohmann::json;

namespace {

/// Reward queries sample from their own region of the backend stream so
/// they never reuse expansion samples; each rollout gets a fresh window.
std::uint64_t reward_stream_offset(int rollout, int k) {
  return (std::uint64_t{1} << 32) + static_cast<std::uint64_t>(rollout) * static_cast<std::uint64_t>(k);
}

bool nonblank(const std::string& s) { return s.find_first_not_of(" \t\r\n") != std::string::npos; }

}  // namespace

SearchTree::SearchTree(SearchContext root_context) {
  SearchNode root;
  root.id = 0;
  root.action = Action::kRoot;
  root.context = std::move(root_context);
  nodes_.push_back(std::move(root));
}

NodeId SearchTree::add_child(NodeId parent, Action action, SearchContext context) {
  const auto id = static_cast<NodeId>(nodes_.size());
  SearchNode n;
  n.id = id;
  n.action = action;
  n.parent = parent;
  n.context = std::move(context);
  nodes_.push_back(std::move(n));
  node(parent).children.push_back(id);
  return id;
}

std::vector<NodeId> SearchTree::path_to(NodeId id) const {
  std::vector<NodeId> path;
  for (std::optional<NodeId> cur = id; cur; cur = node(*cur).parent) path.push_back(*cur);
  std::reverse(path.begin(), path.end());
  return path;
}

std::vector<std::string> SearchTree::check_invariants() const {
  std::vector<std::string> out;
  constexpr double kEps = 1e-9;
  for (const auto& n : nodes_) {
    const auto tag = "node " + std::to_string(n.id) + " (" + action_tag(n.action) + ")";
    if (n.visits < 0) out.push_back(tag + ": negative visits");
    if (n.total_reward < -kEps || n.total_reward > n.visits + kEps) {
      out.push_back(tag + ": W=" + std::to_string(n.total_reward) + " outside [0, n=" +
                    std::to_string(n.visits) + "]");
    }
    if (n.action == Action::kEnd && !n.children.empty()) out.push_back(tag + ": A6 node has children");
    if (!n.children.empty()) {
      int sum = 0;
      for (auto c : n.children) sum += node(c).visits;
      if (sum != n.visits) {
        out.push_back(tag + ": n=" + std::to_string(n.visits) + " but children sum to " +
                      std::to_string(sum));
      }
    }
  }
  return out;
}

json SearchTree::snapshot() const {
  json nodes = json::array();
  for (const auto& n : nodes_) {
    nodes.push_back({{"id", n.id},
                     {"action", action_tag(n.action)},
                     {"parent", n.parent ? json(*n.parent) : json(nullptr)},
                     {"n", n.visits},
                     {"W", n.total_reward},
                     {"creation_index", n.id},
                     {"children", n.children}});
  }
  return {{"nodes", std::move(nodes)}};
}

double uct_score(double total_reward, int visits, int parent_visits, double c) {
  if (visits == 0) return std::numeric_limits<double>::infinity();
  const double n = static_cast<double>(visits);
  return total_reward / n + c * std::sqrt(std::log(static_cast<double>(parent_visits)) / n);
}

std::optional<Action> successor(Action action, const Ablation& ablation) {
  switch (action) {
    case Action::kRoot:
      return ablation.enable_molecule_analysis ? Action::kMoleculeAnalysis
                                               : Action::kMoleculeSelection;
    case Action::kMoleculeAnalysis: return Action::kMoleculeSelection;
    case Action::kMoleculeSelection:
      return ablation.enable_interaction_analysis ? Action::kInteractionAnalysis
                                                  : Action::kProteinSelection;
    case Action::kInteractionAnalysis: return Action::kProteinSelection;
    case Action::kProteinSelection: return Action::kEnd;
    case Action::kEnd: return std::nullopt;
  }
  return std::nullopt;
}

NodeId select_leaf(const SearchTree& tree, double exploration_c) {
  NodeId cur = 0;
  while (true) {
    const auto& n = tree.node(cur);
    if (n.children.empty() || n.action == Action::kEnd) return cur;
    const int parent_visits = std::max(n.visits, 1);
    NodeId best = n.children.front();
    double best_score = -std::numeric_limits<double>::infinity();
    for (auto c : n.children) {
      const auto& child = tree.node(c);
      const double s = uct_score(child.total_reward, child.visits, parent_visits, exploration_c);
      if (s > best_score) {
        best_score = s;
        best = c;
      }
    }
    cur = best;
  }
}

std::vector<NodeId> expand(SearchTree& tree, NodeId node, const AgentEnv& env, int rollout) {
  const auto action = tree.node(node).action;
  if (action == Action::kEnd) throw Error("A6 nodes are terminal and cannot be expanded");
  if (!tree.node(node).children.empty()) {
    throw Error("node " + std::to_string(node) + " is already expanded");
  }
  const auto next = *successor(action, env.config.ablation);
  if (next == Action::kEnd) {
    return {tree.add_child(node, Action::kEnd, tree.node(node).context)};
  }

  const int want = env.config.branching.for_action(next);
  const SearchContext parent_ctx = tree.node(node).context;
  auto req = prepare_request(next, parent_ctx, env);

  CallTally tally;
  std::set<std::string> seen;
  std::vector<StepOutcome> outcomes;
  std::uint64_t offset = 0;
  for (int batch = 0; batch < env.config.distinct_batches && static_cast<int>(outcomes.size()) < want;
       ++batch) {
    req.n = want - static_cast<int>(outcomes.size());
    req.sample_offset = offset;
    offset += static_cast<std::uint64_t>(req.n);
    for (const auto& text : tally.sample(env.backend, req).texts) {
      if (static_cast<int>(outcomes.size()) >= want) break;
      if (!nonblank(text)) continue;
      if (!seen.insert(normalize_answer(text)).second) continue;
      outcomes.push_back(apply_answer(next, parent_ctx, text, env));
    }
  }

  TraceRecord rec;
  rec.rollout = rollout;
  rec.stage = "expand";
  rec.action = next;
  rec.node_id = node;
  rec.template_id = req.template_id;
  rec.prompt_hash = hex64(prompt_hash(req.messages));
  rec.parsed = json::array();
  for (const auto& o : outcomes) {
    rec.parsed.push_back(o.parsed);
    for (const auto& f : o.flags) {
      if (std::find(rec.flags.begin(), rec.flags.end(), f) == rec.flags.end()) rec.flags.push_back(f);
    }
  }
  if (static_cast<int>(outcomes.size()) < want) rec.flags.push_back("fewer_distinct_answers");
  tally.fill(rec);
  if (env.trace) env.trace->records.push_back(rec);

  if (outcomes.empty()) {
    throw BackendError(action_tag(next) + ": no usable completion after " +
                       std::to_string(env.config.distinct_batches) + " sampling rounds");
  }
  std::vector<NodeId> ids;
  for (auto& o : outcomes) ids.push_back(tree.add_child(node, next, std::move(o.context)));
  return ids;
}

NodeId simulate(SearchTree& tree, NodeId node, const AgentEnv& env, SplitMix64& rng, int rollout) {
  NodeId cur = node;
  while (tree.node(cur).action != Action::kEnd) {
    auto kids = tree.node(cur).children;
    if (kids.empty()) kids = expand(tree, cur, env, rollout);
    cur = kids[rng.below(kids.size())];
  }
  return cur;
}

void backpropagate(SearchTree& tree, const std::vector<NodeId>& path, double reward) {
  if (path.empty() || path.front() != 0) throw Error("backpropagation path must start at the root");
  for (auto id : path) {
    auto& n = tree.node(id);
    n.visits += 1;
    n.total_reward += reward;
  }
}

std::vector<RankedAnswer> aggregate_answers(const std::vector<RolloutOutcome>& outcomes) {
  std::map<std::string, RankedAnswer> by_id;
  for (const auto& o : outcomes) {
    auto& a = by_id[o.p_star];
    a.protein_id = o.p_star;
    a.aggregate_score += o.r_final;
    a.support_count += 1;
  }
  std::vector<RankedAnswer> out;
  for (auto& [_, a] : by_id) out.push_back(std::move(a));
  std::stable_sort(out.begin(), out.end(), [](const RankedAnswer& x, const RankedAnswer& y) {
    if (x.aggregate_score != y.aggregate_score) return x.aggregate_score > y.aggregate_score;
    if (x.support_count != y.support_count) return x.support_count > y.support_count;
    return x.protein_id < y.protein_id;
  });
  return out;
}

std::string to_string(SearchMode m) {
  switch (m) {
    case SearchMode::kMcts: return "mcts";
    case SearchMode::kBaseline: return "baseline";
    case SearchMode::kEnhanced: return "enhanced";
  }
  return "mcts";
}

SearchMode search_mode_from_string(const std::string& s) {
  if (s == "mcts") return SearchMode::kMcts;
  if (s == "baseline") return SearchMode::kBaseline;
  if (s == "enhanced") return SearchMode::kEnhanced;
  throw ConfigError("unknown search mode '" + s + "'");
}

json to_json(const SearchResult& r) {
  json outcomes = json::array();
  for (const auto& o : r.rollout_outcomes) {
    outcomes.push_back({{"path", o.path},
                        {"p_star", o.p_star},
                        {"r_relative", o.r_relative},
                        {"r_absolute", o.r_absolute},
                        {"r_final", o.r_final},
                        {"reward", to_json(o.reward)}});
  }
  json ranked = json::array();
  for (const auto& a : r.ranked_answers) {
    ranked.push_back({{"protein_id", a.protein_id},
                      {"aggregate_score", a.aggregate_score},
                      {"support_count", a.support_count}});
  }
  return {{"query_molecule_id", r.query_molecule_id},
          {"mode", to_string(r.mode)},
          {"rollouts_requested", r.rollouts_requested},
          {"rollout_outcomes", std::move(outcomes)},
          {"ranked_answers", std::move(ranked)},
          {"total_tokens", r.total_tokens},
          {"aborted", r.aborted ? json(*r.aborted) : json(nullptr)}};
}

SearchResult search_result_from_json(const json& j) {
  try {
    SearchResult r;
    r.query_molecule_id = j.at("query_molecule_id").get<std::string>();
    r.mode = search_mode_from_string(j.at("mode").get<std::string>());
    r.rollouts_requested = j.at("rollouts_requested").get<int>();
    for (const auto& o : j.at("rollout_outcomes")) {
      RolloutOutcome out;
      out.path = o.at("path").get<std::vector<NodeId>>();
      out.p_star = o.at("p_star").get<std::string>();
      out.r_relative = o.at("r_relative").get<double>();
      out.r_absolute = o.at("r_absolute").get<double>();
      out.r_final = o.at("r_final").get<double>();
      out.reward = reward_from_json(o.at("reward"));
      r.rollout_outcomes.push_back(std::move(out));
    }
    for (const auto& a : j.at("ranked_answers")) {
      r.ranked_answers.push_back({a.at("protein_id").get<std::string>(),
                                  a.at("aggregate_score").get<double>(),
                                  a.at("support_count").get<int>()});
    }
    r.total_tokens = j.at("total_tokens").get<std::int64_t>();
    if (const auto& ab = j.at("aborted"); !ab.is_null()) r.aborted = ab.get<std::string>();
    return r;
  } catch (const json::exception& e) {
    throw Error(std::string("malformed search result: ") + e.what());
  }
}

SearchContext root_context(const ProblemInstance& instance) {
  SearchContext ctx;
  ctx.query_molecule_id = instance.query_molecule_id;
  ctx.candidate_molecules = instance.candidate_molecule_ids;
  ctx.candidate_proteins = instance.candidate_protein_ids;
  return ctx;
}

namespace {

void require_valid(const ProblemInstance& instance, const Corpus& corpus) {
  auto violations = validate_instance(instance, corpus);
  if (violations.empty()) return;
  std::string msg = "instance '" + instance.query_molecule_id + "' is invalid:";
  for (const auto& v : violations) msg += "\n  - " + v;
  throw ConsistencyError(msg);
}

}  // namespace

SearchRun run_search(const ProblemInstance& instance, const Corpus& corpus, Backend& backend,
                     const TemplateLibrary& templates, const SearchConfig& config) {
  config.validate();
  require_valid(instance, corpus);
  if (instance.candidate_molecule_ids.empty()) {
    throw ConsistencyError("instance '" + instance.query_molecule_id + "' has no candidate molecules");
  }

  SearchRun run{{}, SearchTree(root_context(instance)), {}};
  auto& result = run.result;
  result.query_molecule_id = instance.query_molecule_id;
  result.mode = SearchMode::kMcts;
  result.rollouts_requested = config.rollouts;

  AgentEnv env{corpus, backend, templates, config, &run.trace};
  SplitMix64 rng(config.seed);
  for (int r = 0; r < config.rollouts; ++r) {
    try {
      const auto leaf = select_leaf(run.tree, config.exploration_c);
      const auto terminal = simulate(run.tree, leaf, env, rng, r);
      auto reward = evaluate_terminal(run.tree.node(terminal).context, env,
                                      reward_stream_offset(r, config.k_samples), r);
      auto path = run.tree.path_to(terminal);
      backpropagate(run.tree, path, reward.r_final);
      RolloutOutcome o;
      o.path = std::move(path);
      o.p_star = reward.p_star;
      o.r_relative = reward.r_relative;
      o.r_absolute = reward.r_absolute;
      o.r_final = reward.r_final;
      o.reward = std::move(reward);
      result.rollout_outcomes.push_back(std::move(o));
    } catch (const BackendError& e) {
      result.aborted = "rollout " + std::to_string(r) + ": " + e.what();
      break;
    }
  }
  result.ranked_answers = aggregate_answers(result.rollout_outcomes);
  result.total_tokens = run.trace.total_tokens();
  return run;
}

SearchRun run_single_shot(const ProblemInstance& instance, const Corpus& corpus, Backend& backend,
                          const TemplateLibrary& templates, const SearchConfig& config,
                          SearchMode mode) {
  if (mode == SearchMode::kMcts) throw ConfigError("run_single_shot needs baseline or enhanced mode");
  config.validate();
  require_valid(instance, corpus);

  SearchRun run{{}, SearchTree(root_context(instance)), {}};
  auto& result = run.result;
  result.query_molecule_id = instance.query_molecule_id;
  result.mode = mode;
  result.rollouts_requested = 0;

  const auto& query = corpus.molecule(instance.query_molecule_id);
  const auto& pool = instance.candidate_protein_ids;
  Bindings b;
  b["smiles"] = query.smiles;
  {
    std::string lines;
    for (const auto& id : pool) {
      const auto& p = corpus.protein(id);
      if (!lines.empty()) lines += '\n';
      lines += "- " + id + ": " + (p.name.empty() ? "unnamed protein" : p.name) + " (pocket type: " +
               (p.pocket_type.empty() ? "unknown" : p.pocket_type) + ")";
    }
    b["proteins"] = lines.empty() ? "none" : lines;
  }
  std::string template_id = "baseline_selection";
  if (mode == SearchMode::kEnhanced) {
    template_id = "enhanced_selection";
    b["structural"] = describe_structural(query.structural);
    b["physchem"] = describe_physchem(query.physchem);
    b["pockets"] = describe_pockets(pool, corpus);
    b["literature"] = describe_literature(pool, corpus, config.literature_budget);
  }

  SamplingRequest req;
  req.template_id = template_id;
  req.messages = render_prompt(templates, template_id, b);
  req.temperature = config.temperature;
  req.max_tokens = config.max_tokens;
  req.n = 1;
  req.hint = {AnswerKind::kSelectMany, {pool.begin(), pool.end()}};

  TraceRecord rec;
  rec.stage = "single_shot";
  rec.action = Action::kProteinSelection;
  rec.template_id = template_id;
  rec.prompt_hash = hex64(prompt_hash(req.messages));
  CallTally tally;
  try {
    const auto text = tally.sample(backend, req).texts.front();
    const auto ids = parse_id_list(text, pool);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      result.ranked_answers.push_back({ids[i], 1.0 / static_cast<double>(i + 1), 1});
    }
    rec.parsed = ids;
    if (ids.empty()) rec.flags.push_back("no_parseable_ids");
  } catch (const BackendError& e) {
    result.aborted = e.what();
  }
  tally.fill(rec);
  run.trace.records.push_back(std::move(rec));
  result.total_tokens = run.trace.total_tokens();
  return run;
}

}  // namespace drugmcts
