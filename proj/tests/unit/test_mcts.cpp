#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "drugmcts/error.hpp"
#include "drugmcts/mcts.hpp"
#include "test_support.hpp"

using namespace drugmcts;

namespace {

struct Toy {
  Corpus corpus = testing::load_fixture_corpus("toy");
  ProblemInstance instance = testing::load_fixture_instances("toy").at(0);
  TemplateLibrary templates = TemplateLibrary::defaults();
  SearchConfig config;
};

/// Direct evaluation of the selection rule, written independently of the engine.
NodeId argmax_descent(const SearchTree& tree, double c) {
  NodeId cur = 0;
  for (;;) {
    const auto& n = tree.node(cur);
    if (n.children.empty() || n.action == Action::kEnd) return cur;
    const double big_n = n.visits < 1 ? 1.0 : n.visits;
    NodeId best = -1;
    double best_val = 0;
    for (auto id : n.children) {
      const auto& ch = tree.node(id);
      const double val = ch.visits == 0 ? HUGE_VAL
                                        : ch.total_reward / ch.visits +
                                              c * std::sqrt(std::log(big_n) / ch.visits);
      if (best < 0 || val > best_val) {
        best = id;
        best_val = val;
      }
    }
    cur = best;
  }
}

SearchContext ctx_with(const Toy& t) {
  auto c = root_context(t.instance);
  return c;
}

int count_action(const SearchTree& tree, Action a) {
  int n = 0;
  for (const auto& node : tree.nodes()) n += node.action == a;
  return n;
}

}  // namespace

TEST_SUITE("mcts") {

TEST_CASE("uct_score examples") {
  CHECK(uct_score(0.0, 1, 1, 5.0) == 0.0);
  CHECK(uct_score(0.0, 1, 1, 0.0) == 0.0);
  CHECK(std::isinf(uct_score(0.0, 0, 7, 1.0)));
  CHECK(uct_score(0.0, 0, 7, 1.0) > 0);
  CHECK(std::abs(uct_score(2.0, 4, 16, 1.41421356) - 1.67737) < 1e-4);
}

TEST_CASE("successor map and ablation splicing") {
  Ablation full;
  CHECK(successor(Action::kRoot, full) == Action::kMoleculeAnalysis);
  CHECK(successor(Action::kMoleculeAnalysis, full) == Action::kMoleculeSelection);
  CHECK(successor(Action::kMoleculeSelection, full) == Action::kInteractionAnalysis);
  CHECK(successor(Action::kInteractionAnalysis, full) == Action::kProteinSelection);
  CHECK(successor(Action::kProteinSelection, full) == Action::kEnd);
  CHECK(!successor(Action::kEnd, full));
  Ablation none{false, false};
  CHECK(successor(Action::kRoot, none) == Action::kMoleculeSelection);
  CHECK(successor(Action::kMoleculeSelection, none) == Action::kProteinSelection);
}

TEST_CASE("select_leaf on a fresh root returns the root") {
  SearchTree tree(SearchContext{});
  CHECK(select_leaf(tree, 1.4) == 0);
}

TEST_CASE("select_leaf prefers the unvisited child") {
  SearchTree tree(SearchContext{});
  const auto a = tree.add_child(0, Action::kMoleculeAnalysis, {});
  const auto b = tree.add_child(0, Action::kMoleculeAnalysis, {});
  tree.node(0).visits = 1;
  tree.node(a).visits = 1;
  tree.node(a).total_reward = 1.0;
  CHECK(select_leaf(tree, 1.4) == b);
  // Among unvisited children the first created wins.
  const auto c = tree.add_child(0, Action::kMoleculeAnalysis, {});
  CHECK(select_leaf(tree, 1.4) == b);
  (void)c;
}

TEST_CASE("select_leaf matches per-level argmax on a three-level fixture") {
  SearchTree tree(SearchContext{});
  // Level 1: three children with (W, n) = (1.5, 3), (2.0, 4), (0.2, 1).
  const std::vector<std::pair<double, int>> l1{{1.5, 3}, {2.0, 4}, {0.2, 1}};
  std::vector<NodeId> ids;
  for (auto [w, n] : l1) {
    const auto id = tree.add_child(0, Action::kMoleculeAnalysis, {});
    tree.node(id).total_reward = w;
    tree.node(id).visits = n;
    ids.push_back(id);
  }
  tree.node(0).visits = 8;
  // Level 2 under each: two children splitting the visits.
  for (auto p : ids) {
    const int n = tree.node(p).visits;
    const double w = tree.node(p).total_reward;
    const auto x = tree.add_child(p, Action::kMoleculeSelection, {});
    const auto y = tree.add_child(p, Action::kMoleculeSelection, {});
    tree.node(x).visits = n - n / 2;
    tree.node(y).visits = n / 2;
    tree.node(x).total_reward = n / 2 == 0 ? w : 0.6 * w * (n - n / 2) / n;
    tree.node(y).total_reward = w - tree.node(x).total_reward;
    for (auto q : {x, y}) {
      if (tree.node(q).visits == 0) continue;
      const auto leaf = tree.add_child(q, Action::kInteractionAnalysis, {});
      tree.node(leaf).visits = tree.node(q).visits;
      tree.node(leaf).total_reward = tree.node(q).total_reward;
    }
  }
  CHECK(tree.check_invariants().empty());
  for (double c : {0.0, 0.5, 1.41421356, 3.0}) {
    CHECK(select_leaf(tree, c) == argmax_descent(tree, c));
  }
}

TEST_CASE("expanding toward A5 yields exactly one child") {
  Toy t;
  MockBackend backend(7);
  AgentEnv env{t.corpus, backend, t.templates, t.config};
  SearchTree tree(ctx_with(t));
  auto ctx = ctx_with(t);
  ctx.molecule_report = "r";
  ctx.reference_molecules = IdSet{"M1"};
  ctx.reference_proteins = IdSet{"P1", "P4"};
  ctx.interaction_report = "ia";
  const auto a4 = tree.add_child(0, Action::kInteractionAnalysis, ctx);
  const auto kids = expand(tree, a4, env);
  REQUIRE(kids.size() == 1);
  CHECK(tree.node(kids[0]).action == Action::kProteinSelection);
  const auto ends = expand(tree, kids[0], env);
  REQUIRE(ends.size() == 1);
  CHECK(tree.node(ends[0]).action == Action::kEnd);
  CHECK(tree.node(ends[0]).context == tree.node(kids[0]).context);
}

TEST_CASE("expansion keeps only distinct answers") {
  Toy t;
  // Two possible replies per request, so at most two distinct answers.
  MockBackend backend(MockBackend::Options{.seed = 5, .answer_variety = 2});
  testing::CountingBackend counting(backend);
  TraceLog trace;
  AgentEnv env{t.corpus, counting, t.templates, t.config, &trace};
  SearchTree tree(ctx_with(t));
  auto ctx = ctx_with(t);
  ctx.molecule_report = "r";
  const auto a2 = tree.add_child(0, Action::kMoleculeAnalysis, ctx);
  const auto kids = expand(tree, a2, env);
  CHECK(kids.size() == 2);
  CHECK(counting.calls == 3);  // all three sampling rounds were spent
  REQUIRE(trace.records.size() == 1);
  const auto& flags = trace.records[0].flags;
  CHECK(std::find(flags.begin(), flags.end(), "fewer_distinct_answers") != flags.end());
  std::set<std::string> distinct;
  for (const auto& r : trace.records[0].responses) distinct.insert(normalize_answer(r));
  CHECK(distinct.size() >= 2);
}

TEST_CASE("blank and repeated answers never become children") {
  Toy t;
  t.config.branching.molecule_analysis = 3;
  ScriptedBackend backend(std::vector<std::string>{"same", "Same ", "", "other", "  SAME", "x", "y"});
  AgentEnv env{t.corpus, backend, t.templates, t.config};
  SearchTree tree(ctx_with(t));
  const auto kids = expand(tree, 0, env);
  REQUIRE(kids.size() == 3);
  CHECK(*tree.node(kids[0]).context.molecule_report == "same");
  CHECK(*tree.node(kids[1]).context.molecule_report == "other");
  CHECK(*tree.node(kids[2]).context.molecule_report == "x");
}

TEST_CASE("A6 and already expanded nodes cannot be expanded") {
  Toy t;
  MockBackend backend(7);
  AgentEnv env{t.corpus, backend, t.templates, t.config};
  SearchTree tree(ctx_with(t));
  const auto end = tree.add_child(0, Action::kEnd, ctx_with(t));
  CHECK_THROWS_AS(expand(tree, end, env), Error);
  CHECK_THROWS_AS(expand(tree, 0, env), Error);
}

TEST_CASE("simulate from an A6 node returns it") {
  Toy t;
  MockBackend backend(7);
  AgentEnv env{t.corpus, backend, t.templates, t.config};
  SearchTree tree(ctx_with(t));
  const auto end = tree.add_child(0, Action::kEnd, ctx_with(t));
  SplitMix64 rng(1);
  CHECK(simulate(tree, end, env, rng) == end);
  CHECK(tree.size() == 2);
}

TEST_CASE("simulate from a fresh root creates one level per action") {
  Toy t;
  MockBackend backend(7);
  AgentEnv env{t.corpus, backend, t.templates, t.config};
  SearchTree tree(ctx_with(t));
  SplitMix64 rng(7);
  const auto leaf = simulate(tree, 0, env, rng);
  const auto path = tree.path_to(leaf);
  REQUIRE(path.size() == 6);
  const std::vector<Action> expected{Action::kRoot, Action::kMoleculeAnalysis,
                                     Action::kMoleculeSelection, Action::kInteractionAnalysis,
                                     Action::kProteinSelection, Action::kEnd};
  for (std::size_t i = 0; i < path.size(); ++i) CHECK(tree.node(path[i]).action == expected[i]);
  CHECK(tree.size() == 1 + 4 + 4 + 4 + 1 + 1);
}

TEST_CASE("simulation paths repeat under the same seed") {
  Toy t;
  std::vector<std::vector<NodeId>> paths;
  for (int run = 0; run < 2; ++run) {
    MockBackend backend(11);
    AgentEnv env{t.corpus, backend, t.templates, t.config};
    SearchTree tree(ctx_with(t));
    SplitMix64 rng(11);
    paths.push_back(tree.path_to(simulate(tree, 0, env, rng)));
  }
  CHECK(paths[0] == paths[1]);
}

TEST_CASE("backpropagation examples") {
  SearchTree tree(SearchContext{});
  const auto a = tree.add_child(0, Action::kMoleculeAnalysis, {});
  const auto b = tree.add_child(0, Action::kMoleculeAnalysis, {});
  const auto end = tree.add_child(a, Action::kEnd, {});
  backpropagate(tree, {0, a, end}, 0.75);
  CHECK(tree.root().visits == 1);
  CHECK(tree.root().total_reward == 0.75);
  backpropagate(tree, {0, a, end}, 1.0);
  backpropagate(tree, {0, a, end}, 0.5);
  CHECK(tree.node(end).visits == 3);
  CHECK(tree.node(end).total_reward == 0.75 + 1.0 + 0.5);
  CHECK(tree.node(b).visits == 0);
  CHECK(tree.node(b).total_reward == 0.0);
  CHECK_THROWS_AS(backpropagate(tree, {a, end}, 0.5), Error);
}

TEST_CASE("two rollouts of 1.0 and 0.5 through one path") {
  SearchTree tree(SearchContext{});
  const auto end = tree.add_child(0, Action::kEnd, {});
  double oracle = 0;
  for (double r : {1.0, 0.5}) {
    backpropagate(tree, {0, end}, r);
    oracle += r;
  }
  CHECK(tree.root().visits == 2);
  CHECK(tree.root().total_reward == oracle);
}

TEST_CASE("aggregate_answers examples") {
  auto outcome = [](std::string p, double r) {
    RolloutOutcome o;
    o.p_star = std::move(p);
    o.r_final = r;
    return o;
  };
  const auto ranked = aggregate_answers({outcome("A", 0.8), outcome("A", 0.6), outcome("B", 0.9)});
  REQUIRE(ranked.size() == 2);
  CHECK(ranked[0].protein_id == "A");
  CHECK(ranked[0].aggregate_score == doctest::Approx(1.4));
  CHECK(ranked[0].support_count == 2);
  CHECK(ranked[1] == RankedAnswer{"B", 0.9, 1});

  const auto single = aggregate_answers({outcome("A", 0.25), outcome("A", 0.5), outcome("A", 1.0)});
  REQUIRE(single.size() == 1);
  CHECK(single[0].aggregate_score == 1.75);

  const auto tie = aggregate_answers({outcome("B", 0.5), outcome("A", 0.5)});
  CHECK(tie[0].protein_id == "A");
  // Equal score, more support first.
  const auto support = aggregate_answers({outcome("A", 0.5), outcome("B", 0.25), outcome("B", 0.25)});
  CHECK(support[0].protein_id == "B");
}

TEST_CASE("run_search with 12 rollouts") {
  Toy t;
  MockBackend backend(7);
  const auto run = run_search(t.instance, t.corpus, backend, t.templates, t.config);
  CHECK(run.result.rollout_outcomes.size() == 12);
  CHECK(run.tree.root().visits == 12);
  CHECK(!run.result.aborted);
  CHECK(run.tree.check_invariants().empty());
  for (const auto& o : run.result.rollout_outcomes) {
    CHECK(run.tree.node(o.path.back()).action == Action::kEnd);
    CHECK(o.r_final == doctest::Approx((o.r_relative + o.r_absolute) / 2));
    CHECK(t.instance.candidate_protein_ids.count(o.p_star) == 1);
  }
  int support = 0;
  for (const auto& a : run.result.ranked_answers) support += a.support_count;
  CHECK(support == 12);
}

TEST_CASE("a single rollout ranks a single answer") {
  Toy t;
  t.config.rollouts = 1;
  MockBackend backend(7);
  const auto run = run_search(t.instance, t.corpus, backend, t.templates, t.config);
  CHECK(run.result.ranked_answers.size() == 1);
}

TEST_CASE("run_search is deterministic") {
  Toy t;
  MockBackend a(7), b(7);
  const auto x = run_search(t.instance, t.corpus, a, t.templates, t.config);
  const auto y = run_search(t.instance, t.corpus, b, t.templates, t.config);
  CHECK(to_json(x.result).dump() == to_json(y.result).dump());
  CHECK(x.tree.snapshot().dump() == y.tree.snapshot().dump());
}

TEST_CASE("tree stays within the structural bounds") {
  Toy t;
  t.config.rollouts = 60;
  MockBackend backend(3);
  const auto run = run_search(t.instance, t.corpus, backend, t.templates, t.config);
  CHECK(run.tree.size() <= 1 + 4 + 16 + 64 + 64 + 64);
  CHECK(run.tree.check_invariants().empty());
  for (const auto& n : run.tree.nodes()) CHECK(run.tree.path_to(n.id).size() <= 6);
  CHECK(run.tree.root().visits == 60);
}

TEST_CASE("token accounting is additive") {
  Toy t;
  MockBackend inner(7);
  testing::CountingBackend backend(inner);
  const auto run = run_search(t.instance, t.corpus, backend, t.templates, t.config);
  std::int64_t traced = 0;
  int calls = 0;
  for (const auto& r : run.trace.records) {
    traced += r.prompt_tokens + r.completion_tokens;
    calls += r.calls;
  }
  CHECK(traced == backend.prompt_tokens + backend.completion_tokens);
  CHECK(run.result.total_tokens == traced);
  CHECK(calls == backend.calls);
}

TEST_CASE("relative-only mode backpropagates the relative reward") {
  Toy t;
  t.config.reward_mode = RewardMode::kRelativeOnly;
  MockBackend backend(7);
  const auto run = run_search(t.instance, t.corpus, backend, t.templates, t.config);
  double sum = 0;
  for (const auto& o : run.result.rollout_outcomes) {
    CHECK(o.r_final == o.r_relative);
    sum += o.r_final;
  }
  CHECK(run.tree.root().total_reward == doctest::Approx(sum));
  for (const auto& r : run.trace.records) CHECK(r.stage != "absolute_reward");
}

TEST_CASE("disabling molecule analysis removes A2 everywhere") {
  Toy t;
  t.config.ablation.enable_molecule_analysis = false;
  MockBackend backend(7);
  const auto run = run_search(t.instance, t.corpus, backend, t.templates, t.config);
  CHECK(count_action(run.tree, Action::kMoleculeAnalysis) == 0);
  for (const auto& r : run.trace.records) CHECK(r.action != Action::kMoleculeAnalysis);
  for (const auto& n : run.tree.nodes()) CHECK(!n.context.molecule_report);
  CHECK(run.tree.check_invariants().empty());
}

TEST_CASE("disabling interaction analysis removes A4 everywhere") {
  Toy t;
  t.config.ablation.enable_interaction_analysis = false;
  MockBackend backend(7);
  const auto run = run_search(t.instance, t.corpus, backend, t.templates, t.config);
  CHECK(count_action(run.tree, Action::kInteractionAnalysis) == 0);
  for (const auto& n : run.tree.nodes()) CHECK(!n.context.interaction_report);
  CHECK(count_action(run.tree, Action::kProteinSelection) > 0);
}

TEST_CASE("protein-selection branching override") {
  Toy t;
  t.config.branching.protein_selection = 4;
  MockBackend backend(7);
  const auto run = run_search(t.instance, t.corpus, backend, t.templates, t.config);
  int expanded = 0;
  for (const auto& n : run.tree.nodes()) {
    if (n.action != Action::kInteractionAnalysis || n.children.empty()) continue;
    ++expanded;
    CHECK(n.children.size() == 4);
  }
  CHECK(expanded > 0);
}

TEST_CASE("backend failure aborts with a consistent partial tree") {
  Toy t;
  // Enough replies for the first rollout's expansions only.
  ScriptedBackend backend(std::map<std::string, std::vector<std::string>>{
      {"molecule_analysis", {"a", "b", "c", "d"}},
      {"molecule_selection", {"M1", "M2", "M3", "M4"}},
      {"interaction_analysis", {"w", "x", "y", "z"}},
      {"protein_selection", {"P1", "P1", "P1", "P1", "P1"}},
      {"interaction_judgment", {"yes", "yes", "no", "yes"}}});
  const auto run = run_search(t.instance, t.corpus, backend, t.templates, t.config);
  REQUIRE(run.result.aborted);
  CHECK(run.result.rollout_outcomes.size() == 1);
  CHECK(run.tree.root().visits == 1);
  CHECK(run.tree.check_invariants().empty());
  CHECK(run.result.ranked_answers.size() == 1);
  CHECK(run.result.rollout_outcomes[0].r_absolute == 0.75);
}

TEST_CASE("invalid instances are refused") {
  Toy t;
  auto bad = t.instance;
  bad.ground_truth_protein_ids.insert("P99");
  MockBackend backend(1);
  CHECK_THROWS_AS(run_search(bad, t.corpus, backend, t.templates, t.config), ConsistencyError);
}

TEST_CASE("single-shot modes issue one agent call") {
  Toy t;
  for (auto mode : {SearchMode::kBaseline, SearchMode::kEnhanced}) {
    MockBackend inner(7);
    testing::CountingBackend backend(inner);
    const auto run = run_single_shot(t.instance, t.corpus, backend, t.templates, t.config, mode);
    CHECK(backend.calls == 1);
    REQUIRE(run.trace.records.size() == 1);
    CHECK(run.trace.records[0].calls == 1);
    CHECK(run.result.mode == mode);
    for (std::size_t i = 1; i < run.result.ranked_answers.size(); ++i) {
      CHECK(run.result.ranked_answers[i - 1].aggregate_score > run.result.ranked_answers[i].aggregate_score);
    }
    std::string prompt;
    for (const auto& m : backend.requests[0].messages) prompt += m.content;
    const bool has_pockets = prompt.find("has a binding pocket") != std::string::npos;
    CHECK(has_pockets == (mode == SearchMode::kEnhanced));
    CHECK(prompt.find("pocket type") != std::string::npos);
  }
}

TEST_CASE("search results round trip through JSON") {
  Toy t;
  MockBackend backend(7);
  const auto run = run_search(t.instance, t.corpus, backend, t.templates, t.config);
  const auto j = to_json(run.result);
  CHECK(to_json(search_result_from_json(j)).dump() == j.dump());
}

TEST_CASE("snapshot lists every node with its statistics") {
  Toy t;
  t.config.rollouts = 3;
  MockBackend backend(7);
  const auto run = run_search(t.instance, t.corpus, backend, t.templates, t.config);
  const auto snap = run.tree.snapshot();
  REQUIRE(snap["nodes"].size() == run.tree.size());
  CHECK(snap["nodes"][0]["action"] == "Root");
  CHECK(snap["nodes"][0]["parent"].is_null());
  CHECK(snap["nodes"][0]["n"] == 3);
  for (const auto& n : snap["nodes"]) {
    CHECK(n.contains("W"));
    CHECK(n.contains("creation_index"));
  }
}

}  // TEST_SUITE
