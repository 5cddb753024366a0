#include <doctest.h>

#include <stdexcept>

#include "drugmcts/error.hpp"
#include "drugmcts/reward.hpp"
#include "test_support.hpp"

using namespace drugmcts;

namespace {

std::vector<std::optional<std::string>> picks(std::initializer_list<const char*> ids) {
  std::vector<std::optional<std::string>> out;
  for (const char* id : ids) {
    if (id) {
      out.emplace_back(id);
    } else {
      out.emplace_back(std::nullopt);
    }
  }
  return out;
}

struct Terminal {
  Corpus corpus = testing::load_fixture_corpus("toy");
  TemplateLibrary templates = TemplateLibrary::defaults();
  SearchConfig config;
  SearchContext ctx = [] {
    SearchContext c;
    c.query_molecule_id = "Q1";
    c.candidate_molecules = {"M1", "M2", "M3", "M4", "M5"};
    c.candidate_proteins = {"P1", "P2", "P3", "P4", "P5", "P6", "P7", "P8"};
    c.reference_molecules = IdSet{"M1", "M3"};
    c.reference_proteins = IdSet{"P1", "P3", "P4", "P7"};
    c.selected_protein = "P4";
    return c;
  }();
};

}  // namespace

TEST_SUITE("reward") {

TEST_CASE("relative reward examples") {
  auto r = tally_selections(picks({"A", "A", "B", "C"}), "Z");
  CHECK(r.p_star == "A");
  CHECK(r.r_relative == 0.5);
  CHECK(r.selection_counts == std::map<std::string, int>{{"A", 2}, {"B", 1}, {"C", 1}});

  r = tally_selections(picks({"A", "A", "A", "A"}), "Z");
  CHECK(r.p_star == "A");
  CHECK(r.r_relative == 1.0);

  r = tally_selections(picks({"B", "B", "A", "A"}), "Z");
  CHECK(r.p_star == "A");
  CHECK(r.r_relative == 0.5);
}

TEST_CASE("unparseable selections leave the denominator") {
  auto r = tally_selections(picks({"B", nullptr, "B", "A"}), "Z");
  CHECK(r.p_star == "B");
  CHECK(r.parseable == 3);
  CHECK(r.r_relative == doctest::Approx(2.0 / 3.0));
  r = tally_selections(picks({nullptr, nullptr}), "Z");
  CHECK(r.fallback);
  CHECK(r.p_star == "Z");
  CHECK(r.r_relative == 0.0);
}

TEST_CASE("absolute reward examples") {
  using enum YesNo;
  CHECK(tally_yes_no({kYes, kYes, kYes, kNo}).r_absolute == 0.75);
  CHECK(tally_yes_no({kYes, kYes, kYes, kYes}).r_absolute == 1.0);
  // Parse raw replies first, then count.
  std::vector<YesNo> parsed;
  for (const char* text : {"Yes, they bind.", "Hard to say.", "No.", "No, unlikely."}) {
    parsed.push_back(parse_yes_no(text));
  }
  CHECK(parsed[1] == kIndeterminate);
  const auto a = tally_yes_no(parsed);
  CHECK(a.yes_count == 1);
  CHECK(a.r_absolute == 0.25);
}

TEST_CASE("final reward examples") {
  CHECK(final_reward(1.0, 1.0, RewardMode::kCombined) == 1.0);
  CHECK(final_reward(0.5, 0.75, RewardMode::kCombined) == 0.625);
  CHECK(final_reward(0.5, 0.75, RewardMode::kRelativeOnly) == 0.5);
  CHECK_THROWS_AS(final_reward(1.5, 0.0, RewardMode::kCombined), std::invalid_argument);
  CHECK_THROWS_AS(final_reward(0.0, -0.1, RewardMode::kCombined), std::invalid_argument);
}

TEST_CASE("final reward is monotone and bounded") {
  for (int i = 0; i <= 10; ++i) {
    for (int j = 0; j <= 10; ++j) {
      const double a = i / 10.0, b = j / 10.0;
      const double f = final_reward(a, b, RewardMode::kCombined);
      CHECK(f >= 0.0);
      CHECK(f <= 1.0);
      if (i < 10) CHECK(final_reward(a + 0.1, b, RewardMode::kCombined) >= f);
      if (j < 10) CHECK(final_reward(a, b + 0.1, RewardMode::kCombined) >= f);
    }
  }
}

TEST_CASE("relative reward re-asks the decision agent k times") {
  Terminal t;
  ScriptedBackend scripted(std::vector<std::string>{"P3", "P7 wins", "I pick P3.", "unknown"});
  testing::CountingBackend backend(scripted);
  TraceLog trace;
  AgentEnv env{t.corpus, backend, t.templates, t.config, &trace};
  const auto r = relative_reward(t.ctx, env, 0);
  CHECK(r.p_star == "P3");
  CHECK(r.parseable == 3);
  CHECK(r.r_relative == doctest::Approx(2.0 / 3.0));
  CHECK(backend.calls == 1);
  CHECK(backend.requests[0].n == 4);
  CHECK(backend.requests[0].template_id == "protein_selection");
  REQUIRE(trace.records.size() == 1);
  CHECK(trace.records[0].stage == "relative_reward");
}

TEST_CASE("unbatched reward sampling makes k single calls") {
  Terminal t;
  t.config.batched_reward_samples = false;
  ScriptedBackend scripted(std::vector<std::string>{"P3", "P3", "P3", "P3"});
  testing::CountingBackend backend(scripted);
  AgentEnv env{t.corpus, backend, t.templates, t.config};
  const auto r = relative_reward(t.ctx, env, 100);
  CHECK(r.r_relative == 1.0);
  CHECK(backend.calls == 4);
  for (int i = 0; i < 4; ++i) {
    CHECK(backend.requests[i].n == 1);
    CHECK(backend.requests[i].sample_offset == 100u + static_cast<unsigned>(i));
  }
}

TEST_CASE("a singleton pool gives relative reward 1 when every sample parses") {
  Terminal t;
  t.ctx.reference_proteins = IdSet{"P7"};
  t.ctx.selected_protein = "P7";
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    MockBackend backend(seed);
    AgentEnv env{t.corpus, backend, t.templates, t.config};
    const auto r = relative_reward(t.ctx, env, 0);
    CHECK(r.parseable == t.config.k_samples);
    CHECK(r.r_relative == 1.0);
    CHECK(r.p_star == "P7");
  }
}

TEST_CASE("zero parseable selections fall back to the rollout's own choice") {
  Terminal t;
  ScriptedBackend backend(std::vector<std::string>{"?", "??", "none", "n/a"});
  AgentEnv env{t.corpus, backend, t.templates, t.config};
  const auto r = relative_reward(t.ctx, env, 0);
  CHECK(r.fallback);
  CHECK(r.p_star == "P4");
  CHECK(r.r_relative == 0.0);
}

TEST_CASE("absolute reward counts affirmative judgments") {
  Terminal t;
  ScriptedBackend scripted(std::vector<std::string>{"Yes.", "It depends.", "No.", "no"});
  testing::CountingBackend backend(scripted);
  AgentEnv env{t.corpus, backend, t.templates, t.config};
  const auto a = absolute_reward("P7", t.ctx, env, 0);
  CHECK(a.yes_count == 1);
  CHECK(a.k == 4);
  CHECK(a.r_absolute == 0.25);
  std::string prompt;
  for (const auto& m : backend.requests[0].messages) prompt += m.content;
  CHECK(prompt.find("P7") != std::string::npos);
  CHECK(prompt.find(t.corpus.molecule("Q1").smiles) != std::string::npos);
  CHECK(backend.requests[0].hint.kind == AnswerKind::kYesNo);
}

TEST_CASE("evaluate_terminal combines both rewards") {
  Terminal t;
  ScriptedBackend backend(std::map<std::string, std::vector<std::string>>{
      {"protein_selection", {"P1", "P1", "P3", "P7"}},
      {"interaction_judgment", {"yes", "yes", "yes", "no"}}});
  AgentEnv env{t.corpus, backend, t.templates, t.config};
  const auto b = evaluate_terminal(t.ctx, env, 0);
  CHECK(b.p_star == "P1");
  CHECK(b.r_relative == 0.5);
  CHECK(b.r_absolute == 0.75);
  CHECK(b.r_final == 0.625);
  CHECK(b.yes_count == 3);
  CHECK(b.k == 4);
  int total = 0;
  for (const auto& [_, n] : b.selection_counts) total += n;
  CHECK(total <= b.k);
  CHECK(to_json(reward_from_json(to_json(b))) == to_json(b));
}

TEST_CASE("relative-only evaluation skips the judgment queries") {
  Terminal t;
  t.config.reward_mode = RewardMode::kRelativeOnly;
  ScriptedBackend scripted(std::map<std::string, std::vector<std::string>>{
      {"protein_selection", {"P1", "P1", "P3", "P7"}}});
  testing::CountingBackend backend(scripted);
  AgentEnv env{t.corpus, backend, t.templates, t.config};
  const auto b = evaluate_terminal(t.ctx, env, 0);
  CHECK(b.r_final == b.r_relative);
  CHECK(b.r_final == 0.5);
  CHECK(backend.calls == 1);
}

}  // TEST_SUITE
