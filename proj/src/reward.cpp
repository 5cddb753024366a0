#include "drugmcts/reward.hpp"

#include <stdexcept>

#include "drugmcts/error.hpp"

namespace drugmcts {

using nlohmann::json;

namespace {

/// k samples as one n=k request or k single requests, per config.
std::vector<std::string> sample_k(SamplingRequest req, const AgentEnv& env, CallTally& tally) {
  const int k = env.config.k_samples;
  std::vector<std::string> texts;
  if (env.config.batched_reward_samples) {
    req.n = k;
    texts = tally.sample(env.backend, req).texts;
  } else {
    req.n = 1;
    const auto base = req.sample_offset;
    for (int i = 0; i < k; ++i) {
      req.sample_offset = base + static_cast<std::uint64_t>(i);
      texts.push_back(tally.sample(env.backend, req).texts.front());
    }
  }
  return texts;
}

std::string interaction_judgment_template() { return "interaction_judgment"; }

}  // namespace

json to_json(const RewardBreakdown& b) {
  return {{"p_star", b.p_star},   {"selection_counts", b.selection_counts},
          {"yes_count", b.yes_count}, {"k", b.k},
          {"r_relative", b.r_relative}, {"r_absolute", b.r_absolute},
          {"r_final", b.r_final},     {"flags", b.flags}};
}

RewardBreakdown reward_from_json(const json& j) {
  RewardBreakdown b;
  b.p_star = j.at("p_star").get<std::string>();
  b.selection_counts = j.at("selection_counts").get<std::map<std::string, int>>();
  b.yes_count = j.at("yes_count").get<int>();
  b.k = j.at("k").get<int>();
  b.r_relative = j.at("r_relative").get<double>();
  b.r_absolute = j.at("r_absolute").get<double>();
  b.r_final = j.at("r_final").get<double>();
  b.flags = j.at("flags").get<std::vector<std::string>>();
  return b;
}

RelativeReward tally_selections(const std::vector<std::optional<std::string>>& selections,
                                const std::string& rollout_selection) {
  RelativeReward out;
  for (const auto& s : selections) {
    if (!s) continue;
    ++out.selection_counts[*s];
    ++out.parseable;
  }
  if (out.parseable == 0) {
    out.p_star = rollout_selection;
    out.r_relative = 0.0;
    out.fallback = true;
    return out;
  }
  // std::map iterates ids ascending, so strict > keeps the smallest id on ties.
  int best = 0;
  for (const auto& [id, count] : out.selection_counts) {
    if (count > best) {
      best = count;
      out.p_star = id;
    }
  }
  out.r_relative = static_cast<double>(best) / static_cast<double>(out.parseable);
  return out;
}

AbsoluteReward tally_yes_no(const std::vector<YesNo>& replies) {
  AbsoluteReward out;
  out.k = static_cast<int>(replies.size());
  for (auto r : replies) out.yes_count += r == YesNo::kYes ? 1 : 0;
  out.r_absolute = out.k ? static_cast<double>(out.yes_count) / out.k : 0.0;
  return out;
}

double final_reward(double r_relative, double r_absolute, RewardMode mode) {
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in_unit(r_relative) || !in_unit(r_absolute)) {
    throw std::invalid_argument("rewards must lie in [0, 1]");
  }
  if (mode == RewardMode::kRelativeOnly) return r_relative;
  return (r_relative + r_absolute) / 2.0;
}

RelativeReward relative_reward(const SearchContext& ctx, const AgentEnv& env,
                               std::uint64_t stream_offset, int rollout) {
  const auto& pool = selection_pool(ctx, env.config.selection_pool);
  if (pool.empty()) throw ConsistencyError("relative reward: selection pool is empty");
  auto req = prepare_request(Action::kProteinSelection, ctx, env);
  req.sample_offset = stream_offset;
  CallTally tally;
  const auto texts = sample_k(req, env, tally);

  std::vector<std::optional<std::string>> picks;
  for (const auto& t : texts) picks.push_back(parse_protein_choice(t, pool));
  auto out = tally_selections(picks, ctx.selected_protein.value_or(*pool.begin()));

  if (env.trace) {
    TraceRecord rec;
    rec.rollout = rollout;
    rec.stage = "relative_reward";
    rec.action = Action::kEnd;
    rec.template_id = req.template_id;
    rec.prompt_hash = hex64(prompt_hash(req.messages));
    rec.parsed = {{"p_star", out.p_star},
                  {"r_relative", out.r_relative},
                  {"selection_counts", out.selection_counts}};
    if (out.fallback) rec.flags.push_back("relative_reward_no_parse");
    tally.fill(rec);
    env.trace->records.push_back(std::move(rec));
  }
  return out;
}

AbsoluteReward absolute_reward(const std::string& p_star, const SearchContext& ctx,
                               const AgentEnv& env, std::uint64_t stream_offset, int rollout) {
  const auto& protein = env.corpus.protein(p_star);
  const auto& query = env.corpus.molecule(ctx.query_molecule_id);
  IdSet single{p_star};

  Bindings b;
  b["protein"] = p_star + ": " + (protein.name.empty() ? "unnamed protein" : protein.name);
  b["pockets"] = describe_pockets(single, env.corpus);
  b["literature"] = describe_literature(single, env.corpus, env.config.literature_budget);
  b["smiles"] = query.smiles;
  b["molecule_report"] =
      ctx.molecule_report ? "\nMolecular analysis report:\n" + *ctx.molecule_report + "\n" : "";

  SamplingRequest req;
  req.template_id = interaction_judgment_template();
  req.messages = render_prompt(env.templates, req.template_id, b);
  req.temperature = env.config.temperature;
  req.max_tokens = env.config.max_tokens;
  req.sample_offset = stream_offset;
  req.hint = {AnswerKind::kYesNo, {p_star}};

  CallTally tally;
  const auto texts = sample_k(req, env, tally);
  std::vector<YesNo> replies;
  std::vector<std::string> labels;
  for (const auto& t : texts) {
    replies.push_back(parse_yes_no(t, env.config.lexicon));
    labels.push_back(to_string(replies.back()));
  }
  auto out = tally_yes_no(replies);

  if (env.trace) {
    TraceRecord rec;
    rec.rollout = rollout;
    rec.stage = "absolute_reward";
    rec.action = Action::kEnd;
    rec.template_id = req.template_id;
    rec.prompt_hash = hex64(prompt_hash(req.messages));
    rec.parsed = {{"replies", labels}, {"yes_count", out.yes_count}, {"r_absolute", out.r_absolute}};
    tally.fill(rec);
    env.trace->records.push_back(std::move(rec));
  }
  return out;
}

RewardBreakdown evaluate_terminal(const SearchContext& ctx, const AgentEnv& env,
                                  std::uint64_t stream_offset, int rollout) {
  RewardBreakdown b;
  auto rel = relative_reward(ctx, env, stream_offset, rollout);
  b.p_star = rel.p_star;
  b.selection_counts = rel.selection_counts;
  b.r_relative = rel.r_relative;
  b.k = env.config.k_samples;
  if (rel.fallback) b.flags.push_back("relative_reward_no_parse");
  if (env.config.reward_mode == RewardMode::kCombined) {
    auto abs = absolute_reward(rel.p_star, ctx, env, stream_offset, rollout);
    b.yes_count = abs.yes_count;
    b.r_absolute = abs.r_absolute;
  }
  b.r_final = final_reward(b.r_relative, b.r_absolute, env.config.reward_mode);
  return b;
}

}  // namespace drugmcts
