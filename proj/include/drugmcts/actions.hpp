#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "drugmcts/backend.hpp"
#include "drugmcts/config.hpp"
#include "drugmcts/corpus.hpp"
#include "drugmcts/prompts.hpp"

namespace drugmcts {

/// Accumulated state along a search path. Fields are only ever added going
/// down the tree; a child copies its parent and sets the fields of its action.
struct SearchContext {
  std::string query_molecule_id;
  std::optional<std::string> molecule_report;         // set by A2
  IdSet candidate_molecules;                          // root
  std::optional<IdSet> reference_molecules;           // set by A3
  IdSet candidate_proteins;                           // root
  std::optional<IdSet> reference_proteins;            // set by A3
  std::optional<std::string> interaction_report;      // set by A4
  std::optional<std::string> selected_protein;        // set by A5

  friend bool operator==(const SearchContext&, const SearchContext&) = default;
};

nlohmann::json to_json(const SearchContext& ctx);

/// One agent invocation (possibly several backend calls) as written to trace files.
struct TraceRecord {
  int rollout = -1;  // -1 outside a rollout (single-shot modes)
  std::string stage;  // "expand", "relative_reward", "absolute_reward", "single_shot"
  Action action = Action::kRoot;
  std::optional<int> node_id;
  std::string template_id;
  std::string prompt_hash;
  std::vector<std::string> responses;
  nlohmann::json parsed;
  std::vector<std::string> flags;
  int calls = 0;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
};

nlohmann::json to_json(const TraceRecord& r);

struct TraceLog {
  std::vector<TraceRecord> records;
  std::int64_t total_tokens() const;
};

/// Everything an agent action needs. `trace` may be null.
struct AgentEnv {
  const Corpus& corpus;
  Backend& backend;
  const TemplateLibrary& templates;
  const SearchConfig& config;
  TraceLog* trace = nullptr;
};

/// Tracks backend usage across the calls made for one record.
struct CallTally {
  int calls = 0;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  std::vector<std::string> responses;

  SamplingResponse sample(Backend& backend, const SamplingRequest& request);
  void fill(TraceRecord& record) const;
};

/// Result of applying one sampled answer to a context.
struct StepOutcome {
  SearchContext context;
  nlohmann::json parsed;
  std::vector<std::string> flags;
};

/// Pool the Decision agent chooses from: P_rp under SelectionPool::kReference
/// (falling back to P_cp while A3 has not run), else P_cp.
const IdSet& selection_pool(const SearchContext& ctx, SelectionPool pool);

/// Template id used by an action. Throws for Root and A6, which call no agent.
std::string template_for(Action action);

/// Rendered request for the agent behind `action`, extending `ctx`.
SamplingRequest prepare_request(Action action, const SearchContext& ctx, const AgentEnv& env);

/// Child context for one sampled answer. Applies the empty-parse fallbacks.
StepOutcome apply_answer(Action action, const SearchContext& ctx, const std::string& answer,
                         const AgentEnv& env);

// Single-answer entry points for each agent; each makes one n=1 request.

/// R_qm. An empty completion is resampled once, then BackendError.
std::string molecule_analysis(const SearchContext& ctx, const AgentEnv& env);

struct MoleculeSelection {
  IdSet reference_molecules;
  IdSet reference_proteins;
  bool fallback = false;  // parse was empty, M_rm = M_cm
};
MoleculeSelection molecule_selection(const SearchContext& ctx, const AgentEnv& env);
/// P_rp: partners of `reference` that are also in `candidate_proteins`.
IdSet reference_proteins_for(const IdSet& reference, const IdSet& candidate_proteins,
                             const Corpus& corpus);

std::string interaction_analysis(const SearchContext& ctx, const AgentEnv& env);

struct ProteinChoice {
  std::string protein_id;
  bool fallback = false;  // unparseable answer, smallest pool id taken
};
ProteinChoice protein_selection(const SearchContext& ctx, const AgentEnv& env);

/// First pool member mentioned in `answer`, or nullopt.
std::optional<std::string> parse_protein_choice(const std::string& answer, const IdSet& pool);

/// One descriptive paragraph for a pocket entry.
std::string format_pocket_description(const PocketDescriptor& pocket, const Protein& protein);

// Prompt fragments, exposed for tests.
std::string describe_structural(const StructuralProfile& s);
std::string describe_physchem(const PhyschemProfile& p);
/// Paragraphs separated by blank lines; one per pocket, one note per pocketless protein.
std::string describe_pockets(const IdSet& proteins, const Corpus& corpus);
std::string describe_literature(const IdSet& proteins, const Corpus& corpus, int budget);

}  // namespace drugmcts
