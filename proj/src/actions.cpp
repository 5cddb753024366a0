#include "drugmcts/actions.hpp"

#include <iomanip>
#include <sstream>

#include "drugmcts/error.hpp"
#include "drugmcts/parse.hpp"

namespace drugmcts {

using nlohmann::json;

namespace {

json id_array(const IdSet& ids) { return json(std::vector<std::string>(ids.begin(), ids.end())); }

std::string fmt(double v, int precision = 2) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(precision) << v;
  return os.str();
}

std::string join(const std::vector<std::string>& items, const char* sep = ", ") {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

bool blank(const std::string& s) { return s.find_first_not_of(" \t\r\n") == std::string::npos; }

std::string trimmed(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::string molecule_line(const Molecule& m) {
  std::ostringstream os;
  os << "- " << m.id << ": SMILES " << m.smiles << "; MW " << fmt(m.physchem.molecular_weight)
     << " Da, logP " << fmt(m.physchem.logp) << ", PSA " << fmt(m.physchem.psa) << " A^2, HBD "
     << m.physchem.hbd << ", HBA " << m.physchem.hba << ", rotatable bonds "
     << m.physchem.rotatable_bonds << ", heavy atoms " << m.physchem.heavy_atoms << "; scaffold "
     << (m.structural.scaffold.empty() ? "none" : m.structural.scaffold) << ", chiral centers "
     << m.structural.chiral_center_count << ", functional groups "
     << (m.structural.functional_groups.empty() ? "none" : join(m.structural.functional_groups));
  return os.str();
}

std::string section(const char* title, const std::optional<std::string>& body) {
  if (!body) return {};
  return std::string("\n") + title + ":\n" + *body + "\n";
}

std::string protein_list(const IdSet& ids, const Corpus& corpus, bool with_pocket_type) {
  std::vector<std::string> lines;
  for (const auto& id : ids) {
    const auto& p = corpus.protein(id);
    std::string line = "- " + id + ": " + (p.name.empty() ? "unnamed protein" : p.name);
    if (with_pocket_type) {
      line += " (pocket type: " + (p.pocket_type.empty() ? "unknown" : p.pocket_type) + ")";
    }
    lines.push_back(std::move(line));
  }
  return lines.empty() ? "none" : join(lines, "\n");
}

std::string reference_list(const IdSet& ids, const Corpus& corpus) {
  std::vector<std::string> lines;
  for (const auto& id : ids) lines.push_back("- " + id + ": SMILES " + corpus.molecule(id).smiles);
  return lines.empty() ? "none" : join(lines, "\n");
}

std::vector<std::string> as_vector(const IdSet& ids) { return {ids.begin(), ids.end()}; }

/// Samples until a nonblank completion appears; at most two tries.
std::string sample_report(Action action, const SearchContext& ctx, const AgentEnv& env) {
  auto request = prepare_request(action, ctx, env);
  request.n = 1;
  CallTally tally;
  std::string text;
  for (int attempt = 0; attempt < 2 && blank(text); ++attempt) {
    request.sample_offset = static_cast<std::uint64_t>(attempt);
    text = tally.sample(env.backend, request).texts.front();
  }
  if (env.trace) {
    TraceRecord rec;
    rec.stage = "single";
    rec.action = action;
    rec.template_id = request.template_id;
    rec.prompt_hash = hex64(prompt_hash(request.messages));
    rec.parsed = trimmed(text);
    tally.fill(rec);
    env.trace->records.push_back(std::move(rec));
  }
  if (blank(text)) {
    throw BackendError(action_tag(action) + ": empty completion after retry");
  }
  return trimmed(text);
}

}  // namespace

json to_json(const SearchContext& ctx) {
  json j;
  j["query_molecule_id"] = ctx.query_molecule_id;
  j["candidate_molecules"] = id_array(ctx.candidate_molecules);
  j["candidate_proteins"] = id_array(ctx.candidate_proteins);
  if (ctx.molecule_report) j["molecule_report"] = *ctx.molecule_report;
  if (ctx.reference_molecules) j["reference_molecules"] = id_array(*ctx.reference_molecules);
  if (ctx.reference_proteins) j["reference_proteins"] = id_array(*ctx.reference_proteins);
  if (ctx.interaction_report) j["interaction_report"] = *ctx.interaction_report;
  if (ctx.selected_protein) j["selected_protein"] = *ctx.selected_protein;
  return j;
}

json to_json(const TraceRecord& r) {
  json j;
  j["rollout"] = r.rollout;
  j["stage"] = r.stage;
  j["action"] = action_tag(r.action);
  j["node_id"] = r.node_id ? json(*r.node_id) : json(nullptr);
  j["template_id"] = r.template_id;
  j["prompt_hash"] = r.prompt_hash;
  j["responses"] = r.responses;
  j["parsed"] = r.parsed;
  j["flags"] = r.flags;
  j["calls"] = r.calls;
  j["prompt_tokens"] = r.prompt_tokens;
  j["completion_tokens"] = r.completion_tokens;
  return j;
}

std::int64_t TraceLog::total_tokens() const {
  std::int64_t n = 0;
  for (const auto& r : records) n += r.prompt_tokens + r.completion_tokens;
  return n;
}

SamplingResponse CallTally::sample(Backend& backend, const SamplingRequest& request) {
  auto resp = backend.sample(request);
  if (static_cast<int>(resp.texts.size()) != request.n) {
    throw BackendError("backend '" + backend.name() + "' returned " +
                       std::to_string(resp.texts.size()) + " texts for n=" +
                       std::to_string(request.n));
  }
  ++calls;
  prompt_tokens += resp.prompt_tokens;
  completion_tokens += resp.completion_tokens;
  responses.insert(responses.end(), resp.texts.begin(), resp.texts.end());
  return resp;
}

void CallTally::fill(TraceRecord& record) const {
  record.calls = calls;
  record.prompt_tokens = prompt_tokens;
  record.completion_tokens = completion_tokens;
  record.responses = responses;
}

const IdSet& selection_pool(const SearchContext& ctx, SelectionPool pool) {
  if (pool == SelectionPool::kReference && ctx.reference_proteins) return *ctx.reference_proteins;
  return ctx.candidate_proteins;
}

std::string template_for(Action action) {
  switch (action) {
    case Action::kMoleculeAnalysis: return "molecule_analysis";
    case Action::kMoleculeSelection: return "molecule_selection";
    case Action::kInteractionAnalysis: return "interaction_analysis";
    case Action::kProteinSelection: return "protein_selection";
    case Action::kRoot:
    case Action::kEnd: break;
  }
  throw Error(action_tag(action) + " does not invoke an agent");
}

SamplingRequest prepare_request(Action action, const SearchContext& ctx, const AgentEnv& env) {
  const auto& corpus = env.corpus;
  const auto& query = corpus.molecule(ctx.query_molecule_id);
  SamplingRequest req;
  req.template_id = template_for(action);
  req.temperature = env.config.temperature;
  req.max_tokens = env.config.max_tokens;

  Bindings b;
  b["smiles"] = query.smiles;
  b["molecule_report"] = section("Molecular analysis report", ctx.molecule_report);

  switch (action) {
    case Action::kMoleculeAnalysis:
      b["query_id"] = query.id;
      b["structural"] = describe_structural(query.structural);
      b["physchem"] = describe_physchem(query.physchem);
      req.hint.kind = AnswerKind::kFreeText;
      break;
    case Action::kMoleculeSelection: {
      std::vector<std::string> lines;
      for (const auto& id : ctx.candidate_molecules) lines.push_back(molecule_line(corpus.molecule(id)));
      b["candidates"] = lines.empty() ? "none" : join(lines, "\n");
      req.hint = {AnswerKind::kSelectMany, as_vector(ctx.candidate_molecules)};
      break;
    }
    case Action::kInteractionAnalysis: {
      const auto& proteins = selection_pool(ctx, SelectionPool::kReference);
      b["reference_molecules"] =
          reference_list(ctx.reference_molecules.value_or(ctx.candidate_molecules), corpus);
      b["pockets"] = describe_pockets(proteins, corpus);
      b["literature"] = describe_literature(proteins, corpus, env.config.literature_budget);
      req.hint.kind = AnswerKind::kFreeText;
      break;
    }
    case Action::kProteinSelection: {
      const auto& pool = selection_pool(ctx, env.config.selection_pool);
      b["reference_molecules"] =
          reference_list(ctx.reference_molecules.value_or(ctx.candidate_molecules), corpus);
      b["proteins"] = protein_list(pool, corpus, false);
      b["pockets"] = describe_pockets(pool, corpus);
      b["interaction_report"] = section("Interaction analysis", ctx.interaction_report);
      req.hint = {AnswerKind::kSelectOne, as_vector(pool)};
      break;
    }
    case Action::kRoot:
    case Action::kEnd:
      break;
  }
  req.messages = render_prompt(env.templates, req.template_id, b);
  return req;
}

IdSet reference_proteins_for(const IdSet& reference, const IdSet& candidate_proteins,
                             const Corpus& corpus) {
  IdSet out;
  for (const auto& m : reference) {
    for (const auto& p : corpus.proteins_of(m)) {
      if (candidate_proteins.count(p)) out.insert(p);
    }
  }
  return out;
}

std::optional<std::string> parse_protein_choice(const std::string& answer, const IdSet& pool) {
  auto ids = parse_id_list(answer, pool);
  if (ids.empty()) return std::nullopt;
  return ids.front();
}

StepOutcome apply_answer(Action action, const SearchContext& ctx, const std::string& answer,
                         const AgentEnv& env) {
  StepOutcome out{ctx, json(), {}};
  auto& child = out.context;
  switch (action) {
    case Action::kMoleculeAnalysis:
      child.molecule_report = trimmed(answer);
      out.parsed = *child.molecule_report;
      break;
    case Action::kMoleculeSelection: {
      auto ids = parse_id_list(answer, ctx.candidate_molecules);
      IdSet chosen(ids.begin(), ids.end());
      if (chosen.empty()) {
        chosen = ctx.candidate_molecules;
        out.flags.push_back("molecule_selection_fallback");
      }
      child.reference_proteins = reference_proteins_for(chosen, ctx.candidate_proteins, env.corpus);
      child.reference_molecules = std::move(chosen);
      out.parsed = {{"reference_molecules", id_array(*child.reference_molecules)},
                    {"reference_proteins", id_array(*child.reference_proteins)}};
      break;
    }
    case Action::kInteractionAnalysis:
      child.interaction_report = trimmed(answer);
      out.parsed = *child.interaction_report;
      break;
    case Action::kProteinSelection: {
      const auto& pool = selection_pool(ctx, env.config.selection_pool);
      if (pool.empty()) throw ConsistencyError("protein selection pool is empty");
      auto choice = parse_protein_choice(answer, pool);
      if (!choice) {
        choice = *pool.begin();
        out.flags.push_back("protein_selection_fallback");
      }
      child.selected_protein = *choice;
      out.parsed = *choice;
      break;
    }
    case Action::kRoot:
    case Action::kEnd:
      break;
  }
  return out;
}

std::string molecule_analysis(const SearchContext& ctx, const AgentEnv& env) {
  return sample_report(Action::kMoleculeAnalysis, ctx, env);
}

std::string interaction_analysis(const SearchContext& ctx, const AgentEnv& env) {
  return sample_report(Action::kInteractionAnalysis, ctx, env);
}

MoleculeSelection molecule_selection(const SearchContext& ctx, const AgentEnv& env) {
  if (ctx.candidate_molecules.empty()) throw ConsistencyError("molecule selection needs candidates");
  auto req = prepare_request(Action::kMoleculeSelection, ctx, env);
  CallTally tally;
  const auto text = tally.sample(env.backend, req).texts.front();
  auto step = apply_answer(Action::kMoleculeSelection, ctx, text, env);
  if (env.trace) {
    TraceRecord rec;
    rec.stage = "single";
    rec.action = Action::kMoleculeSelection;
    rec.template_id = req.template_id;
    rec.prompt_hash = hex64(prompt_hash(req.messages));
    rec.parsed = step.parsed;
    rec.flags = step.flags;
    tally.fill(rec);
    env.trace->records.push_back(std::move(rec));
  }
  return {*step.context.reference_molecules, *step.context.reference_proteins,
          !step.flags.empty()};
}

ProteinChoice protein_selection(const SearchContext& ctx, const AgentEnv& env) {
  if (selection_pool(ctx, env.config.selection_pool).empty()) {
    throw ConsistencyError("protein selection pool is empty");
  }
  auto req = prepare_request(Action::kProteinSelection, ctx, env);
  CallTally tally;
  const auto text = tally.sample(env.backend, req).texts.front();
  auto step = apply_answer(Action::kProteinSelection, ctx, text, env);
  if (env.trace) {
    TraceRecord rec;
    rec.stage = "single";
    rec.action = Action::kProteinSelection;
    rec.template_id = req.template_id;
    rec.prompt_hash = hex64(prompt_hash(req.messages));
    rec.parsed = step.parsed;
    rec.flags = step.flags;
    tally.fill(rec);
    env.trace->records.push_back(std::move(rec));
  }
  return {*step.context.selected_protein, !step.flags.empty()};
}

std::string format_pocket_description(const PocketDescriptor& pocket, const Protein& protein) {
  std::ostringstream os;
  os << "Protein " << (protein.name.empty() ? protein.id : protein.name) << " (" << protein.id;
  if (protein.pdb_id) os << ", PDB " << *protein.pdb_id;
  os << ") has a binding pocket";
  if (!pocket.pocket_label.empty()) os << " labelled " << pocket.pocket_label;
  os << " lined by residue" << (pocket.residues.size() == 1 ? " " : "s ");
  for (std::size_t i = 0; i < pocket.residues.size(); ++i) {
    const auto& r = pocket.residues[i];
    if (i) os << (i + 1 == pocket.residues.size() ? " and " : ", ");
    os << r.name << r.number;
    if (!r.chain.empty()) os << " on chain " << r.chain;
  }
  os << '.';
  if (!pocket.interaction_types.empty()) {
    os << " Interactions observed in this pocket: " << join(pocket.interaction_types) << '.';
  }
  if (pocket.geometry_notes && !pocket.geometry_notes->empty()) {
    os << ' ' << *pocket.geometry_notes;
  }
  return os.str();
}

std::string describe_structural(const StructuralProfile& s) {
  std::ostringstream os;
  os << "- chiral centers: " << s.chiral_center_count << '\n'
     << "- scaffold: " << (s.scaffold.empty() ? "none (acyclic)" : s.scaffold) << '\n'
     << "- functional groups: "
     << (s.functional_groups.empty() ? "none" : join(s.functional_groups));
  return os.str();
}

std::string describe_physchem(const PhyschemProfile& p) {
  std::ostringstream os;
  os << "- molecular weight: " << fmt(p.molecular_weight) << " Da\n"
     << "- logP: " << fmt(p.logp) << '\n'
     << "- polar surface area: " << fmt(p.psa) << " A^2\n"
     << "- hydrogen bond donors: " << p.hbd << '\n'
     << "- hydrogen bond acceptors: " << p.hba << '\n'
     << "- rotatable bonds: " << p.rotatable_bonds << '\n'
     << "- heavy atoms: " << p.heavy_atoms;
  return os.str();
}

std::string describe_pockets(const IdSet& proteins, const Corpus& corpus) {
  std::vector<std::string> paragraphs;
  for (const auto& id : proteins) {
    const auto& p = corpus.protein(id);
    if (p.pockets.empty()) {
      paragraphs.push_back("No binding pocket data is available for " + id + ".");
      continue;
    }
    for (const auto& pocket : p.pockets) paragraphs.push_back(format_pocket_description(pocket, p));
  }
  return paragraphs.empty() ? "none" : join(paragraphs, "\n\n");
}

std::string describe_literature(const IdSet& proteins, const Corpus& corpus, int budget) {
  std::vector<std::string> lines;
  for (const auto& id : proteins) {
    const auto& p = corpus.protein(id);
    const auto n = std::min<std::size_t>(p.literature.size(), static_cast<std::size_t>(budget));
    if (n == 0) {
      lines.push_back("- " + id + ": no literature available.");
      continue;
    }
    for (std::size_t i = 0; i < n; ++i) {
      const auto& ref = p.literature[i];
      lines.push_back("- " + id + " [" + ref.source_id + "] " + ref.title + ": " + ref.abstract);
    }
  }
  return lines.empty() ? "none" : join(lines, "\n");
}

}  // namespace drugmcts
