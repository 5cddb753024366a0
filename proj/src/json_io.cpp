#include "drugmcts/json_io.hpp"

#include <fstream>
#include <set>
#include <string_view>

#include "drugmcts/error.hpp"

namespace drugmcts::io {

namespace {

/// Tracks which keys of a record were consumed so leftovers can be reported.
class Fields {
 public:
  Fields(const json& j, std::string_view record, ReadContext& ctx)
      : j_(j), record_(record), ctx_(ctx) {
    if (!j.is_object()) throw Error(std::string(record) + " record must be a JSON object");
  }

  const json& required(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) {
      throw Error(record_ + ": missing required field '" + key + "'");
    }
    return *it;
  }

  const json* optional(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) return nullptr;
    return &*it;
  }

  std::string string(const char* key, bool nonempty = false) {
    return as_string(required(key), key, nonempty);
  }

  std::string as_string(const json& v, std::string_view key, bool nonempty) const {
    if (!v.is_string()) throw Error(record_ + ": field '" + std::string(key) + "' must be a string");
    auto s = v.get<std::string>();
    if (nonempty && s.empty()) {
      throw Error(record_ + ": field '" + std::string(key) + "' must be nonempty");
    }
    return s;
  }

  std::int64_t count(const char* key) { return as_count(required(key), key); }

  std::int64_t as_count(const json& v, std::string_view key) const {
    if (!v.is_number_integer()) {
      throw Error(record_ + ": field '" + std::string(key) + "' must be an integer");
    }
    const auto n = v.get<std::int64_t>();
    if (n < 0) throw Error(record_ + ": field '" + std::string(key) + "' must be >= 0");
    return n;
  }

  double number(const char* key) {
    const auto& v = required(key);
    if (!v.is_number()) throw Error(record_ + ": field '" + std::string(key) + "' must be a number");
    return v.get<double>();
  }

  std::vector<std::string> strings(const char* key, bool entries_nonempty) {
    const auto& v = required(key);
    if (!v.is_array()) throw Error(record_ + ": field '" + std::string(key) + "' must be an array");
    std::vector<std::string> out;
    out.reserve(v.size());
    for (const auto& e : v) out.push_back(as_string(e, key, entries_nonempty));
    return out;
  }

  IdSet ids(const char* key) {
    auto list = strings(key, true);
    IdSet out(list.begin(), list.end());
    if (out.size() != list.size()) {
      throw Error(record_ + ": field '" + std::string(key) + "' contains duplicate ids");
    }
    return out;
  }

  void finish() {
    for (const auto& [key, value] : j_.items()) {
      if (seen_.count(key)) continue;
      const auto msg = record_ + ": unknown field '" + key + "'";
      if (ctx_.strict) throw Error(msg);
      ctx_.warnings.push_back(msg);
    }
  }

 private:
  const json& j_;
  std::string record_;
  ReadContext& ctx_;
  std::set<std::string, std::less<>> seen_;
};

json id_array(const IdSet& ids) { return json(std::vector<std::string>(ids.begin(), ids.end())); }

}  // namespace

json to_json(const Molecule& m) {
  json j;
  j["id"] = m.id;
  j["smiles"] = m.smiles;
  if (m.fingerprint) {
    j["fingerprint"] = {{"n_bits", m.fingerprint->size()}, {"hex", m.fingerprint->to_hex()}};
  }
  if (!m.embedding.empty()) j["embedding"] = m.embedding;
  j["structural"] = {{"chiral_center_count", m.structural.chiral_center_count},
                     {"scaffold", m.structural.scaffold},
                     {"functional_groups", m.structural.functional_groups}};
  j["physchem"] = {{"molecular_weight", m.physchem.molecular_weight},
                   {"logp", m.physchem.logp},
                   {"psa", m.physchem.psa},
                   {"hbd", m.physchem.hbd},
                   {"hba", m.physchem.hba},
                   {"rotatable_bonds", m.physchem.rotatable_bonds},
                   {"heavy_atoms", m.physchem.heavy_atoms}};
  return j;
}

json to_json(const Protein& p) {
  json j;
  j["id"] = p.id;
  if (p.pdb_id) j["pdb_id"] = *p.pdb_id;
  j["name"] = p.name;
  j["pocket_type"] = p.pocket_type;
  j["pockets"] = json::array();
  for (const auto& pocket : p.pockets) {
    json pj;
    pj["pocket_label"] = pocket.pocket_label;
    pj["residues"] = json::array();
    for (const auto& r : pocket.residues) {
      pj["residues"].push_back({{"name", r.name}, {"number", r.number}, {"chain", r.chain}});
    }
    pj["interaction_types"] = pocket.interaction_types;
    if (pocket.geometry_notes) pj["geometry_notes"] = *pocket.geometry_notes;
    j["pockets"].push_back(std::move(pj));
  }
  j["literature"] = json::array();
  for (const auto& ref : p.literature) {
    j["literature"].push_back(
        {{"source_id", ref.source_id}, {"title", ref.title}, {"abstract", ref.abstract}});
  }
  return j;
}

json to_json(const InteractionRecord& r) {
  return {{"molecule_id", r.molecule_id}, {"protein_id", r.protein_id}, {"label", r.label}};
}

json to_json(const ProblemInstance& inst) {
  return {{"query_molecule_id", inst.query_molecule_id},
          {"candidate_molecule_ids", id_array(inst.candidate_molecule_ids)},
          {"candidate_protein_ids", id_array(inst.candidate_protein_ids)},
          {"ground_truth_protein_ids", id_array(inst.ground_truth_protein_ids)}};
}

json to_json(const BaselineInstance& inst) {
  return {{"query_molecule_id", inst.query_molecule_id},
          {"candidate_protein_ids", id_array(inst.candidate_protein_ids)},
          {"ground_truth_protein_ids", id_array(inst.ground_truth_protein_ids)}};
}

Molecule molecule_from_json(const json& j, ReadContext& ctx) {
  Fields f(j, "molecule", ctx);
  Molecule m;
  m.id = f.string("id", true);
  m.smiles = f.string("smiles", true);

  if (const auto* fp = f.optional("fingerprint")) {
    ReadContext inner{ctx.strict, {}};
    Fields ff(*fp, "molecule.fingerprint", inner);
    const auto n_bits = ff.count("n_bits");
    if (n_bits == 0) throw Error("molecule.fingerprint: n_bits must be positive");
    const auto hex = ff.string("hex");
    ff.finish();
    for (auto& w : inner.warnings) ctx.warnings.push_back(std::move(w));
    m.fingerprint = BitVector::from_hex(hex, static_cast<std::size_t>(n_bits));
  }
  if (const auto* emb = f.optional("embedding")) {
    if (!emb->is_array()) throw Error("molecule: field 'embedding' must be an array");
    m.embedding.reserve(emb->size());
    for (const auto& x : *emb) {
      if (!x.is_number()) throw Error("molecule: embedding entries must be numbers");
      m.embedding.push_back(x.get<double>());
    }
  }

  {
    ReadContext inner{ctx.strict, {}};
    Fields sf(f.required("structural"), "molecule.structural", inner);
    m.structural.chiral_center_count = sf.count("chiral_center_count");
    m.structural.scaffold = sf.string("scaffold");
    m.structural.functional_groups = sf.strings("functional_groups", true);
    sf.finish();
    for (auto& w : inner.warnings) ctx.warnings.push_back(std::move(w));
  }
  {
    ReadContext inner{ctx.strict, {}};
    Fields pf(f.required("physchem"), "molecule.physchem", inner);
    auto& p = m.physchem;
    p.molecular_weight = pf.number("molecular_weight");
    p.logp = pf.number("logp");
    p.psa = pf.number("psa");
    p.hbd = pf.count("hbd");
    p.hba = pf.count("hba");
    p.rotatable_bonds = pf.count("rotatable_bonds");
    p.heavy_atoms = pf.count("heavy_atoms");
    pf.finish();
    for (auto& w : inner.warnings) ctx.warnings.push_back(std::move(w));
    if (!(p.molecular_weight > 0.0)) throw Error("molecule.physchem: molecular_weight must be > 0");
    if (p.psa < 0.0) throw Error("molecule.physchem: psa must be >= 0");
  }
  f.finish();
  return m;
}

Protein protein_from_json(const json& j, ReadContext& ctx) {
  Fields f(j, "protein", ctx);
  Protein p;
  p.id = f.string("id", true);
  if (const auto* pdb = f.optional("pdb_id")) p.pdb_id = f.as_string(*pdb, "pdb_id", true);
  p.name = f.string("name");
  p.pocket_type = f.string("pocket_type");

  const auto& pockets = f.required("pockets");
  if (!pockets.is_array()) throw Error("protein: field 'pockets' must be an array");
  for (const auto& pj : pockets) {
    Fields pf(pj, "protein.pocket", ctx);
    PocketDescriptor d;
    d.pocket_label = pf.string("pocket_label");
    const auto& residues = pf.required("residues");
    if (!residues.is_array() || residues.empty()) {
      throw Error("protein.pocket: field 'residues' must be a nonempty array");
    }
    for (const auto& rj : residues) {
      Fields rf(rj, "protein.pocket.residue", ctx);
      Residue r;
      r.name = rf.string("name", true);
      r.number = rf.count("number");
      r.chain = rf.string("chain");
      rf.finish();
      d.residues.push_back(std::move(r));
    }
    d.interaction_types = pf.strings("interaction_types", true);
    if (const auto* notes = pf.optional("geometry_notes")) {
      d.geometry_notes = pf.as_string(*notes, "geometry_notes", false);
    }
    pf.finish();
    p.pockets.push_back(std::move(d));
  }

  const auto& lit = f.required("literature");
  if (!lit.is_array()) throw Error("protein: field 'literature' must be an array");
  for (const auto& lj : lit) {
    Fields lf(lj, "protein.literature", ctx);
    LiteratureRef ref;
    ref.source_id = lf.string("source_id", true);
    ref.title = lf.string("title");
    ref.abstract = lf.string("abstract");
    lf.finish();
    p.literature.push_back(std::move(ref));
  }
  f.finish();
  return p;
}

InteractionRecord interaction_from_json(const json& j, ReadContext& ctx) {
  Fields f(j, "interaction", ctx);
  InteractionRecord r;
  r.molecule_id = f.string("molecule_id", true);
  r.protein_id = f.string("protein_id", true);
  const auto& label = f.required("label");
  if (!label.is_boolean()) throw Error("interaction: field 'label' must be a boolean");
  r.label = label.get<bool>();
  f.finish();
  return r;
}

ProblemInstance instance_from_json(const json& j, ReadContext& ctx) {
  Fields f(j, "instance", ctx);
  ProblemInstance inst;
  inst.query_molecule_id = f.string("query_molecule_id", true);
  inst.candidate_molecule_ids = f.ids("candidate_molecule_ids");
  inst.candidate_protein_ids = f.ids("candidate_protein_ids");
  inst.ground_truth_protein_ids = f.ids("ground_truth_protein_ids");
  f.finish();
  return inst;
}

BaselineInstance baseline_from_json(const json& j, ReadContext& ctx) {
  Fields f(j, "baseline instance", ctx);
  BaselineInstance inst;
  inst.query_molecule_id = f.string("query_molecule_id", true);
  inst.candidate_protein_ids = f.ids("candidate_protein_ids");
  inst.ground_truth_protein_ids = f.ids("ground_truth_protein_ids");
  f.finish();
  return inst;
}

std::string to_line(const json& j) { return j.dump(); }

std::vector<ProblemInstance> read_instances(const std::filesystem::path& path, ReadContext& ctx) {
  return read_jsonl<ProblemInstance>(path, ctx, instance_from_json);
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace drugmcts::io
