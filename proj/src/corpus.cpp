#include "drugmcts/corpus.hpp"

#include <sstream>

#include "drugmcts/error.hpp"
#include "drugmcts/json_io.hpp"

namespace drugmcts {

namespace {

const IdSet& empty_ids() {
  static const IdSet kEmpty;
  return kEmpty;
}

}  // namespace

Corpus::Corpus(std::vector<Molecule> molecules, std::vector<Protein> proteins,
               std::vector<InteractionRecord> interactions)
    : molecules_(std::move(molecules)),
      proteins_(std::move(proteins)),
      interactions_(std::move(interactions)) {
  for (std::size_t i = 0; i < molecules_.size(); ++i) {
    const auto& m = molecules_[i];
    if (!molecule_pos_.emplace(m.id, i).second) {
      throw ConsistencyError("duplicate molecule id '" + m.id + "'");
    }
    if (m.fingerprint) {
      if (n_bits_ == 0) {
        n_bits_ = m.fingerprint->size();
      } else if (m.fingerprint->size() != n_bits_) {
        throw ConsistencyError("molecule '" + m.id + "' fingerprint has " +
                               std::to_string(m.fingerprint->size()) + " bits, corpus uses " +
                               std::to_string(n_bits_));
      }
    }
    if (!m.embedding.empty()) {
      if (embedding_dim_ == 0) {
        embedding_dim_ = m.embedding.size();
      } else if (m.embedding.size() != embedding_dim_) {
        throw ConsistencyError("molecule '" + m.id + "' embedding has dimension " +
                               std::to_string(m.embedding.size()) + ", corpus uses " +
                               std::to_string(embedding_dim_));
      }
    }
  }
  for (std::size_t i = 0; i < proteins_.size(); ++i) {
    if (!protein_pos_.emplace(proteins_[i].id, i).second) {
      throw ConsistencyError("duplicate protein id '" + proteins_[i].id + "'");
    }
  }
  for (const auto& r : interactions_) {
    if (!molecule_pos_.count(r.molecule_id)) {
      throw ConsistencyError("interaction references unknown molecule id '" + r.molecule_id + "'");
    }
    if (!protein_pos_.count(r.protein_id)) {
      throw ConsistencyError("interaction references unknown protein id '" + r.protein_id + "'");
    }
    if (!r.label) continue;
    by_molecule_[r.molecule_id].insert(r.protein_id);
    by_protein_[r.protein_id].insert(r.molecule_id);
  }
}

const Molecule* Corpus::find_molecule(const std::string& id) const noexcept {
  auto it = molecule_pos_.find(id);
  return it == molecule_pos_.end() ? nullptr : &molecules_[it->second];
}

const Protein* Corpus::find_protein(const std::string& id) const noexcept {
  auto it = protein_pos_.find(id);
  return it == protein_pos_.end() ? nullptr : &proteins_[it->second];
}

const Molecule& Corpus::molecule(const std::string& id) const {
  if (const auto* m = find_molecule(id)) return *m;
  throw ConsistencyError("unknown molecule id '" + id + "'");
}

const Protein& Corpus::protein(const std::string& id) const {
  if (const auto* p = find_protein(id)) return *p;
  throw ConsistencyError("unknown protein id '" + id + "'");
}

const IdSet& Corpus::proteins_of(const std::string& molecule_id) const noexcept {
  auto it = by_molecule_.find(molecule_id);
  return it == by_molecule_.end() ? empty_ids() : it->second;
}

const IdSet& Corpus::molecules_of(const std::string& protein_id) const noexcept {
  auto it = by_protein_.find(protein_id);
  return it == by_protein_.end() ? empty_ids() : it->second;
}

void Corpus::add_warnings(std::vector<std::string> w) {
  for (auto& s : w) warnings_.push_back(std::move(s));
}

Corpus load_corpus(const std::filesystem::path& molecules_path,
                   const std::filesystem::path& proteins_path,
                   const std::filesystem::path& interactions_path, const LoadOptions& options) {
  io::ReadContext ctx{options.strict, {}};
  auto molecules = io::read_jsonl<Molecule>(molecules_path, ctx, io::molecule_from_json);
  auto proteins = io::read_jsonl<Protein>(proteins_path, ctx, io::protein_from_json);
  auto interactions =
      io::read_jsonl<InteractionRecord>(interactions_path, ctx, io::interaction_from_json);
  Corpus corpus(std::move(molecules), std::move(proteins), std::move(interactions));
  corpus.add_warnings(std::move(ctx.warnings));
  return corpus;
}

std::vector<std::string> validate_instance(const ProblemInstance& instance, const Corpus& corpus) {
  std::vector<std::string> out;
  const auto& gt = instance.ground_truth_protein_ids;
  const auto& pcp = instance.candidate_protein_ids;
  const auto& mcm = instance.candidate_molecule_ids;

  if (!corpus.find_molecule(instance.query_molecule_id)) {
    out.push_back("unknown query molecule id '" + instance.query_molecule_id + "'");
  }
  for (const auto& id : mcm) {
    if (!corpus.find_molecule(id)) out.push_back("unknown candidate molecule id '" + id + "'");
  }
  for (const auto& id : pcp) {
    if (!corpus.find_protein(id)) out.push_back("unknown candidate protein id '" + id + "'");
  }
  for (const auto& id : gt) {
    if (!pcp.count(id)) {
      out.push_back("ground-truth protein '" + id + "' is not among the candidate proteins");
    }
  }
  if (gt.size() < 1 || gt.size() > 5) {
    out.push_back("ground-truth size " + std::to_string(gt.size()) + " is not between 1 and 5");
  }
  // Integer form of |GT| <= 0.7 * |P_cp|.
  if (10 * gt.size() > 7 * pcp.size()) {
    std::ostringstream msg;
    msg << "ground-truth size " << gt.size() << " exceeds 70% of the " << pcp.size()
        << " candidate proteins (" << 0.7 * static_cast<double>(pcp.size()) << ")";
    out.push_back(msg.str());
  }
  if (mcm.size() > 15) {
    out.push_back("candidate molecule count " + std::to_string(mcm.size()) + " exceeds 15");
  }
  if (mcm.count(instance.query_molecule_id)) {
    out.push_back("query molecule '" + instance.query_molecule_id +
                  "' appears among its own candidates");
  }
  return out;
}

}  // namespace drugmcts
