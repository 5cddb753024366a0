#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "drugmcts/domain.hpp"

namespace drugmcts {

/// Strict mode rejects unknown record fields; lenient mode records a warning and continues.
struct LoadOptions {
  bool strict = true;
};

/// In-memory molecules, proteins and interactions with cross-reference
/// indices. Immutable after construction, so concurrent readers are safe.
class Corpus {
 public:
  Corpus() = default;

  /// Verifies id uniqueness, uniform fingerprint width / embedding dimension,
  /// and that every interaction resolves; builds the positive-label indices.
  Corpus(std::vector<Molecule> molecules, std::vector<Protein> proteins,
         std::vector<InteractionRecord> interactions);

  std::span<const Molecule> molecules() const noexcept { return molecules_; }
  std::span<const Protein> proteins() const noexcept { return proteins_; }
  std::span<const InteractionRecord> interactions() const noexcept { return interactions_; }

  const Molecule* find_molecule(const std::string& id) const noexcept;
  const Protein* find_protein(const std::string& id) const noexcept;
  /// Throws ConsistencyError for unknown ids.
  const Molecule& molecule(const std::string& id) const;
  const Protein& protein(const std::string& id) const;

  /// Proteins with a label=true interaction with the molecule (empty for unknown ids).
  const IdSet& proteins_of(const std::string& molecule_id) const noexcept;
  const IdSet& molecules_of(const std::string& protein_id) const noexcept;

  const std::map<std::string, IdSet>& molecule_index() const noexcept { return by_molecule_; }
  const std::map<std::string, IdSet>& protein_index() const noexcept { return by_protein_; }

  /// 0 when no molecule carries that modality.
  std::size_t fingerprint_bits() const noexcept { return n_bits_; }
  std::size_t embedding_dim() const noexcept { return embedding_dim_; }

  /// Non-fatal notes collected while loading (lenient-mode unknown fields).
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }
  void add_warnings(std::vector<std::string> w);

 private:
  std::vector<Molecule> molecules_;
  std::vector<Protein> proteins_;
  std::vector<InteractionRecord> interactions_;
  std::unordered_map<std::string, std::size_t> molecule_pos_;
  std::unordered_map<std::string, std::size_t> protein_pos_;
  std::map<std::string, IdSet> by_molecule_;
  std::map<std::string, IdSet> by_protein_;
  std::size_t n_bits_ = 0;
  std::size_t embedding_dim_ = 0;
  std::vector<std::string> warnings_;
};

Corpus load_corpus(const std::filesystem::path& molecules_path,
                   const std::filesystem::path& proteins_path,
                   const std::filesystem::path& interactions_path, const LoadOptions& options = {});

/// Human-readable rule violations; empty iff the instance is consistent with the corpus.
std::vector<std::string> validate_instance(const ProblemInstance& instance, const Corpus& corpus);

}  // namespace drugmcts
