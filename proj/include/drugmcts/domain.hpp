#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "drugmcts/bitvector.hpp"

namespace drugmcts {

/// Id collections are ordered sets so every file and prompt lists them sorted.
using IdSet = std::set<std::string>;

struct StructuralProfile {
  std::int64_t chiral_center_count = 0;
  std::string scaffold;
  std::vector<std::string> functional_groups;
};

struct PhyschemProfile {
  double molecular_weight = 0.0;  // Da
  double logp = 0.0;
  double psa = 0.0;  // Å²
  std::int64_t hbd = 0;
  std::int64_t hba = 0;
  std::int64_t rotatable_bonds = 0;
  std::int64_t heavy_atoms = 0;
};

/// A chemical entity. Fingerprint and embedding are optional modalities: a
/// molecule lacking one is skipped by the matching similarity channel.
struct Molecule {
  std::string id;
  std::string smiles;
  std::optional<BitVector> fingerprint;
  std::vector<double> embedding;
  StructuralProfile structural;
  PhyschemProfile physchem;
};

struct Residue {
  std::string name;
  std::int64_t number = 0;
  std::string chain;
};

struct PocketDescriptor {
  std::string pocket_label;
  std::vector<Residue> residues;
  std::vector<std::string> interaction_types;
  std::optional<std::string> geometry_notes;
};

struct LiteratureRef {
  std::string source_id;
  std::string title;
  std::string abstract;
};

struct Protein {
  std::string id;
  std::optional<std::string> pdb_id;
  std::string name;
  std::string pocket_type;
  std::vector<PocketDescriptor> pockets;
  std::vector<LiteratureRef> literature;
};

struct InteractionRecord {
  std::string molecule_id;
  std::string protein_id;
  bool label = false;
};

/// One query molecule with its candidate pools and known targets.
struct ProblemInstance {
  std::string query_molecule_id;
  IdSet candidate_molecule_ids;
  IdSet candidate_protein_ids;
  IdSet ground_truth_protein_ids;
};

/// Projection of a ProblemInstance without the candidate molecules.
struct BaselineInstance {
  std::string query_molecule_id;
  IdSet candidate_protein_ids;
  IdSet ground_truth_protein_ids;
};

}  // namespace drugmcts
