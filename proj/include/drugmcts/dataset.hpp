#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "drugmcts/corpus.hpp"

namespace drugmcts {

/// Filters applied when turning a corpus into problem instances. Ranges are inclusive.
struct BuilderRules {
  std::size_t query_min_proteins = 2;
  std::size_t query_max_proteins = 10;
  std::size_t candidate_min_proteins = 2;
  std::size_t candidate_max_proteins = 4;
  std::size_t max_candidates = 15;
  std::size_t gt_min = 1;
  std::size_t gt_max = 5;
  /// |GT| may not exceed this fraction of |P_cp|.
  double gt_max_ratio = 0.7;
  /// Retrieval depth per similarity metric.
  std::size_t per_metric = 10;
};

/// Rejection reasons, in the order the rules are checked.
inline constexpr const char* kRejectQueryProteins = "query_protein_count";
inline constexpr const char* kRejectNoCandidates = "no_candidates";
inline constexpr const char* kRejectTooManyCandidates = "too_many_candidates";
inline constexpr const char* kRejectGtSize = "ground_truth_size";
inline constexpr const char* kRejectGtRatio = "ground_truth_ratio";

struct BuildReport {
  std::size_t queries = 0;
  std::size_t accepted = 0;
  std::map<std::string, std::size_t> rejected;  // reason -> count
  std::size_t candidates_dropped = 0;            // candidate molecules removed by the 2-4 rule

  nlohmann::json to_json() const;
};

struct BuildOutput {
  std::vector<ProblemInstance> instances;
  BuildReport report;
};

/// One instance per qualifying query molecule, ordered by query id.
BuildOutput build_instances(const Corpus& corpus, const BuilderRules& rules = {});

std::vector<BaselineInstance> build_baseline_dataset(const std::vector<ProblemInstance>& instances);

}  // namespace drugmcts
