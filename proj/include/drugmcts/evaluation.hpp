#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "drugmcts/mcts.hpp"

namespace drugmcts {

/// First K ranked proteins: K = gt_count, or gt_count + 3.
IdSet topk_select(const std::vector<RankedAnswer>& ranked, std::size_t gt_count, TopKMode mode);

/// |predicted ∩ truth| / |truth|. Throws std::invalid_argument for empty truth.
double recall(const IdSet& predicted, const IdSet& ground_truth);

struct EvaluationRow {
  std::string instance_id;
  std::size_t gt_size = 0;
  std::size_t k = 0;
  std::size_t hits = 0;
  double recall = 0.0;
  std::int64_t tokens = 0;
  int rollouts = 0;
};

struct EvaluationReport {
  TopKMode mode = TopKMode::kGt;
  double mean_recall = 0.0;
  std::vector<EvaluationRow> rows;
  std::int64_t total_tokens = 0;
  int total_rollouts = 0;

  nlohmann::json to_json() const;
  /// Header instance_id,gt_size,K,hits,recall,tokens,rollouts.
  std::string to_csv() const;
};

/// Pairs results with instances by query id; every instance needs exactly one
/// result and vice versa, otherwise ConsistencyError. Rows follow instance order.
EvaluationReport evaluate_run(const std::vector<SearchResult>& results,
                              const std::vector<ProblemInstance>& instances, TopKMode mode);

}  // namespace drugmcts
