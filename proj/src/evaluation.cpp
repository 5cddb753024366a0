#include "drugmcts/evaluation.hpp"

#include <map>
#include <sstream>
#include <stdexcept>

#include "drugmcts/error.hpp"

namespace drugmcts {

IdSet topk_select(const std::vector<RankedAnswer>& ranked, std::size_t gt_count, TopKMode mode) {
  const std::size_t k = gt_count + (mode == TopKMode::kGtPlus3 ? 3 : 0);
  IdSet out;
  for (std::size_t i = 0; i < ranked.size() && i < k; ++i) out.insert(ranked[i].protein_id);
  return out;
}

double recall(const IdSet& predicted, const IdSet& ground_truth) {
  if (ground_truth.empty()) throw std::invalid_argument("recall needs a nonempty ground truth");
  std::size_t hits = 0;
  for (const auto& id : ground_truth) hits += predicted.count(id);
  return static_cast<double>(hits) / static_cast<double>(ground_truth.size());
}

nlohmann::json EvaluationReport::to_json() const {
  nlohmann::json rows_json = nlohmann::json::array();
  for (const auto& r : rows) {
    rows_json.push_back({{"instance_id", r.instance_id},
                         {"gt_size", r.gt_size},
                         {"K", r.k},
                         {"hits", r.hits},
                         {"recall", r.recall},
                         {"tokens", r.tokens},
                         {"rollouts", r.rollouts}});
  }
  return {{"topk_mode", to_string(mode)},
          {"mean_recall", mean_recall},
          {"instances", rows.size()},
          {"total_tokens", total_tokens},
          {"total_rollouts", total_rollouts},
          {"rows", std::move(rows_json)}};
}

std::string EvaluationReport::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "instance_id,gt_size,K,hits,recall,tokens,rollouts\n";
  for (const auto& r : rows) {
    os << r.instance_id << ',' << r.gt_size << ',' << r.k << ',' << r.hits << ',' << r.recall
       << ',' << r.tokens << ',' << r.rollouts << '\n';
  }
  return os.str();
}

EvaluationReport evaluate_run(const std::vector<SearchResult>& results,
                              const std::vector<ProblemInstance>& instances, TopKMode mode) {
  if (results.empty()) throw ConsistencyError("no search results to evaluate");
  if (results.size() != instances.size()) {
    throw ConsistencyError("have " + std::to_string(results.size()) + " results for " +
                           std::to_string(instances.size()) + " instances");
  }
  std::map<std::string, const SearchResult*> by_id;
  for (const auto& r : results) {
    if (!by_id.emplace(r.query_molecule_id, &r).second) {
      throw ConsistencyError("duplicate result for query '" + r.query_molecule_id + "'");
    }
  }

  EvaluationReport report;
  report.mode = mode;
  double sum = 0.0;
  for (const auto& inst : instances) {
    auto it = by_id.find(inst.query_molecule_id);
    if (it == by_id.end()) {
      throw ConsistencyError("no result for instance '" + inst.query_molecule_id + "'");
    }
    const auto& res = *it->second;
    EvaluationRow row;
    row.instance_id = inst.query_molecule_id;
    row.gt_size = inst.ground_truth_protein_ids.size();
    row.k = row.gt_size + (mode == TopKMode::kGtPlus3 ? 3 : 0);
    const auto predicted = topk_select(res.ranked_answers, row.gt_size, mode);
    for (const auto& id : inst.ground_truth_protein_ids) row.hits += predicted.count(id);
    row.recall = recall(predicted, inst.ground_truth_protein_ids);
    row.tokens = res.total_tokens;
    row.rollouts = static_cast<int>(res.rollout_outcomes.size());
    sum += row.recall;
    report.total_tokens += row.tokens;
    report.total_rollouts += row.rollouts;
    report.rows.push_back(std::move(row));
  }
  report.mean_recall = instances.empty() ? 0.0 : sum / static_cast<double>(instances.size());
  return report;
}

}  // namespace drugmcts
