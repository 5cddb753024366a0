#include "drugmcts/dataset.hpp"

#include <algorithm>

#include "drugmcts/similarity.hpp"

namespace drugmcts {

nlohmann::json BuildReport::to_json() const {
  nlohmann::json rej = nlohmann::json::object();
  for (const auto& [reason, n] : rejected) rej[reason] = n;
  return {{"queries", queries},
          {"accepted", accepted},
          {"rejected", rej},
          {"candidates_dropped", candidates_dropped}};
}

BuildOutput build_instances(const Corpus& corpus, const BuilderRules& rules) {
  BuildOutput out;
  auto& report = out.report;
  for (const char* reason : {kRejectQueryProteins, kRejectNoCandidates, kRejectTooManyCandidates,
                             kRejectGtSize, kRejectGtRatio}) {
    report.rejected[reason] = 0;
  }

  std::vector<const Molecule*> queries;
  for (const auto& m : corpus.molecules()) queries.push_back(&m);
  std::sort(queries.begin(), queries.end(),
            [](const Molecule* a, const Molecule* b) { return a->id < b->id; });

  auto in_range = [](std::size_t v, std::size_t lo, std::size_t hi) { return v >= lo && v <= hi; };

  for (const auto* query : queries) {
    ++report.queries;
    const auto& query_proteins = corpus.proteins_of(query->id);
    if (!in_range(query_proteins.size(), rules.query_min_proteins, rules.query_max_proteins)) {
      ++report.rejected[kRejectQueryProteins];
      continue;
    }

    IdSet candidates;
    for (const auto& id : retrieve_candidates(*query, corpus, rules.per_metric)) {
      const auto n = corpus.proteins_of(id).size();
      if (in_range(n, rules.candidate_min_proteins, rules.candidate_max_proteins)) {
        candidates.insert(id);
      } else {
        ++report.candidates_dropped;
      }
    }
    if (candidates.empty()) {
      ++report.rejected[kRejectNoCandidates];
      continue;
    }
    if (candidates.size() > rules.max_candidates) {
      ++report.rejected[kRejectTooManyCandidates];
      continue;
    }

    auto pool = candidate_proteins(candidates, corpus);
    IdSet gt;
    std::set_intersection(pool.begin(), pool.end(), query_proteins.begin(), query_proteins.end(),
                          std::inserter(gt, gt.end()));
    if (!in_range(gt.size(), rules.gt_min, rules.gt_max)) {
      ++report.rejected[kRejectGtSize];
      continue;
    }
    if (static_cast<double>(gt.size()) > rules.gt_max_ratio * static_cast<double>(pool.size())) {
      ++report.rejected[kRejectGtRatio];
      continue;
    }

    out.instances.push_back({query->id, std::move(candidates), std::move(pool), std::move(gt)});
    ++report.accepted;
  }
  return out;
}

std::vector<BaselineInstance> build_baseline_dataset(const std::vector<ProblemInstance>& instances) {
  std::vector<BaselineInstance> out;
  out.reserve(instances.size());
  for (const auto& inst : instances) {
    out.push_back({inst.query_molecule_id, inst.candidate_protein_ids, inst.ground_truth_protein_ids});
  }
  return out;
}

}  // namespace drugmcts
