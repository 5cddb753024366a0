#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "drugmcts/corpus.hpp"

namespace drugmcts {

enum class Metric { kTanimoto, kCosine };

std::string to_string(Metric m);

/// |a AND b| / |a OR b|. Throws MetricError on width mismatch or when both vectors are empty.
double tanimoto(const BitVector& a, const BitVector& b);

/// Throws MetricError on dimension mismatch or a zero-norm argument.
double cosine(std::span<const double> a, std::span<const double> b);

struct RankedHit {
  std::string molecule_id;
  double score = 0.0;
  Metric metric = Metric::kTanimoto;
  int rank = 0;  // 1-based
};

struct TopK {
  std::vector<RankedHit> hits;
  /// Corpus members skipped because the pair violated a metric precondition
  /// or the molecule lacks the modality.
  std::size_t skipped = 0;
};

/// Exact scan; query excluded; score descending, ties by id ascending.
TopK top_k(const Molecule& query, const Corpus& corpus, Metric metric, std::size_t k);

/// Union of the top-10 lists of both metrics (query excluded).
IdSet retrieve_candidates(const Molecule& query, const Corpus& corpus, std::size_t per_metric = 10);

/// Union of label=true partners of the given molecules. Throws on unknown ids.
IdSet candidate_proteins(const IdSet& candidates, const Corpus& corpus);

}  // namespace drugmcts
