#include "drugmcts/similarity.hpp"

#include <algorithm>
#include <cmath>

#include "drugmcts/error.hpp"

namespace drugmcts {

std::string to_string(Metric m) { return m == Metric::kTanimoto ? "tanimoto" : "cosine"; }

double tanimoto(const BitVector& a, const BitVector& b) {
  if (a.size() != b.size()) {
    throw MetricError("tanimoto: width mismatch (" + std::to_string(a.size()) + " vs " +
                      std::to_string(b.size()) + ")");
  }
  const auto uni = a.union_count(b);
  if (uni == 0) throw MetricError("tanimoto: both fingerprints are empty");
  return static_cast<double>(a.intersection_count(b)) / static_cast<double>(uni);
}

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw MetricError("cosine: dimension mismatch (" + std::to_string(a.size()) + " vs " +
                      std::to_string(b.size()) + ")");
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw MetricError("cosine: zero-norm vector");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

TopK top_k(const Molecule& query, const Corpus& corpus, Metric metric, std::size_t k) {
  TopK out;
  std::vector<RankedHit> scored;
  scored.reserve(corpus.molecules().size());
  for (const auto& m : corpus.molecules()) {
    if (m.id == query.id) continue;
    try {
      double s = 0.0;
      if (metric == Metric::kTanimoto) {
        if (!query.fingerprint || !m.fingerprint) {
          ++out.skipped;
          continue;
        }
        s = tanimoto(*query.fingerprint, *m.fingerprint);
      } else {
        if (query.embedding.empty() || m.embedding.empty()) {
          ++out.skipped;
          continue;
        }
        s = cosine(query.embedding, m.embedding);
      }
      scored.push_back({m.id, s, metric, 0});
    } catch (const MetricError&) {
      ++out.skipped;
    }
  }
  const auto n = std::min(k, scored.size());
  auto better = [](const RankedHit& x, const RankedHit& y) {
    if (x.score != y.score) return x.score > y.score;
    return x.molecule_id < y.molecule_id;
  };
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n), scored.end(),
                    better);
  scored.resize(n);
  for (std::size_t i = 0; i < n; ++i) scored[i].rank = static_cast<int>(i + 1);
  out.hits = std::move(scored);
  return out;
}

IdSet retrieve_candidates(const Molecule& query, const Corpus& corpus, std::size_t per_metric) {
  IdSet out;
  for (auto metric : {Metric::kTanimoto, Metric::kCosine}) {
    for (auto& hit : top_k(query, corpus, metric, per_metric).hits) out.insert(hit.molecule_id);
  }
  return out;
}

IdSet candidate_proteins(const IdSet& candidates, const Corpus& corpus) {
  IdSet out;
  for (const auto& id : candidates) {
    corpus.molecule(id);
    const auto& ps = corpus.proteins_of(id);
    out.insert(ps.begin(), ps.end());
  }
  return out;
}

}  // namespace drugmcts
