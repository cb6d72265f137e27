#include "fairaudit/tail_probe.hpp"

#include <algorithm>

#include "fairaudit/error.hpp"

namespace fairaudit {

TailStats tail_stats(const PairedPredictions& paired, std::string_view method,
                     std::string_view baseline_method, std::string_view identity) {
  const auto& set = paired.set(method);
  const auto& base = paired.set(baseline_method);

  TailStats stats;
  stats.identity = std::string(identity);
  double sum_p = 0.0, sum_delta = 0.0;
  std::int64_t above_90 = 0, above_99 = 0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto& r = set.records()[i];
    if (r.identity != identity || r.y != 0) continue;
    stats.n_benign += 1;
    sum_p += r.p;
    sum_delta += r.p - base.records()[i].p;
    if (r.p > 0.9) ++above_90;
    if (r.p > 0.99) ++above_99;
  }
  if (stats.n_benign == 0)
    throw AuditError("identity '" + std::string(identity) + "' has no benign records");
  auto denom = static_cast<double>(stats.n_benign);
  stats.mean_p = sum_p / denom;
  stats.frac_above_90 = static_cast<double>(above_90) / denom;
  stats.frac_above_99 = static_cast<double>(above_99) / denom;
  stats.mean_delta = method == baseline_method ? 0.0 : sum_delta / denom;
  return stats;
}

std::vector<ConfidentError> top_confident_errors(const PredictionSet& set,
                                                 std::string_view identity, int k,
                                                 double min_p) {
  if (k < 0) throw AuditError("k must be non-negative");
  std::vector<const PredictionRecord*> hits;
  for (const auto& r : set.records())
    if (r.identity == identity && r.y == 0 && r.p >= min_p) hits.push_back(&r);
  std::sort(hits.begin(), hits.end(), [](const PredictionRecord* a, const PredictionRecord* b) {
    if (a->p != b->p) return a->p > b->p;
    return a->id < b->id;
  });
  if (static_cast<int>(hits.size()) > k) hits.resize(static_cast<std::size_t>(k));
  std::vector<ConfidentError> out;
  out.reserve(hits.size());
  for (const auto* r : hits) out.push_back({r->id, r->p, r->y, r->text});
  return out;
}

}  // namespace fairaudit
