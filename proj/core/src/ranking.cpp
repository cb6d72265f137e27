#include "fairaudit/ranking.hpp"

#include <algorithm>
#include <numeric>

#include "fairaudit/error.hpp"

namespace fairaudit {

namespace {

// Gathers one slice of a set into score/label columns.
struct Columns {
  std::vector<double> p;
  std::vector<std::uint8_t> y;
};

template <typename Keep>
Columns gather(const PredictionSet& set, Keep&& keep) {
  Columns c;
  for (const auto& r : set.records()) {
    if (!keep(r)) continue;
    c.p.push_back(r.p);
    c.y.push_back(static_cast<std::uint8_t>(r.y));
  }
  return c;
}

}  // namespace

AucResult auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  std::int64_t n_pos = 0;
  for (auto y : labels) n_pos += y;
  auto n = static_cast<std::int64_t>(labels.size());
  std::int64_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) throw UndefinedAucError(n_pos, n_neg);

  std::vector<std::int32_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::int32_t a, std::int32_t b) { return scores[a] < scores[b]; });

  // Midranks: every member of a tie block gets the block's average rank.
  // The positive rank sum is then a sum of integer halves, so it matches a
  // pairwise count with half-credit ties exactly, not just approximately.
  double rank_sum_pos = 0.0;
  std::int64_t i = 0;
  while (i < n) {
    std::int64_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    double midrank = 0.5 * static_cast<double>(i + 1 + j);  // average of ranks i+1..j
    for (std::int64_t k = i; k < j; ++k)
      if (labels[order[k]]) rank_sum_pos += midrank;
    i = j;
  }

  double numerator = rank_sum_pos - 0.5 * static_cast<double>(n_pos) * static_cast<double>(n_pos + 1);
  double value = numerator / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
  return {value, n_pos, n_neg};
}

AucResult overall_auc(const PredictionSet& set) {
  auto c = gather(set, [](const PredictionRecord&) { return true; });
  return auc(c.p, c.y);
}

AucResult subgroup_auc(const PredictionSet& set, std::string_view identity) {
  auto c = gather(set, [&](const PredictionRecord& r) { return r.identity == identity; });
  return auc(c.p, c.y);
}

AucResult bpsn_auc(const PredictionSet& set, std::string_view identity) {
  auto c = gather(set, [&](const PredictionRecord& r) {
    return (r.identity == identity && r.y == 0) || (r.identity == kBackground && r.y == 1);
  });
  return auc(c.p, c.y);
}

std::optional<AucResult> bnsp_auc(const PredictionSet& set, std::string_view identity,
                                  std::int64_t min_positives) {
  std::int64_t subgroup_pos = 0;
  for (const auto& r : set.records())
    if (r.identity == identity && r.y == 1) ++subgroup_pos;
  if (subgroup_pos < min_positives) return std::nullopt;
  auto c = gather(set, [&](const PredictionRecord& r) {
    return (r.identity == identity && r.y == 1) || (r.identity == kBackground && r.y == 0);
  });
  return auc(c.p, c.y);
}

double error_rate(std::span<const double> scores, std::span<const std::uint8_t> labels,
                  double threshold) {
  if (scores.empty()) throw UndefinedMetricError("error rate of empty sample");
  std::int64_t wrong = 0;
  for (std::size_t i = 0; i < scores.size(); ++i)
    wrong += binarize(scores[i], threshold) != static_cast<int>(labels[i]);
  return static_cast<double>(wrong) / static_cast<double>(scores.size());
}

ErrorGapResult error_gap(const PredictionSet& set, std::string_view identity, double threshold) {
  auto sub = gather(set, [&](const PredictionRecord& r) { return r.identity == identity; });
  auto bg = gather(set, [](const PredictionRecord& r) { return r.identity == kBackground; });
  if (sub.p.empty())
    throw AuditError("identity '" + std::string(identity) + "' has no records");
  if (bg.p.empty()) throw AuditError("set '" + set.name() + "' has no background records");
  ErrorGapResult out;
  out.threshold = threshold;
  out.subgroup_error = error_rate(sub.p, sub.y, threshold);
  out.background_error = error_rate(bg.p, bg.y, threshold);
  out.gap = out.subgroup_error - out.background_error;
  return out;
}

}  // namespace fairaudit
