#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

#include "fairaudit/records.hpp"

namespace fairaudit {

struct AucResult {
  double value = 0.0;
  std::int64_t n_pos = 0;
  std::int64_t n_neg = 0;
};

// Probability that a random positive outranks a random negative, ties worth
// half. Computed from midranks in O(n log n); equals the pairwise count
// exactly, including in floating point, because midrank sums are sums of
// halves. Throws UndefinedAucError when either class is empty.
AucResult auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

AucResult overall_auc(const PredictionSet& set);

// AUC restricted to records tagged with the identity.
AucResult subgroup_auc(const PredictionSet& set, std::string_view identity);

// Background-positive / subgroup-negative composite: low values mean benign
// mentions of the identity outrank genuinely toxic background content.
AucResult bpsn_auc(const PredictionSet& set, std::string_view identity);

// Background-negative / subgroup-positive composite. Reported only when the
// subgroup has at least min_positives positive examples; nullopt otherwise.
std::optional<AucResult> bnsp_auc(const PredictionSet& set, std::string_view identity,
                                  std::int64_t min_positives = 50);

// Fraction of records whose binarized score disagrees with the label.
// Errors on an empty sample.
double error_rate(std::span<const double> scores, std::span<const std::uint8_t> labels,
                  double threshold);

struct ErrorGapResult {
  double subgroup_error = 0.0;
  double background_error = 0.0;
  double gap = 0.0;  // subgroup_error - background_error
  double threshold = 0.5;
};

ErrorGapResult error_gap(const PredictionSet& set, std::string_view identity,
                         double threshold = 0.5);

}  // namespace fairaudit
