#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fairaudit/records.hpp"

namespace fairaudit {

// Behaviour of one method on the benign (y = 0) slice of an identity.
struct TailStats {
  std::string identity;
  std::int64_t n_benign = 0;
  double mean_p = 0.0;
  double frac_above_90 = 0.0;  // fraction with p strictly above 0.9
  double frac_above_99 = 0.0;  // fraction with p strictly above 0.99
  // Mean over the same records of p(method) - p(baseline); 0 when the method
  // is its own baseline. Pairing is positional, which the PairedPredictions
  // invariant makes id-accurate.
  double mean_delta = 0.0;
};

// Errors if the identity has no benign records in the paired sets.
TailStats tail_stats(const PairedPredictions& paired, std::string_view method,
                     std::string_view baseline_method, std::string_view identity);

struct ConfidentError {
  std::string id;
  double p = 0.0;
  int y = 0;
  std::optional<std::string> text;
};

// The k highest-scored benign records of an identity, p descending, ties by
// id ascending. Fewer than k qualifying records yields a shorter list.
std::vector<ConfidentError> top_confident_errors(const PredictionSet& set,
                                                 std::string_view identity, int k,
                                                 double min_p = 0.5);

}  // namespace fairaudit
