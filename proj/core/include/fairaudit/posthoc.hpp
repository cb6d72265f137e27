#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairaudit/records.hpp"

namespace fairaudit {

struct TemperatureFit {
  double t_star = 1.0;
  double nll = 0.0;  // mean negative log-likelihood at t_star
  double grid_step = 0.01;
};

// Grid search for the temperature minimizing mean NLL of sigmoid(logit(p)/T)
// on the given set. Probabilities are clipped before the logit. Exact NLL
// ties resolve toward the candidate nearest 1.0 (no rescaling).
TemperatureFit fit_temperature(const PredictionSet& set, double grid_lo = 0.5,
                               double grid_hi = 5.0, double step = 0.01);

// Rescales every p through sigmoid(logit(p)/t); ids, labels and identities
// are untouched.
PredictionSet apply_temperature(const PredictionSet& set, double t);

// Distance from the decision boundary, used as the deferral score.
inline double confidence(double p) { return p >= 0.5 ? p : 1.0 - p; }

struct ThresholdEntry {
  double tau_star = 0.5;
  double residual_gap = 0.0;  // |subgroup error at tau_star - background error at 0.5|
};

struct ThresholdTable {
  double background_error = 0.0;  // at the fixed background threshold
  std::map<std::string, ThresholdEntry> by_identity;
};

struct ThresholdGrid {
  double lo = 0.1;
  double hi = 0.9;
  double step = 0.01;
  double background_tau = 0.5;  // background threshold stays fixed
};

// Per-identity threshold search minimizing |subgroup error(tau) - background
// error(background_tau)|. Ties prefer the tau nearest 0.5, then the smaller
// tau. Errors if an identity has no records in the set.
ThresholdTable optimize_thresholds(const PredictionSet& validation,
                                   std::span<const std::string> identities,
                                   const ThresholdGrid& grid = {});

struct RiskCoveragePoint {
  double coverage = 1.0;
  double risk = 0.0;  // error rate among retained records
  // subgroup error - background error among retained records; nullopt when
  // either retained slice is too small to report.
  std::map<std::string, std::optional<double>> per_identity_gap;
};

inline std::vector<double> default_coverage_grid() { return {1.0, 0.9, 0.8, 0.7, 0.6, 0.5}; }

// Selective-prediction sweep: at coverage c the ceil(c*n) most confident
// records are retained (ties broken by record id, ascending, so retained
// sets are nested and reproducible). The grid must be strictly descending,
// start at 1.0, and stay within (0, 1].
std::vector<RiskCoveragePoint> risk_coverage_curve(const PredictionSet& set,
                                                   std::span<const double> coverage_grid,
                                                   double threshold,
                                                   std::span<const std::string> identities,
                                                   std::int64_t min_retained = 20);

// CSV rows: coverage,risk then one gap column per identity (empty cell when
// a slice was too small).
std::string risk_coverage_csv(const std::vector<RiskCoveragePoint>& curve,
                              std::span<const std::string> identities);

}  // namespace fairaudit
