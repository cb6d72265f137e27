#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fairaudit/records.hpp"

namespace fairaudit {

struct ReliabilityBin {
  std::int64_t count = 0;
  double mean_p = 0.0;         // mean predicted probability in the bin
  double frac_positive = 0.0;  // empirical positive rate in the bin
};

// Equal-width bins over [0,1]: bin b covers [b/n_bins, (b+1)/n_bins), the
// last bin is closed at 1. Empty bins keep count 0 and zero means.
struct ReliabilityBins {
  int n_bins = 15;
  std::vector<ReliabilityBin> bins;

  double edge(int i) const { return static_cast<double>(i) / n_bins; }
};

// Bin index of one score under that partition. Scores exactly on an edge
// b / n_bins always land in bin b, matching the interval definition even
// when p * n_bins rounds the other way.
int calibration_bin(double p, int n_bins);

ReliabilityBins reliability_bins(std::span<const double> p, std::span<const std::uint8_t> y,
                                 int n_bins = 15);

// Expected calibration error: count-weighted mean of |frac_positive - mean_p|
// over nonempty bins. Errors on an empty sample.
double ece(std::span<const double> p, std::span<const std::uint8_t> y, int n_bins = 15);

double subgroup_ece(const PredictionSet& set, std::string_view identity, int n_bins = 15);

struct CalibGapResult {
  double subgroup_ece = 0.0;
  double background_ece = 0.0;
  double gap = 0.0;  // subgroup_ece - background_ece
};

// Calibration-fairness gap for one identity against the background slice.
CalibGapResult calib_gap(const PredictionSet& set, std::string_view identity, int n_bins = 15);

// One CSV row per bin: bin_lo,bin_hi,count,mean_p,frac_positive.
std::string reliability_csv(const ReliabilityBins& bins);

}  // namespace fairaudit
