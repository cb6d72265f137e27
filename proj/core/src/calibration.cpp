#include "fairaudit/calibration.hpp"

#include <sstream>

#include "fairaudit/error.hpp"
#include "fairaudit/numeric.hpp"

namespace fairaudit {

namespace {

void check_bins(int n_bins) {
  if (n_bins < 1) throw AuditError("n_bins must be positive");
}

std::pair<std::vector<double>, std::vector<std::uint8_t>> identity_columns(
    const PredictionSet& set, std::string_view identity) {
  std::pair<std::vector<double>, std::vector<std::uint8_t>> out;
  for (const auto& r : set.records()) {
    if (r.identity != identity) continue;
    out.first.push_back(r.p);
    out.second.push_back(static_cast<std::uint8_t>(r.y));
  }
  return out;
}

}  // namespace

int calibration_bin(double p, int n_bins) {
  // Multiply-and-truncate as a first guess, then snap to the documented
  // half-open partition: p * n_bins can round to the wrong side of an edge
  // that b / n_bins itself represents exactly (p = 1.0 stays in the last
  // bin). The guess is never off by more than one.
  int b = static_cast<int>(p * n_bins);
  if (b >= n_bins) b = n_bins - 1;
  if (b > 0 && p < static_cast<double>(b) / n_bins)
    --b;
  else if (b + 1 < n_bins && p >= static_cast<double>(b + 1) / n_bins)
    ++b;
  return b;
}

ReliabilityBins reliability_bins(std::span<const double> p, std::span<const std::uint8_t> y,
                                 int n_bins) {
  check_bins(n_bins);
  if (p.empty()) throw UndefinedMetricError("reliability bins of empty sample");
  ReliabilityBins out;
  out.n_bins = n_bins;
  out.bins.resize(static_cast<std::size_t>(n_bins));
  std::vector<double> sum_p(static_cast<std::size_t>(n_bins), 0.0);
  std::vector<std::int64_t> sum_y(static_cast<std::size_t>(n_bins), 0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    auto b = static_cast<std::size_t>(calibration_bin(p[i], n_bins));
    out.bins[b].count += 1;
    sum_p[b] += p[i];
    sum_y[b] += y[i];
  }
  for (std::size_t b = 0; b < out.bins.size(); ++b) {
    if (out.bins[b].count == 0) continue;
    auto cnt = static_cast<double>(out.bins[b].count);
    out.bins[b].mean_p = sum_p[b] / cnt;
    out.bins[b].frac_positive = static_cast<double>(sum_y[b]) / cnt;
  }
  return out;
}

double ece(std::span<const double> p, std::span<const std::uint8_t> y, int n_bins) {
  auto bins = reliability_bins(p, y, n_bins);
  double total = static_cast<double>(p.size());
  double acc = 0.0;
  for (const auto& b : bins.bins) {
    if (b.count == 0) continue;
    double dev = b.frac_positive - b.mean_p;
    acc += (static_cast<double>(b.count) / total) * (dev < 0 ? -dev : dev);
  }
  return acc;
}

double subgroup_ece(const PredictionSet& set, std::string_view identity, int n_bins) {
  auto [p, y] = identity_columns(set, identity);
  if (p.empty())
    throw UndefinedMetricError("identity '" + std::string(identity) + "' has no records");
  return ece(p, y, n_bins);
}

CalibGapResult calib_gap(const PredictionSet& set, std::string_view identity, int n_bins) {
  CalibGapResult out;
  out.subgroup_ece = subgroup_ece(set, identity, n_bins);
  out.background_ece = subgroup_ece(set, kBackground, n_bins);
  out.gap = out.subgroup_ece - out.background_ece;
  return out;
}

std::string reliability_csv(const ReliabilityBins& bins) {
  std::ostringstream out;
  out << "bin_lo,bin_hi,count,mean_p,frac_positive\n";
  for (int b = 0; b < bins.n_bins; ++b) {
    const auto& bin = bins.bins[static_cast<std::size_t>(b)];
    out << format_double(bins.edge(b)) << ',' << format_double(bins.edge(b + 1)) << ','
        << bin.count << ',' << format_double(bin.mean_p) << ','
        << format_double(bin.frac_positive) << "\n";
  }
  return out.str();
}

}  // namespace fairaudit
