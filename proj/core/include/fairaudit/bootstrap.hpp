#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fairaudit/records.hpp"

namespace fairaudit {

struct ResamplePlan {
  std::uint64_t master_seed = 42;
  int n_iterations = 1000;
};

struct MetricEstimate {
  double point = 0.0;  // metric on the full, unresampled data
  double ci_lo = 0.0;  // 2.5th percentile of the bootstrap distribution
  double ci_hi = 0.0;  // 97.5th percentile
  int n_iterations_used = 0;
  int n_iterations_skipped = 0;
  bool significant = false;  // CI excludes zero; meaningful for gaps and differences
  bool fragile = false;      // more than 5% of iterations were skipped
};

// Index vector for one bootstrap iteration: n draws with replacement from
// [0, n). Depends only on (master_seed, iteration, n), so every method in a
// paired comparison resamples the same examples and any worker can recompute
// any iteration.
std::vector<std::uint32_t> resample_indices(const ResamplePlan& plan, int iteration,
                                            std::size_t n);

// Columnar view of one (possibly resampled) method's predictions. group
// holds indices into group_names; group_id returns -1 for unknown names so
// metric closures can detect absent identities.
struct SampleView {
  std::span<const double> p;
  std::span<const std::uint8_t> y;
  std::span<const std::int32_t> group;
  const std::vector<std::string>* group_names = nullptr;

  std::int32_t group_id(std::string_view identity) const;
};

// A named statistic evaluated on a sample. Throwing UndefinedMetricError
// (or returning NaN) marks the sample as undefined for this metric.
struct ScalarMetric {
  std::string name;
  std::function<double(const SampleView&)> fn;
};

// Paired bootstrap results for a fixed list of metrics over every method in
// a PairedPredictions. All metrics for all methods are evaluated on the same
// shared index vector in each iteration. An iteration that is undefined for
// any method is skipped for all methods of that metric, so per-method CIs
// stay comparable; differences drop only iterations undefined for either of
// their two methods.
class BootstrapResults {
public:
  MetricEstimate estimate(std::string_view metric, std::string_view method) const;
  MetricEstimate difference(std::string_view metric, std::string_view method_a,
                            std::string_view method_b) const;

  const std::vector<std::string>& metric_names() const { return metric_names_; }
  const std::vector<std::string>& method_names() const { return method_names_; }

private:
  friend BootstrapResults run_bootstrap(const PairedPredictions&,
                                        const std::vector<ScalarMetric>&, const ResamplePlan&,
                                        int);
  int iterations_ = 0;
  std::vector<std::string> metric_names_;
  std::vector<std::string> method_names_;
  // points_[metric][method]; draws_[metric][method][iteration], NaN = undefined.
  std::vector<std::vector<double>> points_;
  std::vector<std::vector<std::vector<double>>> draws_;

  std::size_t metric_index(std::string_view) const;
  std::size_t method_index(std::string_view) const;
};

// Runs the paired bootstrap. n_workers > 1 splits iterations across threads;
// results are merged in iteration order and are byte-identical to a single
// threaded run. Errors if any metric is undefined on the full data.
BootstrapResults run_bootstrap(const PairedPredictions& paired,
                               const std::vector<ScalarMetric>& metrics,
                               const ResamplePlan& plan, int n_workers = 1);

// Single-metric conveniences built on run_bootstrap.
std::vector<std::pair<std::string, MetricEstimate>> bootstrap_metric(
    const PairedPredictions& paired, const ScalarMetric& metric, const ResamplePlan& plan,
    int n_workers = 1);

MetricEstimate bootstrap_difference(const PairedPredictions& paired, const ScalarMetric& metric,
                                    std::string_view method_a, std::string_view method_b,
                                    const ResamplePlan& plan, int n_workers = 1);

// 2.5th/97.5th percentiles as order statistics: the ceil(q*n)-th smallest
// value, no interpolation. At n = 1000 these are the 25th and 975th.
std::pair<double, double> percentile_bounds(std::vector<double> values);

// Summary of one metric's bootstrap draws. NaN entries count as skipped
// iterations; planned_iterations drives the fragility check. Errors when
// every draw is NaN.
MetricEstimate summarize_bootstrap(double point, std::span<const double> draws,
                                   int planned_iterations);

}  // namespace fairaudit
