#include "fairaudit/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include "fairaudit/error.hpp"
#include "fairaudit/rng.hpp"

namespace fairaudit {

namespace {

constexpr int kMaxWorkers = 64;

struct SharedColumns {
  std::vector<std::uint8_t> y;
  std::vector<std::int32_t> group;
  std::vector<std::string> group_names;
  std::vector<std::vector<double>> p_by_method;
};

SharedColumns build_columns(const PairedPredictions& paired) {
  SharedColumns cols;
  const auto& base = paired.sets().front();
  cols.y.reserve(base.size());
  cols.group.reserve(base.size());
  for (const auto& r : base.records()) {
    cols.y.push_back(static_cast<std::uint8_t>(r.y));
    auto it = std::find(cols.group_names.begin(), cols.group_names.end(), r.identity);
    if (it == cols.group_names.end()) {
      cols.group.push_back(static_cast<std::int32_t>(cols.group_names.size()));
      cols.group_names.push_back(r.identity);
    } else {
      cols.group.push_back(static_cast<std::int32_t>(it - cols.group_names.begin()));
    }
  }
  for (const auto& set : paired.sets()) {
    auto& p = cols.p_by_method.emplace_back();
    p.reserve(set.size());
    for (const auto& r : set.records()) p.push_back(r.p);
  }
  return cols;
}

double evaluate_or_nan(const ScalarMetric& metric, const SampleView& view) {
  try {
    return metric.fn(view);
  } catch (const UndefinedMetricError&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

}  // namespace

MetricEstimate summarize_bootstrap(double point, std::span<const double> draws,
                                   int planned_iterations) {
  std::vector<double> valid;
  valid.reserve(draws.size());
  int skipped = 0;
  for (double v : draws) {
    if (std::isnan(v))
      ++skipped;
    else
      valid.push_back(v);
  }
  if (valid.empty()) throw AuditError("bootstrap: every iteration was skipped");
  MetricEstimate est;
  est.point = point;
  est.n_iterations_used = static_cast<int>(valid.size());
  est.n_iterations_skipped = skipped;
  auto [lo, hi] = percentile_bounds(std::move(valid));
  est.ci_lo = lo;
  est.ci_hi = hi;
  est.significant = lo > 0.0 || hi < 0.0;
  est.fragile = skipped > planned_iterations / 20;  // strictly more than 5%
  return est;
}

std::vector<std::uint32_t> resample_indices(const ResamplePlan& plan, int iteration,
                                            std::size_t n) {
  if (n == 0) throw AuditError("cannot resample an empty set");
  CounterRng rng(plan.master_seed, Stream::Bootstrap, static_cast<std::uint64_t>(iteration));
  std::vector<std::uint32_t> idx(n);
  for (auto& v : idx) v = static_cast<std::uint32_t>(rng.next_below(n));
  return idx;
}

std::int32_t SampleView::group_id(std::string_view identity) const {
  if (!group_names) return -1;
  for (std::size_t i = 0; i < group_names->size(); ++i)
    if ((*group_names)[i] == identity) return static_cast<std::int32_t>(i);
  return -1;
}

std::pair<double, double> percentile_bounds(std::vector<double> values) {
  if (values.empty()) throw AuditError("percentiles of an empty sample");
  std::sort(values.begin(), values.end());
  auto n = static_cast<double>(values.size());
  auto order_stat = [&](double q) {
    auto k = static_cast<std::size_t>(std::ceil(q * n));
    if (k < 1) k = 1;
    return values[k - 1];
  };
  return {order_stat(0.025), order_stat(0.975)};
}

BootstrapResults run_bootstrap(const PairedPredictions& paired,
                               const std::vector<ScalarMetric>& metrics,
                               const ResamplePlan& plan, int n_workers) {
  if (paired.n_methods() == 0) throw AuditError("bootstrap needs at least one method");
  if (paired.n_records() == 0) throw AuditError("bootstrap needs at least one record");
  if (metrics.empty()) throw AuditError("bootstrap needs at least one metric");
  if (plan.n_iterations < 1) throw AuditError("bootstrap needs at least one iteration");

  auto cols = build_columns(paired);
  const std::size_t n = paired.n_records();
  const std::size_t n_methods = paired.n_methods();
  const std::size_t n_metrics = metrics.size();
  const int iters = plan.n_iterations;

  BootstrapResults res;
  res.iterations_ = iters;
  res.method_names_ = paired.methods();
  for (const auto& m : metrics) res.metric_names_.push_back(m.name);

  // Full-data points; an undefined metric here is a caller error.
  res.points_.assign(n_metrics, std::vector<double>(n_methods, 0.0));
  for (std::size_t k = 0; k < n_metrics; ++k) {
    for (std::size_t m = 0; m < n_methods; ++m) {
      SampleView view{cols.p_by_method[m], cols.y, cols.group, &cols.group_names};
      double v = metrics[k].fn(view);
      if (std::isnan(v))
        throw AuditError("metric '" + metrics[k].name + "' undefined on the full data for '" +
                         res.method_names_[m] + "'");
      res.points_[k][m] = v;
    }
  }

  res.draws_.assign(
      n_metrics, std::vector<std::vector<double>>(
                     n_methods, std::vector<double>(static_cast<std::size_t>(iters),
                                                    std::numeric_limits<double>::quiet_NaN())));

  // Iterations are self-describing: worker count changes scheduling, never
  // values, so the merged result is byte-identical for any worker count.
  auto run_range = [&](int begin, int end) {
    std::vector<std::uint8_t> y_s(n);
    std::vector<std::int32_t> g_s(n);
    std::vector<double> p_s(n);
    for (int it = begin; it < end; ++it) {
      auto idx = resample_indices(plan, it, n);
      for (std::size_t i = 0; i < n; ++i) {
        y_s[i] = cols.y[idx[i]];
        g_s[i] = cols.group[idx[i]];
      }
      for (std::size_t m = 0; m < n_methods; ++m) {
        const auto& p_full = cols.p_by_method[m];
        for (std::size_t i = 0; i < n; ++i) p_s[i] = p_full[idx[i]];
        SampleView view{p_s, y_s, g_s, &cols.group_names};
        for (std::size_t k = 0; k < n_metrics; ++k)
          res.draws_[k][m][static_cast<std::size_t>(it)] = evaluate_or_nan(metrics[k], view);
      }
    }
  };

  int workers = std::clamp(n_workers, 1, kMaxWorkers);
  if (workers > iters) workers = iters;
  if (workers <= 1) {
    run_range(0, iters);
  } else {
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      int begin = static_cast<int>(static_cast<std::int64_t>(iters) * w / workers);
      int end = static_cast<int>(static_cast<std::int64_t>(iters) * (w + 1) / workers);
      threads.emplace_back([&, w, begin, end] {
        try {
          run_range(begin, end);
        } catch (...) {
          errors[static_cast<std::size_t>(w)] = std::current_exception();
        }
      });
    }
    for (auto& t : threads) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  return res;
}

std::size_t BootstrapResults::metric_index(std::string_view name) const {
  for (std::size_t i = 0; i < metric_names_.size(); ++i)
    if (metric_names_[i] == name) return i;
  throw AuditError("unknown metric '" + std::string(name) + "'");
}

std::size_t BootstrapResults::method_index(std::string_view name) const {
  for (std::size_t i = 0; i < method_names_.size(); ++i)
    if (method_names_[i] == name) return i;
  throw AuditError("unknown method '" + std::string(name) + "'");
}

MetricEstimate BootstrapResults::estimate(std::string_view metric,
                                          std::string_view method) const {
  std::size_t k = metric_index(metric);
  std::size_t m = method_index(method);
  // An iteration undefined for any method is dropped for all, so CIs of the
  // same metric stay comparable across methods.
  std::vector<double> draws(static_cast<std::size_t>(iterations_));
  for (int it = 0; it < iterations_; ++it) {
    double v = draws_[k][m][static_cast<std::size_t>(it)];
    for (std::size_t mm = 0; mm < method_names_.size(); ++mm)
      if (std::isnan(draws_[k][mm][static_cast<std::size_t>(it)]))
        v = std::numeric_limits<double>::quiet_NaN();
    draws[static_cast<std::size_t>(it)] = v;
  }
  return summarize_bootstrap(points_[k][m], draws, iterations_);
}

MetricEstimate BootstrapResults::difference(std::string_view metric, std::string_view method_a,
                                            std::string_view method_b) const {
  std::size_t k = metric_index(metric);
  std::size_t a = method_index(method_a);
  std::size_t b = method_index(method_b);
  std::vector<double> draws(static_cast<std::size_t>(iterations_));
  for (int it = 0; it < iterations_; ++it) {
    double va = draws_[k][a][static_cast<std::size_t>(it)];
    double vb = draws_[k][b][static_cast<std::size_t>(it)];
    draws[static_cast<std::size_t>(it)] = va - vb;  // NaN propagates as skip
  }
  return summarize_bootstrap(points_[k][a] - points_[k][b], draws, iterations_);
}

std::vector<std::pair<std::string, MetricEstimate>> bootstrap_metric(
    const PairedPredictions& paired, const ScalarMetric& metric, const ResamplePlan& plan,
    int n_workers) {
  auto res = run_bootstrap(paired, {metric}, plan, n_workers);
  std::vector<std::pair<std::string, MetricEstimate>> out;
  for (const auto& method : res.method_names())
    out.emplace_back(method, res.estimate(metric.name, method));
  return out;
}

MetricEstimate bootstrap_difference(const PairedPredictions& paired, const ScalarMetric& metric,
                                    std::string_view method_a, std::string_view method_b,
                                    const ResamplePlan& plan, int n_workers) {
  auto res = run_bootstrap(paired, {metric}, plan, n_workers);
  return res.difference(metric.name, method_a, method_b);
}

}  // namespace fairaudit
