#include "fairaudit/posthoc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "fairaudit/error.hpp"
#include "fairaudit/numeric.hpp"
#include "fairaudit/ranking.hpp"

namespace fairaudit {

namespace {

void check_grid(double lo, double hi, double step) {
  if (!(lo < hi) || !(step > 0.0)) throw AuditError("malformed search grid");
}

// lo + i * step for i = 0..round((hi-lo)/step); the last point is clamped
// onto hi so accumulated float error cannot drop it.
std::vector<double> grid_points(double lo, double hi, double step) {
  check_grid(lo, hi, step);
  auto steps = static_cast<std::int64_t>(std::llround((hi - lo) / step));
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(steps) + 1);
  for (std::int64_t i = 0; i <= steps; ++i) out.push_back(lo + static_cast<double>(i) * step);
  out.back() = hi;
  return out;
}

}  // namespace

TemperatureFit fit_temperature(const PredictionSet& set, double grid_lo, double grid_hi,
                               double step) {
  if (set.empty()) throw AuditError("temperature fit needs a non-empty set");
  std::vector<double> z;
  std::vector<std::uint8_t> y;
  z.reserve(set.size());
  y.reserve(set.size());
  for (const auto& r : set.records()) {
    z.push_back(logit(r.p));
    y.push_back(static_cast<std::uint8_t>(r.y));
  }

  auto mean_nll = [&](double t) {
    double acc = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      double a = z[i] / t;
      // -log sigmoid(a) = log1pexp(-a); -log(1-sigmoid(a)) = log1pexp(a)
      acc += y[i] ? log1pexp(-a) : log1pexp(a);
    }
    return acc / static_cast<double>(z.size());
  };

  TemperatureFit fit;
  fit.grid_step = step;
  bool first = true;
  for (double t : grid_points(grid_lo, grid_hi, step)) {
    double nll = mean_nll(t);
    // Exact ties resolve toward the candidate nearest 1.0: equally good
    // fits should not suggest rescaling.
    bool better = first || nll < fit.nll ||
                  (nll == fit.nll && std::abs(t - 1.0) < std::abs(fit.t_star - 1.0));
    if (better) {
      fit.t_star = t;
      fit.nll = nll;
      first = false;
    }
  }
  return fit;
}

PredictionSet apply_temperature(const PredictionSet& set, double t) {
  if (!(t > 0.0)) throw AuditError("temperature must be positive");
  std::vector<PredictionRecord> records = set.records();
  for (auto& r : records) r.p = sigmoid(logit(r.p) / t);
  return PredictionSet(set.name(), std::move(records));
}

ThresholdTable optimize_thresholds(const PredictionSet& validation,
                                   std::span<const std::string> identities,
                                   const ThresholdGrid& grid) {
  if (identities.empty()) throw AuditError("threshold search needs at least one identity");
  std::vector<double> bg_p;
  std::vector<std::uint8_t> bg_y;
  for (const auto& r : validation.records()) {
    if (r.identity != kBackground) continue;
    bg_p.push_back(r.p);
    bg_y.push_back(static_cast<std::uint8_t>(r.y));
  }
  if (bg_p.empty())
    throw AuditError("set '" + validation.name() + "' has no background records");

  ThresholdTable table;
  table.background_error = error_rate(bg_p, bg_y, grid.background_tau);

  auto taus = grid_points(grid.lo, grid.hi, grid.step);
  for (const auto& identity : identities) {
    std::vector<double> p;
    std::vector<std::uint8_t> y;
    for (const auto& r : validation.records()) {
      if (r.identity != identity) continue;
      p.push_back(r.p);
      y.push_back(static_cast<std::uint8_t>(r.y));
    }
    if (p.empty()) throw AuditError("identity '" + identity + "' has no records");

    ThresholdEntry best;
    bool first = true;
    for (double tau : taus) {
      double gap = std::abs(error_rate(p, y, tau) - table.background_error);
      // Ties prefer the tau closest to the default 0.5, then the smaller
      // tau, so optimization never suggests movement without evidence.
      bool better =
          first || gap < best.residual_gap ||
          (gap == best.residual_gap &&
           (std::abs(tau - 0.5) < std::abs(best.tau_star - 0.5) ||
            (std::abs(tau - 0.5) == std::abs(best.tau_star - 0.5) && tau < best.tau_star)));
      if (better) {
        best.tau_star = tau;
        best.residual_gap = gap;
        first = false;
      }
    }
    table.by_identity[identity] = best;
  }
  return table;
}

std::vector<RiskCoveragePoint> risk_coverage_curve(const PredictionSet& set,
                                                   std::span<const double> coverage_grid,
                                                   double threshold,
                                                   std::span<const std::string> identities,
                                                   std::int64_t min_retained) {
  if (set.empty()) throw AuditError("risk-coverage curve needs a non-empty set");
  if (coverage_grid.empty() || coverage_grid.front() != 1.0)
    throw AuditError("coverage grid must start at 1.0");
  for (std::size_t i = 0; i < coverage_grid.size(); ++i) {
    if (coverage_grid[i] <= 0.0 || coverage_grid[i] > 1.0)
      throw AuditError("coverage values must lie in (0, 1]");
    if (i > 0 && coverage_grid[i] >= coverage_grid[i - 1])
      throw AuditError("coverage grid must be strictly descending");
  }

  const auto& records = set.records();
  const auto n = static_cast<std::int64_t>(records.size());

  // Deferral order: confidence descending, id ascending. A fixed total
  // order makes retained sets nested across the grid and reproducible.
  std::vector<std::int32_t> order(records.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::int32_t a, std::int32_t b) {
    double ca = confidence(records[a].p), cb = confidence(records[b].p);
    if (ca != cb) return ca > cb;
    return records[a].id < records[b].id;
  });

  // identity code per record: 0 background, 1.. identities, -1 other.
  std::vector<std::int32_t> code(records.size(), -1);
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].identity == kBackground) {
      code[i] = 0;
    } else {
      for (std::size_t g = 0; g < identities.size(); ++g)
        if (records[i].identity == identities[g]) code[i] = static_cast<std::int32_t>(g) + 1;
    }
  }

  struct Tally {
    std::int64_t n = 0;
    std::int64_t wrong = 0;
  };
  std::vector<Tally> tally(identities.size() + 1);
  std::int64_t retained = 0, retained_wrong = 0;

  // Walk the grid from the smallest retained prefix upward; prefixes are
  // nested, so each record is added exactly once.
  std::vector<std::size_t> grid_order(coverage_grid.size());
  std::iota(grid_order.begin(), grid_order.end(), 0);
  std::reverse(grid_order.begin(), grid_order.end());

  std::vector<RiskCoveragePoint> curve(coverage_grid.size());
  std::int64_t taken = 0;
  for (std::size_t gi : grid_order) {
    auto want = static_cast<std::int64_t>(
        std::ceil(coverage_grid[gi] * static_cast<double>(n) - 1e-9));
    if (want < 1) want = 1;
    if (want > n) want = n;
    for (; taken < want; ++taken) {
      const auto& r = records[static_cast<std::size_t>(order[static_cast<std::size_t>(taken)])];
      bool wrong = binarize(r.p, threshold) != r.y;
      ++retained;
      retained_wrong += wrong;
      auto c = code[static_cast<std::size_t>(order[static_cast<std::size_t>(taken)])];
      if (c >= 0) {
        tally[static_cast<std::size_t>(c)].n += 1;
        tally[static_cast<std::size_t>(c)].wrong += wrong;
      }
    }
    auto& point = curve[gi];
    point.coverage = coverage_grid[gi];
    point.risk = static_cast<double>(retained_wrong) / static_cast<double>(retained);
    const auto& bg = tally[0];
    for (std::size_t g = 0; g < identities.size(); ++g) {
      const auto& sub = tally[g + 1];
      if (sub.n < min_retained || bg.n < min_retained) {
        point.per_identity_gap[identities[g]] = std::nullopt;
      } else {
        point.per_identity_gap[identities[g]] =
            static_cast<double>(sub.wrong) / static_cast<double>(sub.n) -
            static_cast<double>(bg.wrong) / static_cast<double>(bg.n);
      }
    }
  }
  return curve;
}

std::string risk_coverage_csv(const std::vector<RiskCoveragePoint>& curve,
                              std::span<const std::string> identities) {
  std::ostringstream out;
  out << "coverage,risk";
  for (const auto& id : identities) out << ",gap_" << id;
  out << "\n";
  for (const auto& point : curve) {
    out << format_double(point.coverage) << ',' << format_double(point.risk);
    for (const auto& id : identities) {
      out << ',';
      auto it = point.per_identity_gap.find(id);
      if (it != point.per_identity_gap.end() && it->second) out << format_double(*it->second);
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace fairaudit
