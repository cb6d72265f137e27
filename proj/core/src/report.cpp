#include "fairaudit/report.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include <nlohmann/json.hpp>

#include "fairaudit/bootstrap.hpp"
#include "fairaudit/calibration.hpp"
#include "fairaudit/error.hpp"
#include "fairaudit/numeric.hpp"
#include "fairaudit/posthoc.hpp"
#include "fairaudit/ranking.hpp"
#include "fairaudit/rng.hpp"
#include "fairaudit/tail_probe.hpp"
#include "report_impl.hpp"

namespace fairaudit {

using nlohmann::json;

AuditReport::AuditReport() : impl_(std::make_unique<Impl>()) {}
AuditReport::AuditReport(const AuditReport& other) : impl_(std::make_unique<Impl>(*other.impl_)) {}
AuditReport::AuditReport(AuditReport&&) noexcept = default;
AuditReport& AuditReport::operator=(const AuditReport& other) {
  impl_ = std::make_unique<Impl>(*other.impl_);
  return *this;
}
AuditReport& AuditReport::operator=(AuditReport&&) noexcept = default;
AuditReport::~AuditReport() = default;

std::string AuditReport::to_json() const { return impl_->doc.dump(2) + "\n"; }

AuditReport AuditReport::from_json(const std::string& text) {
  AuditReport report;
  try {
    report.impl_->doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw AuditError(std::string("bad report json: ") + e.what());
  }
  if (!report.impl_->doc.is_object() || !report.impl_->doc.contains("meta"))
    throw AuditError("not an audit report: missing meta section");
  return report;
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr int kMaxWorkers = 64;

json estimate_json(const MetricEstimate& e) {
  json out;
  out["point"] = e.point;
  out["lo"] = e.ci_lo;
  out["hi"] = e.ci_hi;
  out["significant"] = e.significant;
  out["fragile"] = e.fragile;
  out["used"] = e.n_iterations_used;
  out["skipped"] = e.n_iterations_skipped;
  return out;
}

// Record codes: 0 background, 1..G qualifying identities, G+1 everything
// else (identities below min_n still count toward aggregate metrics).
struct CodedRecords {
  std::vector<std::int32_t> code;
  std::vector<std::uint8_t> y;
  std::size_t n_codes = 0;  // G + 2
};

// Per-method columns plus presorted index lists; sorting happens once, so
// each bootstrap iteration only walks them with multiplicities.
struct MethodColumns {
  std::vector<double> p;
  std::vector<std::uint8_t> wrong;     // at the deployment threshold
  std::vector<std::int32_t> bin;       // calibration bin
  std::vector<std::int32_t> order_all; // all records by (p, index)
  std::vector<std::vector<std::int32_t>> order_sub;   // per identity
  std::vector<std::vector<std::int32_t>> order_bpsn;  // per identity
  std::vector<std::vector<std::int32_t>> order_bnsp;  // per identity; empty if not reported
};

void sort_by_score(std::vector<std::int32_t>& idx, const std::vector<double>& p) {
  std::sort(idx.begin(), idx.end(), [&](std::int32_t a, std::int32_t b) {
    if (p[static_cast<std::size_t>(a)] != p[static_cast<std::size_t>(b)])
      return p[static_cast<std::size_t>(a)] < p[static_cast<std::size_t>(b)];
    return a < b;
  });
}

// Mann-Whitney AUC over a presorted index list under resample
// multiplicities. All intermediate sums are integer halves below 2^53, so
// the result is exact and matches the pairwise definition bit for bit.
double walk_auc(const std::vector<std::int32_t>& order, const std::vector<double>& p,
                const std::vector<std::uint8_t>& y, const std::vector<std::int32_t>& mult) {
  double pairs = 0.0, cum_neg = 0.0, total_pos = 0.0, total_neg = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    double pv = p[static_cast<std::size_t>(order[i])];
    double block_pos = 0.0, block_neg = 0.0;
    std::size_t j = i;
    for (; j < order.size() && p[static_cast<std::size_t>(order[j])] == pv; ++j) {
      auto r = static_cast<std::size_t>(order[j]);
      auto m = static_cast<double>(mult[r]);
      if (m == 0.0) continue;
      if (y[r])
        block_pos += m;
      else
        block_neg += m;
    }
    pairs += block_pos * (cum_neg + 0.5 * block_neg);
    cum_neg += block_neg;
    total_pos += block_pos;
    total_neg += block_neg;
    i = j;
  }
  if (total_pos == 0.0 || total_neg == 0.0) return kNaN;
  return pairs / (total_pos * total_neg);
}

// Weighted tallies per code for error rates and calibration bins.
struct CodeTallies {
  int n_bins = 15;
  std::size_t n_codes = 0;
  std::vector<double> total, wrong;          // per code
  std::vector<double> bin_cnt, bin_p, bin_y; // per code * bin

  void reset(std::size_t codes, int bins) {
    n_codes = codes;
    n_bins = bins;
    total.assign(codes, 0.0);
    wrong.assign(codes, 0.0);
    bin_cnt.assign(codes * static_cast<std::size_t>(bins), 0.0);
    bin_p.assign(codes * static_cast<std::size_t>(bins), 0.0);
    bin_y.assign(codes * static_cast<std::size_t>(bins), 0.0);
  }

  double error(std::size_t code) const {
    if (total[code] == 0.0) return kNaN;
    return wrong[code] / total[code];
  }
  double error_all() const {
    double t = 0.0, w = 0.0;
    for (std::size_t c = 0; c < n_codes; ++c) {
      t += total[c];
      w += wrong[c];
    }
    return t == 0.0 ? kNaN : w / t;
  }
  double ece_of(std::size_t code) const {
    double t = total[code];
    if (t == 0.0) return kNaN;
    double acc = 0.0;
    for (int b = 0; b < n_bins; ++b) {
      auto k = code * static_cast<std::size_t>(n_bins) + static_cast<std::size_t>(b);
      if (bin_cnt[k] == 0.0) continue;
      double dev = bin_y[k] / bin_cnt[k] - bin_p[k] / bin_cnt[k];
      acc += (bin_cnt[k] / t) * std::abs(dev);
    }
    return acc;
  }
  double ece_all() const {
    double t = 0.0;
    for (std::size_t c = 0; c < n_codes; ++c) t += total[c];
    if (t == 0.0) return kNaN;
    double acc = 0.0;
    for (int b = 0; b < n_bins; ++b) {
      double cnt = 0.0, sp = 0.0, sy = 0.0;
      for (std::size_t c = 0; c < n_codes; ++c) {
        auto k = c * static_cast<std::size_t>(n_bins) + static_cast<std::size_t>(b);
        cnt += bin_cnt[k];
        sp += bin_p[k];
        sy += bin_y[k];
      }
      if (cnt == 0.0) continue;
      acc += (cnt / t) * std::abs(sy / cnt - sp / cnt);
    }
    return acc;
  }
};

// Metric slot layout: 3 aggregate slots, then 6 per identity.
constexpr std::size_t kSlotAuc = 0, kSlotEce = 1, kSlotError = 2, kSlotBgEce = 3,
                      kAggregateSlots = 4;
constexpr std::size_t kPerIdentitySlots = 6;
constexpr std::size_t kSubAuc = 0, kBpsn = 1, kBnsp = 2, kErrGap = 3, kSubEce = 4, kCalGap = 5;

std::size_t slot_of(std::size_t identity_idx, std::size_t which) {
  return kAggregateSlots + identity_idx * kPerIdentitySlots + which;
}

}  // namespace

AuditReport run_audit(const PairedPredictions& paired, const AuditSettings& settings) {
  if (paired.n_methods() < 1) throw AuditError("audit needs at least one method");
  if (paired.n_records() < 1) throw AuditError("audit needs at least one record");
  if (settings.iterations < 1) throw AuditError("iterations must be positive");
  if (settings.bins < 1) throw AuditError("bins must be positive");
  if (settings.min_n < 1) throw AuditError("min_n must be positive");

  const auto& base = paired.sets().front();
  const std::size_t n = base.size();
  const std::size_t n_methods = paired.n_methods();
  GroupCensus cens = census(base);
  auto identities = qualifying_identities(cens, settings.min_n);
  if (identities.empty())
    throw AuditError("no identity group reaches min_n=" + std::to_string(settings.min_n));
  auto excluded = excluded_identities(cens, settings.min_n);
  const std::size_t n_ident = identities.size();

  // Shared coding of records.
  CodedRecords coded;
  coded.n_codes = n_ident + 2;
  coded.code.resize(n);
  coded.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = base.records()[i];
    coded.y[i] = static_cast<std::uint8_t>(r.y);
    if (r.identity == kBackground) {
      coded.code[i] = 0;
    } else {
      auto it = std::lower_bound(identities.begin(), identities.end(), r.identity);
      if (it != identities.end() && *it == r.identity)
        coded.code[i] = static_cast<std::int32_t>(it - identities.begin()) + 1;
      else
        coded.code[i] = static_cast<std::int32_t>(n_ident) + 1;
    }
  }

  std::vector<bool> bnsp_reported(n_ident);
  for (std::size_t g = 0; g < n_ident; ++g)
    bnsp_reported[g] = cens.at(identities[g]).positives >= settings.bnsp_min_positives;

  // Per-method columns and presorted orders.
  std::vector<MethodColumns> cols(n_methods);
  for (std::size_t m = 0; m < n_methods; ++m) {
    const auto& set = paired.sets()[m];
    auto& c = cols[m];
    c.p.resize(n);
    c.wrong.resize(n);
    c.bin.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      double p = set.records()[i].p;
      c.p[i] = p;
      c.wrong[i] = static_cast<std::uint8_t>(binarize(p, settings.threshold) !=
                                             static_cast<int>(coded.y[i]));
      c.bin[i] = calibration_bin(p, settings.bins);
    }
    c.order_all.resize(n);
    std::iota(c.order_all.begin(), c.order_all.end(), 0);
    sort_by_score(c.order_all, c.p);
    c.order_sub.resize(n_ident);
    c.order_bpsn.resize(n_ident);
    c.order_bnsp.resize(n_ident);
    for (std::size_t g = 0; g < n_ident; ++g) {
      auto gc = static_cast<std::int32_t>(g) + 1;
      for (std::size_t i = 0; i < n; ++i) {
        bool in_sub = coded.code[i] == gc;
        bool in_bg = coded.code[i] == 0;
        if (in_sub) c.order_sub[g].push_back(static_cast<std::int32_t>(i));
        if ((in_sub && coded.y[i] == 0) || (in_bg && coded.y[i] == 1))
          c.order_bpsn[g].push_back(static_cast<std::int32_t>(i));
        if (bnsp_reported[g] && ((in_sub && coded.y[i] == 1) || (in_bg && coded.y[i] == 0)))
          c.order_bnsp[g].push_back(static_cast<std::int32_t>(i));
      }
      sort_by_score(c.order_sub[g], c.p);
      sort_by_score(c.order_bpsn[g], c.p);
      sort_by_score(c.order_bnsp[g], c.p);
    }
  }

  const std::size_t n_slots = kAggregateSlots + n_ident * kPerIdentitySlots;

  // draws[slot][method][iteration]; NaN marks an undefined iteration.
  std::vector<std::vector<std::vector<double>>> draws(
      n_slots, std::vector<std::vector<double>>(
                   n_methods, std::vector<double>(static_cast<std::size_t>(settings.iterations),
                                                  kNaN)));
  std::vector<std::vector<double>> points(n_slots, std::vector<double>(n_methods, kNaN));

  auto evaluate = [&](const std::vector<std::int32_t>& mult, CodeTallies& tallies,
                      std::size_t m, auto&& sink) {
    const auto& c = cols[m];
    tallies.reset(coded.n_codes, settings.bins);
    for (std::size_t i = 0; i < n; ++i) {
      auto mm = static_cast<double>(mult[i]);
      if (mm == 0.0) continue;
      auto code = static_cast<std::size_t>(coded.code[i]);
      tallies.total[code] += mm;
      tallies.wrong[code] += mm * static_cast<double>(c.wrong[i]);
      auto k = code * static_cast<std::size_t>(settings.bins) +
               static_cast<std::size_t>(c.bin[i]);
      tallies.bin_cnt[k] += mm;
      tallies.bin_p[k] += mm * c.p[i];
      tallies.bin_y[k] += mm * static_cast<double>(coded.y[i]);
    }

    sink(kSlotAuc, walk_auc(c.order_all, c.p, coded.y, mult));
    sink(kSlotEce, tallies.ece_all());
    sink(kSlotError, tallies.error_all());
    double bg_err = tallies.error(0);
    double bg_ece = tallies.ece_of(0);
    sink(kSlotBgEce, bg_ece);
    for (std::size_t g = 0; g < n_ident; ++g) {
      sink(slot_of(g, kSubAuc), walk_auc(c.order_sub[g], c.p, coded.y, mult));
      sink(slot_of(g, kBpsn), walk_auc(c.order_bpsn[g], c.p, coded.y, mult));
      if (bnsp_reported[g])
        sink(slot_of(g, kBnsp), walk_auc(c.order_bnsp[g], c.p, coded.y, mult));
      double sub_err = tallies.error(g + 1);
      double sub_ece = tallies.ece_of(g + 1);
      sink(slot_of(g, kErrGap), sub_err - bg_err);
      sink(slot_of(g, kSubEce), sub_ece);
      sink(slot_of(g, kCalGap), sub_ece - bg_ece);
    }
  };

  // Full-data points: multiplicity one everywhere.
  {
    std::vector<std::int32_t> ones(n, 1);
    CodeTallies tallies;
    for (std::size_t m = 0; m < n_methods; ++m)
      evaluate(ones, tallies, m, [&](std::size_t slot, double v) { points[slot][m] = v; });
    // Background ECE (kSlotBgEce) may be absent when no background records exist.
    for (std::size_t slot = 0; slot < kSlotBgEce; ++slot)
      for (std::size_t m = 0; m < n_methods; ++m)
        if (std::isnan(points[slot][m]))
          throw AuditError("aggregate metric undefined on the full data");
  }

  ResamplePlan plan{settings.seed, settings.iterations};
  auto run_range = [&](int begin, int end) {
    std::vector<std::int32_t> mult(n, 0);
    CodeTallies tallies;
    for (int it = begin; it < end; ++it) {
      auto idx = resample_indices(plan, it, n);
      std::fill(mult.begin(), mult.end(), 0);
      for (auto i : idx) mult[i] += 1;
      for (std::size_t m = 0; m < n_methods; ++m)
        evaluate(mult, tallies, m, [&](std::size_t slot, double v) {
          draws[slot][m][static_cast<std::size_t>(it)] = v;
        });
    }
  };

  int workers = std::clamp(settings.n_workers, 1, kMaxWorkers);
  if (workers > settings.iterations) workers = settings.iterations;
  if (workers <= 1) {
    run_range(0, settings.iterations);
  } else {
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      int begin = static_cast<int>(static_cast<std::int64_t>(settings.iterations) * w / workers);
      int end =
          static_cast<int>(static_cast<std::int64_t>(settings.iterations) * (w + 1) / workers);
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

  // An iteration undefined for any method is dropped for every method of
  // that slot; differences drop only their own pair.
  auto slot_estimate = [&](std::size_t slot, std::size_t m) {
    std::vector<double> d(static_cast<std::size_t>(settings.iterations));
    for (int it = 0; it < settings.iterations; ++it) {
      double v = draws[slot][m][static_cast<std::size_t>(it)];
      for (std::size_t mm = 0; mm < n_methods; ++mm)
        if (std::isnan(draws[slot][mm][static_cast<std::size_t>(it)])) v = kNaN;
      d[static_cast<std::size_t>(it)] = v;
    }
    return summarize_bootstrap(points[slot][m], d, settings.iterations);
  };
  auto slot_difference = [&](std::size_t slot, std::size_t m) {
    std::vector<double> d(static_cast<std::size_t>(settings.iterations));
    for (int it = 0; it < settings.iterations; ++it)
      d[static_cast<std::size_t>(it)] = draws[slot][m][static_cast<std::size_t>(it)] -
                                        draws[slot][0][static_cast<std::size_t>(it)];
    return summarize_bootstrap(points[slot][m] - points[slot][0], d, settings.iterations);
  };

  // Assemble the document.
  json doc;

  json meta;
  meta["baseline"] = base.name();
  meta["bins"] = settings.bins;
  meta["bnsp_min_positives"] = settings.bnsp_min_positives;
  meta["coverage_grid"] = settings.coverage_grid;
  meta["iterations"] = settings.iterations;
  meta["methods"] = paired.methods();
  meta["min_n"] = settings.min_n;
  meta["n_records"] = n;
  meta["rc_min_retained"] = settings.rc_min_retained;
  meta["seed"] = settings.seed;
  meta["temperature_grid"] = {{"lo", settings.temp_lo}, {"hi", settings.temp_hi},
                              {"step", settings.temp_step}};
  meta["threshold"] = settings.threshold;
  meta["threshold_grid"] = {{"lo", settings.threshold_grid.lo},
                            {"hi", settings.threshold_grid.hi},
                            {"step", settings.threshold_grid.step},
                            {"background_tau", settings.threshold_grid.background_tau}};
  meta["tool"] = "fairaudit";
  meta["top_k_errors"] = settings.top_k_errors;
  if (!settings.input_digests.empty()) {
    json digests;
    for (const auto& [method, digest] : settings.input_digests) digests[method] = digest;
    meta["input_digests"] = digests;
  }
  doc["meta"] = meta;

  json census_json;
  for (const auto& [identity, counts] : cens.counts) {
    census_json[identity] = {{"total", counts.total},
                             {"positives", counts.positives},
                             {"negatives", counts.negatives}};
  }
  doc["census"] = census_json;
  doc["identities"] = identities;
  doc["excluded_identities"] = excluded;

  json methods_json;
  json summary_json;
  for (std::size_t m = 0; m < n_methods; ++m) {
    const auto& set = paired.sets()[m];
    json mj;

    mj["aggregate"] = {{"auc", estimate_json(slot_estimate(kSlotAuc, m))},
                       {"ece", estimate_json(slot_estimate(kSlotEce, m))},
                       {"error_rate", estimate_json(slot_estimate(kSlotError, m))}};
    if (!std::isnan(points[kSlotBgEce][m]))
      mj["background_ece"] = estimate_json(slot_estimate(kSlotBgEce, m));

    json ranking_json, calibration_json;
    double bpsn_sum = 0.0;
    int n_sig_gaps = 0;
    for (std::size_t g = 0; g < n_ident; ++g) {
      json rj;
      rj["subgroup_auc"] = estimate_json(slot_estimate(slot_of(g, kSubAuc), m));
      auto bpsn = slot_estimate(slot_of(g, kBpsn), m);
      bpsn_sum += bpsn.point;
      rj["bpsn_auc"] = estimate_json(bpsn);
      if (bnsp_reported[g])
        rj["bnsp_auc"] = estimate_json(slot_estimate(slot_of(g, kBnsp), m));
      rj["error_gap"] = estimate_json(slot_estimate(slot_of(g, kErrGap), m));
      ranking_json[identities[g]] = rj;

      json cj;
      cj["subgroup_ece"] = estimate_json(slot_estimate(slot_of(g, kSubEce), m));
      auto gap = slot_estimate(slot_of(g, kCalGap), m);
      n_sig_gaps += gap.significant ? 1 : 0;
      cj["gap"] = estimate_json(gap);
      calibration_json[identities[g]] = cj;
    }
    mj["ranking"] = ranking_json;
    mj["calibration"] = calibration_json;

    // Post-hoc interventions and probes on the full data.
    auto temp = fit_temperature(set, settings.temp_lo, settings.temp_hi, settings.temp_step);
    auto rescaled = apply_temperature(set, temp.t_star);
    std::vector<double> p_all(n), p_scaled(n);
    for (std::size_t i = 0; i < n; ++i) {
      p_all[i] = set.records()[i].p;
      p_scaled[i] = rescaled.records()[i].p;
    }
    double ece_before = ece(p_all, coded.y, settings.bins);
    double ece_after = ece(p_scaled, coded.y, settings.bins);
    mj["temperature"] = {{"t_star", temp.t_star},
                         {"nll", temp.nll},
                         {"ece_before", ece_before},
                         {"ece_after", ece_after}};

    auto thresholds = optimize_thresholds(set, identities, settings.threshold_grid);
    json thr_json;
    thr_json["background_error"] = thresholds.background_error;
    json thr_ids;
    for (std::size_t g = 0; g < n_ident; ++g) {
      const auto& entry = thresholds.by_identity.at(identities[g]);
      thr_ids[identities[g]] = {{"tau_star", entry.tau_star},
                                {"residual_gap", entry.residual_gap},
                                {"gap_at_default", points[slot_of(g, kErrGap)][m]}};
    }
    thr_json["by_identity"] = thr_ids;
    mj["thresholds"] = thr_json;

    auto curve = risk_coverage_curve(set, settings.coverage_grid, settings.threshold,
                                     identities, settings.rc_min_retained);
    json curve_json = json::array();
    for (const auto& point : curve) {
      json pj;
      pj["coverage"] = point.coverage;
      pj["risk"] = point.risk;
      json gaps;
      for (const auto& [identity, gap] : point.per_identity_gap) {
        if (gap)
          gaps[identity] = *gap;
        else
          gaps[identity] = nullptr;
      }
      pj["gaps"] = gaps;
      curve_json.push_back(pj);
    }
    mj["risk_coverage"] = curve_json;

    json tail_json;
    double max_frac_99 = 0.0;
    for (const auto& identity : identities) {
      auto stats = tail_stats(paired, set.name(), base.name(), identity);
      json tj;
      tj["n_benign"] = stats.n_benign;
      tj["mean_p"] = stats.mean_p;
      tj["frac_above_90"] = stats.frac_above_90;
      tj["frac_above_99"] = stats.frac_above_99;
      if (m == 0)
        tj["mean_delta"] = nullptr;  // baseline has no reference to move against
      else
        tj["mean_delta"] = stats.mean_delta;
      max_frac_99 = std::max(max_frac_99, stats.frac_above_99);
      tail_json[identity] = tj;
    }
    mj["tail"] = tail_json;

    json reliability_json;
    {
      std::vector<double> bp;
      std::vector<std::uint8_t> by;
      auto bins_for = [&](std::int32_t code_want) {
        bp.clear();
        by.clear();
        for (std::size_t i = 0; i < n; ++i) {
          if (coded.code[i] != code_want) continue;
          bp.push_back(cols[m].p[i]);
          by.push_back(coded.y[i]);
        }
        return reliability_bins(bp, by, settings.bins);
      };
      auto to_json = [](const ReliabilityBins& rb) {
        json rows = json::array();
        for (int b = 0; b < rb.n_bins; ++b) {
          const auto& bin = rb.bins[static_cast<std::size_t>(b)];
          rows.push_back({{"bin_lo", rb.edge(b)},
                          {"bin_hi", rb.edge(b + 1)},
                          {"count", bin.count},
                          {"mean_p", bin.mean_p},
                          {"frac_positive", bin.frac_positive}});
        }
        return rows;
      };
      reliability_json[kBackground] = to_json(bins_for(0));
      for (std::size_t g = 0; g < n_ident; ++g)
        reliability_json[identities[g]] = to_json(bins_for(static_cast<std::int32_t>(g) + 1));
    }
    mj["reliability"] = reliability_json;

    methods_json[set.name()] = mj;

    double risk_full = curve.front().risk;
    double risk_min = curve.back().risk;
    json sj;
    sj["mean_bpsn_auc"] = bpsn_sum / static_cast<double>(n_ident);
    sj["n_significant_calibration_gaps"] = n_sig_gaps;
    sj["max_tail_frac_above_99"] = max_frac_99;
    sj["t_star"] = temp.t_star;
    if (risk_full > 0.0)
      sj["risk_ratio_min_coverage"] = risk_min / risk_full;
    else
      sj["risk_ratio_min_coverage"] = nullptr;
    summary_json[set.name()] = sj;
  }
  doc["methods"] = methods_json;
  doc["summary"] = summary_json;

  if (n_methods > 1) {
    json diff_json;
    for (std::size_t m = 1; m < n_methods; ++m) {
      json dj;
      dj["aggregate"] = {{"auc", estimate_json(slot_difference(kSlotAuc, m))},
                         {"ece", estimate_json(slot_difference(kSlotEce, m))},
                         {"error_rate", estimate_json(slot_difference(kSlotError, m))}};
      json per_ident;
      for (std::size_t g = 0; g < n_ident; ++g) {
        json gj;
        gj["subgroup_auc"] = estimate_json(slot_difference(slot_of(g, kSubAuc), m));
        gj["bpsn_auc"] = estimate_json(slot_difference(slot_of(g, kBpsn), m));
        if (bnsp_reported[g])
          gj["bnsp_auc"] = estimate_json(slot_difference(slot_of(g, kBnsp), m));
        gj["error_gap"] = estimate_json(slot_difference(slot_of(g, kErrGap), m));
        gj["calib_gap"] = estimate_json(slot_difference(slot_of(g, kCalGap), m));
        per_ident[identities[g]] = gj;
      }
      dj["per_identity"] = per_ident;
      diff_json[paired.sets()[m].name()] = dj;
    }
    doc["differences"] = diff_json;
  }

  // Qualitative table: the baseline's widest error-gap identity.
  {
    std::size_t worst_g = 0;
    double worst_gap = -1.0;
    for (std::size_t g = 0; g < n_ident; ++g) {
      double gap = std::abs(points[slot_of(g, kErrGap)][0]);
      if (gap > worst_gap) {
        worst_gap = gap;
        worst_g = g;
      }
    }
    auto errors = top_confident_errors(base, identities[worst_g], settings.top_k_errors,
                                       settings.threshold);
    json rows = json::array();
    for (const auto& err : errors) {
      // Paired sets are positionally aligned; locate the row once in the
      // baseline and reuse the position for every method.
      std::size_t pos = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (base.records()[i].id == err.id) {
          pos = i;
          break;
        }
      }
      json row;
      row["id"] = err.id;
      json per_method;
      for (std::size_t m = 0; m < n_methods; ++m)
        per_method[paired.sets()[m].name()] = paired.sets()[m].records()[pos].p;
      row["p"] = per_method;
      if (err.text) row["text"] = *err.text;
      rows.push_back(row);
    }
    doc["top_confident_errors"] = {{"identity", identities[worst_g]}, {"rows", rows}};
  }

  AuditReport report;
  report.impl().doc = std::move(doc);
  return report;
}

}  // namespace fairaudit
