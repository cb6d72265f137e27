#include "fairaudit/scenarios.hpp"

#include <algorithm>
#include <cmath>

#include "fairaudit/error.hpp"
#include "fairaudit/numeric.hpp"
#include "fairaudit/rng.hpp"

namespace fairaudit {

ScoreModel ScoreModel::calibrated() { return {}; }

ScoreModel ScoreModel::overconfident_subgroup(double gap_strength) {
  ScoreModel m;
  m.kind = Kind::OverconfidentSubgroup;
  m.gap_strength = gap_strength;
  return m;
}

ScoreModel ScoreModel::bimodal_tail(double tail_frac, double tail_loc, double bulk_strength) {
  ScoreModel m;
  m.kind = Kind::BimodalTail;
  m.tail_frac = tail_frac;
  m.tail_loc = tail_loc;
  m.bulk_strength = bulk_strength;
  return m;
}

ScoreModel ScoreModel::uniform_miscalibrated(double shift, double decouple) {
  ScoreModel m;
  m.kind = Kind::UniformMiscalibrated;
  m.shift = shift;
  m.decouple = decouple;
  return m;
}

ScoreModel ScoreModel::noise_band(double band_lo, double band_hi, double tail_frac,
                                  double tail_loc) {
  ScoreModel m;
  m.kind = Kind::NoiseBand;
  m.band_lo = band_lo;
  m.band_hi = band_hi;
  m.tail_frac = tail_frac;
  m.tail_loc = tail_loc;
  return m;
}

namespace {

void validate_model(const ScoreModel& m, const std::string& identity) {
  auto bad = [&](const char* what) {
    throw AuditError("slice '" + identity + "': " + what);
  };
  switch (m.kind) {
    case ScoreModel::Kind::Calibrated:
      break;
    case ScoreModel::Kind::OverconfidentSubgroup:
      if (m.gap_strength <= -1.0) bad("gap_strength must exceed -1");
      break;
    case ScoreModel::Kind::BimodalTail:
      if (m.tail_frac < 0.0 || m.tail_frac > 1.0) bad("tail_frac must lie in [0,1]");
      if (m.tail_loc <= 0.0 || m.tail_loc >= 1.0) bad("tail_loc must lie in (0,1)");
      if (m.bulk_strength <= -1.0) bad("bulk_strength must exceed -1");
      break;
    case ScoreModel::Kind::UniformMiscalibrated:
      if (!std::isfinite(m.shift)) bad("shift must be finite");
      if (m.decouple < 0.0) bad("decouple must be non-negative");
      break;
    case ScoreModel::Kind::NoiseBand:
      if (!(m.band_lo >= 0.0 && m.band_lo < m.band_hi && m.band_hi <= 1.0))
        bad("band must satisfy 0 <= lo < hi <= 1");
      if (m.tail_frac < 0.0 || m.tail_frac > 1.0) bad("tail_frac must lie in [0,1]");
      if (m.tail_frac > 0.0 && (m.tail_loc <= 0.0 || m.tail_loc >= 1.0))
        bad("tail_loc must lie in (0,1)");
      break;
  }
}

// Maps the latent q to the reported p. The rng stream is per record; models
// are free to consume different draw counts.
double apply_model(const ScoreModel& m, double q, int y, CounterRng& rng) {
  switch (m.kind) {
    case ScoreModel::Kind::Calibrated:
      return q;
    case ScoreModel::Kind::OverconfidentSubgroup:
      return sigmoid(logit(q) * (1.0 + m.gap_strength));
    case ScoreModel::Kind::BimodalTail: {
      // Spurious-trigger tail: a slice of benign records is scored as
      // near-certainly toxic; everything else is a sharpened bulk.
      if (y == 0 && rng.next_unit() < m.tail_frac)
        return m.tail_loc + (1.0 - m.tail_loc) * rng.next_unit();
      return sigmoid(logit(q) * (1.0 + m.bulk_strength));
    }
    case ScoreModel::Kind::UniformMiscalibrated: {
      double z = logit(q) + m.shift;
      if (m.decouple > 0.0) z += m.decouple * rng.next_gaussian();
      return sigmoid(z);
    }
    case ScoreModel::Kind::NoiseBand: {
      if (m.tail_frac > 0.0 && rng.next_unit() < m.tail_frac)
        return clip_probability(m.tail_loc + (1.0 - m.tail_loc) * rng.next_unit());
      return clip_probability(m.band_lo + (m.band_hi - m.band_lo) * rng.next_unit());
    }
  }
  throw AuditError("unreachable score model kind");
}

std::string record_id(const std::string& identity, std::int64_t i) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%06lld", static_cast<long long>(i));
  return identity + "-" + buf;
}

}  // namespace

PredictionSet generate(const ScenarioSpec& spec) {
  if (spec.slices.empty()) throw AuditError("scenario needs at least one slice");
  for (std::size_t s = 0; s < spec.slices.size(); ++s) {
    const auto& slice = spec.slices[s];
    if (slice.identity.empty()) throw AuditError("scenario slice needs an identity tag");
    if (slice.n < 0) throw AuditError("slice '" + slice.identity + "' needs n >= 0");
    if (slice.positive_rate <= 0.0 || slice.positive_rate >= 1.0)
      throw AuditError("slice '" + slice.identity + "': positive_rate must lie in (0,1)");
    if (slice.sharpness <= 0.0)
      throw AuditError("slice '" + slice.identity + "': sharpness must be positive");
    validate_model(slice.model, slice.identity);
    for (std::size_t t = 0; t < s; ++t)
      if (spec.slices[t].identity == slice.identity)
        throw AuditError("duplicate slice identity '" + slice.identity + "'");
  }

  std::vector<PredictionRecord> records;
  std::int64_t total = 0;
  for (const auto& slice : spec.slices) total += slice.n;
  if (total == 0) throw AuditError("scenario produced no records");
  records.reserve(static_cast<std::size_t>(total));

  for (std::size_t s = 0; s < spec.slices.size(); ++s) {
    const auto& slice = spec.slices[s];
    double a = slice.sharpness * slice.positive_rate;
    double b = slice.sharpness * (1.0 - slice.positive_rate);
    for (std::int64_t i = 0; i < slice.n; ++i) {
      // The latent stream never sees the score model, so specs differing
      // only in models yield identical (id, y, identity) columns.
      CounterRng latent(spec.seed, Stream::ScenarioLatent, s, static_cast<std::uint64_t>(i));
      double q = latent.next_beta(a, b);
      q = clip_probability(q);
      int y = latent.next_bernoulli(q) ? 1 : 0;

      CounterRng score(spec.seed, Stream::ScenarioScore, s, static_cast<std::uint64_t>(i));
      PredictionRecord rec;
      rec.id = record_id(slice.identity, i);
      rec.identity = slice.identity;
      rec.y = y;
      rec.p = apply_model(slice.model, q, y, score);
      records.push_back(std::move(rec));
    }
  }
  return PredictionSet(spec.name, std::move(records));
}

namespace {

// Shared latent population for the three profiles. Everything here is part
// of the latent key, so all profiles must agree on it exactly.
struct LatentSlice {
  const char* identity;
  std::int64_t n;
  double rate;
  double sharpness;
};

constexpr LatentSlice kProfilePopulation[] = {
    {"background", 18217, 0.08, 4.0},
    {"white", 276, 0.24, 8.0},
    {"black", 146, 0.22, 8.0},
    {"muslim", 247, 0.16, 8.0},
    {"gay/lesbian", 129, 0.20, 8.0},
    {"jewish", 83, 0.20, 8.0},
    {"christian", 474, 0.14, 8.0},
    {"female", 566, 0.12, 8.0},
    {"male", 506, 0.13, 8.0},
};

// Per-identity overconfidence of the baseline detector; index matches
// kProfilePopulation (background unused).
constexpr double kErmGapStrength[] = {0.0, 0.70, 0.80, 0.55, 0.80, 1.10, 0.40, 0.35, 0.35};

// Benign tail mass per identity for the reweighted detector.
constexpr double kRwTailFrac[] = {0.0, 0.030, 0.035, 0.025, 0.040, 0.045, 0.020, 0.018, 0.020};

constexpr double kRwBackgroundSharpen = 0.30;
constexpr double kRwTailLoc = 0.992;
constexpr double kRwBulkStrength = 0.60;

// Noise-band detector: heavy but uniform miscalibration. Each slice gets the
// same planted expected ECE, so subgroup-vs-background gaps center on zero.
// Small slices see their empirical ECE inflated by binning noise, so their
// planted target sits slightly below the background's to recenter the gap.
constexpr double kDroEceTarget = 0.18;
constexpr double kDroSubgroupEceOffset = 0.025;
constexpr double kDroTailFrac = 0.10;
constexpr double kDroTailLoc = 0.88;
constexpr double kDroBandCap = 0.49;  // bulk stays on the negative side of 0.5

ScoreModel dro_noise_band(double rate, bool is_background) {
  double target = kDroEceTarget - (is_background ? 0.0 : kDroSubgroupEceOffset);
  double tail_mean = 0.5 * (kDroTailLoc + 1.0);
  double band_target = (target - kDroTailFrac * (tail_mean - rate)) / (1.0 - kDroTailFrac);
  // E|x - rate| over U[0,h] equals (rate^2 + (h-rate)^2) / (2h); solve for h.
  double s = rate + band_target;
  double h = s + std::sqrt(std::max(0.0, s * s - 2.0 * rate * rate));
  return ScoreModel::noise_band(0.0, std::min(h, kDroBandCap), kDroTailFrac, kDroTailLoc);
}

}  // namespace

Profile parse_profile(std::string_view name) {
  if (name == "erm") return Profile::Erm;
  if (name == "reweighted") return Profile::Reweighted;
  if (name == "dro") return Profile::Dro;
  throw AuditError("unknown profile '" + std::string(name) +
                   "'; expected erm, reweighted or dro");
}

std::string profile_name(Profile p) {
  switch (p) {
    case Profile::Erm: return "erm";
    case Profile::Reweighted: return "reweighted";
    case Profile::Dro: return "dro";
  }
  throw AuditError("unreachable profile");
}

std::vector<Profile> all_profiles() {
  return {Profile::Erm, Profile::Reweighted, Profile::Dro};
}

ScenarioSpec profile_spec(Profile profile, std::uint64_t seed) {
  ScenarioSpec spec;
  spec.name = profile_name(profile);
  spec.seed = seed;
  const std::size_t n_slices = std::size(kProfilePopulation);
  for (std::size_t s = 0; s < n_slices; ++s) {
    const auto& pop = kProfilePopulation[s];
    SliceSpec slice;
    slice.identity = pop.identity;
    slice.n = pop.n;
    slice.positive_rate = pop.rate;
    slice.sharpness = pop.sharpness;
    bool is_background = s == 0;
    switch (profile) {
      case Profile::Erm:
        slice.model = is_background ? ScoreModel::calibrated()
                                    : ScoreModel::overconfident_subgroup(kErmGapStrength[s]);
        break;
      case Profile::Reweighted:
        slice.model = is_background
                          ? ScoreModel::overconfident_subgroup(kRwBackgroundSharpen)
                          : ScoreModel::bimodal_tail(kRwTailFrac[s], kRwTailLoc,
                                                     kRwBulkStrength);
        break;
      case Profile::Dro:
        slice.model = dro_noise_band(pop.rate, is_background);
        break;
    }
    spec.slices.push_back(std::move(slice));
  }
  return spec;
}

PredictionSet paper_profile(Profile profile, std::uint64_t seed) {
  return generate(profile_spec(profile, seed));
}

TrainDataSpec TrainDataSpec::spurious_minority() {
  TrainDataSpec spec;
  spec.core_separation = 2.2;
  spec.spurious_strength = 2.4;
  spec.noise_sd = 1.0;
  spec.groups = {
      {"background", 0.90, 0.35},
      {"minority", 0.10, 0.35},
  };
  return spec;
}

TrainingData generate_training_data(std::uint64_t seed, std::int64_t n, int d,
                                    const TrainDataSpec& spec) {
  if (n < 1) throw AuditError("training data needs n >= 1");
  if (d < 2) throw AuditError("training data needs d >= 2 (core + spurious coordinate)");
  if (spec.groups.empty()) throw AuditError("training data needs at least one group");
  double frac_sum = 0.0;
  for (const auto& g : spec.groups) {
    if (g.identity.empty()) throw AuditError("training group needs an identity");
    if (g.fraction <= 0.0) throw AuditError("group '" + g.identity + "': fraction must be positive");
    if (g.positive_rate <= 0.0 || g.positive_rate >= 1.0)
      throw AuditError("group '" + g.identity + "': positive_rate must lie in (0,1)");
    frac_sum += g.fraction;
  }
  if (std::abs(frac_sum - 1.0) > 1e-9) throw AuditError("group fractions must sum to 1");

  // Deterministic head counts: floor allocation, remainder to earlier groups.
  std::vector<std::int64_t> counts(spec.groups.size());
  std::int64_t assigned = 0;
  for (std::size_t g = 0; g < spec.groups.size(); ++g) {
    counts[g] = static_cast<std::int64_t>(spec.groups[g].fraction * static_cast<double>(n));
    assigned += counts[g];
  }
  for (std::size_t g = 0; assigned < n; g = (g + 1) % spec.groups.size()) {
    ++counts[g];
    ++assigned;
  }
  for (std::size_t g = 0; g < spec.groups.size(); ++g)
    if (counts[g] < 1) throw AuditError("group '" + spec.groups[g].identity + "' received no rows");

  TrainingData data;
  data.n = n;
  data.d = d;
  data.features.resize(static_cast<std::size_t>(n) * static_cast<std::size_t>(d));
  data.labels.resize(static_cast<std::size_t>(n));
  data.group.resize(static_cast<std::size_t>(n));
  data.identity.resize(static_cast<std::size_t>(n));
  for (const auto& g : spec.groups) {
    data.identity_names.push_back(g.identity);
    data.group_names.push_back(g.identity + ":0");
    data.group_names.push_back(g.identity + ":1");
  }

  std::int64_t row = 0;
  for (std::size_t g = 0; g < spec.groups.size(); ++g) {
    const auto& group = spec.groups[g];
    // The spurious coordinate tracks the label on the background but is
    // always on for the minority, so a model leaning on it misreads the
    // minority's benign rows.
    bool shortcut_broken = g > 0;
    for (std::int64_t i = 0; i < counts[g]; ++i, ++row) {
      CounterRng rng(seed, Stream::TrainerData, g, static_cast<std::uint64_t>(i));
      int y = rng.next_bernoulli(group.positive_rate) ? 1 : 0;
      double* x = data.features.data() + row * d;
      double core_sign = y == 1 ? 0.5 : -0.5;
      x[0] = spec.core_separation * core_sign + spec.noise_sd * rng.next_gaussian();
      double shortcut = shortcut_broken ? 1.0 : static_cast<double>(y);
      x[1] = spec.spurious_strength * (shortcut - 0.5) + spec.noise_sd * rng.next_gaussian();
      for (int j = 2; j < d; ++j) x[j] = rng.next_gaussian();
      data.labels[static_cast<std::size_t>(row)] = static_cast<std::uint8_t>(y);
      data.identity[static_cast<std::size_t>(row)] = static_cast<std::int32_t>(g);
      data.group[static_cast<std::size_t>(row)] = static_cast<std::int32_t>(2 * g + y);
    }
  }
  return data;
}

}  // namespace fairaudit
