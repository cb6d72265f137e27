#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fairaudit/records.hpp"

namespace fairaudit {

// How a slice's predicted probabilities relate to its latent truth.
//
// Every record first draws a latent true-positive probability
// q ~ Beta(sharpness * rate, sharpness * (1 - rate)) and a label
// y ~ Bernoulli(q); the model then maps q to the reported p. The latent
// draw is keyed by (seed, slice position, record index) only, so two specs
// that agree on seed, slice order, sizes, rates and sharpness produce
// identical (id, y, identity) columns regardless of their score models.
// That is what makes generated method triples valid paired inputs.
struct ScoreModel {
  enum class Kind {
    Calibrated,             // p = q
    OverconfidentSubgroup,  // p = sigmoid(logit(q) * (1 + gap_strength))
    BimodalTail,            // sharpened bulk + a benign mass pushed above tail_loc
    UniformMiscalibrated,   // p = sigmoid(logit(q) + shift [+ decouple * noise])
    NoiseBand,              // p uniform on [band_lo, band_hi), tail_frac to [tail_loc, 1)
  };

  Kind kind = Kind::Calibrated;
  double gap_strength = 0.0;    // OverconfidentSubgroup: logit scaling above 1
  double tail_frac = 0.0;       // BimodalTail/NoiseBand: fraction sent into the tail
  double tail_loc = 0.99;       // BimodalTail/NoiseBand: lower edge of the tail
  double bulk_strength = 0.6;   // BimodalTail: logit sharpening of the non-tail bulk
  double shift = 0.0;           // UniformMiscalibrated: additive logit shift
  double decouple = 0.0;        // UniformMiscalibrated: sd of per-record logit noise
  double band_lo = 0.0;         // NoiseBand: lower band edge
  double band_hi = 0.5;         // NoiseBand: upper band edge

  static ScoreModel calibrated();
  static ScoreModel overconfident_subgroup(double gap_strength);
  static ScoreModel bimodal_tail(double tail_frac, double tail_loc, double bulk_strength = 0.6);
  static ScoreModel uniform_miscalibrated(double shift, double decouple = 0.0);
  // Scores carry no per-record information: the bulk is uniform on the band
  // and every record, toxic or benign, has the same tail chance. Confidence
  // is therefore independent of correctness inside the slice.
  static ScoreModel noise_band(double band_lo, double band_hi, double tail_frac = 0.0,
                               double tail_loc = 0.9);
};

struct SliceSpec {
  std::string identity;
  std::int64_t n = 0;
  double positive_rate = 0.1;
  double sharpness = 10.0;  // latent Beta concentration; part of the shared latent
  ScoreModel model;
};

struct ScenarioSpec {
  std::string name = "synthetic";
  std::uint64_t seed = 42;
  std::vector<SliceSpec> slices;
};

// Deterministic synthesis; same spec, same bytes. Record ids embed the
// identity and per-slice index. Slices with n = 0 are skipped without
// disturbing the latent keys of later slices. Errors on negative sizes,
// rates outside (0, 1), malformed model parameters, or an all-empty spec.
PredictionSet generate(const ScenarioSpec& spec);

// Three fixed profiles portraying one detector family after different
// training regimes, sharing a single latent population so their outputs
// form a valid paired triple:
//   erm        calibrated in aggregate, subgroup scores sharpened
//   reweighted mildly sharpened background, bimodal subgroup tails
//   dro        noise-band scores everywhere: equally miscalibrated in every
//              slice, with confidence carrying no information
enum class Profile { Erm, Reweighted, Dro };

Profile parse_profile(std::string_view name);  // "erm" | "reweighted" | "dro"
std::string profile_name(Profile p);
std::vector<Profile> all_profiles();

ScenarioSpec profile_spec(Profile profile, std::uint64_t seed);
PredictionSet paper_profile(Profile profile, std::uint64_t seed);

// Feature matrix for the desk trainers. Groups are (identity, label) pairs,
// named "identity:y"; evaluation slices use the identity alone.
struct TrainingData {
  std::int64_t n = 0;
  int d = 0;
  std::vector<double> features;  // row-major n * d
  std::vector<std::uint8_t> labels;
  std::vector<std::int32_t> group;  // training group per row
  std::vector<std::string> group_names;
  std::vector<std::int32_t> identity;  // identity per row
  std::vector<std::string> identity_names;

  std::span<const double> row(std::int64_t i) const {
    return {features.data() + i * d, static_cast<std::size_t>(d)};
  }
};

struct TrainGroupSpec {
  std::string identity;
  double fraction = 0.0;  // share of the n rows; fractions must sum to 1
  double positive_rate = 0.1;
};

// Controls the planted structure: one genuinely predictive direction with
// the given separation, plus a spurious coordinate correlated with identity
// membership rather than the label, plus isotropic noise.
struct TrainDataSpec {
  double core_separation = 1.6;
  double spurious_strength = 2.0;
  double noise_sd = 1.0;
  std::vector<TrainGroupSpec> groups;

  // Majority background plus one minority where the spurious shortcut
  // breaks: its benign rows carry the shortcut coordinate anyway.
  static TrainDataSpec spurious_minority();
};

TrainingData generate_training_data(std::uint64_t seed, std::int64_t n, int d,
                                    const TrainDataSpec& spec);

}  // namespace fairaudit
