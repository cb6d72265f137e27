#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "fairaudit/scenarios.hpp"

namespace fairaudit {

struct LinearModel {
  std::vector<double> weights;
  double bias = 0.0;

  double score(std::span<const double> x) const;        // raw logit
  double predict_one(std::span<const double> x) const;  // probability
  std::vector<double> predict(const TrainingData& data) const;
};

// w_g = N / (G * n_g) clipped at weight_clip. Unclipped weights sum to N
// over the examples; clipping only ever lowers a group's weight.
std::map<std::string, double> example_weights(const std::map<std::string, std::int64_t>& group_sizes,
                                              double weight_clip = 50.0);

// Multiplicative-weights state over training groups. q stays on the
// probability simplex.
struct GroupWeightState {
  std::map<std::string, double> q;
  double eta = 0.001;
};

GroupWeightState uniform_state(const std::vector<std::string>& group_names, double eta = 0.001);

// q_g <- q_g * exp(eta * L_g) for groups present in batch_mean_losses, then
// renormalize. Absent groups keep their mass up to renormalization.
GroupWeightState dro_update(const GroupWeightState& state,
                            const std::map<std::string, double>& batch_mean_losses);

enum class TrainMethod { Erm, Reweighted, Dro };

TrainMethod parse_train_method(std::string_view name);
std::string train_method_name(TrainMethod m);

struct TrainConfig {
  TrainMethod method = TrainMethod::Erm;
  int epochs = 2;
  int batch_size = 16;
  double lr0 = 0.5;  // linear decay to zero over all steps
  std::uint64_t seed = 42;
  double weight_clip = 50.0;
  double eta = 0.001;
};

struct TrainResult {
  LinearModel model;
  GroupWeightState group_state;  // final q; uniform for non-dro methods
  std::int64_t steps = 0;
};

// Minibatch logistic regression from zero init, deterministic per-epoch
// shuffle derived from the seed. Reweighted scales per-example gradients by
// example_weights of the training census; dro weights per-group batch
// gradients by q and updates q after every batch. Throws AuditError with the
// step index if the loss goes non-finite.
TrainResult train(const TrainingData& data, const TrainConfig& config);

// Mean cross-entropy and its gradient for one batch under per-example
// weights (weights averaged over the batch). Public mainly so tests can
// check the gradient against finite differences.
double batch_loss(const LinearModel& m, const TrainingData& data,
                  std::span<const std::int64_t> rows, std::span<const double> row_weights);
void batch_gradient(const LinearModel& m, const TrainingData& data,
                    std::span<const std::int64_t> rows, std::span<const double> row_weights,
                    std::span<double> grad_w, double& grad_b);

struct GroupErrorReport {
  std::map<std::string, double> by_identity;  // evaluation groups: identity only
  double worst = 0.0;
  double average = 0.0;  // plain per-example error rate
};

GroupErrorReport group_errors(const LinearModel& m, const TrainingData& data,
                              double threshold = 0.5);

// Scores a dataset into an auditable PredictionSet; ids are row indices
// prefixed so multiple datasets stay distinguishable.
PredictionSet to_prediction_set(const LinearModel& m, const TrainingData& data,
                                std::string method_name, const std::string& id_prefix = "r");

}  // namespace fairaudit
