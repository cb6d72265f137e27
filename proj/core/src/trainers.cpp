#include "fairaudit/trainers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "fairaudit/error.hpp"
#include "fairaudit/numeric.hpp"
#include "fairaudit/rng.hpp"

namespace fairaudit {

double LinearModel::score(std::span<const double> x) const {
  if (x.size() != weights.size()) throw AuditError("feature width mismatch");
  double s = bias;
  for (std::size_t j = 0; j < x.size(); ++j) s += weights[j] * x[j];
  return s;
}

double LinearModel::predict_one(std::span<const double> x) const { return sigmoid(score(x)); }

std::vector<double> LinearModel::predict(const TrainingData& data) const {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(data.n));
  for (std::int64_t i = 0; i < data.n; ++i) out.push_back(predict_one(data.row(i)));
  return out;
}

std::map<std::string, double> example_weights(
    const std::map<std::string, std::int64_t>& group_sizes, double weight_clip) {
  if (group_sizes.empty()) throw AuditError("example weights need at least one group");
  std::int64_t total = 0;
  for (const auto& [name, size] : group_sizes) {
    if (size < 1) throw AuditError("group '" + name + "' has no examples");
    total += size;
  }
  auto n_groups = static_cast<double>(group_sizes.size());
  std::map<std::string, double> out;
  for (const auto& [name, size] : group_sizes) {
    double w = static_cast<double>(total) / (n_groups * static_cast<double>(size));
    out[name] = std::min(w, weight_clip);
  }
  return out;
}

GroupWeightState uniform_state(const std::vector<std::string>& group_names, double eta) {
  if (group_names.empty()) throw AuditError("group state needs at least one group");
  GroupWeightState state;
  state.eta = eta;
  double q0 = 1.0 / static_cast<double>(group_names.size());
  for (const auto& name : group_names) state.q[name] = q0;
  return state;
}

GroupWeightState dro_update(const GroupWeightState& state,
                            const std::map<std::string, double>& batch_mean_losses) {
  GroupWeightState next = state;
  for (const auto& [name, loss] : batch_mean_losses) {
    auto it = next.q.find(name);
    if (it == next.q.end()) throw AuditError("dro update for unknown group '" + name + "'");
    if (!std::isfinite(loss)) throw AuditError("dro update with non-finite loss");
    it->second *= std::exp(state.eta * loss);
  }
  double total = 0.0;
  for (const auto& [name, q] : next.q) total += q;
  if (!(total > 0.0) || !std::isfinite(total))
    throw AuditError("dro update degenerated off the simplex");
  for (auto& [name, q] : next.q) q /= total;
  return next;
}

TrainMethod parse_train_method(std::string_view name) {
  if (name == "erm") return TrainMethod::Erm;
  if (name == "reweighted") return TrainMethod::Reweighted;
  if (name == "dro") return TrainMethod::Dro;
  throw AuditError("unknown training method '" + std::string(name) +
                   "'; expected erm, reweighted or dro");
}

std::string train_method_name(TrainMethod m) {
  switch (m) {
    case TrainMethod::Erm: return "erm";
    case TrainMethod::Reweighted: return "reweighted";
    case TrainMethod::Dro: return "dro";
  }
  throw AuditError("unreachable train method");
}

double batch_loss(const LinearModel& m, const TrainingData& data,
                  std::span<const std::int64_t> rows, std::span<const double> row_weights) {
  if (rows.empty()) throw AuditError("empty batch");
  if (rows.size() != row_weights.size()) throw AuditError("weight count mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    double s = m.score(data.row(rows[i]));
    double ell = data.labels[static_cast<std::size_t>(rows[i])] ? log1pexp(-s) : log1pexp(s);
    acc += row_weights[i] * ell;
  }
  return acc / static_cast<double>(rows.size());
}

void batch_gradient(const LinearModel& m, const TrainingData& data,
                    std::span<const std::int64_t> rows, std::span<const double> row_weights,
                    std::span<double> grad_w, double& grad_b) {
  if (rows.empty()) throw AuditError("empty batch");
  if (rows.size() != row_weights.size()) throw AuditError("weight count mismatch");
  if (grad_w.size() != m.weights.size()) throw AuditError("gradient width mismatch");
  std::fill(grad_w.begin(), grad_w.end(), 0.0);
  grad_b = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto x = data.row(rows[i]);
    double resid = sigmoid(m.score(x)) - static_cast<double>(data.labels[static_cast<std::size_t>(rows[i])]);
    double w = row_weights[i];
    for (std::size_t j = 0; j < x.size(); ++j) grad_w[j] += w * resid * x[j];
    grad_b += w * resid;
  }
  double inv = 1.0 / static_cast<double>(rows.size());
  for (auto& g : grad_w) g *= inv;
  grad_b *= inv;
}

namespace {

std::map<std::string, std::int64_t> group_census(const TrainingData& data) {
  std::map<std::string, std::int64_t> sizes;
  for (std::int64_t i = 0; i < data.n; ++i)
    sizes[data.group_names[static_cast<std::size_t>(data.group[static_cast<std::size_t>(i)])]] += 1;
  return sizes;
}

std::vector<std::int64_t> epoch_permutation(std::uint64_t seed, int epoch, std::int64_t n) {
  std::vector<std::int64_t> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  CounterRng rng(seed, Stream::TrainerShuffle, static_cast<std::uint64_t>(epoch));
  for (std::int64_t i = n - 1; i > 0; --i) {
    auto j = static_cast<std::int64_t>(rng.next_below(static_cast<std::uint64_t>(i) + 1));
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }
  return perm;
}

}  // namespace

TrainResult train(const TrainingData& data, const TrainConfig& config) {
  if (data.n < 1) throw AuditError("training needs at least one row");
  if (config.epochs < 1) throw AuditError("epochs must be positive");
  if (config.batch_size < 1) throw AuditError("batch_size must be positive");
  if (!(config.lr0 > 0.0)) throw AuditError("lr0 must be positive");

  auto sizes = group_census(data);

  // Per-row gradient weights for the reweighted method, 1 otherwise.
  std::vector<double> row_weight(static_cast<std::size_t>(data.n), 1.0);
  if (config.method == TrainMethod::Reweighted) {
    auto weights = example_weights(sizes, config.weight_clip);
    for (std::int64_t i = 0; i < data.n; ++i)
      row_weight[static_cast<std::size_t>(i)] =
          weights[data.group_names[static_cast<std::size_t>(data.group[static_cast<std::size_t>(i)])]];
  }

  std::vector<std::string> present_groups;
  for (const auto& [name, size] : sizes) present_groups.push_back(name);
  GroupWeightState state = uniform_state(present_groups, config.eta);

  TrainResult result;
  result.model.weights.assign(static_cast<std::size_t>(data.d), 0.0);
  result.model.bias = 0.0;

  auto batches_per_epoch = (data.n + config.batch_size - 1) / config.batch_size;
  auto total_steps = static_cast<double>(batches_per_epoch) * config.epochs;

  std::vector<std::int64_t> batch_rows;
  std::vector<double> batch_weights;
  std::vector<double> grad(static_cast<std::size_t>(data.d));
  std::vector<double> group_grad(static_cast<std::size_t>(data.d));

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    auto perm = epoch_permutation(config.seed, epoch, data.n);
    for (std::int64_t b = 0; b < data.n; b += config.batch_size) {
      auto e = std::min<std::int64_t>(b + config.batch_size, data.n);
      batch_rows.assign(perm.begin() + b, perm.begin() + e);
      double lr = config.lr0 * (1.0 - static_cast<double>(result.steps) / total_steps);
      double grad_b = 0.0;

      if (config.method == TrainMethod::Dro) {
        // Within-batch group means, mixed by the current q.
        std::map<std::string, std::vector<std::int64_t>> by_group;
        for (auto row : batch_rows)
          by_group[data.group_names[static_cast<std::size_t>(data.group[static_cast<std::size_t>(row)])]]
              .push_back(row);
        std::fill(grad.begin(), grad.end(), 0.0);
        std::map<std::string, double> batch_losses;
        std::vector<double> ones;
        for (const auto& [name, rows] : by_group) {
          ones.assign(rows.size(), 1.0);
          double loss = batch_loss(result.model, data, rows, ones);
          if (!std::isfinite(loss))
            throw AuditError("training diverged at step " + std::to_string(result.steps));
          batch_losses[name] = loss;
          double gb = 0.0;
          batch_gradient(result.model, data, rows, ones, group_grad, gb);
          double q = state.q.at(name);
          for (std::size_t j = 0; j < grad.size(); ++j) grad[j] += q * group_grad[j];
          grad_b += q * gb;
        }
        state = dro_update(state, batch_losses);
      } else {
        batch_weights.clear();
        for (auto row : batch_rows)
          batch_weights.push_back(row_weight[static_cast<std::size_t>(row)]);
        double loss = batch_loss(result.model, data, batch_rows, batch_weights);
        if (!std::isfinite(loss))
          throw AuditError("training diverged at step " + std::to_string(result.steps));
        batch_gradient(result.model, data, batch_rows, batch_weights, grad, grad_b);
      }

      for (std::size_t j = 0; j < grad.size(); ++j) result.model.weights[j] -= lr * grad[j];
      result.model.bias -= lr * grad_b;
      for (double w : result.model.weights)
        if (!std::isfinite(w))
          throw AuditError("training diverged at step " + std::to_string(result.steps));
      result.steps += 1;
    }
  }
  result.group_state = std::move(state);
  return result;
}

GroupErrorReport group_errors(const LinearModel& m, const TrainingData& data, double threshold) {
  if (data.n < 1) throw AuditError("evaluation needs at least one row");
  GroupErrorReport report;
  std::map<std::string, std::pair<std::int64_t, std::int64_t>> tallies;  // identity -> (n, wrong)
  std::int64_t wrong_total = 0;
  for (std::int64_t i = 0; i < data.n; ++i) {
    double p = m.predict_one(data.row(i));
    bool wrong =
        binarize(p, threshold) != static_cast<int>(data.labels[static_cast<std::size_t>(i)]);
    auto& t = tallies[data.identity_names[static_cast<std::size_t>(
        data.identity[static_cast<std::size_t>(i)])]];
    t.first += 1;
    t.second += wrong;
    wrong_total += wrong;
  }
  for (const auto& [name, t] : tallies) {
    double err = static_cast<double>(t.second) / static_cast<double>(t.first);
    report.by_identity[name] = err;
    report.worst = std::max(report.worst, err);
  }
  report.average = static_cast<double>(wrong_total) / static_cast<double>(data.n);
  return report;
}

PredictionSet to_prediction_set(const LinearModel& m, const TrainingData& data,
                                std::string method_name, const std::string& id_prefix) {
  std::vector<PredictionRecord> records;
  records.reserve(static_cast<std::size_t>(data.n));
  for (std::int64_t i = 0; i < data.n; ++i) {
    PredictionRecord rec;
    char buf[24];
    std::snprintf(buf, sizeof buf, "%06lld", static_cast<long long>(i));
    rec.id = id_prefix + buf;
    rec.p = m.predict_one(data.row(i));
    rec.y = static_cast<int>(data.labels[static_cast<std::size_t>(i)]);
    rec.identity =
        data.identity_names[static_cast<std::size_t>(data.identity[static_cast<std::size_t>(i)])];
    records.push_back(std::move(rec));
  }
  return PredictionSet(std::move(method_name), std::move(records));
}

}  // namespace fairaudit
