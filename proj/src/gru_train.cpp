#include <algorithm>
#include <cmath>
#include <numeric>

#include "derail/error.hpp"
#include "derail/gru.hpp"
#include "derail/random.hpp"

namespace derail {

namespace {

void check_config(const GruTrainConfig& c) {
  if (c.hidden_dim <= 0) throw ValidationError("hidden_dim must be positive");
  if (!(c.learning_rate > 0.0)) throw ValidationError("learning_rate must be positive");
  if (c.momentum < 0.0 || c.momentum >= 1.0) throw ValidationError("momentum must lie in [0, 1)");
  if (c.batch_size < 1) throw ValidationError("batch_size must be at least 1");
  if (c.max_epochs < 1) throw ValidationError("max_epochs must be at least 1");
}

void check_data(std::span<const WindowSample> data) {
  if (data.empty()) throw ValidationError("no training windows");
  const auto rows = data.front().sequence.rows();
  const auto cols = data.front().sequence.cols();
  for (const auto& s : data) {
    if (s.sequence.rows() != rows || s.sequence.cols() != cols) {
      throw DimensionError("all windows must share one shape");
    }
    if (s.label != 0 && s.label != 1) throw ValidationError("window labels must be 0 or 1");
  }
}

double step_size(const GruTrainConfig& c, int epoch) {
  double lr = c.learning_rate;
  if (c.warmup_epochs > 0 && epoch < c.warmup_epochs) {
    lr *= static_cast<double>(epoch + 1) / static_cast<double>(c.warmup_epochs);
  }
  if (c.decay_every > 0) lr *= std::pow(0.5, epoch / c.decay_every);
  return lr;
}

// One pass of mini-batch momentum SGD. Returns the mean loss seen during the
// pass.
double run_epoch(GruParams& params, Vector& velocity, std::span<const WindowSample> data,
                 std::vector<std::size_t>& order, const GruTrainConfig& c, int epoch) {
  Rng rng(derive_seed(c.seed, "gru-epoch", static_cast<std::uint64_t>(epoch)));
  rng.shuffle(std::span<std::size_t>(order));
  const double lr = step_size(c, epoch);
  double loss_sum = 0.0;
  Vector flat = params.flatten();
  for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(c.batch_size)) {
    const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(c.batch_size));
    Vector grad = Vector::Zero(flat.size());
    for (std::size_t k = start; k < end; ++k) {
      const auto& s = data[order[k]];
      const auto out = gru_forward(params, s.sequence);
      loss_sum += bce_loss(out.probability, s.label);
      grad += gru_backward(params, s.sequence, out.cache, s.label).flatten();
    }
    grad /= static_cast<double>(end - start);
    if (c.gradient_clip > 0.0) {
      const double norm = grad.norm();
      if (norm > c.gradient_clip) grad *= c.gradient_clip / norm;
    }
    velocity = c.momentum * velocity - lr * grad;
    flat += velocity;
    params.unflatten(flat);
  }
  if (!params.all_finite()) throw NumericError("GRU training diverged at epoch " + std::to_string(epoch));
  return loss_sum / static_cast<double>(order.size());
}

std::vector<double> predictions(const GruParams& params, std::span<const WindowSample> data,
                                const std::vector<std::size_t>& idx) {
  std::vector<double> p;
  p.reserve(idx.size());
  for (auto i : idx) p.push_back(gru_predict(params, data[i].sequence));
  return p;
}

double accuracy_of(const std::vector<double>& p, std::span<const WindowSample> data,
                   const std::vector<std::size_t>& idx) {
  std::size_t correct = 0;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    correct += ((p[k] > 0.5 ? 1 : 0) == data[idx[k]].label) ? 1 : 0;
  }
  return idx.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(idx.size());
}

double f1_of(const std::vector<double>& p, std::span<const WindowSample> data,
             const std::vector<std::size_t>& idx) {
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const bool pred = p[k] > 0.5;
    const bool pos = data[idx[k]].label == 1;
    if (pred && pos) ++tp;
    else if (pred) ++fp;
    else if (pos) ++fn;
  }
  return tp == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
}

}  // namespace

SplitIndices split_indices(std::size_t n, double train_fraction, double validation_fraction,
                           std::uint64_t seed) {
  if (train_fraction <= 0.0 || validation_fraction <= 0.0 ||
      train_fraction + validation_fraction >= 1.0) {
    throw ValidationError("train and validation fractions must be positive and leave a test split");
  }
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  Rng rng(derive_seed(seed, "gru-split"));
  rng.shuffle(std::span<std::size_t>(all));
  const auto total = static_cast<double>(n);
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * total));
  const auto n_val = static_cast<std::size_t>(std::llround(validation_fraction * total));
  if (n_train == 0 || n_val == 0 || n_train + n_val >= n) {
    throw ValidationError("dataset of " + std::to_string(n) +
                          " samples is too small for a train/validation/test split");
  }
  SplitIndices s;
  s.train.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.validation.assign(all.begin() + static_cast<std::ptrdiff_t>(n_train),
                      all.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  s.test.assign(all.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), all.end());
  return s;
}

GruTrainResult train_gru(std::span<const WindowSample> data, const GruTrainConfig& config) {
  check_config(config);
  check_data(data);

  const auto split = split_indices(data.size(), config.train_fraction,
                                   config.validation_fraction, config.seed);
  const auto& train = split.train;
  const auto& val = split.validation;
  const auto& test = split.test;

  GruTrainResult result;
  result.train_size = train.size();
  result.validation_size = val.size();
  result.test_size = test.size();

  auto params = GruParams::random(data.front().sequence.cols(), config.hidden_dim,
                                  derive_seed(config.seed, "gru-init"));
  Vector velocity = Vector::Zero(static_cast<Eigen::Index>(params.parameter_count()));
  result.params = params;
  result.validation_best = -1.0;

  std::vector<WindowSample> train_data;
  train_data.reserve(train.size());
  for (auto i : train) train_data.push_back(data[i]);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    result.train_loss.push_back(run_epoch(params, velocity, train_data, order, config, epoch));
    const double acc = accuracy_of(predictions(params, data, val), data, val);
    result.validation_accuracy.push_back(acc);
    result.epochs_run = epoch + 1;
    if (acc > result.validation_best) {
      result.validation_best = acc;
      result.best_epoch = epoch + 1;
      result.params = params;
    } else if (config.patience > 0 && epoch + 1 - result.best_epoch >= config.patience) {
      break;
    }
  }

  const auto p = predictions(result.params, data, test);
  result.test_accuracy = accuracy_of(p, data, test);
  result.test_f1 = f1_of(p, data, test);
  return result;
}

GruTrainResult fit_gru(std::span<const WindowSample> data, const GruTrainConfig& config) {
  check_config(config);
  check_data(data);
  GruTrainResult result;
  result.train_size = data.size();
  auto params = GruParams::random(data.front().sequence.cols(), config.hidden_dim,
                                  derive_seed(config.seed, "gru-init"));
  Vector velocity = Vector::Zero(static_cast<Eigen::Index>(params.parameter_count()));
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    result.train_loss.push_back(run_epoch(params, velocity, data, order, config, epoch));
    result.epochs_run = epoch + 1;
  }
  result.best_epoch = result.epochs_run;
  result.params = std::move(params);
  return result;
}

}  // namespace derail
