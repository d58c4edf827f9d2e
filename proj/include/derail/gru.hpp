#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace derail {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Single-layer unidirectional GRU with a linear + sigmoid head on the final
/// hidden state.
///
///   z_t = sigmoid(Wz x_t + Uz h_{t-1} + bz)
///   r_t = sigmoid(Wr x_t + Ur h_{t-1} + br)
///   c_t = tanh(Wh x_t + Uh (r_t * h_{t-1}) + bh)
///   h_t = (1 - z_t) * h_{t-1} + z_t * c_t,      h_0 = 0
///   p   = sigmoid(v . h_T + c)
struct GruParams {
  static constexpr int kFormatVersion = 1;

  Matrix Wz, Wr, Wh;  // hidden x input
  Matrix Uz, Ur, Uh;  // hidden x hidden
  Vector bz, br, bh;  // hidden
  Vector head;        // hidden
  double head_bias = 0.0;

  static GruParams zeros(Eigen::Index input_dim, Eigen::Index hidden_dim);
  /// Uniform in +-1/sqrt(hidden_dim), seeded.
  static GruParams random(Eigen::Index input_dim, Eigen::Index hidden_dim, std::uint64_t seed);

  Eigen::Index input_dim() const { return Wz.cols(); }
  Eigen::Index hidden_dim() const { return Wz.rows(); }
  std::size_t parameter_count() const;

  /// Flat view in a fixed order (Wz, Wr, Wh, Uz, Ur, Uh, bz, br, bh, head,
  /// head_bias), matrices column-major.
  Vector flatten() const;
  void unflatten(const Vector& flat);

  bool all_finite() const;
};

struct GruCache {
  std::vector<Vector> h;  // h[0] = 0, h[t] after step t
  std::vector<Vector> z, r, c;
  double logit = 0.0;
};

struct GruOutput {
  double probability = 0.5;
  GruCache cache;
};

/// sequence: one row per time step, input_dim columns. Throws DimensionError
/// on shape mismatch or an empty sequence, NumericError on non-finite values.
GruOutput gru_forward(const GruParams& params, const Matrix& sequence);

/// Binary cross-entropy with p clamped to [1e-12, 1 - 1e-12]. `label` may be
/// fractional.
double bce_loss(double probability, double label);

/// Exact gradient of bce_loss(gru_forward(sequence), label) by
/// backpropagation through time, in a GruParams-shaped container.
GruParams gru_backward(const GruParams& params, const Matrix& sequence, const GruCache& cache,
                       double label);

// ---------------------------------------------------------------------------
// Training

struct WindowSample {
  Matrix sequence;  // M x input_dim
  int label = 0;    // 1 = moderated
};

struct GruTrainConfig {
  Eigen::Index hidden_dim = 40;
  double learning_rate = 0.05;
  double momentum = 0.9;
  int warmup_epochs = 5;
  int decay_every = 100;    // epochs between step-size halvings, 0 = never
  int batch_size = 32;
  int max_epochs = 300;
  int patience = 20;        // early stop after this many epochs without validation gain
  double train_fraction = 0.7;
  double validation_fraction = 0.2;
  double gradient_clip = 5.0;  // max global gradient norm, 0 = off
  std::uint64_t seed = 0;
};

struct GruTrainResult {
  GruParams params;  // best validation accuracy
  int best_epoch = 0;
  int epochs_run = 0;
  std::vector<double> train_loss;  // mean loss per epoch
  std::vector<double> validation_accuracy;
  double validation_best = 0.0;
  double test_accuracy = 0.0;
  double test_f1 = 0.0;
  std::size_t train_size = 0, validation_size = 0, test_size = 0;
};

struct SplitIndices {
  std::vector<std::size_t> train, validation, test;
};

/// Seeded shuffle of 0..n-1 cut into train/validation/test by rounded
/// fractions. Throws ValidationError when any part comes out empty.
SplitIndices split_indices(std::size_t n, double train_fraction, double validation_fraction,
                           std::uint64_t seed);

/// Seeded split into train/validation/test (split_indices with the same
/// seed), mini-batch momentum SGD on the
/// mean batch loss with linear warm-up and step decay. Throws
/// ValidationError when a split comes out empty.
GruTrainResult train_gru(std::span<const WindowSample> data, const GruTrainConfig& config);

/// Plain training on all samples, no split or early stopping; used for
/// capacity checks.
GruTrainResult fit_gru(std::span<const WindowSample> data, const GruTrainConfig& config);

double gru_predict(const GruParams& params, const Matrix& sequence);

/// Largest relative error between the analytic gradient and central finite
/// differences over all parameters, |a - n| / max(|a|, |n|, 1e-6).
struct GradientCheck {
  double max_relative_error = 0.0;
  std::size_t worst_index = 0;
  std::size_t checked = 0;
};

GradientCheck gradient_check(const GruParams& params, const Matrix& sequence, double label,
                             double step = 1e-5);

}  // namespace derail
