#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace derail {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Preprocessing and univariate selection

struct Standardization {
  Vector mean;
  Vector scale;  // 1 for constant columns

  static Standardization fit(const Matrix& X);
  static Standardization identity(Eigen::Index dim);
  Matrix apply(const Matrix& X) const;
  Vector apply(const Vector& x) const;
};

struct Standardized {
  Matrix X;
  Vector means;
  Vector stds;
};

/// Column-wise zero mean, unit (population) variance. Constant columns are
/// passed through unchanged with their std recorded as 1.
Standardized standardize(const Matrix& X);

/// One-way ANOVA F statistic of every column against binary labels. A column
/// with zero within-class variance but distinct class means scores +inf; a
/// column with neither scores 0. Throws ValidationError unless both classes
/// are present.
Vector anova_f(const Matrix& X, std::span<const int> y);

/// Keeps the floor(p * d / 100) highest-scoring features (at least one); ties
/// go to the lower index. p must lie in (0, 100].
std::vector<bool> select_percentile(const Vector& scores, double percentile);

// ---------------------------------------------------------------------------
// L2-regularized logistic regression

struct LogisticFitOptions {
  double gradient_tolerance = 1e-8;
  int max_iterations = 1000;
  bool record_trace = false;
  Vector initial_weights;  // warm start; empty means zeros
  double initial_bias = 0.0;
};

struct LogisticFit {
  Vector weights;
  double bias = 0.0;
  double objective = 0.0;
  double gradient_norm = 0.0;  // infinity norm at the returned point
  int iterations = 0;
  bool converged = false;
  std::vector<double> objective_trace;  // filled when record_trace is set
};

/// (1/C) * 0.5 * |w|^2 + sum_i log(1 + exp(-s_i (w.x_i + b))), s_i = 2y_i - 1.
double logistic_objective(const Matrix& X, std::span<const int> y, const Vector& w, double b,
                          double C);

/// Damped Newton iteration with backtracking line search on the objective
/// above; the bias is unpenalized. Throws NumericError on non-finite input.
LogisticFit fit_logreg(const Matrix& X, std::span<const int> y, double C,
                       const LogisticFitOptions& options = {});

/// A fitted model in raw feature space: standardize, select, then score.
struct LogisticModel {
  static constexpr int kFormatVersion = 1;

  std::vector<std::string> feature_names;
  Standardization standardization;
  std::vector<bool> selection_mask;
  Vector weights;  // one per selected feature
  double bias = 0.0;
  double C = 1.0;
  double percentile = 100.0;

  std::size_t input_dim() const { return selection_mask.size(); }

  /// Throws DimensionError when x has the wrong length.
  double predict_proba(std::span<const double> x) const;
  Vector predict_proba(const Matrix& X) const;

  /// Coefficients over the full registry, 0 for unselected features.
  std::vector<double> full_coefficients() const;
};

/// Wraps an already-standardized fit as a model with identity preprocessing
/// and all features selected.
LogisticModel make_model(const LogisticFit& fit, double C, std::vector<std::string> names = {});

double sigmoid(double z);

// ---------------------------------------------------------------------------
// Model selection

struct GridConfig {
  std::vector<double> C_grid = {1e-4, 1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3, 1e4};
  std::vector<double> percentile_grid = {10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
  int folds = 5;
  int runs = 10;
  std::uint64_t seed = 0;

  void validate() const;
};

struct GridCell {
  double C = 0.0;
  double percentile = 0.0;
  double mean_accuracy = 0.0;
};

struct GridSearchResult {
  LogisticModel model;
  std::vector<GridCell> cells;
  GridCell best;
};

/// Seeded stratified fold assignment. Samples sharing a group id (the two
/// conversations of a pair) always land in the same fold. `groups` may be
/// empty, in which case every sample is its own group.
std::vector<int> assign_folds(std::span<const int> y, std::span<const std::string> groups,
                              int folds, std::uint64_t seed);

/// For every (C, percentile) cell: per fold, standardize and score features
/// on the training part only, select, fit, and measure accuracy on the held
/// out part. The best mean accuracy wins (ties: larger percentile, then
/// smaller C) and is refit on all data.
GridSearchResult grid_search_cv(const Matrix& X, std::span<const int> y,
                                std::span<const std::string> groups, const GridConfig& grid,
                                std::vector<std::string> feature_names = {});

/// Fits one (C, percentile) cell on raw data, with standardization and
/// selection computed from X itself.
LogisticModel fit_pipeline(const Matrix& X, std::span<const int> y, double C, double percentile,
                           std::vector<std::string> feature_names = {});

// ---------------------------------------------------------------------------
// Evaluation and reporting

/// Probability pair for one (derailing, healthy) conversation pair.
struct PairScore {
  double derail = 0.0;
  double healthy = 0.0;
};

/// Fraction of pairs whose derailing member scores higher; exact ties earn
/// half credit. Only predictions are consumed, never features or models.
double paired_accuracy(std::span<const PairScore> pairs);

double binary_accuracy(std::span<const double> probabilities, std::span<const int> y);
double f1_score(std::span<const double> probabilities, std::span<const int> y);

struct FeatureImportance {
  std::string name;
  double mean_coefficient = 0.0;
  double mean_abs_coefficient = 0.0;
  std::size_t rank = 0;  // 1 = largest mean |coefficient|
  enum class Direction { toxicity, health, none } direction = Direction::none;
};

/// Features in registry order.
struct ImportanceReport {
  std::vector<FeatureImportance> features;
  std::size_t runs = 0;

  /// Indices sorted by decreasing mean coefficient (toxicity side first).
  std::vector<std::size_t> toxicity_order() const;
  /// Indices sorted by increasing mean coefficient (health side first).
  std::vector<std::size_t> health_order() const;
};

/// Averages full-registry coefficients over runs. Throws ValidationError when
/// the models disagree on the feature registry.
ImportanceReport importance_report(std::span<const LogisticModel> models);

/// Same aggregation over raw coefficient vectors sharing `names`.
ImportanceReport importance_report(std::span<const std::vector<double>> coefficients,
                                   std::vector<std::string> names);

}  // namespace derail
