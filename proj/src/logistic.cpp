#include <algorithm>
#include <cmath>

#include "derail/error.hpp"
#include "derail/logistic.hpp"

namespace derail {

namespace {

// log(1 + exp(-m)), stable for large |m|.
double softplus_neg(double m) {
  return m > 0.0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m));
}

void check_inputs(const Matrix& X, std::span<const int> y, double C) {
  if (static_cast<Eigen::Index>(y.size()) != X.rows()) {
    throw DimensionError("logistic regression: " + std::to_string(y.size()) + " labels for " +
                         std::to_string(X.rows()) + " rows");
  }
  if (!X.allFinite()) throw NumericError("logistic regression: non-finite feature value");
  if (!(C > 0.0) || !std::isfinite(C)) throw ValidationError("C must be positive and finite");
  for (int v : y) {
    if (v != 0 && v != 1) throw ValidationError("labels must be 0 or 1");
  }
}

struct Evaluation {
  double objective;
  Vector grad;  // weights then bias
  Vector curvature;  // per-sample p(1-p)
};

Evaluation evaluate(const Matrix& X, const Vector& s, const Vector& w, double b, double C,
                    bool need_curvature) {
  const Vector margin = (s.array() * ((X * w).array() + b)).matrix();
  const auto n = X.rows();
  const auto d = X.cols();
  double loss = 0.0;
  Vector coef(n);  // d loss / d (w.x + b)
  Vector curv = need_curvature ? Vector(n) : Vector();
  for (Eigen::Index i = 0; i < n; ++i) {
    loss += softplus_neg(margin(i));
    const double q = sigmoid(-margin(i));
    coef(i) = -s(i) * q;
    if (need_curvature) curv(i) = q * (1.0 - q);
  }
  Evaluation e;
  e.objective = 0.5 * w.squaredNorm() / C + loss;
  e.grad.resize(d + 1);
  e.grad.head(d) = w / C + X.transpose() * coef;
  e.grad(d) = coef.sum();
  e.curvature = std::move(curv);
  return e;
}

}  // namespace

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double logistic_objective(const Matrix& X, std::span<const int> y, const Vector& w, double b,
                          double C) {
  check_inputs(X, y, C);
  double total = 0.5 * w.squaredNorm() / C;
  const Vector z = X * w;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const double s = y[static_cast<std::size_t>(i)] == 1 ? 1.0 : -1.0;
    total += softplus_neg(s * (z(i) + b));
  }
  return total;
}

LogisticFit fit_logreg(const Matrix& X, std::span<const int> y, double C,
                       const LogisticFitOptions& options) {
  check_inputs(X, y, C);
  const auto n = X.rows();
  const auto d = X.cols();
  Vector s(n);
  for (Eigen::Index i = 0; i < n; ++i) s(i) = y[static_cast<std::size_t>(i)] == 1 ? 1.0 : -1.0;

  LogisticFit fit;
  fit.weights = options.initial_weights.size() == d ? options.initial_weights : Vector::Zero(d);
  fit.bias = options.initial_weights.size() == d ? options.initial_bias : 0.0;

  auto e = evaluate(X, s, fit.weights, fit.bias, C, true);
  if (options.record_trace) fit.objective_trace.push_back(e.objective);

  Matrix H(d + 1, d + 1);
  for (int it = 0; it < options.max_iterations; ++it) {
    fit.gradient_norm = e.grad.lpNorm<Eigen::Infinity>();
    if (fit.gradient_norm < options.gradient_tolerance) {
      fit.converged = true;
      break;
    }
    // Hessian of the objective in (w, b).
    const Matrix Xd = X.array().colwise() * e.curvature.array();
    H.topLeftCorner(d, d).noalias() = X.transpose() * Xd;
    H.topLeftCorner(d, d).diagonal().array() += 1.0 / C;
    const Vector colsum = Xd.colwise().sum().transpose();
    H.topRightCorner(d, 1) = colsum;
    H.bottomLeftCorner(1, d) = colsum.transpose();
    H(d, d) = e.curvature.sum();

    Eigen::LDLT<Matrix> ldlt(H);
    Vector step = -ldlt.solve(e.grad);
    double slope = e.grad.dot(step);
    if (ldlt.info() != Eigen::Success || !step.allFinite() || !(slope < 0.0)) {
      // Indefinite or singular system: fall back to a damped solve, then to
      // steepest descent.
      Matrix Hd = H;
      Hd.diagonal().array() += 1e-8 * (1.0 + H.diagonal().cwiseAbs().maxCoeff());
      step = -Hd.ldlt().solve(e.grad);
      slope = e.grad.dot(step);
      if (!step.allFinite() || !(slope < 0.0)) {
        step = -e.grad;
        slope = -e.grad.squaredNorm();
      }
    }

    double t = 1.0;
    bool accepted = false;
    Evaluation next;
    Vector w_new;
    double b_new = 0.0;
    for (int halvings = 0; halvings < 60; ++halvings) {
      w_new = fit.weights + t * step.head(d);
      b_new = fit.bias + t * step(d);
      next = evaluate(X, s, w_new, b_new, C, true);
      if (next.objective <= e.objective + 1e-4 * t * slope) {
        accepted = true;
        break;
      }
      // Close to the optimum the decrease drops below the rounding error of
      // the summed loss; then a step that keeps the objective level and
      // shrinks the gradient is taken instead.
      const double noise = 1e-12 * std::max(1.0, std::abs(e.objective));
      if (next.objective <= e.objective + noise &&
          next.grad.lpNorm<Eigen::Infinity>() < fit.gradient_norm) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    fit.iterations = it + 1;
    if (!accepted) {
      // No representable decrease left; accept only if the gradient improved.
      if (next.grad.lpNorm<Eigen::Infinity>() < fit.gradient_norm && next.objective <= e.objective) {
        fit.weights = w_new;
        fit.bias = b_new;
        e = std::move(next);
      }
      break;
    }
    fit.weights = std::move(w_new);
    fit.bias = b_new;
    e = std::move(next);
    if (options.record_trace) fit.objective_trace.push_back(e.objective);
  }
  fit.objective = e.objective;
  fit.gradient_norm = e.grad.lpNorm<Eigen::Infinity>();
  fit.converged = fit.gradient_norm < options.gradient_tolerance;
  if (!fit.weights.allFinite() || !std::isfinite(fit.bias)) {
    throw NumericError("logistic regression diverged");
  }
  return fit;
}

double LogisticModel::predict_proba(std::span<const double> x) const {
  if (x.size() != input_dim()) {
    throw DimensionError("model expects " + std::to_string(input_dim()) + " features, got " +
                         std::to_string(x.size()));
  }
  double z = bias;
  Eigen::Index k = 0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (!selection_mask[j]) continue;
    const auto jj = static_cast<Eigen::Index>(j);
    z += weights(k++) * (x[j] - standardization.mean(jj)) / standardization.scale(jj);
  }
  return sigmoid(z);
}

Vector LogisticModel::predict_proba(const Matrix& X) const {
  if (X.cols() != static_cast<Eigen::Index>(input_dim())) {
    throw DimensionError("model expects " + std::to_string(input_dim()) + " features, got " +
                         std::to_string(X.cols()));
  }
  Vector p(X.rows());
  std::vector<double> row(input_dim());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) row[static_cast<std::size_t>(j)] = X(i, j);
    p(i) = predict_proba(row);
  }
  return p;
}

std::vector<double> LogisticModel::full_coefficients() const {
  std::vector<double> out(selection_mask.size(), 0.0);
  Eigen::Index k = 0;
  for (std::size_t j = 0; j < out.size(); ++j) {
    if (selection_mask[j]) out[j] = weights(k++);
  }
  return out;
}

LogisticModel make_model(const LogisticFit& fit, double C, std::vector<std::string> names) {
  LogisticModel m;
  const auto d = fit.weights.size();
  m.feature_names = std::move(names);
  m.standardization = Standardization::identity(d);
  m.selection_mask.assign(static_cast<std::size_t>(d), true);
  m.weights = fit.weights;
  m.bias = fit.bias;
  m.C = C;
  m.percentile = 100.0;
  return m;
}

namespace {

Matrix select_columns(const Matrix& X, const std::vector<bool>& mask) {
  Eigen::Index kept = 0;
  for (bool b : mask) kept += b ? 1 : 0;
  Matrix out(X.rows(), kept);
  Eigen::Index k = 0;
  for (std::size_t j = 0; j < mask.size(); ++j) {
    if (mask[j]) out.col(k++) = X.col(static_cast<Eigen::Index>(j));
  }
  return out;
}

}  // namespace

LogisticModel fit_pipeline(const Matrix& X, std::span<const int> y, double C, double percentile,
                           std::vector<std::string> feature_names) {
  if (!feature_names.empty() && static_cast<Eigen::Index>(feature_names.size()) != X.cols()) {
    throw DimensionError("feature name registry does not match the matrix width");
  }
  LogisticModel m;
  m.standardization = Standardization::fit(X);
  const Matrix Xs = m.standardization.apply(X);
  m.selection_mask = select_percentile(anova_f(Xs, y), percentile);
  const auto fit = fit_logreg(select_columns(Xs, m.selection_mask), y, C);
  m.weights = fit.weights;
  m.bias = fit.bias;
  m.C = C;
  m.percentile = percentile;
  m.feature_names = std::move(feature_names);
  return m;
}

}  // namespace derail
