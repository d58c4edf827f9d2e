#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "derail/error.hpp"
#include "derail/logistic.hpp"

namespace derail {

Standardization Standardization::fit(const Matrix& X) {
  const auto s = standardize(X);
  return {s.means, s.stds};
}

Standardization Standardization::identity(Eigen::Index dim) {
  return {Vector::Zero(dim), Vector::Ones(dim)};
}

Matrix Standardization::apply(const Matrix& X) const {
  if (X.cols() != mean.size()) {
    throw DimensionError("standardization expects " + std::to_string(mean.size()) +
                         " columns, got " + std::to_string(X.cols()));
  }
  return (X.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
}

Vector Standardization::apply(const Vector& x) const {
  if (x.size() != mean.size()) {
    throw DimensionError("standardization expects " + std::to_string(mean.size()) +
                         " values, got " + std::to_string(x.size()));
  }
  return (x - mean).cwiseQuotient(scale);
}

Standardized standardize(const Matrix& X) {
  const auto n = X.rows();
  const auto d = X.cols();
  Standardized out{X, Vector::Zero(d), Vector::Ones(d)};
  if (n == 0) return out;
  for (Eigen::Index j = 0; j < d; ++j) {
    const auto col = X.col(j);
    const bool constant = (col.array() == col(0)).all();
    if (constant) continue;  // passed through, std recorded as 1
    const double mean = col.mean();
    const double var = (col.array() - mean).square().mean();
    const double sd = std::sqrt(var);
    out.means(j) = mean;
    out.stds(j) = sd;
    out.X.col(j) = (col.array() - mean) / sd;
  }
  return out;
}

Vector anova_f(const Matrix& X, std::span<const int> y) {
  if (static_cast<Eigen::Index>(y.size()) != X.rows()) {
    throw DimensionError("anova_f: " + std::to_string(y.size()) + " labels for " +
                         std::to_string(X.rows()) + " rows");
  }
  std::size_t n1 = 0;
  for (int v : y) n1 += v == 1 ? 1 : 0;
  const std::size_t n = y.size();
  const std::size_t n0 = n - n1;
  if (n0 == 0 || n1 == 0) throw ValidationError("anova_f needs samples from both classes");

  Vector F = Vector::Zero(X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    double s0 = 0.0, s1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) (y[i] == 1 ? s1 : s0) += X(static_cast<Eigen::Index>(i), j);
    const double m0 = s0 / static_cast<double>(n0);
    const double m1 = s1 / static_cast<double>(n1);
    const double g = (s0 + s1) / static_cast<double>(n);

    bool within_constant = true;
    double first0 = 0.0, first1 = 0.0;
    bool seen0 = false, seen1 = false;
    double ssw = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = X(static_cast<Eigen::Index>(i), j);
      if (y[i] == 1) {
        if (!seen1) { first1 = x; seen1 = true; }
        within_constant &= x == first1;
        ssw += (x - m1) * (x - m1);
      } else {
        if (!seen0) { first0 = x; seen0 = true; }
        within_constant &= x == first0;
        ssw += (x - m0) * (x - m0);
      }
    }
    if (within_constant) {
      F(j) = first0 == first1 ? 0.0 : std::numeric_limits<double>::infinity();
      continue;
    }
    const double ssb = static_cast<double>(n0) * (m0 - g) * (m0 - g) +
                       static_cast<double>(n1) * (m1 - g) * (m1 - g);
    const double df_within = static_cast<double>(n) - 2.0;
    F(j) = ssb / (ssw / df_within);
  }
  return F;
}

std::vector<bool> select_percentile(const Vector& scores, double percentile) {
  if (!(percentile > 0.0 && percentile <= 100.0)) {
    throw ValidationError("percentile must lie in (0, 100]");
  }
  const auto d = static_cast<std::size_t>(scores.size());
  std::vector<bool> mask(d, false);
  if (d == 0) return mask;
  auto k = static_cast<std::size_t>(std::floor(percentile * static_cast<double>(d) / 100.0 + 1e-9));
  k = std::clamp<std::size_t>(k, 1, d);

  auto key = [&](std::size_t i) {
    const double s = scores(static_cast<Eigen::Index>(i));
    return std::isnan(s) ? -std::numeric_limits<double>::infinity() : s;
  };
  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key(a) > key(b); });
  for (std::size_t i = 0; i < k; ++i) mask[order[i]] = true;
  return mask;
}

}  // namespace derail
