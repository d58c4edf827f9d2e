#include <algorithm>
#include <cmath>
#include <map>

#include "derail/error.hpp"
#include "derail/logistic.hpp"
#include "derail/random.hpp"

namespace derail {

void GridConfig::validate() const {
  if (C_grid.empty() || percentile_grid.empty()) throw ValidationError("grid must not be empty");
  for (double c : C_grid) {
    if (!(c > 0.0) || !std::isfinite(c)) throw ValidationError("every C must be positive and finite");
  }
  for (double p : percentile_grid) {
    if (!(p > 0.0 && p <= 100.0)) throw ValidationError("every percentile must lie in (0, 100]");
  }
  if (folds < 2) throw ValidationError("folds must be at least 2");
  if (runs < 1) throw ValidationError("runs must be at least 1");
}

std::vector<int> assign_folds(std::span<const int> y, std::span<const std::string> groups,
                              int folds, std::uint64_t seed) {
  if (folds < 2) throw ValidationError("folds must be at least 2");
  if (!groups.empty() && groups.size() != y.size()) {
    throw DimensionError("group ids must be given for every sample");
  }
  std::size_t positives = 0;
  for (int v : y) positives += v == 1 ? 1 : 0;
  const std::size_t negatives = y.size() - positives;
  if (positives < static_cast<std::size_t>(folds) || negatives < static_cast<std::size_t>(folds)) {
    throw ValidationError("each class needs at least " + std::to_string(folds) +
                          " samples for " + std::to_string(folds) + "-fold cross-validation");
  }

  // Group members in first-appearance order.
  std::vector<std::vector<std::size_t>> members;
  std::map<std::string, std::size_t> group_index;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (groups.empty()) {
      members.push_back({i});
      continue;
    }
    auto [it, inserted] = group_index.emplace(groups[i], members.size());
    if (inserted) members.emplace_back();
    members[it->second].push_back(i);
  }

  // Stratify on group composition (number of positives, group size).
  std::map<std::pair<std::size_t, std::size_t>, std::vector<std::size_t>> strata;
  for (std::size_t g = 0; g < members.size(); ++g) {
    std::size_t pos = 0;
    for (auto i : members[g]) pos += y[i] == 1 ? 1 : 0;
    strata[{pos, members[g].size()}].push_back(g);
  }

  std::vector<int> fold(y.size(), 0);
  std::size_t next = 0;
  std::uint64_t stream = 0;
  for (auto& [key, gs] : strata) {
    Rng rng(derive_seed(seed, "folds", stream++));
    rng.shuffle(std::span<std::size_t>(gs));
    for (auto g : gs) {
      for (auto i : members[g]) fold[i] = static_cast<int>(next % static_cast<std::size_t>(folds));
      ++next;
    }
  }
  return fold;
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

Matrix take_rows(const Matrix& X, const std::vector<std::size_t>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), X.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = X.row(static_cast<Eigen::Index>(rows[r]));
  return out;
}

}  // namespace

GridSearchResult grid_search_cv(const Matrix& X, std::span<const int> y,
                                std::span<const std::string> groups, const GridConfig& grid,
                                std::vector<std::string> feature_names) {
  grid.validate();
  if (static_cast<Eigen::Index>(y.size()) != X.rows()) {
    throw DimensionError("grid search: label count differs from row count");
  }
  const auto fold = assign_folds(y, groups, grid.folds, grid.seed);

  std::vector<double> Cs = grid.C_grid;
  std::sort(Cs.begin(), Cs.end());
  const auto& ps = grid.percentile_grid;
  // accuracy_sum[p][c]
  std::vector<std::vector<double>> accuracy_sum(ps.size(), std::vector<double>(Cs.size(), 0.0));

  for (int f = 0; f < grid.folds; ++f) {
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < y.size(); ++i) (fold[i] == f ? test : train).push_back(i);
    std::vector<int> y_train, y_test;
    for (auto i : train) y_train.push_back(y[i]);
    for (auto i : test) y_test.push_back(y[i]);
    const bool both = std::count(y_train.begin(), y_train.end(), 1) > 0 &&
                      std::count(y_train.begin(), y_train.end(), 0) > 0;
    if (!both) throw ValidationError("cross-validation fold " + std::to_string(f) + " has a single class");

    const Matrix X_train_raw = take_rows(X, train);
    const auto st = Standardization::fit(X_train_raw);
    const Matrix X_train = st.apply(X_train_raw);
    const Matrix X_test = st.apply(take_rows(X, test));
    const Vector F = anova_f(X_train, y_train);

    for (std::size_t pi = 0; pi < ps.size(); ++pi) {
      const auto mask = select_percentile(F, ps[pi]);
      const Matrix Xtr = select_columns(X_train, mask);
      const Matrix Xte = select_columns(X_test, mask);
      LogisticFitOptions opts;
      for (std::size_t ci = 0; ci < Cs.size(); ++ci) {
        const auto fit = fit_logreg(Xtr, y_train, Cs[ci], opts);
        opts.initial_weights = fit.weights;
        opts.initial_bias = fit.bias;
        const Vector z = (Xte * fit.weights).array() + fit.bias;
        std::size_t correct = 0;
        for (Eigen::Index i = 0; i < z.size(); ++i) {
          const int pred = sigmoid(z(i)) > 0.5 ? 1 : 0;
          correct += pred == y_test[static_cast<std::size_t>(i)] ? 1 : 0;
        }
        accuracy_sum[pi][ci] += test.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(test.size());
      }
    }
  }

  GridSearchResult result;
  bool have_best = false;
  for (std::size_t pi = 0; pi < ps.size(); ++pi) {
    for (std::size_t ci = 0; ci < Cs.size(); ++ci) {
      GridCell cell{Cs[ci], ps[pi], accuracy_sum[pi][ci] / grid.folds};
      result.cells.push_back(cell);
      const bool better =
          !have_best || cell.mean_accuracy > result.best.mean_accuracy ||
          (cell.mean_accuracy == result.best.mean_accuracy &&
           (cell.percentile > result.best.percentile ||
            (cell.percentile == result.best.percentile && cell.C < result.best.C)));
      if (better) {
        result.best = cell;
        have_best = true;
      }
    }
  }
  result.model = fit_pipeline(X, y, result.best.C, result.best.percentile, std::move(feature_names));
  return result;
}

double paired_accuracy(std::span<const PairScore> pairs) {
  if (pairs.empty()) return 0.0;
  double credit = 0.0;
  for (const auto& p : pairs) {
    if (p.derail > p.healthy) credit += 1.0;
    else if (p.derail == p.healthy) credit += 0.5;
  }
  return credit / static_cast<double>(pairs.size());
}

double binary_accuracy(std::span<const double> probabilities, std::span<const int> y) {
  if (probabilities.size() != y.size()) throw DimensionError("accuracy: length mismatch");
  if (y.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < y.size(); ++i) correct += ((probabilities[i] > 0.5 ? 1 : 0) == y[i]) ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(y.size());
}

double f1_score(std::span<const double> probabilities, std::span<const int> y) {
  if (probabilities.size() != y.size()) throw DimensionError("f1: length mismatch");
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const bool pred = probabilities[i] > 0.5;
    if (pred && y[i] == 1) ++tp;
    else if (pred) ++fp;
    else if (y[i] == 1) ++fn;
  }
  if (tp == 0) return 0.0;
  return 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
}

}  // namespace derail
