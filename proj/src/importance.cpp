#include <algorithm>
#include <cmath>
#include <numeric>

#include "derail/error.hpp"
#include "derail/logistic.hpp"

namespace derail {

ImportanceReport importance_report(std::span<const std::vector<double>> coefficients,
                                   std::vector<std::string> names) {
  if (coefficients.empty()) throw ValidationError("importance report needs at least one run");
  const std::size_t d = names.size();
  ImportanceReport report;
  report.runs = coefficients.size();
  report.features.resize(d);
  for (const auto& c : coefficients) {
    if (c.size() != d) throw ValidationError("coefficient vector does not match the feature registry");
    for (std::size_t j = 0; j < d; ++j) {
      report.features[j].mean_coefficient += c[j];
      report.features[j].mean_abs_coefficient += std::abs(c[j]);
    }
  }
  const auto runs = static_cast<double>(coefficients.size());
  for (std::size_t j = 0; j < d; ++j) {
    auto& f = report.features[j];
    f.name = std::move(names[j]);
    f.mean_coefficient /= runs;
    f.mean_abs_coefficient /= runs;
    f.direction = f.mean_coefficient > 0.0   ? FeatureImportance::Direction::toxicity
                  : f.mean_coefficient < 0.0 ? FeatureImportance::Direction::health
                                             : FeatureImportance::Direction::none;
  }
  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return report.features[a].mean_abs_coefficient > report.features[b].mean_abs_coefficient;
  });
  for (std::size_t r = 0; r < d; ++r) report.features[order[r]].rank = r + 1;
  return report;
}

ImportanceReport importance_report(std::span<const LogisticModel> models) {
  if (models.empty()) throw ValidationError("importance report needs at least one model");
  const auto& names = models.front().feature_names;
  std::vector<std::vector<double>> coefs;
  for (const auto& m : models) {
    if (m.feature_names != names) throw ValidationError("models disagree on the feature registry");
    coefs.push_back(m.full_coefficients());
  }
  std::vector<std::string> reg = names;
  if (reg.empty()) {
    for (std::size_t j = 0; j < models.front().input_dim(); ++j) reg.push_back("f" + std::to_string(j));
  }
  return importance_report(coefs, std::move(reg));
}

std::vector<std::size_t> ImportanceReport::toxicity_order() const {
  std::vector<std::size_t> order(features.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return features[a].mean_coefficient > features[b].mean_coefficient;
  });
  return order;
}

std::vector<std::size_t> ImportanceReport::health_order() const {
  std::vector<std::size_t> order(features.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return features[a].mean_coefficient < features[b].mean_coefficient;
  });
  return order;
}

}  // namespace derail
