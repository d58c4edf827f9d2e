#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "derail/error.hpp"
#include "derail/features.hpp"
#include "derail/util.hpp"

namespace derail {

namespace {

using nlohmann::json;

json parse_json(std::string_view text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(what, 0, e.what());
  }
}

PromptVector to_prompt_vector(const json& arr, const std::string& where) {
  if (!arr.is_array() || arr.size() != kPromptDim) {
    throw ParseError(where, 0, "expected an array of " + std::to_string(kPromptDim) + " reals");
  }
  PromptVector v{};
  for (std::size_t i = 0; i < kPromptDim; ++i) {
    if (!arr[i].is_number()) throw ParseError(where, 0, "prompt vector entries must be numbers");
    v[i] = arr[i].get<double>();
    if (!std::isfinite(v[i])) throw ParseError(where, 0, "prompt vector entries must be finite");
  }
  return v;
}

double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

PromptModel PromptModel::from_centroid_json(std::string_view text) {
  const std::string where = "prompt model";
  const auto doc = parse_json(text, where);
  PromptModel m;
  m.mode_ = Mode::centroids;
  try {
    for (const auto& t : doc.at("vocabulary")) m.vocabulary_.push_back(t.get<std::string>());
    for (const auto& x : doc.at("idf")) m.idf_.push_back(x.get<double>());
    const auto V = m.vocabulary_.size();
    if (V == 0) throw ParseError(where, 0, "empty vocabulary");
    if (m.idf_.size() != V) throw ParseError(where, 0, "idf length differs from vocabulary size");
    const auto& c = doc.at("centroids");
    if (!c.is_array()) throw ParseError(where, 0, "centroids must be an array");
    if (c.size() == kPromptDim && c[0].is_array()) {
      for (std::size_t k = 0; k < kPromptDim; ++k) {
        if (c[k].size() != V) throw ParseError(where, 0, "centroid length differs from vocabulary size");
        for (const auto& x : c[k]) m.centroids_[k].push_back(x.get<double>());
      }
    } else if (c.size() == kPromptDim * V) {
      for (std::size_t k = 0; k < kPromptDim; ++k) {
        for (std::size_t j = 0; j < V; ++j) m.centroids_[k].push_back(c[k * V + j].get<double>());
      }
    } else {
      throw ParseError(where, 0, "expected 6 centroids over the vocabulary");
    }
  } catch (const json::exception& e) {
    throw ParseError(where, 0, e.what());
  }
  for (std::size_t j = 0; j < m.vocabulary_.size(); ++j) {
    if (!m.vocab_index_.emplace(m.vocabulary_[j], j).second) {
      throw ParseError(where, 0, "duplicate vocabulary term '" + m.vocabulary_[j] + "'");
    }
    if (!std::isfinite(m.idf_[j])) throw ParseError(where, 0, "non-finite idf");
  }
  for (std::size_t k = 0; k < kPromptDim; ++k) {
    for (double x : m.centroids_[k]) {
      if (!std::isfinite(x)) throw ParseError(where, 0, "non-finite centroid weight");
    }
    m.centroid_norms_[k] = norm(m.centroids_[k]);
  }
  return m;
}

PromptModel PromptModel::load_centroids(const std::filesystem::path& path) {
  return from_centroid_json(read_file(path));
}

PromptModel PromptModel::from_passthrough_json(std::string_view text) {
  const auto doc = parse_json(text, "prompt passthrough");
  if (!doc.is_object()) throw ParseError("prompt passthrough", 0, "expected an object keyed by message id");
  std::unordered_map<std::string, PromptVector> table;
  for (const auto& [id, arr] : doc.items()) {
    table.emplace(id, to_prompt_vector(arr, "prompt passthrough entry '" + id + "'"));
  }
  return passthrough(std::move(table));
}

PromptModel PromptModel::load_passthrough(const std::filesystem::path& path) {
  return from_passthrough_json(read_file(path));
}

PromptModel PromptModel::passthrough(std::unordered_map<std::string, PromptVector> table) {
  PromptModel m;
  m.mode_ = Mode::passthrough;
  m.table_ = std::move(table);
  return m;
}

void PromptModel::merge_passthrough(const std::unordered_map<std::string, PromptVector>& more) {
  for (const auto& [id, v] : more) table_.emplace(id, v);
}

std::vector<double> PromptModel::tfidf(std::span<const Token> tokens) const {
  std::vector<double> v(vocabulary_.size(), 0.0);
  for (const auto& t : tokens) {
    auto it = vocab_index_.find(t.text);
    if (it != vocab_index_.end()) v[it->second] += 1.0;
  }
  for (std::size_t j = 0; j < v.size(); ++j) v[j] *= idf_[j];
  return v;
}

PromptVector PromptModel::features(std::string_view message_id, std::span<const Token> tokens) const {
  if (mode_ == Mode::passthrough) {
    auto it = table_.find(std::string(message_id));
    if (it == table_.end()) {
      throw MissingFeatureError("no prompt-type vector for message '" + std::string(message_id) + "'");
    }
    return it->second;
  }
  const auto v = tfidf(tokens);
  const double vn = norm(v);
  PromptVector out{};
  if (vn == 0.0) return out;
  for (std::size_t k = 0; k < kPromptDim; ++k) {
    if (centroid_norms_[k] == 0.0) continue;
    double dot = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) dot += v[j] * centroids_[k][j];
    out[k] = std::clamp(dot / (vn * centroid_norms_[k]), 0.0, 1.0);
  }
  return out;
}

}  // namespace derail
