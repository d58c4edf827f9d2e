#include "derail/model_io.hpp"

#include <cmath>

#include <json.hpp>

#include "derail/error.hpp"
#include "derail/util.hpp"

namespace derail {

namespace {

using nlohmann::json;

json vector_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Vector vector_from(const json& a, Eigen::Index n, const char* what) {
  if (!a.is_array() || static_cast<Eigen::Index>(a.size()) != n) {
    throw ParseError("model", 0, std::string(what) + " has the wrong length");
  }
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = a.at(static_cast<std::size_t>(i)).get<double>();
  return v;
}

Matrix matrix_from(const json& a, Eigen::Index rows, Eigen::Index cols, const char* what) {
  if (!a.is_array() || static_cast<Eigen::Index>(a.size()) != rows) {
    throw ParseError("model", 0, std::string(what) + " has the wrong shape");
  }
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) m.row(i) = vector_from(a[static_cast<std::size_t>(i)], cols, what).transpose();
  return m;
}

json parse_model_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError("model", 0, std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("format_version") || !doc.contains("model_type")) {
    throw ParseError("model", 0, "missing format_version or model_type");
  }
  return doc;
}

void check_version(const json& doc, int expected) {
  if (doc["format_version"] != expected) {
    throw FormatVersionError("model format_version " + doc["format_version"].dump() +
                             " is not supported (expected " + std::to_string(expected) + ")");
  }
}

}  // namespace

std::string logistic_to_json(const LogisticModel& m) {
  json doc;
  doc["format_version"] = LogisticModel::kFormatVersion;
  doc["model_type"] = "logistic";
  doc["feature_names"] = m.feature_names;
  doc["selection_mask"] = m.selection_mask;
  doc["weights"] = vector_json(m.weights);
  doc["bias"] = m.bias;
  doc["C"] = m.C;
  doc["percentile"] = m.percentile;
  doc["standardization"] = {{"mean", vector_json(m.standardization.mean)},
                            {"scale", vector_json(m.standardization.scale)}};
  return doc.dump(1);
}

LogisticModel logistic_from_json(std::string_view text) {
  const auto doc = parse_model_json(text);
  if (doc["model_type"] != "logistic") throw ParseError("model", 0, "not a logistic model");
  check_version(doc, LogisticModel::kFormatVersion);
  try {
    LogisticModel m;
    m.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
    m.selection_mask = doc.at("selection_mask").get<std::vector<bool>>();
    const auto d = static_cast<Eigen::Index>(m.selection_mask.size());
    Eigen::Index kept = 0;
    for (bool b : m.selection_mask) kept += b ? 1 : 0;
    m.weights = vector_from(doc.at("weights"), kept, "weights");
    m.bias = doc.at("bias").get<double>();
    m.C = doc.at("C").get<double>();
    m.percentile = doc.at("percentile").get<double>();
    m.standardization.mean = vector_from(doc.at("standardization").at("mean"), d, "standardization mean");
    m.standardization.scale = vector_from(doc.at("standardization").at("scale"), d, "standardization scale");
    if (!m.feature_names.empty() && static_cast<Eigen::Index>(m.feature_names.size()) != d) {
      throw ParseError("model", 0, "feature_names length differs from selection_mask");
    }
    if (!m.weights.allFinite() || !std::isfinite(m.bias)) throw ParseError("model", 0, "non-finite weights");
    return m;
  } catch (const json::exception& e) {
    throw ParseError("model", 0, e.what());
  }
}

std::string gru_to_json(const GruParams& p) {
  json doc;
  doc["format_version"] = GruParams::kFormatVersion;
  doc["model_type"] = "gru";
  doc["dims"] = {{"input", p.input_dim()}, {"hidden", p.hidden_dim()}};
  doc["Wz"] = matrix_json(p.Wz);
  doc["Wr"] = matrix_json(p.Wr);
  doc["Wh"] = matrix_json(p.Wh);
  doc["Uz"] = matrix_json(p.Uz);
  doc["Ur"] = matrix_json(p.Ur);
  doc["Uh"] = matrix_json(p.Uh);
  doc["bz"] = vector_json(p.bz);
  doc["br"] = vector_json(p.br);
  doc["bh"] = vector_json(p.bh);
  doc["head"] = vector_json(p.head);
  doc["head_bias"] = p.head_bias;
  return doc.dump(1);
}

GruParams gru_from_json(std::string_view text) {
  const auto doc = parse_model_json(text);
  if (doc["model_type"] != "gru") throw ParseError("model", 0, "not a GRU model");
  check_version(doc, GruParams::kFormatVersion);
  try {
    const auto in = doc.at("dims").at("input").get<Eigen::Index>();
    const auto hid = doc.at("dims").at("hidden").get<Eigen::Index>();
    if (in <= 0 || hid <= 0) throw ParseError("model", 0, "GRU dimensions must be positive");
    GruParams p;
    p.Wz = matrix_from(doc.at("Wz"), hid, in, "Wz");
    p.Wr = matrix_from(doc.at("Wr"), hid, in, "Wr");
    p.Wh = matrix_from(doc.at("Wh"), hid, in, "Wh");
    p.Uz = matrix_from(doc.at("Uz"), hid, hid, "Uz");
    p.Ur = matrix_from(doc.at("Ur"), hid, hid, "Ur");
    p.Uh = matrix_from(doc.at("Uh"), hid, hid, "Uh");
    p.bz = vector_from(doc.at("bz"), hid, "bz");
    p.br = vector_from(doc.at("br"), hid, "br");
    p.bh = vector_from(doc.at("bh"), hid, "bh");
    p.head = vector_from(doc.at("head"), hid, "head");
    p.head_bias = doc.at("head_bias").get<double>();
    if (!p.all_finite()) throw ParseError("model", 0, "non-finite GRU parameters");
    return p;
  } catch (const json::exception& e) {
    throw ParseError("model", 0, e.what());
  }
}

void save_model(const std::filesystem::path& path, const AnyModel& model) {
  const std::string text = std::visit(
      [](const auto& m) {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, LogisticModel>) {
          return logistic_to_json(m);
        } else {
          return gru_to_json(m);
        }
      },
      model);
  write_file_atomic(path, text + "\n");
}

AnyModel load_model(const std::filesystem::path& path) {
  const auto text = read_file(path);
  const auto doc = parse_model_json(text);
  const auto type = doc["model_type"];
  if (type == "logistic") return logistic_from_json(text);
  if (type == "gru") return gru_from_json(text);
  throw ParseError(path.string(), 0, "unknown model_type " + type.dump());
}

}  // namespace derail
