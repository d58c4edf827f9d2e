#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <variant>

#include "derail/gru.hpp"
#include "derail/logistic.hpp"

namespace derail {

/// JSON {format_version, model_type: "logistic", feature_names,
/// selection_mask, weights, bias, C, percentile, standardization: {mean, scale}}.
std::string logistic_to_json(const LogisticModel& model);
LogisticModel logistic_from_json(std::string_view text);

/// JSON {format_version, model_type: "gru", dims: {input, hidden}, Wz, Wr,
/// Wh, Uz, Ur, Uh (row-major nested arrays), bz, br, bh, head, head_bias}.
std::string gru_to_json(const GruParams& params);
GruParams gru_from_json(std::string_view text);

using AnyModel = std::variant<LogisticModel, GruParams>;

/// Atomic write.
void save_model(const std::filesystem::path& path, const AnyModel& model);

/// Parses the whole file before returning anything; version mismatch throws
/// FormatVersionError, any other defect ParseError.
AnyModel load_model(const std::filesystem::path& path);

}  // namespace derail
