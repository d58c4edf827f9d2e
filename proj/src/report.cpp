#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "derail/error.hpp"
#include "derail/experiment.hpp"
#include "derail/util.hpp"

namespace derail {

namespace {

using nlohmann::json;

std::string_view direction_name(FeatureImportance::Direction d) {
  switch (d) {
    case FeatureImportance::Direction::toxicity: return "toxicity";
    case FeatureImportance::Direction::health: return "health";
    case FeatureImportance::Direction::none: return "none";
  }
  return "none";
}

FeatureImportance::Direction parse_direction(std::string_view s) {
  if (s == "toxicity") return FeatureImportance::Direction::toxicity;
  if (s == "health") return FeatureImportance::Direction::health;
  return FeatureImportance::Direction::none;
}

FeatureGroup parse_group(std::string_view s) {
  for (auto g : {FeatureGroup::politeness, FeatureGroup::prompt, FeatureGroup::sentiment_pos,
                 FeatureGroup::sentiment_neg, FeatureGroup::tone, FeatureGroup::baseline_sentiment}) {
    if (to_string(g) == s) return g;
  }
  throw ParseError("report", 0, "unknown feature group '" + std::string(s) + "'");
}

json summary_json(const Summary& s) { return {{"mean", s.mean}, {"stddev", s.stddev}}; }

Summary summary_from(const json& j) { return {j.at("mean").get<double>(), j.at("stddev").get<double>()}; }

std::string percent(double x) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << 100.0 * x;
  return os.str();
}

std::string fixed(double x, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << x;
  return os.str();
}

}  // namespace

std::string RunReport::to_json() const {
  json runs_json = json::array();
  for (const auto& r : runs) {
    json j = {{"run", r.run}};
    if (has_logistic) {
      j["accuracy"] = r.accuracy;
      j["chosen_C"] = r.chosen_C;
      j["chosen_percentile"] = r.chosen_percentile;
      if (task == Task::window_chat) j["f1"] = r.f1;
    }
    if (has_gru) {
      j["gru_accuracy"] = r.gru_accuracy;
      j["gru_f1"] = r.gru_f1;
    }
    runs_json.push_back(std::move(j));
  }
  json summary = json::object();
  if (has_logistic) {
    summary["accuracy"] = summary_json(accuracy);
    if (task == Task::window_chat) summary["f1"] = summary_json(f1);
  }
  if (has_gru) {
    summary["gru_accuracy"] = summary_json(gru_accuracy);
    summary["gru_f1"] = summary_json(gru_f1);
  }
  json imp = json::array();
  for (std::size_t j = 0; j < importance.features.size(); ++j) {
    const auto& f = importance.features[j];
    imp.push_back({{"name", f.name},
                   {"group", to_string(features[j].group)},
                   {"message", features[j].message},
                   {"mean_coefficient", f.mean_coefficient},
                   {"mean_abs_coefficient", f.mean_abs_coefficient},
                   {"rank", f.rank},
                   {"direction", direction_name(f.direction)}});
  }
  json feats = json::array();
  for (const auto& f : features) {
    feats.push_back({{"name", f.name}, {"group", to_string(f.group)}, {"message", f.message}});
  }
  json doc = {{"format_version", 1},
              {"task", to_string(task)},
              {"ablation", to_string(ablation)},
              {"has_logistic", has_logistic},
              {"has_gru", has_gru},
              {"runs", std::move(runs_json)},
              {"summary", std::move(summary)},
              {"features", std::move(feats)},
              {"importance", std::move(imp)},
              {"importance_runs", importance.runs},
              {"config", json::parse(config_json.empty() ? "{}" : config_json)},
              {"corpus_fingerprint", corpus_fingerprint}};
  return doc.dump(2) + "\n";
}

RunReport RunReport::from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError("report", 0, e.what());
  }
  RunReport r;
  try {
    if (doc.at("format_version") != 1) throw FormatVersionError("unsupported report format_version");
    r.task = parse_task(doc.at("task").get<std::string>());
    r.ablation = parse_ablation(doc.at("ablation").get<std::string>());
    r.has_logistic = doc.at("has_logistic").get<bool>();
    r.has_gru = doc.at("has_gru").get<bool>();
    for (const auto& j : doc.at("runs")) {
      RunResult run;
      run.run = j.at("run").get<int>();
      run.accuracy = j.value("accuracy", 0.0);
      run.f1 = j.value("f1", 0.0);
      run.gru_accuracy = j.value("gru_accuracy", 0.0);
      run.gru_f1 = j.value("gru_f1", 0.0);
      run.chosen_C = j.value("chosen_C", 0.0);
      run.chosen_percentile = j.value("chosen_percentile", 0.0);
      r.runs.push_back(std::move(run));
    }
    const auto& s = doc.at("summary");
    if (s.contains("accuracy")) r.accuracy = summary_from(s["accuracy"]);
    if (s.contains("f1")) r.f1 = summary_from(s["f1"]);
    if (s.contains("gru_accuracy")) r.gru_accuracy = summary_from(s["gru_accuracy"]);
    if (s.contains("gru_f1")) r.gru_f1 = summary_from(s["gru_f1"]);
    for (const auto& f : doc.at("features")) {
      r.features.push_back({f.at("name").get<std::string>(), parse_group(f.at("group").get<std::string>()),
                            f.at("message").get<std::size_t>()});
    }
    for (const auto& f : doc.at("importance")) {
      FeatureImportance fi;
      fi.name = f.at("name").get<std::string>();
      fi.mean_coefficient = f.at("mean_coefficient").get<double>();
      fi.mean_abs_coefficient = f.at("mean_abs_coefficient").get<double>();
      fi.rank = f.at("rank").get<std::size_t>();
      fi.direction = parse_direction(f.at("direction").get<std::string>());
      r.importance.features.push_back(std::move(fi));
    }
    r.importance.runs = doc.at("importance_runs").get<std::size_t>();
    r.config_json = doc.at("config").dump();
    r.corpus_fingerprint = doc.at("corpus_fingerprint").get<std::string>();
  } catch (const json::exception& e) {
    throw ParseError("report", 0, e.what());
  }
  return r;
}

std::string RunReport::to_table() const {
  std::ostringstream os;
  os << "task      " << to_string(task) << "\n";
  os << "ablation  " << to_string(ablation) << "\n";
  os << "features  " << features.size() << "\n";
  os << "corpus    " << corpus_fingerprint << "\n\n";

  os << std::left << std::setw(5) << "run";
  if (has_logistic) {
    os << std::right << std::setw(10) << "accuracy";
    if (task == Task::window_chat) os << std::setw(8) << "f1";
    os << std::setw(10) << "C" << std::setw(12) << "percentile";
  }
  if (has_gru) os << std::right << std::setw(10) << "gru_acc" << std::setw(8) << "gru_f1";
  os << "\n";
  for (const auto& r : runs) {
    os << std::left << std::setw(5) << r.run << std::right;
    if (has_logistic) {
      os << std::setw(10) << percent(r.accuracy);
      if (task == Task::window_chat) os << std::setw(8) << fixed(r.f1, 3);
      std::ostringstream c;
      c << r.chosen_C;
      os << std::setw(10) << c.str() << std::setw(12) << fixed(r.chosen_percentile, 0);
    }
    if (has_gru) os << std::setw(10) << percent(r.gru_accuracy) << std::setw(8) << fixed(r.gru_f1, 3);
    os << "\n";
  }
  os << "\n";
  if (has_logistic) {
    os << "accuracy  " << percent(accuracy.mean) << " +- " << percent(accuracy.stddev) << "\n";
    if (task == Task::window_chat) os << "f1        " << fixed(f1.mean, 3) << " +- " << fixed(f1.stddev, 3) << "\n";
  }
  if (has_gru) {
    os << "gru acc   " << percent(gru_accuracy.mean) << " +- " << percent(gru_accuracy.stddev) << "\n";
    os << "gru f1    " << fixed(gru_f1.mean, 3) << " +- " << fixed(gru_f1.stddev, 3) << "\n";
  }
  if (!importance.features.empty()) {
    os << "\ntop features by mean |coefficient|\n";
    std::vector<std::size_t> order(importance.features.size());
    for (std::size_t j = 0; j < order.size(); ++j) order[importance.features[j].rank - 1] = j;
    const std::size_t shown = std::min<std::size_t>(15, order.size());
    for (std::size_t k = 0; k < shown; ++k) {
      const auto& f = importance.features[order[k]];
      os << std::right << std::setw(4) << f.rank << "  " << std::left << std::setw(28) << f.name
         << std::right << std::setw(10) << fixed(f.mean_coefficient, 4) << "  "
         << direction_name(f.direction) << "\n";
    }
  }
  return os.str();
}

std::string RunReport::importance_csv() const {
  std::string out = "name,group,message,mean_coefficient,mean_abs_coefficient,rank,direction\n";
  for (std::size_t j = 0; j < importance.features.size(); ++j) {
    const auto& f = importance.features[j];
    out += f.name + "," + std::string(to_string(features[j].group)) + "," +
           std::to_string(features[j].message) + "," + format_double(f.mean_coefficient) + "," +
           format_double(f.mean_abs_coefficient) + "," + std::to_string(f.rank) + "," +
           std::string(direction_name(f.direction)) + "\n";
  }
  return out;
}

void write_report(const RunReport& report, const std::filesystem::path& dir, const std::string& stem) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  write_file_atomic(dir / (stem + ".json"), report.to_json());
  write_file_atomic(dir / (stem + ".txt"), report.to_table());
  if (report.has_logistic) write_file_atomic(dir / (stem + "-importance.csv"), report.importance_csv());
}

}  // namespace derail
