#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "derail/corpus.hpp"
#include "derail/features.hpp"
#include "derail/gru.hpp"
#include "derail/lexicon.hpp"
#include "derail/logistic.hpp"
#include "derail/tagger.hpp"

namespace derail {

enum class Ablation {
  original_sentiment,  // binary has-positive / has-negative per message
  sentiment_words,     // top-k word scores
  tone,                // tone one-hot
  all_sentiment,       // the three above together
  text_only,           // politeness + prompt
  text_sentiment,      // politeness + prompt + top-k word scores
};

std::string_view to_string(Ablation a);
Ablation parse_ablation(std::string_view s);

/// Feature groups an ablation keeps.
std::vector<FeatureGroup> ablation_groups(Ablation a);

enum class WindowModel { logistic, gru, both };

std::string_view to_string(WindowModel m);
WindowModel parse_window_model(std::string_view s);

struct ExperimentConfig {
  Task task = Task::paired_wiki;
  Ablation ablation = Ablation::text_sentiment;
  std::size_t k_pos = 3;
  std::size_t k_neg = 3;
  std::size_t messages = 2;
  GridConfig grid;
  int runs = 10;
  std::uint64_t seed = 1;
  double test_fraction = 0.2;  // paired task: share of pairs held out per run
  WindowModel window_model = WindowModel::both;
  GruTrainConfig gru;

  std::filesystem::path corpus;
  std::filesystem::path lexicon_dir;     // SentiWordNet / AFINN / Bing Liu snapshots
  std::filesystem::path fused_lexicon;   // optional cached snapshot, used when set
  std::filesystem::path tagger_model;
  std::filesystem::path prompt_model;    // centroid JSON, optional
  std::filesystem::path prompt_passthrough;  // id -> vector JSON, optional
  std::filesystem::path output_dir;

  FeatureConfig feature_config() const;
  /// Throws ValidationError for inconsistent settings or missing paths.
  void validate() const;
};

/// Parses "key = value" lines ('#' comments). Keys mirror the CLI flags.
void apply_config_text(ExperimentConfig& config, std::string_view text,
                       const std::string& source_name = "<config>");

std::string config_echo_json(const ExperimentConfig& config);

/// Shared, immutable inputs of an experiment.
struct Resources {
  FusedLexicon lexicon;
  PolarityWordLists word_lists;
  PerceptronTagger tagger;
  PromptModel prompts;

  static Resources load(const ExperimentConfig& config, const Corpus& corpus);
};

/// Feature matrix of a whole corpus under the full registry (tone and
/// baseline flags included); ablations select columns from it.
struct FeatureTable {
  Matrix X;
  std::vector<int> y;
  std::vector<FeatureInfo> info;
  FeatureConfig config;

  std::vector<std::size_t> columns(const std::vector<FeatureGroup>& groups) const;
};

FeatureTable build_feature_table(const Corpus& corpus, const Resources& resources,
                                 const FeatureConfig& config);

/// Per-message sequences for the GRU: row t holds the politeness, prompt and
/// sentiment slots of message t restricted to `groups`.
std::vector<WindowSample> window_samples(const FeatureTable& table,
                                         const std::vector<FeatureGroup>& groups);

struct RunResult {
  int run = 0;
  double accuracy = 0.0;  // paired accuracy, or logistic test accuracy
  double f1 = 0.0;        // window task only
  double gru_accuracy = 0.0;
  double gru_f1 = 0.0;
  double chosen_C = 0.0;
  double chosen_percentile = 0.0;
  std::vector<double> coefficients;  // full registry of the ablation
};

struct Summary {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation
};

Summary summarize(const std::vector<double>& values);

struct RunReport {
  Task task = Task::paired_wiki;
  Ablation ablation = Ablation::text_sentiment;
  std::vector<RunResult> runs;
  Summary accuracy, f1, gru_accuracy, gru_f1;
  bool has_logistic = true;
  bool has_gru = false;
  ImportanceReport importance;
  std::vector<FeatureInfo> features;  // registry of the ablation's columns
  std::string config_json;
  std::string corpus_fingerprint;

  std::string to_json() const;
  std::string to_table() const;
  std::string importance_csv() const;
  static RunReport from_json(std::string_view text);
};

/// `runs` seeded repetitions. Paired task: hold out a random share of pairs,
/// grid-search on the rest, score held-out pairs. Window task: 70/20/10
/// split; logistic grid search on train+validation and/or GRU training,
/// both scored on test.
RunReport run_experiment(const ExperimentConfig& config, const Corpus& corpus,
                         const FeatureTable& table);

/// Writes report.json, report.txt and importance.csv under `dir` (atomic).
void write_report(const RunReport& report, const std::filesystem::path& dir,
                  const std::string& stem = "report");

/// Top predictors grouped by position before the final message (1 = the
/// message right before it). The `top_fraction` share of features with the
/// largest positive mean coefficients are counted as toxicity predictors and
/// the same share with the most negative as health predictors.
struct MessageImportance {
  std::vector<std::size_t> toxicity;  // index d-1 holds position d
  std::vector<std::size_t> health;
  std::size_t toxicity_unassigned = 0;  // conversation-level features
  std::size_t health_unassigned = 0;
  std::size_t per_side = 0;
};

MessageImportance importance_by_message(const ImportanceReport& importance,
                                        const std::vector<FeatureInfo>& features,
                                        std::size_t window, double top_fraction = 0.10);

}  // namespace derail
