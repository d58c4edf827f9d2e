#include "derail/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "derail/error.hpp"
#include "derail/random.hpp"
#include "derail/util.hpp"

namespace derail {

namespace {

using nlohmann::json;

bool contains(const std::vector<FeatureGroup>& groups, FeatureGroup g) {
  return std::find(groups.begin(), groups.end(), g) != groups.end();
}

Matrix take(const Matrix& X, const std::vector<std::size_t>& rows, const std::vector<std::size_t>& cols) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          X(static_cast<Eigen::Index>(rows[i]), static_cast<Eigen::Index>(cols[j]));
    }
  }
  return out;
}

std::vector<std::string> names_of(const std::vector<FeatureInfo>& info, const std::vector<std::size_t>& cols) {
  std::vector<std::string> out;
  out.reserve(cols.size());
  for (auto c : cols) out.push_back(info[c].name);
  return out;
}

std::string unquote(std::string_view v) {
  v = trim(v);
  if (v.size() >= 2 && ((v.front() == '"' && v.back() == '"') || (v.front() == '\'' && v.back() == '\''))) {
    v = v.substr(1, v.size() - 2);
  }
  return std::string(v);
}

template <typename T>
T parse_number(std::string_view v, const std::string& key, const std::string& src, std::size_t line) {
  T out{};
  const auto s = trim(v);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ParseError(src, line, "value of '" + key + "' is not a valid number");
  }
  return out;
}

std::vector<double> parse_list(std::string_view v, const std::string& key, const std::string& src,
                               std::size_t line) {
  v = trim(v);
  if (!v.empty() && v.front() == '[' && v.back() == ']') v = v.substr(1, v.size() - 2);
  std::vector<double> out;
  for (auto item : split(v, ',')) {
    if (trim(item).empty()) continue;
    out.push_back(parse_number<double>(item, key, src, line));
  }
  if (out.empty()) throw ParseError(src, line, "'" + key + "' needs at least one value");
  return out;
}

}  // namespace

std::string_view to_string(Ablation a) {
  switch (a) {
    case Ablation::original_sentiment: return "original-sentiment";
    case Ablation::sentiment_words: return "sentiment-words";
    case Ablation::tone: return "tone";
    case Ablation::all_sentiment: return "all-sentiment";
    case Ablation::text_only: return "text-only";
    case Ablation::text_sentiment: return "text+sentiment";
  }
  return "text+sentiment";
}

Ablation parse_ablation(std::string_view s) {
  for (auto a : {Ablation::original_sentiment, Ablation::sentiment_words, Ablation::tone,
                 Ablation::all_sentiment, Ablation::text_only, Ablation::text_sentiment}) {
    if (to_string(a) == s) return a;
  }
  if (s == "text-sentiment") return Ablation::text_sentiment;
  throw ValidationError("unknown ablation '" + std::string(s) + "'");
}

std::vector<FeatureGroup> ablation_groups(Ablation a) {
  using G = FeatureGroup;
  switch (a) {
    case Ablation::original_sentiment: return {G::baseline_sentiment};
    case Ablation::sentiment_words: return {G::sentiment_pos, G::sentiment_neg};
    case Ablation::tone: return {G::tone};
    case Ablation::all_sentiment:
      return {G::sentiment_pos, G::sentiment_neg, G::tone, G::baseline_sentiment};
    case Ablation::text_only: return {G::politeness, G::prompt};
    case Ablation::text_sentiment: return {G::politeness, G::prompt, G::sentiment_pos, G::sentiment_neg};
  }
  return {};
}

std::string_view to_string(WindowModel m) {
  switch (m) {
    case WindowModel::logistic: return "logistic";
    case WindowModel::gru: return "gru";
    case WindowModel::both: return "both";
  }
  return "both";
}

WindowModel parse_window_model(std::string_view s) {
  for (auto m : {WindowModel::logistic, WindowModel::gru, WindowModel::both}) {
    if (to_string(m) == s) return m;
  }
  throw ValidationError("unknown window model '" + std::string(s) + "'");
}

FeatureConfig ExperimentConfig::feature_config() const {
  FeatureConfig f;
  f.messages = messages;
  f.k_pos = k_pos;
  f.k_neg = k_neg;
  f.tone = messages >= 2;
  f.baseline_sentiment = true;
  f.selection = task == Task::paired_wiki ? MessageSelection::first : MessageSelection::before_final;
  return f;
}

void ExperimentConfig::validate() const {
  grid.validate();
  if (k_pos < 1 || k_neg < 1) throw ValidationError("k_pos and k_neg must be at least 1");
  if (messages < 1) throw ValidationError("messages must be at least 1");
  if (runs < 1) throw ValidationError("runs must be at least 1");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ValidationError("test_fraction must lie in (0, 1)");
  const auto groups = ablation_groups(ablation);
  if (contains(groups, FeatureGroup::tone) && messages < 2) {
    throw ValidationError("ablation '" + std::string(to_string(ablation)) + "' needs at least two messages");
  }
  if (task == Task::window_chat && window_model != WindowModel::logistic &&
      contains(groups, FeatureGroup::tone)) {
    throw ValidationError("the GRU consumes per-message features only; ablation '" +
                          std::string(to_string(ablation)) + "' includes the conversation-level tone");
  }
  auto require_file = [](const std::filesystem::path& p, const char* what) {
    if (p.empty()) throw ValidationError(std::string(what) + " path is not set");
    if (!std::filesystem::exists(p)) throw ValidationError(std::string(what) + " not found: " + p.string());
  };
  require_file(corpus, "corpus");
  require_file(lexicon_dir, "lexicon directory");
  require_file(tagger_model, "tagger model");
  if (!prompt_model.empty()) require_file(prompt_model, "prompt model");
  if (!prompt_passthrough.empty()) require_file(prompt_passthrough, "prompt passthrough table");
  if (!prompt_model.empty() && !prompt_passthrough.empty()) {
    throw ValidationError("give either a centroid prompt model or a passthrough table, not both");
  }
}

void apply_config_text(ExperimentConfig& c, std::string_view text, const std::string& src) {
  std::size_t lineno = 0;
  for (auto raw : split(text, '\n')) {
    ++lineno;
    auto line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty() || line.front() == '[') continue;  // blank, comment, or section header
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(src, lineno, "expected key = value");
    std::string key(trim(line.substr(0, eq)));
    std::replace(key.begin(), key.end(), '-', '_');
    const std::string value = unquote(line.substr(eq + 1));

    auto num = [&]<typename T>(T& out) { out = parse_number<T>(value, key, src, lineno); };
    if (key == "task") c.task = parse_task(value);
    else if (key == "ablation") c.ablation = parse_ablation(value);
    else if (key == "k_pos") num(c.k_pos);
    else if (key == "k_neg") num(c.k_neg);
    else if (key == "messages") num(c.messages);
    else if (key == "runs") num(c.runs);
    else if (key == "seed") num(c.seed);
    else if (key == "folds") num(c.grid.folds);
    else if (key == "c_grid") c.grid.C_grid = parse_list(value, key, src, lineno);
    else if (key == "percentile_grid") c.grid.percentile_grid = parse_list(value, key, src, lineno);
    else if (key == "test_fraction") num(c.test_fraction);
    else if (key == "window_model") c.window_model = parse_window_model(value);
    else if (key == "gru_hidden") num(c.gru.hidden_dim);
    else if (key == "gru_learning_rate") num(c.gru.learning_rate);
    else if (key == "gru_momentum") num(c.gru.momentum);
    else if (key == "gru_warmup_epochs") num(c.gru.warmup_epochs);
    else if (key == "gru_decay_every") num(c.gru.decay_every);
    else if (key == "gru_batch_size") num(c.gru.batch_size);
    else if (key == "gru_max_epochs") num(c.gru.max_epochs);
    else if (key == "gru_patience") num(c.gru.patience);
    else if (key == "gru_clip") num(c.gru.gradient_clip);
    else if (key == "corpus") c.corpus = value;
    else if (key == "lexicon_dir") c.lexicon_dir = value;
    else if (key == "fused_lexicon") c.fused_lexicon = value;
    else if (key == "tagger_model") c.tagger_model = value;
    else if (key == "prompt_model") c.prompt_model = value;
    else if (key == "prompt_passthrough") c.prompt_passthrough = value;
    else if (key == "output_dir") c.output_dir = value;
    else throw ParseError(src, lineno, "unknown key '" + key + "'");
  }
}

std::string config_echo_json(const ExperimentConfig& c) {
  // The output directory is left out so that identical experiments written to
  // different places produce identical reports.
  json doc = {
      {"task", to_string(c.task)},
      {"ablation", to_string(c.ablation)},
      {"k_pos", c.k_pos},
      {"k_neg", c.k_neg},
      {"messages", c.messages},
      {"runs", c.runs},
      {"seed", c.seed},
      {"test_fraction", c.test_fraction},
      {"grid", {{"C", c.grid.C_grid}, {"percentile", c.grid.percentile_grid}, {"folds", c.grid.folds}}},
      {"paths",
       {{"corpus", c.corpus.string()},
        {"lexicon_dir", c.lexicon_dir.string()},
        {"fused_lexicon", c.fused_lexicon.string()},
        {"tagger_model", c.tagger_model.string()},
        {"prompt_model", c.prompt_model.string()},
        {"prompt_passthrough", c.prompt_passthrough.string()}}},
  };
  if (c.task == Task::window_chat) {
    doc["window_model"] = to_string(c.window_model);
    doc["gru"] = {{"hidden", c.gru.hidden_dim},
                  {"learning_rate", c.gru.learning_rate},
                  {"momentum", c.gru.momentum},
                  {"warmup_epochs", c.gru.warmup_epochs},
                  {"decay_every", c.gru.decay_every},
                  {"batch_size", c.gru.batch_size},
                  {"max_epochs", c.gru.max_epochs},
                  {"patience", c.gru.patience},
                  {"clip", c.gru.gradient_clip}};
  }
  return doc.dump();
}

Resources Resources::load(const ExperimentConfig& config, const Corpus&) {
  Resources r;
  const auto paths = LexiconPaths::in_directory(config.lexicon_dir);
  if (!config.fused_lexicon.empty() && std::filesystem::exists(config.fused_lexicon)) {
    r.lexicon = FusedLexicon::load(config.fused_lexicon);
  } else {
    r.lexicon = load_and_fuse(paths);
  }
  r.word_lists = PolarityWordLists::from_entries(load_bingliu(paths.bingliu_positive, paths.bingliu_negative));
  r.tagger = PerceptronTagger::load(config.tagger_model);
  if (!config.prompt_model.empty()) {
    r.prompts = PromptModel::load_centroids(config.prompt_model);
  } else if (!config.prompt_passthrough.empty()) {
    r.prompts = PromptModel::load_passthrough(config.prompt_passthrough);
  } else {
    r.prompts = PromptModel::passthrough({});
  }
  return r;
}

std::vector<std::size_t> FeatureTable::columns(const std::vector<FeatureGroup>& groups) const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < info.size(); ++j) {
    if (contains(groups, info[j].group)) out.push_back(j);
  }
  return out;
}

FeatureTable build_feature_table(const Corpus& corpus, const Resources& resources,
                                 const FeatureConfig& config) {
  FeatureExtractor extractor(resources.lexicon, resources.tagger, resources.prompts, &resources.word_lists);
  FeatureTable t;
  t.config = config;
  t.info = feature_registry(config);
  t.X.resize(static_cast<Eigen::Index>(corpus.samples.size()), static_cast<Eigen::Index>(t.info.size()));
  t.y.reserve(corpus.samples.size());
  for (std::size_t i = 0; i < corpus.samples.size(); ++i) {
    const auto& s = corpus.samples[i];
    FeatureVector fv;
    try {
      fv = extractor.conversation_vector(s, config);
    } catch (const MissingFeatureError& e) {
      throw MissingFeatureError("conversation '" + s.id + "': " + e.what());
    }
    for (std::size_t j = 0; j < fv.values.size(); ++j) {
      t.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = fv.values[j];
    }
    t.y.push_back(label_value(s.label));
  }
  return t;
}

std::vector<WindowSample> window_samples(const FeatureTable& table,
                                         const std::vector<FeatureGroup>& groups) {
  const std::size_t M = table.config.messages;
  std::vector<std::vector<std::size_t>> cols(M);
  for (std::size_t j = 0; j < table.info.size(); ++j) {
    const auto& f = table.info[j];
    if (f.message >= 1 && contains(groups, f.group)) cols[f.message - 1].push_back(j);
  }
  if (cols.empty() || cols[0].empty()) throw ValidationError("no per-message features selected for the GRU");
  std::vector<WindowSample> out;
  out.reserve(table.y.size());
  for (Eigen::Index i = 0; i < table.X.rows(); ++i) {
    WindowSample w;
    w.sequence.resize(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(cols[0].size()));
    for (std::size_t m = 0; m < M; ++m) {
      for (std::size_t k = 0; k < cols[m].size(); ++k) {
        w.sequence(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k)) =
            table.X(i, static_cast<Eigen::Index>(cols[m][k]));
      }
    }
    w.label = table.y[static_cast<std::size_t>(i)];
    out.push_back(std::move(w));
  }
  return out;
}

Summary summarize(const std::vector<double>& values) {
  Summary s;
  if (values.empty()) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

namespace {

RunResult paired_run(const ExperimentConfig& config, const Corpus& corpus, const FeatureTable& table,
                     const std::vector<std::size_t>& cols, const std::vector<std::string>& names, int run) {
  std::vector<std::size_t> order(corpus.pairs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(config.seed, "pair-split", static_cast<std::uint64_t>(run)));
  rng.shuffle(std::span<std::size_t>(order));
  auto n_test = static_cast<std::size_t>(std::llround(config.test_fraction * static_cast<double>(order.size())));
  n_test = std::clamp<std::size_t>(n_test, 1, order.size() - 1);

  std::vector<std::size_t> train_rows;
  std::vector<std::string> groups;
  for (std::size_t k = n_test; k < order.size(); ++k) {
    const auto& p = corpus.pairs[order[k]];
    for (auto i : {p.derail, p.healthy}) {
      train_rows.push_back(i);
      groups.push_back(p.pair_id);
    }
  }
  std::vector<int> y_train;
  for (auto i : train_rows) y_train.push_back(table.y[i]);

  GridConfig grid = config.grid;
  grid.seed = derive_seed(config.seed, "cv", static_cast<std::uint64_t>(run));
  const auto result = grid_search_cv(take(table.X, train_rows, cols), y_train, groups, grid, names);

  std::vector<PairScore> scores;
  std::vector<double> row(cols.size());
  auto proba = [&](std::size_t i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      row[j] = table.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(cols[j]));
    }
    return result.model.predict_proba(row);
  };
  for (std::size_t k = 0; k < n_test; ++k) {
    const auto& p = corpus.pairs[order[k]];
    scores.push_back({proba(p.derail), proba(p.healthy)});
  }

  RunResult r;
  r.run = run;
  r.accuracy = paired_accuracy(scores);
  r.chosen_C = result.best.C;
  r.chosen_percentile = result.best.percentile;
  r.coefficients = result.model.full_coefficients();
  return r;
}

RunResult window_run(const ExperimentConfig& config, const FeatureTable& table,
                     const std::vector<std::size_t>& cols, const std::vector<std::string>& names,
                     const std::vector<WindowSample>& windows, int run) {
  RunResult r;
  r.run = run;
  GruTrainConfig gru = config.gru;
  gru.seed = derive_seed(config.seed, "window-run", static_cast<std::uint64_t>(run));
  const auto split = split_indices(table.y.size(), gru.train_fraction, gru.validation_fraction, gru.seed);

  if (config.window_model != WindowModel::gru) {
    std::vector<std::size_t> fit_rows = split.train;
    fit_rows.insert(fit_rows.end(), split.validation.begin(), split.validation.end());
    std::vector<int> y_fit;
    for (auto i : fit_rows) y_fit.push_back(table.y[i]);
    GridConfig grid = config.grid;
    grid.seed = derive_seed(config.seed, "cv", static_cast<std::uint64_t>(run));
    const auto result = grid_search_cv(take(table.X, fit_rows, cols), y_fit, {}, grid, names);
    const Vector p = result.model.predict_proba(take(table.X, split.test, cols));
    std::vector<double> probs(p.data(), p.data() + p.size());
    std::vector<int> y_test;
    for (auto i : split.test) y_test.push_back(table.y[i]);
    r.accuracy = binary_accuracy(probs, y_test);
    r.f1 = f1_score(probs, y_test);
    r.chosen_C = result.best.C;
    r.chosen_percentile = result.best.percentile;
    r.coefficients = result.model.full_coefficients();
  }
  if (config.window_model != WindowModel::logistic) {
    const auto trained = train_gru(windows, gru);
    r.gru_accuracy = trained.test_accuracy;
    r.gru_f1 = trained.test_f1;
  }
  return r;
}

}  // namespace

RunReport run_experiment(const ExperimentConfig& config, const Corpus& corpus, const FeatureTable& table) {
  const auto groups = ablation_groups(config.ablation);
  const auto cols = table.columns(groups);
  if (cols.empty()) throw ValidationError("ablation selects no features");
  const auto names = names_of(table.info, cols);

  RunReport report;
  report.task = config.task;
  report.ablation = config.ablation;
  report.config_json = config_echo_json(config);
  report.corpus_fingerprint = corpus.fingerprint;
  for (auto c : cols) report.features.push_back(table.info[c]);

  std::vector<WindowSample> windows;
  if (config.task == Task::window_chat) {
    report.has_logistic = config.window_model != WindowModel::gru;
    report.has_gru = config.window_model != WindowModel::logistic;
    if (report.has_gru) windows = window_samples(table, groups);
  } else if (corpus.pairs.size() < 2) {
    throw ValidationError("the paired task needs at least two pairs");
  }

  for (int run = 0; run < config.runs; ++run) {
    try {
      report.runs.push_back(config.task == Task::paired_wiki
                                ? paired_run(config, corpus, table, cols, names, run)
                                : window_run(config, table, cols, names, windows, run));
    } catch (const Error& e) {
      throw Error(e.kind(), "run " + std::to_string(run) + " of ablation " +
                                std::string(to_string(config.ablation)) + ": " + e.what());
    }
  }

  std::vector<double> acc, f1, gacc, gf1;
  std::vector<std::vector<double>> coefs;
  for (const auto& r : report.runs) {
    acc.push_back(r.accuracy);
    f1.push_back(r.f1);
    gacc.push_back(r.gru_accuracy);
    gf1.push_back(r.gru_f1);
    if (report.has_logistic) coefs.push_back(r.coefficients);
  }
  report.accuracy = summarize(acc);
  report.f1 = summarize(f1);
  report.gru_accuracy = summarize(gacc);
  report.gru_f1 = summarize(gf1);
  if (report.has_logistic) report.importance = importance_report(coefs, names);
  return report;
}

MessageImportance importance_by_message(const ImportanceReport& importance,
                                        const std::vector<FeatureInfo>& features,
                                        std::size_t window, double top_fraction) {
  if (features.size() != importance.features.size()) {
    throw ValidationError("importance table and feature registry differ in length");
  }
  MessageImportance out;
  out.toxicity.assign(window, 0);
  out.health.assign(window, 0);
  out.per_side = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(top_fraction * static_cast<double>(features.size()))));

  auto tally = [&](const std::vector<std::size_t>& order, bool toxicity) {
    std::size_t taken = 0;
    for (auto j : order) {
      if (taken == out.per_side) break;
      const double c = importance.features[j].mean_coefficient;
      if (toxicity ? !(c > 0.0) : !(c < 0.0)) break;
      ++taken;
      const auto m = features[j].message;
      if (m == 0 || m > window) {
        ++(toxicity ? out.toxicity_unassigned : out.health_unassigned);
        continue;
      }
      const std::size_t position = window - m + 1;
      ++(toxicity ? out.toxicity : out.health)[position - 1];
    }
  };
  tally(importance.toxicity_order(), true);
  tally(importance.health_order(), false);
  return out;
}

}  // namespace derail
