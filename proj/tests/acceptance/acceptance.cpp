// Acceptance checks, one criterion per invocation:
//
//   derail_acceptance --criterion N
//
// Prints one PASS/FAIL line per check and exits non-zero when any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "derail/corpus.hpp"
#include "derail/error.hpp"
#include "derail/experiment.hpp"
#include "derail/gru.hpp"
#include "derail/lexicon.hpp"
#include "derail/logistic.hpp"
#include "derail/random.hpp"
#include "derail/synthetic.hpp"
#include "derail/util.hpp"

namespace fs = std::filesystem;
using namespace derail;

namespace {

int failures = 0;

void report(bool ok, int criterion, const std::string& what, const std::string& detail) {
  if (!ok) ++failures;
  std::cout << (ok ? "PASS" : "FAIL") << "  [" << criterion << "] " << what << ": " << detail
            << std::endl;
}

std::string fmt(double x, int precision = 4) {
  std::ostringstream s;
  s.precision(precision);
  s << std::fixed << x;
  return s.str();
}

std::string sci(double x) {
  std::ostringstream s;
  s.precision(2);
  s << std::scientific << x;
  return s.str();
}

fs::path data_dir() { return DERAIL_DATA_DIR; }

ExperimentConfig base_config() {
  ExperimentConfig c;
  c.lexicon_dir = data_dir() / "lexicons";
  c.tagger_model = data_dir() / "tagger" / "perceptron-en-0.1.txt";
  return c;
}

// ---------------------------------------------------------------------------
// Wikipedia corpus (criteria 1-4)

std::optional<fs::path> wiki_corpus() {
  if (const char* env = std::getenv("DERAIL_WIKI_CORPUS"); env && *env) return fs::path(env);
  const auto local = data_dir() / "corpus" / "cga.jsonl";
  if (fs::exists(local)) return local;
  return std::nullopt;
}

struct WikiSetup {
  ExperimentConfig config;
  Corpus corpus;
  std::unique_ptr<Resources> resources;
};

std::optional<WikiSetup> load_wiki(std::size_t k_pos = 3, std::size_t k_neg = 3) {
  const auto path = wiki_corpus();
  if (!path || !fs::exists(*path)) return std::nullopt;
  WikiSetup s;
  s.config = base_config();
  s.config.corpus = *path;
  s.config.k_pos = k_pos;
  s.config.k_neg = k_neg;
  if (const char* p = std::getenv("DERAIL_WIKI_PROMPTS"); p && *p) s.config.prompt_passthrough = p;
  s.config.validate();
  s.corpus = ingest_corpus(*path, Task::paired_wiki);
  s.resources = std::make_unique<Resources>(Resources::load(s.config, s.corpus));
  return s;
}

void corpus_missing(int criterion, const std::string& what) {
  report(false, criterion, what,
         "Wikipedia conversation corpus not available (set DERAIL_WIKI_CORPUS or place "
         "data/corpus/cga.jsonl; see docs/corpus.md)");
}

RunReport run_ablation(WikiSetup& s, Ablation a, const FeatureTable& table) {
  s.config.ablation = a;
  return run_experiment(s.config, s.corpus, table);
}

void criterion1() {
  auto setup = load_wiki();
  if (!setup) {
    corpus_missing(1, "text-only paired accuracy 58.6 +- 3");
    corpus_missing(1, "text+sentiment paired accuracy 60.5 +- 3");
    corpus_missing(1, "text+sentiment beats text-only in >= 9 of 10 runs");
    corpus_missing(1, "runtime under 10 minutes");
    return;
  }
  const auto t0 = std::chrono::steady_clock::now();
  report(setup->corpus.pairs.size() == 1270, 1, "corpus holds 1,270 pairs",
         std::to_string(setup->corpus.pairs.size()) + " pairs");
  const auto table =
      build_feature_table(setup->corpus, *setup->resources, setup->config.feature_config());
  const auto text = run_ablation(*setup, Ablation::text_only, table);
  const auto both = run_ablation(*setup, Ablation::text_sentiment, table);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const double a = 100 * text.accuracy.mean, b = 100 * both.accuracy.mean;
  report(std::abs(a - 58.6) <= 3.0, 1, "text-only paired accuracy 58.6 +- 3", fmt(a, 2) + "%");
  report(std::abs(b - 60.5) <= 3.0, 1, "text+sentiment paired accuracy 60.5 +- 3", fmt(b, 2) + "%");
  int wins = 0;
  for (std::size_t r = 0; r < text.runs.size(); ++r) {
    if (both.runs[r].accuracy > text.runs[r].accuracy) ++wins;
  }
  report(wins >= 9, 1, "text+sentiment beats text-only in >= 9 of 10 runs",
         std::to_string(wins) + " of " + std::to_string(text.runs.size()));
  report(seconds < 600, 1, "runtime under 10 minutes", fmt(seconds, 1) + " s");
}

void criterion2() {
  auto setup = load_wiki();
  if (!setup) {
    corpus_missing(2, "original sentiment <= 53%");
    corpus_missing(2, "our sentiment 55.7 +- 3");
    corpus_missing(2, "tone only <= 53%");
    corpus_missing(2, "combined within 1.5 points of our sentiment");
    return;
  }
  const auto table =
      build_feature_table(setup->corpus, *setup->resources, setup->config.feature_config());
  const double orig = 100 * run_ablation(*setup, Ablation::original_sentiment, table).accuracy.mean;
  const double ours = 100 * run_ablation(*setup, Ablation::sentiment_words, table).accuracy.mean;
  const double tone = 100 * run_ablation(*setup, Ablation::tone, table).accuracy.mean;
  const double all = 100 * run_ablation(*setup, Ablation::all_sentiment, table).accuracy.mean;
  report(orig <= 53.0, 2, "original sentiment <= 53%", fmt(orig, 2) + "%");
  report(std::abs(ours - 55.7) <= 3.0, 2, "our sentiment 55.7 +- 3", fmt(ours, 2) + "%");
  report(tone <= 53.0, 2, "tone only <= 53%", fmt(tone, 2) + "%");
  report(std::abs(all - ours) <= 1.5, 2, "combined within 1.5 points of our sentiment",
         fmt(all, 2) + "% vs " + fmt(ours, 2) + "%");
}

void criterion3() {
  auto s33 = load_wiki(3, 3);
  auto s52 = load_wiki(5, 2);
  if (!s33 || !s52) {
    corpus_missing(3, "5/2 beats 3/3 by 0..2 points");
    corpus_missing(3, "sentiment feature among top-14 toxicity predictors");
    corpus_missing(3, "positive-word feature among top-14 health predictors");
    return;
  }
  const auto t33 = build_feature_table(s33->corpus, *s33->resources, s33->config.feature_config());
  const auto t52 = build_feature_table(s52->corpus, *s52->resources, s52->config.feature_config());
  const auto r33 = run_ablation(*s33, Ablation::text_sentiment, t33);
  const auto r52 = run_ablation(*s52, Ablation::text_sentiment, t52);
  const double diff = 100 * (r52.accuracy.mean - r33.accuracy.mean);
  report(diff >= 0.0 && diff <= 2.0, 3, "5/2 beats 3/3 by 0..2 points", fmt(diff, 2) + " points");

  const auto& imp = r33.importance;
  bool sentiment_toxic = false, positive_healthy = false;
  auto tox = imp.toxicity_order();
  auto health = imp.health_order();
  for (std::size_t i = 0; i < 14 && i < tox.size(); ++i) {
    const auto g = r33.features[tox[i]].group;
    if (imp.features[tox[i]].mean_coefficient > 0 &&
        (g == FeatureGroup::sentiment_pos || g == FeatureGroup::sentiment_neg)) {
      sentiment_toxic = true;
    }
  }
  for (std::size_t i = 0; i < 14 && i < health.size(); ++i) {
    if (imp.features[health[i]].mean_coefficient < 0 &&
        r33.features[health[i]].group == FeatureGroup::sentiment_pos) {
      positive_healthy = true;
    }
  }
  report(sentiment_toxic, 3, "sentiment feature among top-14 toxicity predictors",
         sentiment_toxic ? "found" : "none");
  report(positive_healthy, 3, "positive-word feature among top-14 health predictors",
         positive_healthy ? "found" : "none");
}

// ---------------------------------------------------------------------------
// 4: lexicon calibration and the case-study conversation

void criterion4() {
  const auto lex = load_and_fuse(LexiconPaths::in_directory(data_dir() / "lexicons"));
  struct Probe {
    const char* word;
    WordClass tag;
    bool negative;
    double target;
  };
  for (const auto& p : {Probe{"useless", WordClass::adjective, true, 0.67},
                        Probe{"problem", WordClass::noun, true, 0.60},
                        Probe{"worst", WordClass::adjective, true, 0.78},
                        Probe{"pretty", WordClass::adjective, false, 0.59}}) {
    const auto score = lex.lookup(p.word, p.tag);
    const double v = p.negative ? score.negative : score.positive;
    report(std::abs(v - p.target) <= 0.05, 4,
           std::string(p.negative ? "negative" : "positive") + " score of '" + p.word + "' (" +
               std::string(to_string(p.tag)) + ") = " + fmt(p.target, 2) + " +- 0.05",
           fmt(v));
  }

  const char* case_env = std::getenv("DERAIL_CASE_STUDY");
  auto setup = load_wiki();
  if (!setup || !case_env || !fs::exists(case_env)) {
    report(false, 4, "case study: toxic-leaning with sentiment, healthy-leaning without",
           "needs the Wikipedia corpus and the case-study conversation (DERAIL_CASE_STUDY, "
           "see docs/corpus.md); not available");
    return;
  }
  // The case-study file is one derailing conversation in the corpus schema,
  // with a synthetic healthy partner so that it parses as a pair.
  const auto study = ingest_corpus(case_env, Task::paired_wiki);
  const auto& conv = study.samples[study.pairs.at(0).derail];
  const auto table =
      build_feature_table(setup->corpus, *setup->resources, setup->config.feature_config());
  FeatureExtractor fx(setup->resources->lexicon, setup->resources->tagger,
                      setup->resources->prompts, &setup->resources->word_lists);
  auto full = setup->config.feature_config();
  full.tone = true;
  full.baseline_sentiment = true;
  const auto vec = fx.conversation_vector(conv, full).values;

  std::vector<std::string> groups(table.y.size());
  for (const auto& p : setup->corpus.pairs) groups[p.derail] = groups[p.healthy] = p.pair_id;
  int agree = 0;
  const int runs = setup->config.runs;
  for (int r = 0; r < runs; ++r) {
    double prob[2];
    int k = 0;
    for (auto a : {Ablation::text_only, Ablation::text_sentiment}) {
      const auto cols = table.columns(ablation_groups(a));
      Matrix X(table.X.rows(), static_cast<Eigen::Index>(cols.size()));
      std::vector<double> x(cols.size());
      for (std::size_t j = 0; j < cols.size(); ++j) {
        X.col(static_cast<Eigen::Index>(j)) = table.X.col(static_cast<Eigen::Index>(cols[j]));
        x[j] = vec[cols[j]];
      }
      GridConfig grid = setup->config.grid;
      grid.seed = derive_seed(setup->config.seed, "case-study", static_cast<std::uint64_t>(r));
      prob[k++] = grid_search_cv(X, table.y, groups, grid).model.predict_proba(x);
    }
    if (prob[0] < 0.5 && prob[1] > 0.5) ++agree;
  }
  report(2 * agree > runs, 4, "case study: toxic-leaning with sentiment, healthy-leaning without",
         std::to_string(agree) + " of " + std::to_string(runs) + " runs");
}

// ---------------------------------------------------------------------------
// 5: optimizer against an independent solver, ANOVA against the hand formula

void criterion5() {
  const auto path = fs::path(DERAIL_FIXTURE_DIR) / "logreg_oracle.json";
  const auto doc = nlohmann::json::parse(read_file(path));
  const auto& problems = doc.at("problems");
  double worst = 0.0;
  std::size_t worst_index = 0, within = 0, small = 0;
  for (std::size_t k = 0; k < problems.size(); ++k) {
    const auto& p = problems[k];
    const int n = p.at("n"), d = p.at("d");
    if (n <= 100 && d <= 20) ++small;
    Matrix X(n, d);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < d; ++j) X(i, j) = p.at("X")[i][j].get<double>();
    }
    const auto y = p.at("y").get<std::vector<int>>();
    const double C = p.at("C");
    const auto fit = fit_logreg(X, y, C);
    const double gap = std::abs(fit.objective - p.at("objective").get<double>());
    if (gap <= 1e-6) ++within;
    if (gap > worst) {
      worst = gap;
      worst_index = k;
    }
  }
  report(problems.size() == 25 && small == 25, 5, "25 random problems with n <= 100, d <= 20",
         std::to_string(small) + " of " + std::to_string(problems.size()));
  report(within == problems.size(), 5, "final objective within 1e-6 of the reference solver",
         std::to_string(within) + "/" + std::to_string(problems.size()) + " within, worst gap " +
             sci(worst) + " (problem " + std::to_string(worst_index) + ")");

  // Hand formula in extended precision: F = (SSB / 1) / (SSW / (n - 2)).
  Rng rng(derive_seed(5, "anova-columns"));
  double worst_rel = 0.0;
  std::size_t checked = 0;
  for (int col = 0; col < 1000; ++col) {
    const int n = 5 + static_cast<int>(rng.below(96));
    Matrix X(n, 1);
    std::vector<int> y(n);
    const double shift = rng.normal();
    const double scale = std::exp(rng.uniform(-3, 3));
    for (int i = 0; i < n; ++i) {
      y[i] = i < 2 ? i : static_cast<int>(rng.below(2));
      X(i, 0) = scale * (rng.normal() + shift * y[i]) + 10 * shift;
    }
    const double F = anova_f(X, y)(0);
    long double s[2] = {0, 0};
    long double cnt[2] = {0, 0};
    for (int i = 0; i < n; ++i) {
      s[y[i]] += X(i, 0);
      cnt[y[i]] += 1;
    }
    const long double m0 = s[0] / cnt[0], m1 = s[1] / cnt[1];
    const long double grand = (s[0] + s[1]) / n;
    long double ssw = 0;
    for (int i = 0; i < n; ++i) {
      const long double dlt = X(i, 0) - (y[i] ? m1 : m0);
      ssw += dlt * dlt;
    }
    const long double ssb = cnt[0] * (m0 - grand) * (m0 - grand) + cnt[1] * (m1 - grand) * (m1 - grand);
    const long double ref = ssb / (ssw / (n - 2));
    const double rel = static_cast<double>(std::abs(F - ref) / std::max<long double>(1, std::abs(ref)));
    worst_rel = std::max(worst_rel, rel);
    ++checked;
  }
  report(worst_rel <= 1e-12, 5, "ANOVA F matches the hand formula to 1e-12 on 1000 columns",
         std::to_string(checked) + " columns, worst relative error " + sci(worst_rel));
}

// ---------------------------------------------------------------------------
// 6: GRU

Matrix normal_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

void criterion6() {
  // Finite differences: 100 draws at reduced width, every parameter, plus a
  // few draws of the full 26 -> 40 model.
  double worst = 0.0;
  int passed = 0;
  for (int draw = 0; draw < 100; ++draw) {
    Rng rng(derive_seed(6, "gradcheck", static_cast<std::uint64_t>(draw)));
    const auto params = GruParams::random(26, 8, rng.next());
    const auto seq = normal_matrix(rng, 10, 26);
    const auto check = gradient_check(params, seq, draw % 2 == 0 ? 1.0 : 0.0);
    worst = std::max(worst, check.max_relative_error);
    if (check.max_relative_error < 1e-4) ++passed;
  }
  report(passed == 100, 6, "finite-difference agreement < 1e-4 on 100 draws (input 26, hidden 8)",
         std::to_string(passed) + "/100, worst " + sci(worst));
  double worst_full = 0.0;
  int passed_full = 0;
  for (int draw = 0; draw < 3; ++draw) {
    Rng rng(derive_seed(6, "gradcheck-full", static_cast<std::uint64_t>(draw)));
    const auto params = GruParams::random(26, 40, rng.next());
    const auto seq = normal_matrix(rng, 10, 26);
    const auto check = gradient_check(params, seq, draw % 2 == 0 ? 1.0 : 0.0);
    worst_full = std::max(worst_full, check.max_relative_error);
    if (check.max_relative_error < 1e-4) ++passed_full;
  }
  report(passed_full == 3, 6, "finite-difference agreement < 1e-4 on 3 draws (input 26, hidden 40)",
         std::to_string(passed_full) + "/3, worst " + sci(worst_full));

  // Memorization of 32 random sequences with random labels.
  {
    Rng rng(derive_seed(6, "memorize"));
    std::vector<WindowSample> data(32);
    for (auto& s : data) {
      s.sequence = normal_matrix(rng, 10, 26);
      s.label = static_cast<int>(rng.below(2));
    }
    GruTrainConfig config;
    config.max_epochs = 500;
    config.seed = 6;
    const auto r = fit_gru(data, config);
    const double loss = r.train_loss.back();
    report(loss < 0.05, 6, "memorization loss < 0.05 on 32 samples within 500 epochs",
           "loss " + fmt(loss, 5) + " after " + std::to_string(r.epochs_run) + " epochs");
  }

  // Synthetic chat corpus: signal in the last 3 messages of a 10-message window.
  SyntheticChatConfig sc;
  const auto samples = make_synthetic_chat(sc);
  const auto tmp = fs::temp_directory_path() / "derail-acceptance-chat.jsonl";
  write_file_atomic(tmp, corpus_to_jsonl(samples));
  auto config = base_config();
  config.task = Task::window_chat;
  config.corpus = tmp;
  config.prompt_model = fs::temp_directory_path() / "derail-acceptance-prompts.json";
  write_file_atomic(config.prompt_model, synthetic_prompt_model_json());
  config.window_model = WindowModel::gru;
  config.k_pos = 5;
  config.k_neg = 2;
  config.runs = 3;
  const auto corpus = ingest_corpus(tmp, Task::window_chat);
  const auto resources = Resources::load(config, corpus);

  double acc[2];
  int k = 0;
  for (std::size_t messages : {10u, 3u}) {
    config.messages = messages;
    config.validate();
    const auto table = build_feature_table(corpus, resources, config.feature_config());
    acc[k++] = 100 * run_experiment(config, corpus, table).gru_accuracy.mean;
  }
  report(acc[0] > 90.0, 6, "synthetic last-3 signal task > 90% test accuracy (10-message window)",
         fmt(acc[0], 2) + "% mean over 3 runs");
  report(std::abs(acc[0] - acc[1]) <= 1.5, 6, "3-message vs 10-message window within 1.5 points",
         fmt(acc[1], 2) + "% vs " + fmt(acc[0], 2) + "%");
  fs::remove(tmp);
  fs::remove(config.prompt_model);
}

// ---------------------------------------------------------------------------
// 7: two CLI ablation runs give byte-identical reports

std::string shell_quote(const fs::path& p) { return "'" + p.string() + "'"; }

void criterion7() {
  const fs::path cli = DERAIL_CLI_PATH;
  const auto dir = fs::temp_directory_path() / "derail-acceptance-determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto corpus = dir / "pairs.jsonl";
  const auto prompts = dir / "prompts.json";
  std::string gen = shell_quote(cli) + " synth-corpus --kind pairs --count 200 -o " +
                    shell_quote(corpus) + " --prompt-model-out " + shell_quote(prompts) +
                    " > /dev/null";
  if (std::system(gen.c_str()) != 0) {
    report(false, 7, "byte-identical ablation reports", "corpus generation failed");
    return;
  }
  for (const char* out : {"a", "b"}) {
    const std::string cmd = shell_quote(cli) + " ablation --corpus " + shell_quote(corpus) +
                            " --prompt-model " + shell_quote(prompts) +
                            " --ablations text-only,text+sentiment,tone --runs 3 --output-dir " +
                            shell_quote(dir / out) + " > /dev/null";
    if (std::system(cmd.c_str()) != 0) {
      report(false, 7, "byte-identical ablation reports", std::string("run ") + out + " failed");
      return;
    }
  }
  std::size_t files = 0, identical = 0;
  std::string differing;
  for (const auto& entry : fs::directory_iterator(dir / "a")) {
    ++files;
    const auto other = dir / "b" / entry.path().filename();
    if (fs::exists(other) && read_file(entry.path()) == read_file(other)) {
      ++identical;
    } else {
      differing += entry.path().filename().string() + " ";
    }
  }
  std::size_t files_b = 0;
  for ([[maybe_unused]] const auto& entry : fs::directory_iterator(dir / "b")) ++files_b;
  report(files > 0 && identical == files && files_b == files, 7,
         "two ablation invocations give byte-identical reports",
         std::to_string(identical) + "/" + std::to_string(files) + " files identical" +
             (differing.empty() ? "" : " (differ: " + differing + ")"));
  fs::remove_all(dir);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  int criterion = 0;
  app.add_option("--criterion", criterion, "Criterion number (1-7)")->required()->check(CLI::Range(1, 7));
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::function<void()>> checks = {criterion1, criterion2, criterion3, criterion4,
                                                     criterion5, criterion6, criterion7};
  try {
    checks[static_cast<std::size_t>(criterion - 1)]();
  } catch (const std::exception& e) {
    report(false, criterion, "unexpected error", e.what());
  }
  return failures == 0 ? 0 : 1;
}
