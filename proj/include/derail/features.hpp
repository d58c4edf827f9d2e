#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "derail/sentiment.hpp"
#include "derail/text.hpp"

namespace derail {

class FusedLexicon;
class PerceptronTagger;
struct PolarityWordLists;

// ---------------------------------------------------------------------------
// Politeness strategies

inline constexpr std::size_t kPolitenessDim = 13;

inline constexpr std::array<std::string_view, kPolitenessDim> kPolitenessNames = {
    "gratitude",          "apology",       "please",
    "indirect_greeting",  "subjunctive",   "has_hedge",
    "hedges",             "first_person",  "first_person_start",
    "second_person",      "second_person_start", "direct_question",
    "factuality"};

enum class Politeness : std::size_t {
  gratitude = 0,
  apology,
  please,
  indirect_greeting,
  subjunctive,
  has_hedge,
  hedges,
  first_person,
  first_person_start,
  second_person,
  second_person_start,
  direct_question,
  factuality,
};

using PolitenessVector = std::array<double, kPolitenessDim>;

inline double at(const PolitenessVector& v, Politeness slot) {
  return v[static_cast<std::size_t>(slot)];
}

/// Lexical politeness detectors. All slots are 0/1 except the two pronoun
/// slots, which count occurrences capped at 5 and divide by 5.
PolitenessVector politeness_features(std::span<const TaggedToken> tokens, std::string_view raw);

// ---------------------------------------------------------------------------
// Prompt-type similarities

inline constexpr std::size_t kPromptDim = 6;
using PromptVector = std::array<double, kPromptDim>;

/// Either six tf-idf centroids over a fixed vocabulary (similarity = cosine,
/// clamped at 0) or a passthrough table of precomputed vectors keyed by
/// message id.
class PromptModel {
 public:
  enum class Mode { centroids, passthrough };

  /// JSON {"vocabulary": [...], "idf": [...], "centroids": [[...] x 6]}.
  /// A flat 6*|V| centroid array is accepted as well.
  static PromptModel from_centroid_json(std::string_view text);
  static PromptModel load_centroids(const std::filesystem::path& path);

  /// JSON {message_id: [6 reals]}.
  static PromptModel from_passthrough_json(std::string_view text);
  static PromptModel load_passthrough(const std::filesystem::path& path);
  static PromptModel passthrough(std::unordered_map<std::string, PromptVector> table);

  Mode mode() const { return mode_; }

  /// Throws MissingFeatureError in passthrough mode when the id is unknown.
  PromptVector features(std::string_view message_id, std::span<const Token> tokens) const;

  /// Adds entries to a passthrough table; existing ids are kept.
  void merge_passthrough(const std::unordered_map<std::string, PromptVector>& more);

  /// tf-idf vector of `tokens` over the model vocabulary (centroid mode).
  std::vector<double> tfidf(std::span<const Token> tokens) const;

  std::size_t vocabulary_size() const { return vocabulary_.size(); }

 private:
  Mode mode_ = Mode::passthrough;
  std::vector<std::string> vocabulary_;
  std::unordered_map<std::string, std::size_t> vocab_index_;
  std::vector<double> idf_;
  std::array<std::vector<double>, kPromptDim> centroids_;
  std::array<double, kPromptDim> centroid_norms_{};
  std::unordered_map<std::string, PromptVector> table_;
};

// ---------------------------------------------------------------------------
// Conversations and feature vectors

enum class Label { derail, healthy, moderated, ignored };

std::string_view to_string(Label label);
std::optional<Label> parse_label(std::string_view s);

/// derail and moderated are the positive class (y = 1).
inline int label_value(Label label) {
  return label == Label::derail || label == Label::moderated ? 1 : 0;
}

struct Message {
  std::string id;
  std::string speaker;
  std::string text;
};

struct ConversationSample {
  std::string id;
  std::vector<Message> messages;
  Label label = Label::healthy;
  std::optional<std::string> pair_id;
  std::unordered_map<std::string, PromptVector> prompt_vectors;
};

enum class MessageSelection {
  first,         // the first M messages
  before_final,  // the M messages preceding the final one; the final is never read
};

struct FeatureConfig {
  std::size_t messages = 2;
  std::size_t k_pos = 3;
  std::size_t k_neg = 3;
  bool tone = false;
  bool baseline_sentiment = false;  // has_positive / has_negative per message
  MessageSelection selection = MessageSelection::first;

  static FeatureConfig wikipedia() { return {}; }
  static FeatureConfig chat() {
    return {10, 5, 2, false, false, MessageSelection::before_final};
  }

  std::size_t per_message_dim() const { return kPolitenessDim + kPromptDim + k_pos + k_neg; }
  std::size_t dimension() const {
    return messages * per_message_dim() + (tone ? 4 : 0) + (baseline_sentiment ? 2 * messages : 0);
  }
  std::size_t min_messages() const {
    return selection == MessageSelection::first ? messages : messages + 1;
  }
};

enum class FeatureGroup : std::uint8_t {
  politeness,
  prompt,
  sentiment_pos,
  sentiment_neg,
  tone,
  baseline_sentiment,
};

std::string_view to_string(FeatureGroup group);

/// Registry entry for one slot of a conversation vector.
struct FeatureInfo {
  std::string name;
  FeatureGroup group;
  std::size_t message = 0;  // 1-based chronological position in the window; 0 = conversation level
};

/// Layout: for each selected message, politeness (13), prompt (6), top
/// positive (k_pos) and top negative (k_neg) scores; then the tone one-hot
/// when enabled; then two baseline flags per message when enabled.
std::vector<FeatureInfo> feature_registry(const FeatureConfig& config);

struct FeatureVector {
  std::vector<double> values;
  std::vector<FeatureInfo> info;
};

/// Everything computed for one message on the way to its feature block.
struct MessageAnalysis {
  std::vector<Token> tokens;  // idiom-merged
  std::vector<TaggedToken> tagged;
  std::vector<ScoredToken> scored;
};

/// Turns conversations into feature vectors. Holds references only; every
/// referenced resource must outlive the extractor.
class FeatureExtractor {
 public:
  FeatureExtractor(const FusedLexicon& lexicon, const PerceptronTagger& tagger,
                   const PromptModel& prompts, const PolarityWordLists* baseline = nullptr);

  MessageAnalysis analyze(std::string_view text) const;

  PromptVector prompt_features(const ConversationSample& sample, const Message& message,
                               std::span<const Token> raw_tokens) const;

  /// Throws ValidationError naming the sample when it has too few messages.
  FeatureVector conversation_vector(const ConversationSample& sample,
                                    const FeatureConfig& config) const;

  /// Indices of the messages a config reads, in chronological order.
  static std::vector<std::size_t> selected_messages(const ConversationSample& sample,
                                                    const FeatureConfig& config);

 private:
  const FusedLexicon& lexicon_;
  const PerceptronTagger& tagger_;
  const PromptModel& prompts_;
  const PolarityWordLists* baseline_;
};

}  // namespace derail
