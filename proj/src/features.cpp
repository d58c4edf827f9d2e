#include "derail/features.hpp"

#include "derail/error.hpp"
#include "derail/lexicon.hpp"
#include "derail/tagger.hpp"

namespace derail {

std::string_view to_string(Label label) {
  switch (label) {
    case Label::derail: return "derail";
    case Label::healthy: return "healthy";
    case Label::moderated: return "moderated";
    case Label::ignored: return "ignored";
  }
  return "healthy";
}

std::optional<Label> parse_label(std::string_view s) {
  for (auto l : {Label::derail, Label::healthy, Label::moderated, Label::ignored}) {
    if (to_string(l) == s) return l;
  }
  return std::nullopt;
}

std::string_view to_string(FeatureGroup group) {
  switch (group) {
    case FeatureGroup::politeness: return "politeness";
    case FeatureGroup::prompt: return "prompt";
    case FeatureGroup::sentiment_pos: return "sentiment_pos";
    case FeatureGroup::sentiment_neg: return "sentiment_neg";
    case FeatureGroup::tone: return "tone";
    case FeatureGroup::baseline_sentiment: return "baseline_sentiment";
  }
  return "politeness";
}

std::vector<FeatureInfo> feature_registry(const FeatureConfig& config) {
  std::vector<FeatureInfo> out;
  out.reserve(config.dimension());
  for (std::size_t m = 1; m <= config.messages; ++m) {
    const std::string prefix = "m" + std::to_string(m) + ".";
    for (auto name : kPolitenessNames) {
      out.push_back({prefix + std::string(name), FeatureGroup::politeness, m});
    }
    for (std::size_t k = 0; k < kPromptDim; ++k) {
      out.push_back({prefix + "prompt_" + std::to_string(k), FeatureGroup::prompt, m});
    }
    for (std::size_t k = 1; k <= config.k_pos; ++k) {
      out.push_back({prefix + "pos_" + std::to_string(k), FeatureGroup::sentiment_pos, m});
    }
    for (std::size_t k = 1; k <= config.k_neg; ++k) {
      out.push_back({prefix + "neg_" + std::to_string(k), FeatureGroup::sentiment_neg, m});
    }
  }
  if (config.tone) {
    for (auto name : {"tone.PP", "tone.PN", "tone.NP", "tone.NN"}) {
      out.push_back({name, FeatureGroup::tone, 0});
    }
  }
  if (config.baseline_sentiment) {
    for (std::size_t m = 1; m <= config.messages; ++m) {
      const std::string prefix = "m" + std::to_string(m) + ".";
      out.push_back({prefix + "has_positive", FeatureGroup::baseline_sentiment, m});
      out.push_back({prefix + "has_negative", FeatureGroup::baseline_sentiment, m});
    }
  }
  return out;
}

FeatureExtractor::FeatureExtractor(const FusedLexicon& lexicon, const PerceptronTagger& tagger,
                                   const PromptModel& prompts, const PolarityWordLists* baseline)
    : lexicon_(lexicon), tagger_(tagger), prompts_(prompts), baseline_(baseline) {}

MessageAnalysis FeatureExtractor::analyze(std::string_view text) const {
  MessageAnalysis a;
  a.tokens = mark_idioms(tokenize(text), lexicon_);
  a.tagged = pos_tag(a.tokens, tagger_);
  a.scored = score_tokens(a.tagged, lexicon_);
  return a;
}

PromptVector FeatureExtractor::prompt_features(const ConversationSample& sample,
                                               const Message& message,
                                               std::span<const Token> raw_tokens) const {
  if (auto it = sample.prompt_vectors.find(message.id); it != sample.prompt_vectors.end()) {
    return it->second;
  }
  return prompts_.features(message.id, raw_tokens);
}

std::vector<std::size_t> FeatureExtractor::selected_messages(const ConversationSample& sample,
                                                             const FeatureConfig& config) {
  const std::size_t n = sample.messages.size();
  if (n < config.min_messages()) {
    throw ValidationError("sample '" + sample.id + "' has " + std::to_string(n) +
                          " messages; at least " + std::to_string(config.min_messages()) +
                          " are required");
  }
  const std::size_t first = config.selection == MessageSelection::first ? 0 : n - 1 - config.messages;
  std::vector<std::size_t> idx(config.messages);
  for (std::size_t i = 0; i < config.messages; ++i) idx[i] = first + i;
  return idx;
}

namespace {

// True when some contiguous run of tokens spells a listed term.
bool mentions_any(std::span<const Token> tokens, const std::unordered_set<std::string>& terms) {
  constexpr std::size_t kMaxTermTokens = 4;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    std::string key;
    for (std::size_t j = i; j < tokens.size() && j < i + kMaxTermTokens; ++j) {
      if (j > i) key.push_back(' ');
      key += tokens[j].text;
      if (terms.count(key)) return true;
    }
  }
  return false;
}

}  // namespace

FeatureVector FeatureExtractor::conversation_vector(const ConversationSample& sample,
                                                    const FeatureConfig& config) const {
  if (config.messages == 0 || config.k_pos == 0 || config.k_neg == 0) {
    throw ValidationError("feature config needs at least one message and k_pos, k_neg >= 1");
  }
  if (config.tone && config.messages < 2) throw ValidationError("tone features need two messages");
  if (config.baseline_sentiment && baseline_ == nullptr) {
    throw ValidationError("baseline sentiment features need polarity word lists");
  }
  const auto idx = selected_messages(sample, config);

  FeatureVector fv;
  fv.info = feature_registry(config);
  fv.values.reserve(fv.info.size());
  std::vector<SentimentBlock> blocks;
  std::vector<std::vector<Token>> raw;
  for (std::size_t i : idx) {
    const auto& msg = sample.messages[i];
    raw.push_back(tokenize(msg.text));
    const auto a = analyze(msg.text);
    const auto pol = politeness_features(a.tagged, msg.text);
    fv.values.insert(fv.values.end(), pol.begin(), pol.end());
    const auto prompt = prompt_features(sample, msg, raw.back());
    fv.values.insert(fv.values.end(), prompt.begin(), prompt.end());
    blocks.push_back(sentiment_block(a.scored, config.k_pos, config.k_neg));
    fv.values.insert(fv.values.end(), blocks.back().top_pos.begin(), blocks.back().top_pos.end());
    fv.values.insert(fv.values.end(), blocks.back().top_neg.begin(), blocks.back().top_neg.end());
  }
  if (config.tone) {
    const auto t = tone_onehot(blocks[0], blocks[1]);
    fv.values.insert(fv.values.end(), t.begin(), t.end());
  }
  if (config.baseline_sentiment) {
    for (const auto& toks : raw) {
      fv.values.push_back(mentions_any(toks, baseline_->positive) ? 1.0 : 0.0);
      fv.values.push_back(mentions_any(toks, baseline_->negative) ? 1.0 : 0.0);
    }
  }
  if (fv.values.size() != fv.info.size()) {
    throw DimensionError("feature vector has " + std::to_string(fv.values.size()) +
                         " values but the registry lists " + std::to_string(fv.info.size()));
  }
  return fv;
}

}  // namespace derail
