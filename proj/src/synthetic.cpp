#include "derail/synthetic.hpp"

#include <array>

#include <json.hpp>

#include "derail/random.hpp"

namespace derail {

namespace {

// Six topic word groups; each doubles as one prompt-type centroid.
const std::array<std::vector<std::string>, 6> kTopics = {{
    {"map", "route", "north", "bridge", "tower", "gate", "river", "camp"},
    {"team", "squad", "player", "captain", "leader", "member", "group", "roster"},
    {"trade", "ore", "price", "item", "shop", "sell", "buy", "coins"},
    {"patch", "update", "server", "version", "build", "release", "client", "launch"},
    {"quest", "level", "boss", "dungeon", "reward", "mission", "stage", "raid"},
    {"article", "section", "source", "citation", "paragraph", "edit", "page", "draft"},
}};

const std::vector<std::string> kFunction = {"the", "a", "this", "that", "on", "in", "at",
                                            "with", "for", "to", "of", "and", "then", "now"};
const std::vector<std::string> kStrongNegative = {"idiot", "stupid", "worst", "pathetic",
                                                  "disgusting", "horrible", "useless", "hate"};
const std::vector<std::string> kMildPositive = {"nice", "good", "fine", "cool", "thanks"};
const std::vector<std::string> kPolite = {"please", "thanks", "i think", "maybe", "could you", "sorry"};
const std::vector<std::string> kRude = {"you", "your", "stupid", "nonsense", "ridiculous",
                                        "idiot", "wrong", "terrible", "awful", "useless"};

const std::string& pick(Rng& rng, const std::vector<std::string>& words) {
  return words[rng.below(words.size())];
}

std::string neutral_sentence(Rng& rng, std::size_t topic) {
  const std::size_t len = 4 + rng.below(6);
  std::string out;
  for (std::size_t i = 0; i < len; ++i) {
    if (!out.empty()) out.push_back(' ');
    out += rng.bernoulli(0.55) ? pick(rng, kTopics[topic]) : pick(rng, kFunction);
  }
  return out;
}

// Inserts `word` at a random word boundary.
std::string insert_word(Rng& rng, const std::string& sentence, const std::string& word) {
  std::vector<std::size_t> cuts = {0};
  for (std::size_t i = 0; i < sentence.size(); ++i) {
    if (sentence[i] == ' ') cuts.push_back(i + 1);
  }
  cuts.push_back(sentence.size() + 1);
  const auto at = cuts[rng.below(cuts.size())];
  if (at > sentence.size()) return sentence + " " + word;
  return sentence.substr(0, at) + word + " " + sentence.substr(at);
}

}  // namespace

std::vector<ConversationSample> make_synthetic_chat(const SyntheticChatConfig& config) {
  std::vector<ConversationSample> out;
  out.reserve(config.conversations);
  for (std::size_t c = 0; c < config.conversations; ++c) {
    Rng rng(derive_seed(config.seed, "synthetic-chat", c));
    ConversationSample s;
    s.id = "chat" + std::to_string(c);
    bool signal = false;
    const std::size_t topic = rng.below(kTopics.size());
    for (std::size_t m = 0; m <= config.window; ++m) {
      std::string text = neutral_sentence(rng, rng.bernoulli(0.7) ? topic : rng.below(kTopics.size()));
      const bool final_message = m == config.window;
      if (!final_message) {
        if (rng.bernoulli(0.25)) text = insert_word(rng, text, pick(rng, kMildPositive));
        if (rng.bernoulli(config.strong_word_rate)) {
          text = insert_word(rng, text, pick(rng, kStrongNegative));
          if (m + config.signal_span >= config.window) signal = true;
        }
      }
      s.messages.push_back(Message{s.id + "-m" + std::to_string(m), "u" + std::to_string(rng.below(6)),
                                   std::move(text)});
    }
    if (config.label_noise > 0.0 && rng.bernoulli(config.label_noise)) signal = !signal;
    s.label = signal ? Label::moderated : Label::ignored;
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<ConversationSample> make_synthetic_pairs(const SyntheticPairedConfig& config) {
  std::vector<ConversationSample> out;
  out.reserve(2 * config.pairs);
  for (std::size_t p = 0; p < config.pairs; ++p) {
    Rng rng(derive_seed(config.seed, "synthetic-pairs", p));
    const std::size_t topic = rng.below(kTopics.size());
    const std::string pid = "page" + std::to_string(p / 2) + "-pair" + std::to_string(p);

    std::array<ConversationSample, 2> convs;
    for (int k = 0; k < 2; ++k) {
      const bool derails = k == 0;
      auto& s = convs[static_cast<std::size_t>(k)];
      s.id = pid + (derails ? "-d" : "-h");
      s.pair_id = pid;
      s.label = derails ? Label::derail : Label::healthy;
      const std::size_t n = 2 + rng.below(5);
      for (std::size_t m = 0; m < n; ++m) {
        std::string text = neutral_sentence(rng, topic);
        // Shared background: both members see the same rates of polite and rude words.
        if (rng.bernoulli(0.3)) text = insert_word(rng, text, pick(rng, kPolite));
        if (rng.bernoulli(0.15)) text = insert_word(rng, text, pick(rng, kRude));
        if (m < 2) {
          if (derails && rng.bernoulli(config.signal)) text = insert_word(rng, text, pick(rng, kRude));
          if (!derails && rng.bernoulli(config.signal)) text = insert_word(rng, text, pick(rng, kPolite));
        }
        s.messages.push_back(Message{s.id + "-m" + std::to_string(m),
                                     "u" + std::to_string(rng.below(4)), std::move(text)});
      }
    }
    if (rng.bernoulli(0.5)) std::swap(convs[0], convs[1]);
    out.push_back(std::move(convs[0]));
    out.push_back(std::move(convs[1]));
  }
  return out;
}

std::string synthetic_prompt_model_json() {
  nlohmann::json vocab = nlohmann::json::array();
  nlohmann::json idf = nlohmann::json::array();
  std::vector<std::vector<double>> centroids(kTopics.size());
  for (std::size_t k = 0; k < kTopics.size(); ++k) {
    for (const auto& w : kTopics[k]) {
      vocab.push_back(w);
      idf.push_back(1.0);
      for (std::size_t j = 0; j < kTopics.size(); ++j) centroids[j].push_back(j == k ? 1.0 : 0.0);
    }
  }
  return nlohmann::json{{"vocabulary", vocab}, {"idf", idf}, {"centroids", centroids}}.dump();
}

}  // namespace derail
