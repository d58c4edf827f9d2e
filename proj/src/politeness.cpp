#include <algorithm>
#include <set>
#include <string>

#include "derail/features.hpp"

namespace derail {

namespace {

using WordSet = std::set<std::string, std::less<>>;

const WordSet kGratitude = {"thanks", "thank", "thx", "appreciate", "appreciated", "grateful"};
const WordSet kApology = {"sorry",   "apologize", "apologise", "apologies", "apology",
                          "oops",    "pardon",    "forgive",   "regret"};
const WordSet kPlease = {"please", "pls", "plz"};
const WordSet kGreeting = {"hey", "hello", "hi"};
const WordSet kHedge = {"think",     "thought",    "believe",  "guess",    "suppose",  "suggest",
                        "almost",    "rather",     "maybe",    "perhaps",  "possibly", "probably",
                        "apparently", "seemingly", "seem",     "seems",    "somewhat", "likely",
                        "unlikely",  "might",      "assume",   "presumably", "fairly", "unclear"};
const WordSet kFirstPerson = {"i",  "me",  "my",   "mine",   "myself",
                              "we", "us",  "our",  "ours",   "ourselves"};
const WordSet kFirstSubject = {"i", "we"};
const WordSet kSecondPerson = {"you", "your", "yours", "yourself", "yourselves", "u", "ur"};
const WordSet kQuestionLead = {
    "what",   "why",    "who",      "whom",    "whose",   "how",   "where",  "when",  "which",
    "do",     "does",   "did",      "is",      "are",     "was",   "were",   "am",    "can",
    "could",  "will",   "would",    "should",  "shall",   "may",   "might",  "must",  "have",
    "has",    "had",    "don",      "doesn",   "didn",    "isn",   "aren",   "wasn",  "weren",
    "couldn", "won",    "wouldn",   "shouldn", "haven",   "hasn",  "hadn",   "ain"};

bool contains_phrase(const std::vector<std::string>& words, std::initializer_list<std::string_view> phrase) {
  if (phrase.size() == 0 || words.size() < phrase.size()) return false;
  for (std::size_t i = 0; i + phrase.size() <= words.size(); ++i) {
    if (std::equal(phrase.begin(), phrase.end(), words.begin() + static_cast<std::ptrdiff_t>(i))) {
      return true;
    }
  }
  return false;
}

bool is_sentence_end(std::string_view w) {
  return w.find_first_of(".!?") != std::string_view::npos && is_punctuation(w);
}

}  // namespace

PolitenessVector politeness_features(std::span<const TaggedToken> tokens, std::string_view) {
  // Detectors work on plain words, so merged idioms are split back apart.
  std::vector<std::string> words;
  words.reserve(tokens.size());
  for (const auto& t : tokens) {
    std::string_view rest = t.token.text;
    while (true) {
      const auto sp = rest.find(' ');
      words.emplace_back(rest.substr(0, sp));
      if (sp == std::string_view::npos) break;
      rest.remove_prefix(sp + 1);
    }
  }

  PolitenessVector v{};
  auto set = [&](Politeness slot, double value) { v[static_cast<std::size_t>(slot)] = value; };
  auto any_in = [&](const WordSet& set_) {
    return std::any_of(words.begin(), words.end(), [&](const auto& w) { return set_.count(w) > 0; });
  };

  set(Politeness::gratitude, any_in(kGratitude) ? 1.0 : 0.0);
  set(Politeness::apology, any_in(kApology) ? 1.0 : 0.0);
  set(Politeness::please, any_in(kPlease) ? 1.0 : 0.0);
  set(Politeness::indirect_greeting, any_in(kGreeting) ? 1.0 : 0.0);
  set(Politeness::subjunctive,
      contains_phrase(words, {"would", "you"}) || contains_phrase(words, {"could", "you"}) ? 1.0 : 0.0);
  set(Politeness::has_hedge, any_in(kHedge) ? 1.0 : 0.0);

  bool subject_hedge = false;
  for (std::size_t j = 0; j < words.size() && !subject_hedge; ++j) {
    if (!kHedge.count(words[j])) continue;
    for (std::size_t k = j >= 3 ? j - 3 : 0; k < j; ++k) {
      if (kFirstSubject.count(words[k])) subject_hedge = true;
    }
  }
  set(Politeness::hedges, subject_hedge ? 1.0 : 0.0);

  auto capped = [&](const WordSet& s) {
    const auto n = std::count_if(words.begin(), words.end(), [&](const auto& w) { return s.count(w) > 0; });
    return static_cast<double>(std::min<std::ptrdiff_t>(n, 5)) / 5.0;
  };
  set(Politeness::first_person, capped(kFirstPerson));
  set(Politeness::second_person, capped(kSecondPerson));
  set(Politeness::first_person_start, !words.empty() && kFirstPerson.count(words.front()) ? 1.0 : 0.0);
  set(Politeness::second_person_start, !words.empty() && kSecondPerson.count(words.front()) ? 1.0 : 0.0);

  bool question = false;
  std::size_t segment_start = 0;
  for (std::size_t i = 0; i < words.size() && !question; ++i) {
    if (!is_sentence_end(words[i])) continue;
    if (words[i].find('?') != std::string::npos) {
      for (std::size_t k = segment_start; k < i; ++k) {
        if (is_punctuation(words[k])) continue;
        question = kQuestionLead.count(words[k]) > 0;
        break;
      }
    }
    segment_start = i + 1;
  }
  set(Politeness::direct_question, question ? 1.0 : 0.0);

  const bool factual = contains_phrase(words, {"in", "fact"}) || contains_phrase(words, {"actually"}) ||
                       contains_phrase(words, {"really"}) || contains_phrase(words, {"the", "truth"});
  set(Politeness::factuality, factual ? 1.0 : 0.0);
  return v;
}

}  // namespace derail
