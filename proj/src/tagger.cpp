#include "derail/tagger.hpp"

#include <charconv>

#include "derail/error.hpp"
#include "derail/text.hpp"
#include "derail/util.hpp"

namespace derail {

namespace {

// Byte length of the UTF-8 sequence starting with `lead`.
std::size_t sequence_length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead & 0xE0) == 0xC0) return 2;
  if ((lead & 0xF0) == 0xE0) return 3;
  if ((lead & 0xF8) == 0xF0) return 4;
  return 1;
}

// Last n code points.
std::string_view suffix_chars(std::string_view w, std::size_t n) {
  std::size_t start = w.size();
  std::size_t count = 0;
  while (start > 0 && count < n) {
    --start;
    if ((static_cast<unsigned char>(w[start]) & 0xC0) != 0x80) ++count;
  }
  return w.substr(start);
}

std::string_view first_char(std::string_view w) {
  if (w.empty()) return w;
  return w.substr(0, std::min(w.size(), sequence_length(static_cast<unsigned char>(w[0]))));
}

bool all_digits(std::string_view w) {
  if (w.empty()) return false;
  for (char c : w) {
    if (c < '0' || c > '9') return false;
  }
  return true;
}

std::string normalize(std::string_view word) {
  if (word.find('-') != std::string_view::npos && word.front() != '-') return "!HYPHEN";
  if (all_digits(word) && word.size() == 4) return "!YEAR";
  if (!word.empty() && word.front() >= '0' && word.front() <= '9') return "!DIGITS";
  return to_lower_ascii(word);
}

bool ends_with(std::string_view w, std::string_view suffix) {
  return w.size() > suffix.size() && w.substr(w.size() - suffix.size()) == suffix;
}

}  // namespace

WordClass coarse_class(std::string_view tag) {
  if (tag.starts_with("NN")) return WordClass::noun;
  if (tag.starts_with("VB")) return WordClass::verb;
  if (tag.starts_with("JJ")) return WordClass::adjective;
  if (tag.starts_with("RB")) return WordClass::adverb;
  return WordClass::other;
}

WordClass suffix_class(std::string_view word) {
  if (word.empty() || is_punctuation(word)) return WordClass::other;
  if (ends_with(word, "ly")) return WordClass::adverb;
  for (auto s : {"ness", "tion", "sion", "ment", "ity", "ism", "ship", "ance", "ence", "hood"}) {
    if (ends_with(word, s)) return WordClass::noun;
  }
  for (auto s : {"ous", "ful", "less", "able", "ible", "ive", "ical", "ish", "ic", "al"}) {
    if (ends_with(word, s)) return WordClass::adjective;
  }
  for (auto s : {"ize", "ise", "ify", "ate", "ed", "ing"}) {
    if (ends_with(word, s)) return WordClass::verb;
  }
  return WordClass::other;
}

PerceptronTagger PerceptronTagger::load(const std::filesystem::path& path) {
  return parse(read_file(path), path.string());
}

PerceptronTagger PerceptronTagger::parse(std::string_view contents, const std::string& source_name) {
  PerceptronTagger t;
  std::unordered_map<std::string, std::uint16_t> class_index;
  std::size_t lineno = 0;
  bool header = false;
  std::size_t start = 0;
  while (start < contents.size()) {
    auto end = contents.find('\n', start);
    if (end == std::string_view::npos) end = contents.size();
    auto line = contents.substr(start, end - start);
    start = end + 1;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const auto f = split(line, '\t');

    if (!header) {
      if (f.size() != 2 || f[0] != "averaged-perceptron") {
        throw ParseError(source_name, lineno, "not an averaged-perceptron model");
      }
      if (f[1] != std::to_string(kFormatVersion)) {
        throw FormatVersionError(source_name + ": tagger format version " + std::string(f[1]) +
                                 " is not supported");
      }
      header = true;
      continue;
    }
    if (f[0] == "classes" && f.size() == 2) {
      for (auto c : split(f[1], ' ')) {
        if (c.empty()) continue;
        class_index.emplace(std::string(c), static_cast<std::uint16_t>(t.classes_.size()));
        t.classes_.emplace_back(c);
      }
      continue;
    }
    auto lookup_class = [&](std::string_view c) {
      auto it = class_index.find(std::string(c));
      if (it == class_index.end()) {
        throw ParseError(source_name, lineno, "unknown tag '" + std::string(c) + "'");
      }
      return it->second;
    };
    if (f[0] == "T" && f.size() == 3) {
      t.tagdict_[std::string(f[1])] = lookup_class(f[2]);
    } else if (f[0] == "W" && f.size() == 3) {
      auto& ws = t.weights_[std::string(f[1])];
      for (auto item : split(f[2], ' ')) {
        if (item.empty()) continue;
        const auto colon = item.rfind(':');
        if (colon == std::string_view::npos) throw ParseError(source_name, lineno, "expected TAG:weight");
        double v = 0.0;
        auto num = item.substr(colon + 1);
        auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), v);
        if (ec != std::errc{} || ptr != num.data() + num.size()) {
          throw ParseError(source_name, lineno, "bad weight '" + std::string(num) + "'");
        }
        ws.push_back({lookup_class(item.substr(0, colon)), v});
      }
    } else {
      throw ParseError(source_name, lineno, "unrecognized record");
    }
  }
  if (!header) throw ParseError(source_name, 0, "empty tagger model");
  if (t.classes_.empty()) throw ParseError(source_name, 0, "tagger model declares no classes");
  return t;
}

std::uint16_t PerceptronTagger::predict(const std::vector<std::string>& features) const {
  std::vector<double> scores(classes_.size(), 0.0);
  for (const auto& feat : features) {
    auto it = weights_.find(feat);
    if (it == weights_.end()) continue;
    for (const auto& w : it->second) scores[w.cls] += w.value;
  }
  // Highest score; ties go to the lexicographically largest tag.
  std::uint16_t best = 0;
  for (std::uint16_t c = 1; c < scores.size(); ++c) {
    if (scores[c] > scores[best] || (scores[c] == scores[best] && classes_[c] > classes_[best])) {
      best = c;
    }
  }
  return best;
}

std::vector<std::string> PerceptronTagger::tag_words(std::span<const std::string> words) const {
  std::vector<std::string> context;
  context.reserve(words.size() + 4);
  context.emplace_back("-START-");
  context.emplace_back("-START2-");
  for (const auto& w : words) context.push_back(w.empty() ? std::string() : normalize(w));
  context.emplace_back("-END-");
  context.emplace_back("-END2-");

  std::vector<std::string> tags;
  tags.reserve(words.size());
  std::string prev = "-START-";
  std::string prev2 = "-START2-";
  std::vector<std::string> features;
  for (std::size_t n = 0; n < words.size(); ++n) {
    const auto& word = words[n];
    std::string tag;
    if (auto it = tagdict_.find(word); it != tagdict_.end()) {
      tag = classes_[it->second];
    } else {
      const std::size_t i = n + 2;
      features.clear();
      features.emplace_back("bias");
      features.push_back("i suffix " + std::string(suffix_chars(word, 3)));
      features.push_back("i pref1 " + std::string(first_char(word)));
      features.push_back("i-1 tag " + prev);
      features.push_back("i-2 tag " + prev2);
      features.push_back("i tag+i-2 tag " + prev + " " + prev2);
      features.push_back("i word " + context[i]);
      features.push_back("i-1 tag+i word " + prev + " " + context[i]);
      features.push_back("i-1 word " + context[i - 1]);
      features.push_back("i-1 suffix " + std::string(suffix_chars(context[i - 1], 3)));
      features.push_back("i-2 word " + context[i - 2]);
      features.push_back("i+1 word " + context[i + 1]);
      features.push_back("i+1 suffix " + std::string(suffix_chars(context[i + 1], 3)));
      features.push_back("i+2 word " + context[i + 2]);
      tag = classes_[predict(features)];
    }
    prev2 = std::move(prev);
    prev = tag;
    tags.push_back(std::move(tag));
  }
  return tags;
}

bool PerceptronTagger::has_lexical_evidence(std::string_view word) const {
  if (tagdict_.count(std::string(word))) return true;
  if (word.empty()) return false;
  return weights_.count("i word " + normalize(word)) > 0;
}

std::vector<WordClass> PerceptronTagger::classify_words(std::span<const std::string> words) const {
  const auto tags = tag_words(words);
  std::vector<WordClass> out;
  out.reserve(words.size());
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (is_punctuation(words[i])) {
      out.push_back(WordClass::other);
    } else if (has_lexical_evidence(words[i])) {
      out.push_back(coarse_class(tags[i]));
    } else {
      out.push_back(suffix_class(words[i]));
    }
  }
  return out;
}

}  // namespace derail
