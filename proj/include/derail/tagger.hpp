#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "derail/word_class.hpp"

namespace derail {

/// Greedy averaged-perceptron part-of-speech tagger over Penn Treebank tags.
///
/// Model file (UTF-8 text, tab separated, one record per line):
///
///     averaged-perceptron <TAB> 1
///     classes <TAB> CC CD DT ...
///     T <TAB> word <TAB> TAG              unambiguous-word dictionary
///     W <TAB> feature <TAB> TAG:w TAG:w   averaged weights of one feature
///
/// Features are the 14 templates of the classic greedy tagger: bias, word
/// suffix and first character, the two previous predicted tags, the current
/// and surrounding (normalized) words and their suffixes.
class PerceptronTagger {
 public:
  static constexpr int kFormatVersion = 1;

  static PerceptronTagger load(const std::filesystem::path& path);
  static PerceptronTagger parse(std::string_view contents, const std::string& source_name);

  /// Fine-grained tags for a word sequence.
  std::vector<std::string> tag_words(std::span<const std::string> words) const;

  /// Coarse tags. Words with no lexical evidence in the model fall back to
  /// suffix heuristics and then to `other`; punctuation is always `other`.
  std::vector<WordClass> classify_words(std::span<const std::string> words) const;

  const std::vector<std::string>& classes() const { return classes_; }
  std::size_t feature_count() const { return weights_.size(); }

 private:
  struct Weight {
    std::uint16_t cls;
    double value;
  };

  std::uint16_t predict(const std::vector<std::string>& features) const;
  bool has_lexical_evidence(std::string_view word) const;

  std::vector<std::string> classes_;
  std::unordered_map<std::string, std::uint16_t> tagdict_;
  std::unordered_map<std::string, std::vector<Weight>> weights_;
};

/// Collapses a Penn Treebank tag to the coarse classes.
WordClass coarse_class(std::string_view penn_tag);

/// Suffix rules for words the statistical model knows nothing about.
WordClass suffix_class(std::string_view word);

}  // namespace derail
