#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace derail {

/// Coarse part-of-speech classes. The first four are the classes the
/// sentiment lexicons distinguish; everything else is `other`.
enum class WordClass : std::uint8_t { noun = 0, verb = 1, adjective = 2, adverb = 3, other = 4 };

inline constexpr std::array<WordClass, 4> kLexicalClasses = {
    WordClass::noun, WordClass::verb, WordClass::adjective, WordClass::adverb};

constexpr std::string_view to_string(WordClass c) {
  switch (c) {
    case WordClass::noun: return "noun";
    case WordClass::verb: return "verb";
    case WordClass::adjective: return "adjective";
    case WordClass::adverb: return "adverb";
    case WordClass::other: return "other";
  }
  return "other";
}

inline std::optional<WordClass> parse_word_class(std::string_view s) {
  for (auto c : {WordClass::noun, WordClass::verb, WordClass::adjective, WordClass::adverb,
                 WordClass::other}) {
    if (to_string(c) == s) return c;
  }
  return std::nullopt;
}

}  // namespace derail
