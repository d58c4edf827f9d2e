#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "derail/word_class.hpp"

namespace derail {

class FusedLexicon;
class PerceptronTagger;

/// Byte offsets [begin, end) into the source text.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;

  friend bool operator==(const Span&, const Span&) = default;
};

struct Token {
  std::string text;  // case-folded; idioms are the space-joined token texts
  Span span;
  bool is_idiom = false;

  friend bool operator==(const Token&, const Token&) = default;
};

struct TaggedToken {
  Token token;
  WordClass tag = WordClass::other;
};

/// Splits UTF-8 text into maximal runs of alphanumeric characters and maximal
/// runs of other non-whitespace characters, case-folding each token.
/// Non-ASCII letters count as alphanumeric; non-ASCII punctuation and spaces
/// from the Latin-1 and General Punctuation blocks do not.
std::vector<Token> tokenize(std::string_view text);

/// Greedy left-to-right longest match of contiguous tokens against the
/// lexicon's idiom table. A match is replaced by one token covering the whole
/// span with `is_idiom` set.
std::vector<Token> mark_idioms(std::vector<Token> tokens, const FusedLexicon& lexicon);

/// Tags an idiom-merged token list. Idioms are tagged in context through
/// their constituent words and take the class of their last word, or of the
/// nearest earlier word when the last one has none.
std::vector<TaggedToken> pos_tag(std::span<const Token> tokens, const PerceptronTagger& tagger);

/// True when the token has no alphanumeric character.
bool is_punctuation(std::string_view token);

/// Space-joined texts of tokens, the key format of the idiom table.
std::string join_tokens(std::span<const Token> tokens);

}  // namespace derail
