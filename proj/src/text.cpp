#include "derail/text.hpp"

#include <algorithm>

#include "derail/lexicon.hpp"
#include "derail/tagger.hpp"

namespace derail {

namespace {

enum class CharClass { space, alnum, other };

struct Decoded {
  char32_t cp;
  std::size_t length;
};

// Invalid sequences decode as a single byte U+FFFD so that every byte lands
// in exactly one token.
Decoded decode_utf8(std::string_view s, std::size_t i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) return {b0, 1};
  std::size_t len = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    return {0xFFFD, 1};
  }
  if (i + len > s.size()) return {0xFFFD, 1};
  for (std::size_t k = 1; k < len; ++k) {
    const auto b = static_cast<unsigned char>(s[i + k]);
    if ((b & 0xC0) != 0x80) return {0xFFFD, 1};
    cp = (cp << 6) | (b & 0x3F);
  }
  return {cp, len};
}

void encode_utf8(char32_t cp, std::string& out) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

CharClass classify(char32_t cp) {
  if (cp < 0x80) {
    if (cp == ' ' || (cp >= 0x09 && cp <= 0x0D)) return CharClass::space;
    if ((cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z')) {
      return CharClass::alnum;
    }
    return CharClass::other;
  }
  if (cp == 0x85 || cp == 0xA0 || cp == 0x1680 || (cp >= 0x2000 && cp <= 0x200A) ||
      cp == 0x2028 || cp == 0x2029 || cp == 0x202F || cp == 0x205F || cp == 0x3000) {
    return CharClass::space;
  }
  if (cp < 0xC0) {
    // Latin-1 supplement: letters and digits among the symbols.
    if (cp == 0xAA || cp == 0xB2 || cp == 0xB3 || cp == 0xB5 || cp == 0xB9 || cp == 0xBA ||
        (cp >= 0xBC && cp <= 0xBE)) {
      return CharClass::alnum;
    }
    return CharClass::other;
  }
  if (cp == 0xD7 || cp == 0xF7) return CharClass::other;
  if (cp >= 0x2000 && cp <= 0x206F) return CharClass::other;  // general punctuation
  if (cp >= 0x20A0 && cp <= 0x20CF) return CharClass::other;  // currency
  if (cp >= 0x2190 && cp <= 0x2BFF) return CharClass::other;  // arrows, math, shapes, dingbats
  if (cp >= 0x3001 && cp <= 0x303F) return CharClass::other;  // CJK punctuation
  if (cp >= 0xFE30 && cp <= 0xFE4F) return CharClass::other;
  if ((cp >= 0xFF01 && cp <= 0xFF0F) || (cp >= 0xFF1A && cp <= 0xFF20) ||
      (cp >= 0xFF3B && cp <= 0xFF40) || (cp >= 0xFF5B && cp <= 0xFF65)) {
    return CharClass::other;
  }
  if (cp >= 0x1F000 && cp <= 0x1FAFF) return CharClass::other;  // emoji and pictographs
  if (cp == 0xFFFD || cp == 0xFEFF) return CharClass::other;
  return CharClass::alnum;
}

char32_t fold(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
  if (cp < 0xC0) return cp;
  if (cp <= 0xDE && cp != 0xD7) return cp + 0x20;
  if (cp == 0x178) return 0xFF;
  if (cp >= 0x100 && cp <= 0x17F && cp != 0x130 && cp != 0x138 && cp != 0x149) {
    // Latin Extended-A alternates upper/lower, with a parity shift in the middle.
    const bool odd_upper = (cp >= 0x139 && cp <= 0x148) || (cp >= 0x179 && cp <= 0x17E);
    if (odd_upper ? (cp % 2 == 1) : (cp % 2 == 0)) return cp + 1;
    return cp;
  }
  if (cp >= 0x391 && cp <= 0x3AB && cp != 0x3A2) return cp + 0x20;  // Greek
  if (cp >= 0x410 && cp <= 0x42F) return cp + 0x20;                 // Cyrillic
  if (cp >= 0x400 && cp <= 0x40F) return cp + 0x50;
  return cp;
}

}  // namespace

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  CharClass current = CharClass::space;
  while (i < text.size()) {
    const auto [cp, len] = decode_utf8(text, i);
    const auto cls = classify(cp);
    if (cls != CharClass::space) {
      if (cls != current) tokens.push_back(Token{{}, {i, i}, false});
      auto& tok = tokens.back();
      encode_utf8(fold(cp), tok.text);
      tok.span.end = i + len;
    }
    current = cls;
    i += len;
  }
  return tokens;
}

std::string join_tokens(std::span<const Token> tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += t.text;
  }
  return out;
}

bool is_punctuation(std::string_view token) {
  std::size_t i = 0;
  while (i < token.size()) {
    const auto [cp, len] = decode_utf8(token, i);
    if (classify(cp) == CharClass::alnum) return false;
    i += len;
  }
  return true;
}

std::vector<Token> mark_idioms(std::vector<Token> tokens, const FusedLexicon& lexicon) {
  if (lexicon.idioms().empty()) return tokens;
  std::vector<Token> out;
  out.reserve(tokens.size());
  std::size_t i = 0;
  while (i < tokens.size()) {
    std::string key = tokens[i].text;
    std::size_t best_end = i;  // exclusive end of longest match, i when none
    std::string best_key;
    for (std::size_t j = i + 1; j < tokens.size(); ++j) {
      if (!lexicon.is_idiom_prefix(key)) break;
      key.push_back(' ');
      key += tokens[j].text;
      if (lexicon.find_idiom(key)) {
        best_end = j + 1;
        best_key = key;
      }
    }
    if (best_end > i) {
      out.push_back(Token{std::move(best_key), {tokens[i].span.begin, tokens[best_end - 1].span.end},
                          true});
      i = best_end;
    } else {
      out.push_back(std::move(tokens[i]));
      ++i;
    }
  }
  return out;
}

std::vector<TaggedToken> pos_tag(std::span<const Token> tokens, const PerceptronTagger& tagger) {
  std::vector<std::string> words;
  std::vector<std::size_t> first, head;  // first and last word of each token in `words`
  words.reserve(tokens.size());
  head.reserve(tokens.size());
  for (const auto& t : tokens) {
    first.push_back(words.size());
    if (t.is_idiom) {
      std::string_view rest = t.text;
      while (!rest.empty()) {
        const auto sp = rest.find(' ');
        words.emplace_back(rest.substr(0, sp));
        if (sp == std::string_view::npos) break;
        rest.remove_prefix(sp + 1);
      }
    } else {
      words.push_back(t.text);
    }
    head.push_back(words.size() - 1);
  }
  const auto classes = tagger.classify_words(words);

  std::vector<TaggedToken> out;
  out.reserve(tokens.size());
  for (std::size_t k = 0; k < tokens.size(); ++k) {
    WordClass tag = WordClass::other;
    if (!is_punctuation(tokens[k].text)) {
      // An idiom ending in a particle ("give up") takes the class of the
      // nearest content word before it.
      for (std::size_t w = head[k] + 1; w-- > first[k];) {
        tag = classes[w];
        if (tag != WordClass::other) break;
      }
    }
    out.push_back(TaggedToken{tokens[k], tag});
  }
  return out;
}

}  // namespace derail
