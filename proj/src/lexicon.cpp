#include "derail/lexicon.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <set>

#include <json.hpp>

#include "derail/error.hpp"
#include "derail/text.hpp"
#include "derail/util.hpp"

namespace derail {

namespace {

using nlohmann::json;

std::optional<double> parse_real(std::string_view s) {
  s = trim(s);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<long> parse_integer(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<LexiconPos> swn_pos(std::string_view code) {
  if (code == "a" || code == "s") return LexiconPos::adjective;
  if (code == "n") return LexiconPos::noun;
  if (code == "v") return LexiconPos::verb;
  if (code == "r") return LexiconPos::adverb;
  return std::nullopt;
}

// Iterates lines, handing (1-based line number, line without '\r') to fn.
template <typename Fn>
void for_each_line(std::string_view contents, Fn&& fn) {
  std::size_t lineno = 0;
  std::size_t start = 0;
  while (start < contents.size()) {
    auto end = contents.find('\n', start);
    if (end == std::string_view::npos) end = contents.size();
    auto line = contents.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    fn(++lineno, line);
    start = end + 1;
  }
}

bool acceptable_term(std::string_view term) {
  bool has_letter = false;
  for (unsigned char c : term) {
    const bool letter = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
    has_letter |= letter;
    if (!letter && c != ' ' && c != '\'' && c != '-') return false;
  }
  return has_letter;
}

}  // namespace

std::string_view to_string(LexiconSource s) {
  switch (s) {
    case LexiconSource::sentiwordnet: return "sentiwordnet";
    case LexiconSource::afinn: return "afinn";
    case LexiconSource::bingliu: return "bingliu";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Loaders

std::vector<RawLexiconEntry> parse_sentiwordnet(std::string_view contents,
                                                const std::string& source_name) {
  struct Acc {
    double pos_weighted = 0.0;
    double neg_weighted = 0.0;
    double weight = 0.0;
  };
  std::map<std::pair<std::string, LexiconPos>, Acc> acc;
  std::size_t data_lines = 0;

  for_each_line(contents, [&](std::size_t lineno, std::string_view line) {
    if (trim(line).empty() || line.front() == '#') return;
    auto fields = split(line, '\t');
    if (fields.size() != 6) {
      throw ParseError(source_name, lineno,
                       "expected 6 tab-separated fields, found " + std::to_string(fields.size()));
    }
    auto pos = swn_pos(trim(fields[0]));
    if (!pos) throw ParseError(source_name, lineno, "unknown POS code '" + std::string(fields[0]) + "'");
    if (!parse_integer(fields[1])) throw ParseError(source_name, lineno, "synset ID is not numeric");
    auto ps = parse_real(fields[2]);
    auto ns = parse_real(fields[3]);
    if (!ps || !ns) throw ParseError(source_name, lineno, "scores are not numeric");
    if (*ps < 0.0 || *ps > 1.0 || *ns < 0.0 || *ns > 1.0) {
      throw ParseError(source_name, lineno, "scores must lie in [0, 1]");
    }
    auto terms = trim(fields[4]);
    if (terms.empty()) throw ParseError(source_name, lineno, "no synset terms");
    for (auto term : split(terms, ' ')) {
      if (term.empty()) continue;
      const auto hash = term.rfind('#');
      if (hash == std::string_view::npos || hash == 0) {
        throw ParseError(source_name, lineno, "term '" + std::string(term) + "' lacks a #sense suffix");
      }
      auto sense = parse_integer(term.substr(hash + 1));
      if (!sense || *sense < 1) {
        throw ParseError(source_name, lineno, "bad sense number in '" + std::string(term) + "'");
      }
      std::string word = to_lower_ascii(term.substr(0, hash));
      std::replace(word.begin(), word.end(), '_', ' ');
      auto& a = acc[{std::move(word), *pos}];
      const double w = 1.0 / static_cast<double>(*sense);
      a.pos_weighted += w * *ps;
      a.neg_weighted += w * *ns;
      a.weight += w;
    }
    ++data_lines;
  });
  if (data_lines == 0) throw ParseError(source_name, 0, "no SentiWordNet entries");

  std::vector<RawLexiconEntry> out;
  out.reserve(acc.size());
  for (const auto& [key, a] : acc) {
    out.push_back({key.first, key.second, a.pos_weighted / a.weight, a.neg_weighted / a.weight,
                   LexiconSource::sentiwordnet});
  }
  return out;
}

std::vector<RawLexiconEntry> load_sentiwordnet(const std::filesystem::path& path) {
  return parse_sentiwordnet(read_file(path), path.string());
}

std::vector<RawLexiconEntry> parse_afinn(std::string_view contents, const std::string& source_name) {
  std::vector<RawLexiconEntry> out;
  for_each_line(contents, [&](std::size_t lineno, std::string_view line) {
    if (trim(line).empty()) return;
    const auto tab = line.rfind('\t');
    if (tab == std::string_view::npos) throw ParseError(source_name, lineno, "expected term<TAB>score");
    auto term = trim(line.substr(0, tab));
    auto score = parse_integer(line.substr(tab + 1));
    if (term.empty() || !score) throw ParseError(source_name, lineno, "expected term<TAB>integer score");
    if (*score < -5 || *score > 5) {
      throw ValidationError(source_name + ":" + std::to_string(lineno) + ": AFINN score " +
                            std::to_string(*score) + " outside [-5, 5]");
    }
    RawLexiconEntry e;
    e.term = to_lower_ascii(term);
    e.pos = LexiconPos::any;
    e.source = LexiconSource::afinn;
    if (*score > 0) e.pos_score = static_cast<double>(*score) / 5.0;
    if (*score < 0) e.neg_score = static_cast<double>(-*score) / 5.0;
    out.push_back(std::move(e));
  });
  return out;
}

std::vector<RawLexiconEntry> load_afinn(const std::filesystem::path& path) {
  return parse_afinn(read_file(path), path.string());
}

std::vector<RawLexiconEntry> parse_bingliu(std::string_view positive, std::string_view negative,
                                           std::vector<std::string>* warnings) {
  auto read_list = [](std::string_view contents) {
    std::set<std::string> words;
    for_each_line(contents, [&](std::size_t, std::string_view line) {
      auto t = trim(line);
      if (t.empty() || t.front() == ';') return;
      words.insert(to_lower_ascii(t));
    });
    return words;
  };
  const auto pos = read_list(positive);
  const auto neg = read_list(negative);

  std::vector<RawLexiconEntry> out;
  out.reserve(pos.size() + neg.size());
  for (const auto& w : pos) {
    out.push_back({w, LexiconPos::any, 1.0, 0.0, LexiconSource::bingliu});
    if (neg.count(w) && warnings) {
      warnings->push_back("bingliu: '" + w + "' is listed as both positive and negative");
    }
  }
  for (const auto& w : neg) out.push_back({w, LexiconPos::any, 0.0, 1.0, LexiconSource::bingliu});
  return out;
}

std::vector<RawLexiconEntry> load_bingliu(const std::filesystem::path& positive_path,
                                          const std::filesystem::path& negative_path,
                                          std::vector<std::string>* warnings) {
  return parse_bingliu(read_file(positive_path), read_file(negative_path), warnings);
}

// ---------------------------------------------------------------------------
// Fusion

FusedLexicon fuse(const std::vector<RawLexiconEntry>& entries) {
  struct SourceScores {
    std::array<Polarity, 4> by_class{};
    std::uint8_t mask = 0;
  };
  struct Acc {
    std::array<SourceScores, FusedLexicon::kSourceCount> sources{};
    bool any_pos = false;
    bool idiom = false;
  };
  std::unordered_map<std::string, Acc> acc;
  acc.reserve(entries.size());

  for (const auto& e : entries) {
    const auto term = trim(e.term);
    if (!acceptable_term(term)) continue;
    const auto tokens = tokenize(term);
    if (tokens.empty()) continue;
    const bool idiom = tokens.size() >= 2;
    std::string key = idiom ? join_tokens(tokens) : tokens.front().text;

    auto& a = acc[key];
    a.idiom = idiom;
    auto& src = a.sources[static_cast<std::size_t>(e.source)];
    const double p = std::clamp(e.pos_score, 0.0, 1.0);
    const double n = std::clamp(e.neg_score, 0.0, 1.0);
    auto put = [&](std::size_t cls) {
      auto& slot = src.by_class[cls];
      if (src.mask & (1u << cls)) {
        slot.positive = std::max(slot.positive, p);
        slot.negative = std::max(slot.negative, n);
      } else {
        slot = {p, n};
        src.mask = static_cast<std::uint8_t>(src.mask | (1u << cls));
      }
    };
    if (e.pos == LexiconPos::any) {
      a.any_pos = true;
      for (std::size_t c = 0; c < 4; ++c) put(c);
    } else {
      put(static_cast<std::size_t>(e.pos));
    }
  }

  FusedLexicon lex;
  for (auto& [key, a] : acc) {
    FusedLexicon::WordEntry w;
    w.any_pos = a.any_pos;
    for (std::size_t c = 0; c < 4; ++c) {
      double p = 0.0, n = 0.0;
      bool present = false;
      for (const auto& src : a.sources) {
        if (src.mask & (1u << c)) {
          present = true;
          p += src.by_class[c].positive;
          n += src.by_class[c].negative;
        }
      }
      if (!present) continue;
      w.present_mask = static_cast<std::uint8_t>(w.present_mask | (1u << c));
      w.by_class[c] = {p / FusedLexicon::kSourceCount, n / FusedLexicon::kSourceCount};
    }
    if (a.idiom) {
      Polarity best;
      for (std::size_t c = 0; c < 4; ++c) {
        if (!(w.present_mask & (1u << c))) continue;
        best.positive = std::max(best.positive, w.by_class[c].positive);
        best.negative = std::max(best.negative, w.by_class[c].negative);
      }
      lex.idioms_.emplace(key, best);
    } else {
      lex.words_.emplace(key, w);
    }
  }
  lex.index_idiom_prefixes();
  return lex;
}

// ---------------------------------------------------------------------------
// FusedLexicon

void FusedLexicon::index_idiom_prefixes() {
  idiom_prefixes_.clear();
  for (const auto& [key, _] : idioms_) {
    std::size_t pos = key.find(' ');
    while (pos != std::string::npos) {
      idiom_prefixes_.insert(key.substr(0, pos));
      pos = key.find(' ', pos + 1);
    }
  }
}

bool FusedLexicon::is_idiom_prefix(std::string_view prefix) const {
  return idiom_prefixes_.count(std::string(prefix)) > 0;
}

std::optional<Polarity> FusedLexicon::find(std::string_view term, WordClass tag) const {
  if (tag == WordClass::other) return std::nullopt;
  auto it = words_.find(std::string(term));
  if (it == words_.end()) return std::nullopt;
  const auto c = static_cast<std::size_t>(tag);
  if (!(it->second.present_mask & (1u << c))) return std::nullopt;
  return it->second.by_class[c];
}

std::optional<Polarity> FusedLexicon::find_idiom(std::string_view key) const {
  auto it = idioms_.find(std::string(key));
  if (it == idioms_.end()) return std::nullopt;
  return it->second;
}

Polarity FusedLexicon::lookup(std::string_view term, WordClass tag) const {
  if (term.find(' ') != std::string_view::npos) return find_idiom(term).value_or(Polarity{});
  auto it = words_.find(std::string(term));
  if (it == words_.end()) return {};
  const auto& w = it->second;
  if (tag != WordClass::other) {
    const auto c = static_cast<std::size_t>(tag);
    return (w.present_mask & (1u << c)) ? w.by_class[c] : Polarity{};
  }
  if (!w.any_pos) return {};
  Polarity best;
  for (std::size_t c = 0; c < 4; ++c) {
    if (!(w.present_mask & (1u << c))) continue;
    best.positive = std::max(best.positive, w.by_class[c].positive);
    best.negative = std::max(best.negative, w.by_class[c].negative);
  }
  return best;
}

std::size_t FusedLexicon::unigram_entry_count() const {
  std::size_t n = 0;
  for (const auto& [_, w] : words_) n += static_cast<std::size_t>(__builtin_popcount(w.present_mask));
  return n;
}

std::string FusedLexicon::to_json() const {
  std::vector<const std::string*> keys;
  keys.reserve(words_.size());
  for (const auto& [k, _] : words_) keys.push_back(&k);
  std::sort(keys.begin(), keys.end(), [](auto* a, auto* b) { return *a < *b; });

  json words = json::array();
  for (const auto* k : keys) {
    const auto& w = words_.at(*k);
    json scores = json::array();
    for (const auto& p : w.by_class) {
      scores.push_back(p.positive);
      scores.push_back(p.negative);
    }
    words.push_back(json::array({*k, w.present_mask, w.any_pos, std::move(scores)}));
  }

  std::vector<const std::string*> ikeys;
  for (const auto& [k, _] : idioms_) ikeys.push_back(&k);
  std::sort(ikeys.begin(), ikeys.end(), [](auto* a, auto* b) { return *a < *b; });
  json idioms = json::array();
  for (const auto* k : ikeys) {
    const auto& p = idioms_.at(*k);
    idioms.push_back(json::array({*k, p.positive, p.negative}));
  }

  json doc = {{"format_version", kFormatVersion},
              {"kind", "fused_lexicon"},
              {"source_count", kSourceCount},
              {"words", std::move(words)},
              {"idioms", std::move(idioms)}};
  return doc.dump();
}

FusedLexicon FusedLexicon::from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError("fused lexicon", 0, e.what());
  }
  if (!doc.is_object() || !doc.contains("format_version")) {
    throw ParseError("fused lexicon", 0, "missing format_version");
  }
  if (doc["format_version"] != kFormatVersion) {
    throw FormatVersionError("fused lexicon format_version " + doc["format_version"].dump() +
                             " is not supported (expected " + std::to_string(kFormatVersion) + ")");
  }
  FusedLexicon lex;
  try {
    for (const auto& row : doc.at("words")) {
      WordEntry w;
      w.present_mask = row.at(1).get<std::uint8_t>();
      w.any_pos = row.at(2).get<bool>();
      const auto& s = row.at(3);
      for (std::size_t c = 0; c < 4; ++c) {
        w.by_class[c] = {s.at(2 * c).get<double>(), s.at(2 * c + 1).get<double>()};
      }
      lex.words_.emplace(row.at(0).get<std::string>(), w);
    }
    for (const auto& row : doc.at("idioms")) {
      lex.idioms_.emplace(row.at(0).get<std::string>(),
                          Polarity{row.at(1).get<double>(), row.at(2).get<double>()});
    }
  } catch (const json::exception& e) {
    throw ParseError("fused lexicon", 0, e.what());
  }
  lex.index_idiom_prefixes();
  return lex;
}

void FusedLexicon::save(const std::filesystem::path& path) const {
  write_file_atomic(path, to_json());
}

FusedLexicon FusedLexicon::load(const std::filesystem::path& path) {
  return from_json(read_file(path));
}

// ---------------------------------------------------------------------------

PolarityWordLists PolarityWordLists::from_entries(const std::vector<RawLexiconEntry>& bingliu) {
  PolarityWordLists lists;
  for (const auto& e : bingliu) {
    const auto tokens = tokenize(e.term);
    if (tokens.empty()) continue;
    auto key = join_tokens(tokens);
    if (e.pos_score > 0.0) lists.positive.insert(key);
    if (e.neg_score > 0.0) lists.negative.insert(key);
  }
  return lists;
}

LexiconPaths LexiconPaths::in_directory(const std::filesystem::path& dir) {
  return {dir / "SentiWordNet_3.0.0.txt", dir / "AFINN-111.txt", dir / "bingliu-positive-words.txt",
          dir / "bingliu-negative-words.txt"};
}

FusedLexicon load_and_fuse(const LexiconPaths& paths, std::vector<std::string>* warnings) {
  auto entries = load_sentiwordnet(paths.sentiwordnet);
  auto afinn = load_afinn(paths.afinn);
  auto bing = load_bingliu(paths.bingliu_positive, paths.bingliu_negative, warnings);
  entries.insert(entries.end(), afinn.begin(), afinn.end());
  entries.insert(entries.end(), bing.begin(), bing.end());
  return fuse(entries);
}

}  // namespace derail
