#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "derail/word_class.hpp"

namespace derail {

enum class LexiconSource : std::uint8_t { sentiwordnet = 0, afinn = 1, bingliu = 2 };

std::string_view to_string(LexiconSource s);

/// Part of speech of a raw lexicon entry; `any` marks sources without POS
/// information (AFINN, Bing Liu), which are replicated into all four classes
/// at fusion time.
enum class LexiconPos : std::uint8_t { noun = 0, verb = 1, adjective = 2, adverb = 3, any = 4 };

struct RawLexiconEntry {
  std::string term;  // lowercase; idioms keep their internal spaces
  LexiconPos pos = LexiconPos::any;
  double pos_score = 0.0;
  double neg_score = 0.0;
  LexiconSource source = LexiconSource::sentiwordnet;
};

struct Polarity {
  double positive = 0.0;
  double negative = 0.0;

  friend bool operator==(const Polarity&, const Polarity&) = default;
};

/// SentiWordNet 3.0 TSV. Senses of the same (term, POS) are combined by the
/// sense-rank weighted average sum(s_i / i) / sum(1 / i).
std::vector<RawLexiconEntry> load_sentiwordnet(const std::filesystem::path& path);
std::vector<RawLexiconEntry> parse_sentiwordnet(std::string_view contents,
                                                const std::string& source_name = "<memory>");

/// AFINN "term<TAB>integer" with scores in [-5, 5], mapped to [0, 1].
std::vector<RawLexiconEntry> load_afinn(const std::filesystem::path& path);
std::vector<RawLexiconEntry> parse_afinn(std::string_view contents,
                                         const std::string& source_name = "<memory>");

/// Bing Liu opinion lexicon, one term per line, ';' header lines skipped.
/// Terms listed under both polarities keep both and are reported in
/// `warnings` when a sink is given.
std::vector<RawLexiconEntry> load_bingliu(const std::filesystem::path& positive_path,
                                          const std::filesystem::path& negative_path,
                                          std::vector<std::string>* warnings = nullptr);
std::vector<RawLexiconEntry> parse_bingliu(std::string_view positive, std::string_view negative,
                                           std::vector<std::string>* warnings = nullptr);

class FusedLexicon;
FusedLexicon fuse(const std::vector<RawLexiconEntry>& entries);

/// Per-POS fused word scores plus a multiword (idiom) table. Immutable once
/// built; safe to share between threads.
class FusedLexicon {
 public:
  static constexpr int kFormatVersion = 1;
  static constexpr int kSourceCount = 3;

  struct WordEntry {
    std::array<Polarity, 4> by_class{};
    std::uint8_t present_mask = 0;  // bit i set when class i has an entry
    bool any_pos = false;           // some source had no POS for this term
  };

  FusedLexicon() = default;

  /// Score of `term` under `tag`. For `other`, terms backed by a POS-less
  /// source return the per-polarity maximum over the four classes; all other
  /// misses return (0, 0).
  Polarity lookup(std::string_view term, WordClass tag) const;

  std::optional<Polarity> find(std::string_view term, WordClass tag) const;
  std::optional<Polarity> find_idiom(std::string_view key) const;

  /// True when `prefix` (space-joined tokens) begins at least one idiom key.
  bool is_idiom_prefix(std::string_view prefix) const;

  const std::unordered_map<std::string, WordEntry>& words() const { return words_; }
  const std::unordered_map<std::string, Polarity>& idioms() const { return idioms_; }
  int source_count() const { return kSourceCount; }

  std::size_t unigram_entry_count() const;

  /// Versioned JSON snapshot; doubles round-trip exactly.
  std::string to_json() const;
  static FusedLexicon from_json(std::string_view text);
  void save(const std::filesystem::path& path) const;
  static FusedLexicon load(const std::filesystem::path& path);

  friend FusedLexicon fuse(const std::vector<RawLexiconEntry>& entries);

 private:
  void index_idiom_prefixes();

  std::unordered_map<std::string, WordEntry> words_;
  std::unordered_map<std::string, Polarity> idioms_;
  std::unordered_set<std::string> idiom_prefixes_;
};

/// Plain polarity word lists, used for the binary has-positive/has-negative
/// baseline features.
struct PolarityWordLists {
  std::unordered_set<std::string> positive;
  std::unordered_set<std::string> negative;

  static PolarityWordLists from_entries(const std::vector<RawLexiconEntry>& bingliu);
};

/// Standard file names of the pinned snapshots under a data directory.
struct LexiconPaths {
  std::filesystem::path sentiwordnet;
  std::filesystem::path afinn;
  std::filesystem::path bingliu_positive;
  std::filesystem::path bingliu_negative;

  static LexiconPaths in_directory(const std::filesystem::path& dir);
};

FusedLexicon load_and_fuse(const LexiconPaths& paths, std::vector<std::string>* warnings = nullptr);

}  // namespace derail
