#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "derail/features.hpp"

namespace derail {

enum class Task { paired_wiki, window_chat };

std::string_view to_string(Task task);
Task parse_task(std::string_view s);

/// Both members of a (derailing, healthy) conversation pair, as indices into
/// the sample list.
struct PairIndex {
  std::string pair_id;
  std::size_t derail = 0;
  std::size_t healthy = 0;
};

struct Corpus {
  std::vector<ConversationSample> samples;
  std::vector<PairIndex> pairs;  // paired task only, in order of first appearance
  std::string fingerprint;       // content hash of the source bytes
};

/// JSONL, one conversation per line:
///   {"id", "pair_id"?, "label", "messages": [{"id", "speaker", "text"}],
///    "prompt_vectors"?: {message_id: [6 reals]}}
/// Labels must come from the task's label set. For the paired task every
/// pair_id must appear exactly twice with opposite labels. Schema errors are
/// ParseErrors carrying the line number; pair errors list the pair id.
Corpus parse_corpus(std::string_view jsonl, Task task, const std::string& source_name = "<memory>");
Corpus ingest_corpus(const std::filesystem::path& path, Task task);

std::string corpus_to_jsonl(const std::vector<ConversationSample>& samples);

}  // namespace derail
