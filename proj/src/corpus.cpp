#include "derail/corpus.hpp"

#include <cmath>
#include <map>
#include <set>

#include <json.hpp>

#include "derail/error.hpp"
#include "derail/util.hpp"

namespace derail {

namespace {

using nlohmann::json;

const json& require(const json& obj, const char* key, const std::string& src, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(src, line, std::string("missing field \"") + key + "\"");
  return *it;
}

std::string require_string(const json& obj, const char* key, const std::string& src, std::size_t line) {
  const auto& v = require(obj, key, src, line);
  if (!v.is_string()) throw ParseError(src, line, std::string("field \"") + key + "\" must be a string");
  return v.get<std::string>();
}

bool label_allowed(Task task, Label label) {
  if (task == Task::paired_wiki) return label == Label::derail || label == Label::healthy;
  return label == Label::moderated || label == Label::ignored;
}

}  // namespace

std::string_view to_string(Task task) {
  return task == Task::paired_wiki ? "paired-wiki" : "window-chat";
}

Task parse_task(std::string_view s) {
  if (s == "paired-wiki") return Task::paired_wiki;
  if (s == "window-chat") return Task::window_chat;
  throw ValidationError("unknown task '" + std::string(s) + "' (expected paired-wiki or window-chat)");
}

Corpus parse_corpus(std::string_view jsonl, Task task, const std::string& src) {
  Corpus corpus;
  corpus.fingerprint = content_fingerprint(jsonl);
  std::set<std::string> ids;
  std::size_t lineno = 0;
  std::size_t start = 0;
  while (start < jsonl.size()) {
    auto end = jsonl.find('\n', start);
    if (end == std::string_view::npos) end = jsonl.size();
    const auto line = trim(jsonl.substr(start, end - start));
    start = end + 1;
    ++lineno;
    if (line.empty()) continue;

    json doc;
    try {
      doc = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(src, lineno, std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError(src, lineno, "expected a JSON object");

    ConversationSample s;
    s.id = require_string(doc, "id", src, lineno);
    if (s.id.empty()) throw ParseError(src, lineno, "empty conversation id");
    if (!ids.insert(s.id).second) throw ParseError(src, lineno, "duplicate conversation id '" + s.id + "'");

    const auto label_text = require_string(doc, "label", src, lineno);
    const auto label = parse_label(label_text);
    if (!label || !label_allowed(task, *label)) {
      throw ParseError(src, lineno, "label '" + label_text + "' is not valid for task " +
                                        std::string(to_string(task)));
    }
    s.label = *label;

    if (auto it = doc.find("pair_id"); it != doc.end() && !it->is_null()) {
      if (!it->is_string()) throw ParseError(src, lineno, "field \"pair_id\" must be a string");
      s.pair_id = it->get<std::string>();
    }

    const auto& msgs = require(doc, "messages", src, lineno);
    if (!msgs.is_array() || msgs.empty()) throw ParseError(src, lineno, "\"messages\" must be a non-empty array");
    for (const auto& m : msgs) {
      if (!m.is_object()) throw ParseError(src, lineno, "each message must be an object");
      s.messages.push_back(Message{require_string(m, "id", src, lineno),
                                   require_string(m, "speaker", src, lineno),
                                   require_string(m, "text", src, lineno)});
    }

    if (auto it = doc.find("prompt_vectors"); it != doc.end() && !it->is_null()) {
      if (!it->is_object()) throw ParseError(src, lineno, "\"prompt_vectors\" must be an object");
      for (const auto& [mid, arr] : it->items()) {
        if (!arr.is_array() || arr.size() != kPromptDim) {
          throw ParseError(src, lineno, "prompt vector of '" + mid + "' must hold 6 numbers");
        }
        PromptVector v{};
        for (std::size_t k = 0; k < kPromptDim; ++k) {
          if (!arr[k].is_number()) throw ParseError(src, lineno, "prompt vector of '" + mid + "' must hold 6 numbers");
          v[k] = arr[k].get<double>();
          if (!std::isfinite(v[k])) throw ParseError(src, lineno, "prompt vector of '" + mid + "' is not finite");
        }
        s.prompt_vectors.emplace(mid, v);
      }
    }
    corpus.samples.push_back(std::move(s));
  }
  if (corpus.samples.empty()) throw ValidationError(src + ": corpus has no conversations");

  if (task == Task::paired_wiki) {
    std::map<std::string, std::vector<std::size_t>> members;
    std::vector<std::string> order;
    for (std::size_t i = 0; i < corpus.samples.size(); ++i) {
      const auto& s = corpus.samples[i];
      if (!s.pair_id) throw ValidationError(src + ": conversation '" + s.id + "' has no pair_id");
      auto& v = members[*s.pair_id];
      if (v.empty()) order.push_back(*s.pair_id);
      v.push_back(i);
    }
    std::vector<std::string> broken;
    for (const auto& pid : order) {
      const auto& v = members[pid];
      if (v.size() != 2 || corpus.samples[v[0]].label == corpus.samples[v[1]].label) {
        broken.push_back(pid);
        continue;
      }
      const bool first_derails = corpus.samples[v[0]].label == Label::derail;
      corpus.pairs.push_back({pid, first_derails ? v[0] : v[1], first_derails ? v[1] : v[0]});
    }
    if (!broken.empty()) {
      std::string list;
      for (std::size_t k = 0; k < broken.size() && k < 20; ++k) list += (k ? ", " : "") + broken[k];
      if (broken.size() > 20) list += ", ...";
      throw ValidationError(src + ": " + std::to_string(broken.size()) +
                            " pair(s) do not have exactly one derail and one healthy member: " + list);
    }
  }
  return corpus;
}

Corpus ingest_corpus(const std::filesystem::path& path, Task task) {
  return parse_corpus(read_file(path), task, path.string());
}

std::string corpus_to_jsonl(const std::vector<ConversationSample>& samples) {
  std::string out;
  for (const auto& s : samples) {
    json doc;
    doc["id"] = s.id;
    doc["label"] = std::string(to_string(s.label));
    if (s.pair_id) doc["pair_id"] = *s.pair_id;
    json msgs = json::array();
    for (const auto& m : s.messages) msgs.push_back({{"id", m.id}, {"speaker", m.speaker}, {"text", m.text}});
    doc["messages"] = std::move(msgs);
    if (!s.prompt_vectors.empty()) {
      json pv = json::object();
      for (const auto& [mid, v] : s.prompt_vectors) pv[mid] = v;
      doc["prompt_vectors"] = std::move(pv);
    }
    out += doc.dump();
    out.push_back('\n');
  }
  return out;
}

}  // namespace derail
