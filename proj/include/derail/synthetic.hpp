#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "derail/features.hpp"

namespace derail {

/// Chat-room conversations for the window task. Each conversation has
/// `window + 1` messages; the last one is the reported message and carries
/// no signal. The label is "moderated" iff a strongly negative word appears
/// in one of the last `signal_span` messages of the window (with probability
/// `label_noise` flipped). Strong words also appear earlier in the window as
/// distractors, so only their position carries information.
struct SyntheticChatConfig {
  std::size_t conversations = 2000;
  std::size_t window = 10;
  std::size_t signal_span = 3;
  double strong_word_rate = 0.18;  // per message, anywhere in the window
  double label_noise = 0.0;
  std::uint64_t seed = 7;
};

std::vector<ConversationSample> make_synthetic_chat(const SyntheticChatConfig& config);

/// Paired talk-page style conversations: every pair shares a page and has
/// one derailing and one healthy member with 2..6 messages. Derailing
/// conversations open with somewhat more negative and second-person
/// language; the effect size is controlled by `signal`.
struct SyntheticPairedConfig {
  std::size_t pairs = 300;
  double signal = 0.35;
  std::uint64_t seed = 11;
};

std::vector<ConversationSample> make_synthetic_pairs(const SyntheticPairedConfig& config);

/// Six-centroid prompt model over the synthetic vocabulary, as JSON.
std::string synthetic_prompt_model_json();

}  // namespace derail
