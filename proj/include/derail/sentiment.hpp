#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "derail/text.hpp"

namespace derail {

class FusedLexicon;

struct ScoredToken {
  TaggedToken tagged;
  double pos_score = 0.0;
  double neg_score = 0.0;
};

/// Top-k word scores of one message plus its overall polarity.
struct SentimentBlock {
  std::vector<double> top_pos;  // non-increasing, zero-padded to k_pos
  std::vector<double> top_neg;  // non-increasing, zero-padded to k_neg
  double polarity = 0.0;        // sum of positive minus sum of negative scores
};

/// One-hot over (first sign, second sign) in the order PP, PN, NP, NN.
using ToneOneHot = std::array<double, 4>;

std::vector<ScoredToken> score_tokens(std::span<const TaggedToken> tagged,
                                      const FusedLexicon& lexicon);

/// Precondition: k_pos >= 1 and k_neg >= 1. Ties keep message order.
SentimentBlock sentiment_block(std::span<const ScoredToken> scored, std::size_t k_pos,
                               std::size_t k_neg);

/// A message is negative iff its polarity is strictly below zero.
ToneOneHot tone_onehot(const SentimentBlock& first, const SentimentBlock& second);

}  // namespace derail
