#include "derail/sentiment.hpp"

#include <algorithm>

#include "derail/error.hpp"
#include "derail/lexicon.hpp"

namespace derail {

std::vector<ScoredToken> score_tokens(std::span<const TaggedToken> tagged,
                                      const FusedLexicon& lexicon) {
  std::vector<ScoredToken> out;
  out.reserve(tagged.size());
  for (const auto& t : tagged) {
    const auto p = lexicon.lookup(t.token.text, t.tag);
    out.push_back(ScoredToken{t, p.positive, p.negative});
  }
  return out;
}

namespace {

std::vector<double> top_k(std::vector<double> scores, std::size_t k) {
  std::stable_sort(scores.begin(), scores.end(), std::greater<>());
  scores.resize(k, 0.0);
  return scores;
}

}  // namespace

SentimentBlock sentiment_block(std::span<const ScoredToken> scored, std::size_t k_pos,
                               std::size_t k_neg) {
  if (k_pos == 0 || k_neg == 0) throw ValidationError("k_pos and k_neg must be at least 1");
  std::vector<double> pos, neg;
  pos.reserve(scored.size());
  neg.reserve(scored.size());
  double sum_pos = 0.0, sum_neg = 0.0;
  for (const auto& s : scored) {
    pos.push_back(s.pos_score);
    neg.push_back(s.neg_score);
    sum_pos += s.pos_score;
    sum_neg += s.neg_score;
  }
  return SentimentBlock{top_k(std::move(pos), k_pos), top_k(std::move(neg), k_neg),
                        sum_pos - sum_neg};
}

ToneOneHot tone_onehot(const SentimentBlock& first, const SentimentBlock& second) {
  ToneOneHot out{};
  const std::size_t idx = 2 * (first.polarity < 0.0 ? 1 : 0) + (second.polarity < 0.0 ? 1 : 0);
  out[idx] = 1.0;
  return out;
}

}  // namespace derail
