#ifndef HEADLINER_RANKER_HPP_
#define HEADLINER_RANKER_HPP_

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "headliner/compressor.hpp"
#include "headliner/encoder.hpp"
#include "headliner/model.hpp"

namespace headliner {

// Bidirectional LSTM language model. Each direction has its own LSTM stack
// and projection to the embedding width; output logits are (h P) E^T + b
// with E the input embedding table, so input and output weights are tied.
// The padding id doubles as the boundary token on both ends.
class LanguageModel : public NeuralModel {
 public:
  LanguageModel(ModelConfig config, Vocabulary vocab);

  // Summed cross-entropy of both directions over token ids.
  Expr loss(Graph& g, std::span<const int> ids) const;
  // n x |V| log-probabilities of each position under one direction.
  Matrix log_probs(std::span<const int> ids, bool backward) const;
  // Sum over positions of log p(x_i | x_<i) + log p(x_i | x_>i).
  double loglikelihood(std::span<const int> ids) const;
  double loglikelihood(const std::vector<std::string>& tokens) const;
  std::vector<int> ids(const std::vector<std::string>& tokens) const;

  Parameter& embedding() const { return *embedding_; }

 private:
  Expr direction_logits(Graph& g, std::span<const int> ids, bool backward) const;

  Parameter* embedding_;
  std::vector<LstmLayer> forward_;
  std::vector<LstmLayer> backward_;
  Parameter* forward_projection_;
  Parameter* backward_projection_;
  Parameter* forward_bias_;
  Parameter* backward_bias_;
};

// exp(total NLL / (2 * tokens)) over a set of sentences.
double perplexity(const LanguageModel& lm, const std::vector<std::vector<int>>& sentences, int threads = 1);

// ((5 + length) / 6)^alpha
double length_penalty(std::size_t length, double alpha);

struct RerankResult {
  CompressionCandidate best;
  std::vector<CompressionCandidate> ranked;  // combined score, best first
};

using LmScorer = std::function<double(const CompressionCandidate&)>;

// Fills lm_score = loglik / lp(|text tokens|) and combined = model_score +
// lambda * lm_score, then sorts by combined score; ties keep K-best rank.
RerankResult rerank(std::vector<CompressionCandidate> candidates, const LmScorer& loglik, double lambda,
                    double alpha);
RerankResult rerank(std::vector<CompressionCandidate> candidates, const LanguageModel& lm, double lambda,
                    double alpha);

}  // namespace headliner

#endif  // HEADLINER_RANKER_HPP_
