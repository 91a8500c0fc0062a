#ifndef HEADLINER_COMPRESSOR_HPP_
#define HEADLINER_COMPRESSOR_HPP_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "headliner/chain_crf.hpp"
#include "headliner/model.hpp"
#include "headliner/semicrf.hpp"

namespace headliner {

struct CompressionCandidate {
  Segmentation segmentation;
  std::vector<int> mask;
  double model_score = 0.0;
  double lm_score = 0.0;  // length-normalized LM log-likelihood
  double combined = 0.0;
  std::vector<std::string> tokens;  // kept surfaces
  std::string text;
  std::size_t rank = 0;  // position in the decoder's K-best list
};

// Kept surfaces joined by single spaces, in source order.
std::string render_compression(const Sentence& sentence, std::span<const int> mask);
std::vector<std::string> kept_tokens(const Sentence& sentence, std::span<const int> mask);

// Deletion-based compressor: naive tagger, chain CRF or semi-Markov CRF over
// a shared embedding and encoder stack.
class Compressor : public NeuralModel {
 public:
  Compressor(ModelConfig config, Vocabulary vocab, TagMaps tags);

  // Mean BCE for the naive tagger; NLL of the gold mask for the CRFs.
  Expr loss(Graph& g, const Sentence& sentence, const Matrix* contextual) const;

  // Best candidates, best first: up to k for the semi-CRF, one otherwise.
  // Masks are never empty: an empty decode keeps its highest-marginal token
  // (the candidate keeps its model score), and later duplicates are dropped.
  std::vector<CompressionCandidate> candidates(const Sentence& sentence, std::size_t k,
                                               const Matrix* contextual) const;
  std::vector<int> decode(const Sentence& sentence, const Matrix* contextual) const;
  // p(keep) per token: sigmoid outputs or exact marginals.
  std::vector<double> keep_probabilities(const Sentence& sentence, const Matrix* contextual) const;

  // Raw potentials for the CRF kinds (eval mode).
  PotentialTable chain_potentials(const Sentence& sentence, const Matrix* contextual) const;
  SegmentScores segment_scores(const Sentence& sentence, const Matrix* contextual,
                               SegmentTransitions* transitions) const;

  TokenEncoder& token_encoder() { return encoder_; }

 private:
  CompressionCandidate finish(const Sentence& sentence, std::vector<int> mask, Segmentation seg,
                              double score, std::size_t rank, const Matrix* contextual) const;

  TokenEncoder encoder_;
  std::optional<NaiveHead> naive_;
  std::optional<EmissionHead> chain_;
  std::optional<SegmentHead> segment_;
};

}  // namespace headliner

#endif  // HEADLINER_COMPRESSOR_HPP_
