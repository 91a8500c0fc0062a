#ifndef HEADLINER_SELECTOR_HPP_
#define HEADLINER_SELECTOR_HPP_

#include <span>
#include <vector>

#include "headliner/model.hpp"

namespace headliner {

// p(t_i | x) = sigmoid(W_s h_i + b_s) over the encoding of the whole paragraph.
class SaliencyModel : public NeuralModel {
 public:
  SaliencyModel(ModelConfig config, Vocabulary vocab, TagMaps tags);

  Expr logits(Graph& g, const Paragraph& paragraph, const Matrix* contextual) const;
  // Mean BCE against paragraph.saliency_labels; throws when they are absent.
  Expr loss(Graph& g, const Paragraph& paragraph, const Matrix* contextual) const;
  std::vector<double> word_saliency(const Paragraph& paragraph, const Matrix* contextual) const;

  TokenEncoder& token_encoder() { return encoder_; }

 private:
  TokenEncoder encoder_;
  Parameter* weights_;
  Parameter* bias_;
};

// Arithmetic mean of the sentence's word probabilities.
double sentence_saliency(std::span<const double> word_probs);

// Index of the sentence with the highest mean saliency; earliest on ties.
// word_probs covers every word of the paragraph.
std::size_t select_sentence(const Paragraph& paragraph, std::span<const double> word_probs);
std::size_t select_sentence(const Paragraph& paragraph, const SaliencyModel& model, const Matrix* contextual);

// Baseline that always picks the first sentence.
std::size_t lead_sentence(const Paragraph& paragraph);

// Probability that a random positive outranks a random negative (ties count
// one half). Returns 0.5 when either class is empty.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

}  // namespace headliner

#endif  // HEADLINER_SELECTOR_HPP_
