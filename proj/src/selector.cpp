#include "headliner/selector.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace headliner {

SaliencyModel::SaliencyModel(ModelConfig config, Vocabulary vocab, TagMaps tags)
    : NeuralModel(std::move(config), std::move(vocab), std::move(tags)),
      encoder_(config_, vocab_, tags_, params_) {
  if (config_.kind != ModelKind::kSelector) throw std::invalid_argument("selector needs kind 'selector'");
  weights_ = &params_.add("saliency_W", encoder_.output_dim(), 1);
  bias_ = &params_.add("saliency_b", 1, 1, Init::kZero, false);
}

Expr SaliencyModel::logits(Graph& g, const Paragraph& paragraph, const Matrix* contextual) const {
  const auto words = paragraph.words();
  if (words.empty()) throw std::invalid_argument("selector: empty paragraph");
  Expr h = encoder_.encode(g, words, contextual);
  return add(matmul(h, g.param(*weights_)), g.param(*bias_));
}

Expr SaliencyModel::loss(Graph& g, const Paragraph& paragraph, const Matrix* contextual) const {
  if (!paragraph.saliency_labels) {
    throw std::invalid_argument("paragraph '" + paragraph.id + "' has no saliency labels");
  }
  const std::vector<double> targets(paragraph.saliency_labels->begin(), paragraph.saliency_labels->end());
  return bce_with_logits(logits(g, paragraph, contextual), targets);
}

std::vector<double> SaliencyModel::word_saliency(const Paragraph& paragraph, const Matrix* contextual) const {
  Graph g;
  const Matrix& z = logits(g, paragraph, contextual).value();
  std::vector<double> p;
  p.reserve(z.size());
  for (double v : z.values()) p.push_back(1.0 / (1.0 + std::exp(-v)));
  return p;
}

double sentence_saliency(std::span<const double> word_probs) {
  if (word_probs.empty()) throw std::invalid_argument("sentence_saliency: empty sentence");
  return std::accumulate(word_probs.begin(), word_probs.end(), 0.0) / static_cast<double>(word_probs.size());
}

std::size_t select_sentence(const Paragraph& paragraph, std::span<const double> word_probs) {
  if (paragraph.sentences.empty()) throw std::invalid_argument("select_sentence: no sentences");
  if (word_probs.size() != paragraph.word_count()) {
    throw std::invalid_argument("select_sentence: probabilities do not cover the paragraph");
  }
  std::size_t best = 0;
  double best_score = -1.0;
  std::size_t offset = 0;
  for (std::size_t s = 0; s < paragraph.sentences.size(); ++s) {
    const std::size_t n = paragraph.sentences[s].size();
    const double score = sentence_saliency(word_probs.subspan(offset, n));
    if (score > best_score) {
      best_score = score;
      best = s;
    }
    offset += n;
  }
  return best;
}

std::size_t select_sentence(const Paragraph& paragraph, const SaliencyModel& model, const Matrix* contextual) {
  if (paragraph.sentences.size() == 1) return 0;
  return select_sentence(paragraph, model.word_saliency(paragraph, contextual));
}

std::size_t lead_sentence(const Paragraph& paragraph) {
  if (paragraph.sentences.empty()) throw std::invalid_argument("lead_sentence: no sentences");
  return 0;
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("roc_auc: length mismatch");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Mann-Whitney U with average ranks for ties.
  double positive_rank_sum = 0.0;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1) {
        positive_rank_sum += rank;
        ++positives;
      }
    }
    i = j;
  }
  const std::size_t negatives = scores.size() - positives;
  if (positives == 0 || negatives == 0) return 0.5;
  const double p = static_cast<double>(positives);
  return (positive_rank_sum - p * (p + 1) / 2) / (p * static_cast<double>(negatives));
}

}  // namespace headliner
