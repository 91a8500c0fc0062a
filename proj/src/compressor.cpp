#include "headliner/compressor.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace headliner {

std::vector<std::string> kept_tokens(const Sentence& sentence, std::span<const int> mask) {
  if (mask.size() != sentence.size()) throw std::invalid_argument("mask length does not match the sentence");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] == kKeep) out.push_back(sentence.tokens[i].surface);
  }
  return out;
}

std::string render_compression(const Sentence& sentence, std::span<const int> mask) {
  std::string text;
  for (const auto& t : kept_tokens(sentence, mask)) {
    if (!text.empty()) text += ' ';
    text += t;
  }
  return text;
}

Compressor::Compressor(ModelConfig config, Vocabulary vocab, TagMaps tags)
    : NeuralModel(std::move(config), std::move(vocab), std::move(tags)),
      encoder_(config_, vocab_, tags_, params_) {
  const std::size_t d = encoder_.output_dim();
  switch (config_.kind) {
    case ModelKind::kNaive: naive_.emplace(params_, "", d); break;
    case ModelKind::kCrf:
      chain_.emplace(params_, "", d, static_cast<std::size_t>(config_.emission_hidden));
      break;
    case ModelKind::kScrf:
      segment_.emplace(params_, "", d, config_.max_segment_length, static_cast<std::size_t>(config_.length_dim),
                       config_.scheme);
      break;
    default: throw std::invalid_argument("not a compressor kind: " + to_string(config_.kind));
  }
}

Expr Compressor::loss(Graph& g, const Sentence& sentence, const Matrix* contextual) const {
  if (!sentence.keep_labels) throw std::invalid_argument("compressor training needs keep labels");
  const auto& gold = *sentence.keep_labels;
  Expr h = encoder_.encode(g, sentence.tokens, contextual);
  if (naive_) {
    const std::vector<double> targets(gold.begin(), gold.end());
    return bce_with_logits(naive_->logits(g, h), targets);
  }
  if (chain_) return crf_nll(chain_->emissions(g, h), g.param(chain_->transitions()), gold);
  const auto p = segment_->project(g, h);
  return scrf_nll(p.token, p.boundary, p.length, p.transitions, segment_->scheme(),
                  segmentation_from_mask(gold, segment_->max_len()), segment_->max_len());
}

PotentialTable Compressor::chain_potentials(const Sentence& sentence, const Matrix* contextual) const {
  if (!chain_) throw std::logic_error("chain potentials need a CRF compressor");
  Graph g;
  Expr em = chain_->emissions(g, encoder_.encode(g, sentence.tokens, contextual));
  return {em.value(), chain_->transitions().value};
}

SegmentScores Compressor::segment_scores(const Sentence& sentence, const Matrix* contextual,
                                         SegmentTransitions* transitions) const {
  if (!segment_) throw std::logic_error("segment scores need a semi-CRF compressor");
  Graph g;
  const auto p = segment_->project(g, encoder_.encode(g, sentence.tokens, contextual));
  if (transitions != nullptr) *transitions = {segment_->scheme(), p.transitions.value()};
  return build_segment_scores(p.token.value(), p.boundary.value(), p.length.value(), segment_->max_len());
}

std::vector<double> Compressor::keep_probabilities(const Sentence& sentence, const Matrix* contextual) const {
  if (naive_) {
    Graph g;
    const Matrix& logits = naive_->logits(g, encoder_.encode(g, sentence.tokens, contextual)).value();
    std::vector<double> p;
    for (double z : logits.values()) p.push_back(1.0 / (1.0 + std::exp(-z)));
    return p;
  }
  if (chain_) {
    const auto m = crf_marginals(chain_potentials(sentence, contextual));
    std::vector<double> p;
    for (std::size_t i = 0; i < m.unary.rows(); ++i) p.push_back(m.unary(i, kKeep));
    return p;
  }
  SegmentTransitions trans;
  const auto scores = segment_scores(sentence, contextual, &trans);
  return scrf_keep_marginals(scores, scrf_marginals(scores, trans));
}

CompressionCandidate Compressor::finish(const Sentence& sentence, std::vector<int> mask, Segmentation seg,
                                        double score, std::size_t rank, const Matrix* contextual) const {
  if (std::find(mask.begin(), mask.end(), kKeep) == mask.end()) {
    ensure_nonempty(mask, keep_probabilities(sentence, contextual));
    seg = segmentation_from_mask(mask, segment_ ? segment_->max_len() : 1);
  }
  CompressionCandidate c;
  c.segmentation = std::move(seg);
  c.mask = std::move(mask);
  c.model_score = score;
  c.combined = score;
  c.rank = rank;
  c.tokens = kept_tokens(sentence, c.mask);
  c.text = render_compression(sentence, c.mask);
  return c;
}

std::vector<CompressionCandidate> Compressor::candidates(const Sentence& sentence, std::size_t k,
                                                         const Matrix* contextual) const {
  if (k == 0) throw std::invalid_argument("candidates: k must be >= 1");
  if (sentence.size() == 0) throw std::invalid_argument("candidates: empty sentence");
  std::vector<CompressionCandidate> out;
  if (naive_) {
    const auto p = keep_probabilities(sentence, contextual);
    auto mask = naive_tag(p);
    double score = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) score += std::log(mask[i] == kKeep ? p[i] : 1.0 - p[i]);
    out.push_back(finish(sentence, mask, segmentation_from_mask(mask, 1), score, 0, contextual));
    return out;
  }
  if (chain_) {
    const auto best = crf_viterbi(chain_potentials(sentence, contextual));
    out.push_back(finish(sentence, best.labels, segmentation_from_mask(best.labels, 1), best.score, 0, contextual));
    return out;
  }
  SegmentTransitions trans;
  const auto scores = segment_scores(sentence, contextual, &trans);
  std::set<std::vector<int>> seen;
  std::size_t rank = 0;
  for (auto& cand : scrf_kbest(scores, trans, k)) {
    auto mask = mask_from_segmentation(cand.segments);
    auto c = finish(sentence, std::move(mask), std::move(cand.segments), cand.score, rank++, contextual);
    if (seen.insert(c.mask).second) out.push_back(std::move(c));
  }
  return out;
}

std::vector<int> Compressor::decode(const Sentence& sentence, const Matrix* contextual) const {
  return candidates(sentence, 1, contextual).front().mask;
}

}  // namespace headliner
