#include "headliner/ranker.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "headliner/trainer.hpp"

namespace headliner {

LanguageModel::LanguageModel(ModelConfig config, Vocabulary vocab)
    : NeuralModel(std::move(config), std::move(vocab), TagMaps{}) {
  if (config_.kind != ModelKind::kLm) throw std::invalid_argument("language model needs kind 'lm'");
  const auto d = static_cast<std::size_t>(config_.embedding.word_dim);
  const auto hidden = static_cast<std::size_t>(config_.encoder.hidden);
  embedding_ = &params_.add("lm_embedding", vocab_.size(), d);
  for (int layer = 0; layer < config_.encoder.layers; ++layer) {
    const std::size_t in = layer == 0 ? d : hidden;
    const std::string tag = "lm_lstm" + std::to_string(layer);
    forward_.emplace_back(params_, tag + "_fwd_", in, hidden);
    backward_.emplace_back(params_, tag + "_bwd_", in, hidden);
  }
  forward_projection_ = &params_.add("lm_fwd_projection", hidden, d);
  backward_projection_ = &params_.add("lm_bwd_projection", hidden, d);
  forward_bias_ = &params_.add("lm_fwd_bias", 1, vocab_.size(), Init::kZero, false);
  backward_bias_ = &params_.add("lm_bwd_bias", 1, vocab_.size(), Init::kZero, false);
}

Expr LanguageModel::direction_logits(Graph& g, std::span<const int> ids, bool backward) const {
  // Forward reads <s> x_1..x_{n-1}; backward reads x_2..x_n </s> right to left.
  std::vector<int> inputs;
  if (backward) {
    inputs.assign(ids.begin() + 1, ids.end());
    inputs.push_back(kPadId);
  } else {
    inputs.push_back(kPadId);
    inputs.insert(inputs.end(), ids.begin(), ids.end() - 1);
  }
  Expr x = g.lookup(*embedding_, inputs);
  for (const auto& layer : backward ? backward_ : forward_) {
    x = layer.run(g, dropout(x, config_.encoder.dropout), backward);
  }
  Expr projected = matmul(dropout(x, config_.encoder.dropout),
                          g.param(backward ? *backward_projection_ : *forward_projection_));
  return add(matmul_nt(projected, g.param(*embedding_)), g.param(backward ? *backward_bias_ : *forward_bias_));
}

Expr LanguageModel::loss(Graph& g, std::span<const int> ids) const {
  if (ids.empty()) throw std::invalid_argument("language model: empty token list");
  return add(softmax_cross_entropy(direction_logits(g, ids, false), ids),
             softmax_cross_entropy(direction_logits(g, ids, true), ids));
}

Matrix LanguageModel::log_probs(std::span<const int> ids, bool backward) const {
  if (ids.empty()) throw std::invalid_argument("language model: empty token list");
  Graph g;
  Matrix out = direction_logits(g, ids, backward).value();
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto row = out.row(i);
    const double z = log_sum_exp(row);
    for (double& v : row) v -= z;
  }
  return out;
}

double LanguageModel::loglikelihood(std::span<const int> ids) const {
  Graph g;
  return -loss(g, ids).scalar();
}

std::vector<int> LanguageModel::ids(const std::vector<std::string>& tokens) const {
  std::vector<int> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(vocab_.id(t));
  return out;
}

double LanguageModel::loglikelihood(const std::vector<std::string>& tokens) const {
  return loglikelihood(ids(tokens));
}

double perplexity(const LanguageModel& lm, const std::vector<std::vector<int>>& sentences, int threads) {
  std::size_t tokens = 0;
  for (const auto& s : sentences) tokens += s.size();
  if (tokens == 0) throw std::invalid_argument("perplexity: no tokens");
  const double mean_nll = mean_loss(
      sentences.size(), [&](std::size_t i) { return -lm.loglikelihood(sentences[i]); }, threads);
  const double total = mean_nll * static_cast<double>(sentences.size());
  return std::exp(total / (2.0 * static_cast<double>(tokens)));
}

double length_penalty(std::size_t length, double alpha) {
  if (length < 1) throw std::invalid_argument("length_penalty: length must be >= 1");
  return std::pow((5.0 + static_cast<double>(length)) / 6.0, alpha);
}

RerankResult rerank(std::vector<CompressionCandidate> candidates, const LmScorer& loglik, double lambda,
                    double alpha) {
  if (candidates.empty()) throw std::invalid_argument("rerank: no candidates");
  for (auto& c : candidates) {
    const auto kept = static_cast<std::size_t>(std::count(c.mask.begin(), c.mask.end(), kKeep));
    if (kept == 0) throw std::invalid_argument("rerank: empty candidate");
    c.lm_score = loglik(c) / length_penalty(kept, alpha);
    c.combined = c.model_score + lambda * c.lm_score;
  }
  std::stable_sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
    if (a.combined != b.combined) return a.combined > b.combined;
    return a.rank < b.rank;
  });
  RerankResult out;
  out.best = candidates.front();
  out.ranked = std::move(candidates);
  return out;
}

RerankResult rerank(std::vector<CompressionCandidate> candidates, const LanguageModel& lm, double lambda,
                    double alpha) {
  auto score = [&lm](const CompressionCandidate& c) { return lm.loglikelihood(c.tokens); };
  return rerank(std::move(candidates), score, lambda, alpha);
}

}  // namespace headliner
