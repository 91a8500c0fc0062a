#include "headliner/chain_crf.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace headliner {

namespace {

void check_table(const PotentialTable& pot) {
  if (pot.emissions.rows() == 0) throw std::invalid_argument("CRF: empty sentence");
  if (pot.emissions.cols() != kNumLabels || pot.transitions.rows() != kNumLabels ||
      pot.transitions.cols() != kNumLabels) {
    throw std::invalid_argument("CRF: potentials must be n x 2 and 2 x 2");
  }
}

void check_gold(const PotentialTable& pot, std::span<const int> gold) {
  if (gold.size() != pot.size()) {
    throw std::invalid_argument("CRF: gold length " + std::to_string(gold.size()) +
                                " does not match " + std::to_string(pot.size()) + " positions");
  }
  for (int y : gold) {
    if (y != kDelete && y != kKeep) throw std::invalid_argument("CRF: gold labels must be 0/1");
  }
}

// alpha(i, y): log-sum of prefix scores ending in label y at position i.
Matrix forward_table(const PotentialTable& pot) {
  const std::size_t n = pot.size();
  Matrix alpha(n, kNumLabels);
  for (std::size_t y = 0; y < kNumLabels; ++y) alpha(0, y) = pot.emissions(0, y);
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t y = 0; y < kNumLabels; ++y) {
      std::array<double, kNumLabels> terms{};
      for (std::size_t p = 0; p < kNumLabels; ++p) terms[p] = alpha(i - 1, p) + pot.transitions(p, y);
      alpha(i, y) = log_sum_exp(terms) + pot.emissions(i, y);
    }
  }
  return alpha;
}

Matrix backward_table(const PotentialTable& pot) {
  const std::size_t n = pot.size();
  Matrix beta(n, kNumLabels);
  for (std::size_t i = n - 1; i-- > 0;) {
    for (std::size_t y = 0; y < kNumLabels; ++y) {
      std::array<double, kNumLabels> terms{};
      for (std::size_t q = 0; q < kNumLabels; ++q) {
        terms[q] = pot.transitions(y, q) + pot.emissions(i + 1, q) + beta(i + 1, q);
      }
      beta(i, y) = log_sum_exp(terms);
    }
  }
  return beta;
}

}  // namespace

double crf_score(const PotentialTable& pot, std::span<const int> labels) {
  check_table(pot);
  check_gold(pot, labels);
  double s = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    s += pot.emissions(i, static_cast<std::size_t>(labels[i]));
    if (i > 0) s += pot.transitions(static_cast<std::size_t>(labels[i - 1]), static_cast<std::size_t>(labels[i]));
  }
  return s;
}

double crf_log_partition(const PotentialTable& pot) {
  check_table(pot);
  const Matrix alpha = forward_table(pot);
  return log_sum_exp(alpha.row(pot.size() - 1));
}

ChainMarginals crf_marginals(const PotentialTable& pot) {
  check_table(pot);
  const std::size_t n = pot.size();
  const Matrix alpha = forward_table(pot);
  const Matrix beta = backward_table(pot);
  ChainMarginals m;
  m.log_partition = log_sum_exp(alpha.row(n - 1));
  m.unary = Matrix(n, kNumLabels);
  m.pairwise = Matrix(kNumLabels, kNumLabels);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t y = 0; y < kNumLabels; ++y) {
      m.unary(i, y) = std::exp(alpha(i, y) + beta(i, y) - m.log_partition);
    }
  }
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t p = 0; p < kNumLabels; ++p) {
      for (std::size_t q = 0; q < kNumLabels; ++q) {
        m.pairwise(p, q) += std::exp(alpha(i - 1, p) + pot.transitions(p, q) + pot.emissions(i, q) +
                                     beta(i, q) - m.log_partition);
      }
    }
  }
  return m;
}

ChainDecoding crf_viterbi(const PotentialTable& pot) {
  check_table(pot);
  const std::size_t n = pot.size();
  Matrix best(n, kNumLabels);
  std::vector<std::array<int, kNumLabels>> back(n);
  for (std::size_t y = 0; y < kNumLabels; ++y) best(0, y) = pot.emissions(0, y);
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t y = 0; y < kNumLabels; ++y) {
      double top = -std::numeric_limits<double>::infinity();
      int arg = 0;
      for (std::size_t p = 0; p < kNumLabels; ++p) {
        const double s = best(i - 1, p) + pot.transitions(p, y);
        if (s > top) {
          top = s;
          arg = static_cast<int>(p);
        }
      }
      best(i, y) = top + pot.emissions(i, y);
      back[i][y] = arg;
    }
  }
  ChainDecoding out;
  out.labels.resize(n);
  int y = best(n - 1, kKeep) > best(n - 1, kDelete) ? kKeep : kDelete;
  out.score = best(n - 1, static_cast<std::size_t>(y));
  for (std::size_t i = n; i-- > 0;) {
    out.labels[i] = y;
    if (i > 0) y = back[i][static_cast<std::size_t>(y)];
  }
  return out;
}

double crf_nll(const PotentialTable& pot, std::span<const int> gold) {
  check_table(pot);
  check_gold(pot, gold);
  return crf_log_partition(pot) - crf_score(pot, gold);
}

Expr crf_nll(Expr emissions, Expr transitions, std::span<const int> gold) {
  Graph& g = *emissions.graph;
  PotentialTable pot{emissions.value(), transitions.value()};
  check_table(pot);
  check_gold(pot, gold);
  ChainMarginals m = crf_marginals(pot);
  const double loss = m.log_partition - crf_score(pot, gold);
  std::vector<int> labels(gold.begin(), gold.end());
  return g.record(Matrix(1, 1, loss), [emissions, transitions, m = std::move(m),
                                       labels = std::move(labels)](Graph& g, std::size_t self) {
    const double d = g.grad(self)[0];
    Matrix& ge = g.grad(emissions.id);
    for (std::size_t i = 0; i < m.unary.size(); ++i) ge[i] += d * m.unary[i];
    for (std::size_t i = 0; i < labels.size(); ++i) ge(i, static_cast<std::size_t>(labels[i])) -= d;
    Matrix& gt = g.grad(transitions.id);
    for (std::size_t i = 0; i < m.pairwise.size(); ++i) gt[i] += d * m.pairwise[i];
    for (std::size_t i = 1; i < labels.size(); ++i) {
      gt(static_cast<std::size_t>(labels[i - 1]), static_cast<std::size_t>(labels[i])) -= d;
    }
  });
}

EmissionHead::EmissionHead(ParameterStore& params, const std::string& prefix, std::size_t input_dim,
                           std::size_t hidden) {
  w1_ = &params.add(prefix + "emission_W1", input_dim, hidden);
  b1_ = &params.add(prefix + "emission_b1", 1, hidden, Init::kZero, false);
  w2_ = &params.add(prefix + "emission_W2", hidden, kNumLabels);
  b2_ = &params.add(prefix + "emission_b2", 1, kNumLabels, Init::kZero, false);
  transitions_ = &params.add(prefix + "transitions", kNumLabels, kNumLabels);
}

Expr EmissionHead::emissions(Graph& g, Expr h) const {
  Expr hidden = tanh(add(matmul(h, g.param(*w1_)), g.param(*b1_)));
  return add(matmul(hidden, g.param(*w2_)), g.param(*b2_));
}

NaiveHead::NaiveHead(ParameterStore& params, const std::string& prefix, std::size_t input_dim) {
  w_ = &params.add(prefix + "naive_W", input_dim, 1);
  b_ = &params.add(prefix + "naive_b", 1, 1, Init::kZero, false);
}

Expr NaiveHead::logits(Graph& g, Expr h) const {
  return add(matmul(h, g.param(*w_)), g.param(*b_));
}

void ensure_nonempty(std::vector<int>& mask, std::span<const double> keep_scores) {
  for (int y : mask) {
    if (y == kKeep) return;
  }
  if (mask.empty()) return;
  std::size_t best = 0;
  for (std::size_t i = 1; i < keep_scores.size(); ++i) {
    if (keep_scores[i] > keep_scores[best]) best = i;
  }
  mask[best] = kKeep;
}

std::vector<int> naive_tag(std::span<const double> keep_probabilities) {
  std::vector<int> mask;
  mask.reserve(keep_probabilities.size());
  for (double p : keep_probabilities) mask.push_back(p > 0.5 ? kKeep : kDelete);
  ensure_nonempty(mask, keep_probabilities);
  return mask;
}

}  // namespace headliner
