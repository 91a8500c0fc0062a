#ifndef HEADLINER_CHAIN_CRF_HPP_
#define HEADLINER_CHAIN_CRF_HPP_

#include <span>
#include <string>
#include <vector>

#include "headliner/autodiff.hpp"
#include "headliner/parameters.hpp"
#include "headliner/tensor.hpp"

namespace headliner {

enum Label : int { kDelete = 0, kKeep = 1 };
inline constexpr std::size_t kNumLabels = 2;

// Log-space potentials of a linear-chain CRF over {DELETE, KEEP}.
// Score(y) = sum_i emissions(i, y_i) + sum_{i>0} transitions(y_{i-1}, y_i);
// there are no start or end potentials.
struct PotentialTable {
  Matrix emissions;    // n x 2
  Matrix transitions;  // 2 x 2, row = previous label

  std::size_t size() const { return emissions.rows(); }
};

double crf_score(const PotentialTable& pot, std::span<const int> labels);
double crf_log_partition(const PotentialTable& pot);

struct ChainMarginals {
  double log_partition = 0.0;
  Matrix unary;     // n x 2, p(y_i = label)
  Matrix pairwise;  // 2 x 2, expected transition counts
};

// Forward-backward.
ChainMarginals crf_marginals(const PotentialTable& pot);

struct ChainDecoding {
  std::vector<int> labels;
  double score = 0.0;
};

// Exact argmax. Ties prefer DELETE at the last position, then the lower
// previous label along the backpointers.
ChainDecoding crf_viterbi(const PotentialTable& pot);

// log Z - Score(gold).
double crf_nll(const PotentialTable& pot, std::span<const int> gold);

// Graph version of crf_nll; the backward pass uses marginals - gold counts.
Expr crf_nll(Expr emissions, Expr transitions, std::span<const int> gold);

// phi_i = W2 tanh(W1 h_i + b1) + b2, one score per label.
class EmissionHead {
 public:
  EmissionHead(ParameterStore& params, const std::string& prefix, std::size_t input_dim,
               std::size_t hidden = 64);
  Expr emissions(Graph& g, Expr h) const;
  Parameter& transitions() const { return *transitions_; }

 private:
  Parameter* w1_;
  Parameter* b1_;
  Parameter* w2_;
  Parameter* b2_;
  Parameter* transitions_;
};

// Independent per-token keep probabilities sigma(W h_i + b).
class NaiveHead {
 public:
  NaiveHead(ParameterStore& params, const std::string& prefix, std::size_t input_dim);
  Expr logits(Graph& g, Expr h) const;

 private:
  Parameter* w_;
  Parameter* b_;
};

// Keep iff p > 0.5, with the empty-compression guard applied.
std::vector<int> naive_tag(std::span<const double> keep_probabilities);

// If nothing is kept, keeps the single token with the highest keep score
// (earliest on ties).
void ensure_nonempty(std::vector<int>& mask, std::span<const double> keep_scores);

}  // namespace headliner

#endif  // HEADLINER_CHAIN_CRF_HPP_
