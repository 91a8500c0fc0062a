#ifndef HEADLINER_SEMICRF_HPP_
#define HEADLINER_SEMICRF_HPP_

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "headliner/autodiff.hpp"
#include "headliner/chain_crf.hpp"
#include "headliner/parameters.hpp"
#include "headliner/tensor.hpp"

namespace headliner {

// A labeled span [start, end], 0-based and inclusive.
struct Segment {
  int start = 0;
  int end = 0;
  int label = kDelete;

  int length() const { return end - start + 1; }
  friend bool operator==(const Segment&, const Segment&) = default;
};

using Segmentation = std::vector<Segment>;

// Throws unless the segments tile [0, n) in order with lengths in [1, max_len].
void validate_segmentation(const Segmentation& seg, std::size_t n, int max_len);

// Maximal runs of equal labels, split greedily left to right at max_len.
Segmentation segmentation_from_mask(std::span<const int> mask, int max_len);
std::vector<int> mask_from_segmentation(const Segmentation& seg);

// Word-level BIEUO tags. Ordered so that lower ids mean a shorter last
// segment, then DELETE before KEEP.
enum Tag : int {
  kUnitDelete = 0,
  kUnitKeep = 1,
  kEndDelete = 2,
  kEndKeep = 3,
  kBeginDelete = 4,
  kBeginKeep = 5,
  kInsideDelete = 6,
  kInsideKeep = 7,
  kOutside = 8,
};
inline constexpr std::size_t kNumBieuoTags = 9;

std::string tag_name(int tag);
// Tags of every word in the segmentation (no sentinels).
std::vector<int> expand_bieuo(const Segmentation& seg);

enum class TransitionScheme {
  kBieuo,         // 9 x 9 word-level tag matrix, O as start/end sentinel
  kSegmentLabel,  // 2 x 2 matrix between adjacent segment labels
};

TransitionScheme parse_transition_scheme(const std::string& name);
std::string to_string(TransitionScheme scheme);

struct SegmentTransitions {
  TransitionScheme scheme = TransitionScheme::kBieuo;
  Matrix matrix;

  static SegmentTransitions zeros(TransitionScheme scheme);
  static std::size_t dimension(TransitionScheme scheme);

  // DP state tags: 9 BIEUO tags or the 2 labels.
  std::size_t num_states() const { return scheme == TransitionScheme::kBieuo ? kNumBieuoTags - 1 : kNumLabels; }
  int first_tag(int label, int length) const;
  int last_tag(int label, int length) const;
  // Sum of transitions inside one segment (B->I->...->E).
  double intra(int label, int length) const;
  double start(int first) const;
  double end(int last) const;
  double between(int last, int first) const { return matrix(static_cast<std::size_t>(last), static_cast<std::size_t>(first)); }
};

// Transition contribution of `seg` given its predecessor (nullptr at the
// sentence start): the crossing entry plus the entries inside `seg`.
double segment_transition(const Segment* prev, const Segment& seg, const SegmentTransitions& trans);
double segment_end_transition(const Segment& last, const SegmentTransitions& trans);

// Emission scores of every candidate segment, indexed (start, length, label).
class SegmentScores {
 public:
  SegmentScores(std::size_t n, int max_len);

  std::size_t size() const { return n_; }
  int max_len() const { return max_len_; }
  double& at(std::size_t start, int length, int label) { return values_[index(start, length, label)]; }
  double at(std::size_t start, int length, int label) const { return values_[index(start, length, label)]; }
  bool valid(std::size_t start, int length) const {
    return length >= 1 && length <= max_len_ && start + static_cast<std::size_t>(length) <= n_;
  }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  // Scores of a chain CRF seen as a semi-CRF with unit segments.
  static SegmentScores from_emissions(const Matrix& emissions, int max_len = 1);

 private:
  std::size_t index(std::size_t start, int length, int label) const {
    return (start * static_cast<std::size_t>(max_len_) + static_cast<std::size_t>(length - 1)) * kNumLabels +
           static_cast<std::size_t>(label);
  }
  std::size_t n_;
  int max_len_;
  std::vector<double> values_;
};

double segmentation_score(const SegmentScores& scores, const SegmentTransitions& trans,
                          const Segmentation& seg);

double scrf_log_partition(const SegmentScores& scores, const SegmentTransitions& trans);

struct ScrfMarginals {
  double log_partition = 0.0;
  std::vector<double> segments;  // same layout as SegmentScores
  Matrix transitions;            // expected transition counts
};

ScrfMarginals scrf_marginals(const SegmentScores& scores, const SegmentTransitions& trans);

// p(token i kept), summed from segment marginals.
std::vector<double> scrf_keep_marginals(const SegmentScores& scores, const ScrfMarginals& m);

struct ScoredSegmentation {
  Segmentation segments;
  double score = 0.0;
};

// Exact argmax. Ties prefer the shorter last segment, then DELETE, then the
// lower predecessor tag.
ScoredSegmentation scrf_viterbi(const SegmentScores& scores, const SegmentTransitions& trans);

// The k highest-scoring distinct segmentations, best first; fewer when the
// sentence has fewer segmentations.
std::vector<ScoredSegmentation> scrf_kbest(const SegmentScores& scores,
                                           const SegmentTransitions& trans, std::size_t k);

// Counts of matrix entries used by one segmentation.
Matrix transition_counts(const Segmentation& seg, const SegmentTransitions& trans);

// Segment emissions from per-position projections:
//   score(s, l, y) = sum_{i in seg} token(i, y) + l (boundary(s, y) - boundary(e, y)) + l length(l, y)
// where token = h W_tok, boundary = h W_diff and length = e_len W_len.
SegmentScores build_segment_scores(const Matrix& token, const Matrix& boundary, const Matrix& length,
                                   int max_len);

// NLL of the gold segmentation as a graph node over the three projections
// and the transition matrix.
Expr scrf_nll(Expr token, Expr boundary, Expr length, Expr transitions, TransitionScheme scheme,
              const Segmentation& gold, int max_len);

// Segment potentials W_e^T [h_i; h_start - h_end; e_len(l)] summed over the span.
class SegmentHead {
 public:
  SegmentHead(ParameterStore& params, const std::string& prefix, std::size_t input_dim,
              int max_len, std::size_t length_dim, TransitionScheme scheme);

  struct Projections {
    Expr token;
    Expr boundary;
    Expr length;
    Expr transitions;
  };
  Projections project(Graph& g, Expr h) const;

  int max_len() const { return max_len_; }
  TransitionScheme scheme() const { return scheme_; }
  std::size_t input_dim() const { return input_dim_; }
  Parameter& weights() const { return *weights_; }
  Parameter& length_embedding() const { return *length_embedding_; }
  Parameter& transitions() const { return *transitions_; }

 private:
  std::size_t input_dim_;
  int max_len_;
  TransitionScheme scheme_;
  Parameter* weights_;           // (2 d_h + length_dim) x 2
  Parameter* length_embedding_;  // max_len x length_dim
  Parameter* transitions_;
};

// Direct per-position evaluation of one segment's emission; reference path
// for the prefix-sum construction used by build_segment_scores.
double segment_emission(const Matrix& h, const Segment& seg, const Matrix& weights,
                        const Matrix& length_embedding);

}  // namespace headliner

#endif  // HEADLINER_SEMICRF_HPP_
