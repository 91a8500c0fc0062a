#include "headliner/semicrf.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace headliner {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::size_t idx(int v) { return static_cast<std::size_t>(v); }

}  // namespace

void validate_segmentation(const Segmentation& seg, std::size_t n, int max_len) {
  if (seg.empty()) throw std::invalid_argument("segmentation is empty");
  int expected = 0;
  for (const Segment& s : seg) {
    if (s.start != expected) throw std::invalid_argument("segments must be contiguous from 0");
    if (s.end < s.start) throw std::invalid_argument("segment end precedes start");
    if (s.length() > max_len) {
      throw std::invalid_argument("segment length " + std::to_string(s.length()) +
                                  " exceeds maximum " + std::to_string(max_len));
    }
    if (s.label != kDelete && s.label != kKeep) throw std::invalid_argument("segment label must be 0/1");
    expected = s.end + 1;
  }
  if (static_cast<std::size_t>(expected) != n) {
    throw std::invalid_argument("segmentation does not cover the sentence");
  }
}

Segmentation segmentation_from_mask(std::span<const int> mask, int max_len) {
  if (max_len < 1) throw std::invalid_argument("max segment length must be >= 1");
  Segmentation out;
  std::size_t i = 0;
  while (i < mask.size()) {
    std::size_t j = i;
    while (j + 1 < mask.size() && mask[j + 1] == mask[i] &&
           static_cast<int>(j + 2 - i) <= max_len) {
      ++j;
    }
    out.push_back({static_cast<int>(i), static_cast<int>(j), mask[i]});
    i = j + 1;
  }
  return out;
}

std::vector<int> mask_from_segmentation(const Segmentation& seg) {
  std::vector<int> mask;
  for (const Segment& s : seg) mask.insert(mask.end(), static_cast<std::size_t>(s.length()), s.label);
  return mask;
}

std::string tag_name(int tag) {
  static const std::array<const char*, kNumBieuoTags> names = {
      "U-DELETE", "U-KEEP", "E-DELETE", "E-KEEP", "B-DELETE", "B-KEEP", "I-DELETE", "I-KEEP", "O"};
  return names.at(idx(tag));
}

std::vector<int> expand_bieuo(const Segmentation& seg) {
  std::vector<int> tags;
  for (const Segment& s : seg) {
    if (s.length() == 1) {
      tags.push_back(kUnitDelete + s.label);
      continue;
    }
    tags.push_back(kBeginDelete + s.label);
    for (int k = 1; k + 1 < s.length(); ++k) tags.push_back(kInsideDelete + s.label);
    tags.push_back(kEndDelete + s.label);
  }
  return tags;
}

TransitionScheme parse_transition_scheme(const std::string& name) {
  if (name == "bieuo") return TransitionScheme::kBieuo;
  if (name == "segment") return TransitionScheme::kSegmentLabel;
  throw std::invalid_argument("unknown transition scheme: " + name);
}

std::string to_string(TransitionScheme scheme) {
  return scheme == TransitionScheme::kBieuo ? "bieuo" : "segment";
}

std::size_t SegmentTransitions::dimension(TransitionScheme scheme) {
  return scheme == TransitionScheme::kBieuo ? kNumBieuoTags : kNumLabels;
}

SegmentTransitions SegmentTransitions::zeros(TransitionScheme scheme) {
  return {scheme, Matrix(dimension(scheme), dimension(scheme))};
}

int SegmentTransitions::first_tag(int label, int length) const {
  if (scheme == TransitionScheme::kSegmentLabel) return label;
  return length == 1 ? kUnitDelete + label : kBeginDelete + label;
}

int SegmentTransitions::last_tag(int label, int length) const {
  if (scheme == TransitionScheme::kSegmentLabel) return label;
  return length == 1 ? kUnitDelete + label : kEndDelete + label;
}

double SegmentTransitions::intra(int label, int length) const {
  if (scheme == TransitionScheme::kSegmentLabel || length == 1) return 0.0;
  const std::size_t b = idx(kBeginDelete + label), i = idx(kInsideDelete + label), e = idx(kEndDelete + label);
  if (length == 2) return matrix(b, e);
  return matrix(b, i) + static_cast<double>(length - 3) * matrix(i, i) + matrix(i, e);
}

double SegmentTransitions::start(int first) const {
  return scheme == TransitionScheme::kBieuo ? matrix(idx(kOutside), idx(first)) : 0.0;
}

double SegmentTransitions::end(int last) const {
  return scheme == TransitionScheme::kBieuo ? matrix(idx(last), idx(kOutside)) : 0.0;
}

double segment_transition(const Segment* prev, const Segment& seg, const SegmentTransitions& trans) {
  const int first = trans.first_tag(seg.label, seg.length());
  double s = trans.intra(seg.label, seg.length());
  if (prev == nullptr) {
    s += trans.start(first);
  } else {
    if (prev->end + 1 != seg.start) throw std::invalid_argument("segment_transition: segments not adjacent");
    s += trans.between(trans.last_tag(prev->label, prev->length()), first);
  }
  return s;
}

double segment_end_transition(const Segment& last, const SegmentTransitions& trans) {
  return trans.end(trans.last_tag(last.label, last.length()));
}

SegmentScores::SegmentScores(std::size_t n, int max_len)
    : n_(n), max_len_(max_len), values_(n * static_cast<std::size_t>(std::max(max_len, 0)) * kNumLabels, 0.0) {
  if (max_len < 1) throw std::invalid_argument("max segment length must be >= 1");
}

SegmentScores SegmentScores::from_emissions(const Matrix& emissions, int max_len) {
  SegmentScores out(emissions.rows(), max_len);
  for (std::size_t s = 0; s < emissions.rows(); ++s) {
    for (int l = 1; out.valid(s, l); ++l) {
      for (int y = 0; y < static_cast<int>(kNumLabels); ++y) {
        double v = 0.0;
        for (int k = 0; k < l; ++k) v += emissions(s + idx(k), idx(y));
        out.at(s, l, y) = v;
      }
    }
  }
  return out;
}

double segmentation_score(const SegmentScores& scores, const SegmentTransitions& trans,
                          const Segmentation& seg) {
  validate_segmentation(seg, scores.size(), scores.max_len());
  double total = 0.0;
  for (std::size_t i = 0; i < seg.size(); ++i) {
    const Segment& s = seg[i];
    total += scores.at(idx(s.start), s.length(), s.label);
    total += segment_transition(i == 0 ? nullptr : &seg[i - 1], s, trans);
  }
  return total + segment_end_transition(seg.back(), trans);
}

namespace {

// Log-sum of all ways to enter a segment whose first tag is `first` at `start`.
double inbound(const Matrix& alpha, const SegmentTransitions& trans, std::size_t start, int first) {
  if (start == 0) return trans.start(first);
  double acc = kNegInf;
  for (std::size_t t = 0; t < trans.num_states(); ++t) {
    const double a = alpha(start, t);
    if (a == kNegInf) continue;
    acc = log_add(acc, a + trans.between(static_cast<int>(t), first));
  }
  return acc;
}

// alpha(j, t): log-sum over segmentations of [0, j) whose last tag is t.
Matrix forward_table(const SegmentScores& scores, const SegmentTransitions& trans) {
  const std::size_t n = scores.size();
  Matrix alpha(n + 1, trans.num_states(), kNegInf);
  for (std::size_t j = 1; j <= n; ++j) {
    for (int l = 1; l <= scores.max_len() && idx(l) <= j; ++l) {
      const std::size_t start = j - idx(l);
      for (int y = 0; y < static_cast<int>(kNumLabels); ++y) {
        const int first = trans.first_tag(y, l);
        const int last = trans.last_tag(y, l);
        const double v = inbound(alpha, trans, start, first) + scores.at(start, l, y) + trans.intra(y, l);
        alpha(j, idx(last)) = log_add(alpha(j, idx(last)), v);
      }
    }
  }
  return alpha;
}

double finish(const Matrix& alpha, const SegmentTransitions& trans, std::size_t n) {
  double acc = kNegInf;
  for (std::size_t t = 0; t < trans.num_states(); ++t) {
    if (alpha(n, t) == kNegInf) continue;
    acc = log_add(acc, alpha(n, t) + trans.end(static_cast<int>(t)));
  }
  return acc;
}

void check_nonempty(const SegmentScores& scores) {
  if (scores.size() == 0) throw std::invalid_argument("semi-CRF: empty sentence");
}

void check_transitions(const SegmentTransitions& trans) {
  const std::size_t d = SegmentTransitions::dimension(trans.scheme);
  if (trans.matrix.rows() != d || trans.matrix.cols() != d) {
    throw std::invalid_argument("semi-CRF: transition matrix has the wrong shape");
  }
}

}  // namespace

double scrf_log_partition(const SegmentScores& scores, const SegmentTransitions& trans) {
  check_nonempty(scores);
  check_transitions(trans);
  return finish(forward_table(scores, trans), trans, scores.size());
}

static void add_intra_counts(Matrix& counts, const SegmentTransitions& trans, int label, int length, double w) {
  if (trans.scheme == TransitionScheme::kSegmentLabel || length == 1) return;
  const std::size_t b = idx(kBeginDelete + label), i = idx(kInsideDelete + label), e = idx(kEndDelete + label);
  if (length == 2) {
    counts(b, e) += w;
    return;
  }
  counts(b, i) += w;
  counts(i, i) += w * static_cast<double>(length - 3);
  counts(i, e) += w;
}

ScrfMarginals scrf_marginals(const SegmentScores& scores, const SegmentTransitions& trans) {
  check_nonempty(scores);
  check_transitions(trans);
  const std::size_t n = scores.size();
  const std::size_t states = trans.num_states();
  const Matrix alpha = forward_table(scores, trans);
  const double log_z = finish(alpha, trans, n);

  // beta(j, t): log-sum over completions of [j, n) after a segment ending in tag t.
  Matrix beta(n + 1, states, kNegInf);
  for (std::size_t t = 0; t < states; ++t) beta(n, t) = trans.end(static_cast<int>(t));
  for (std::size_t j = n; j-- > 1;) {
    for (std::size_t t = 0; t < states; ++t) {
      double acc = kNegInf;
      for (int l = 1; scores.valid(j, l); ++l) {
        for (int y = 0; y < static_cast<int>(kNumLabels); ++y) {
          const double v = trans.between(static_cast<int>(t), trans.first_tag(y, l)) + scores.at(j, l, y) +
                           trans.intra(y, l) + beta(j + idx(l), idx(trans.last_tag(y, l)));
          acc = log_add(acc, v);
        }
      }
      beta(j, t) = acc;
    }
  }

  ScrfMarginals m;
  m.log_partition = log_z;
  m.segments.assign(scores.values().size(), 0.0);
  m.transitions = Matrix(trans.matrix.rows(), trans.matrix.cols());
  SegmentScores layout(n, scores.max_len());
  for (std::size_t s = 0; s < n; ++s) {
    for (int l = 1; scores.valid(s, l); ++l) {
      for (int y = 0; y < static_cast<int>(kNumLabels); ++y) {
        const int first = trans.first_tag(y, l);
        const int last = trans.last_tag(y, l);
        const double inside = scores.at(s, l, y) + trans.intra(y, l) + beta(s + idx(l), idx(last));
        const double mu = std::exp(inbound(alpha, trans, s, first) + inside - log_z);
        layout.at(s, l, y) = mu;
        add_intra_counts(m.transitions, trans, y, l, mu);
        if (s == 0) {
          if (trans.scheme == TransitionScheme::kBieuo) m.transitions(idx(kOutside), idx(first)) += mu;
          continue;
        }
        for (std::size_t t = 0; t < states; ++t) {
          if (alpha(s, t) == kNegInf) continue;
          m.transitions(t, idx(first)) +=
              std::exp(alpha(s, t) + trans.between(static_cast<int>(t), first) + inside - log_z);
        }
      }
    }
  }
  if (trans.scheme == TransitionScheme::kBieuo) {
    for (std::size_t t = 0; t < states; ++t) {
      if (alpha(n, t) == kNegInf) continue;
      m.transitions(t, idx(kOutside)) += std::exp(alpha(n, t) + trans.end(static_cast<int>(t)) - log_z);
    }
  }
  std::copy(layout.values().begin(), layout.values().end(), m.segments.begin());
  return m;
}

std::vector<double> scrf_keep_marginals(const SegmentScores& scores, const ScrfMarginals& m) {
  SegmentScores layout(scores.size(), scores.max_len());
  std::copy(m.segments.begin(), m.segments.end(), layout.values().begin());
  std::vector<double> keep(scores.size(), 0.0);
  for (std::size_t s = 0; s < scores.size(); ++s) {
    for (int l = 1; scores.valid(s, l); ++l) {
      for (int k = 0; k < l; ++k) keep[s + idx(k)] += layout.at(s, l, kKeep);
    }
  }
  return keep;
}

Matrix transition_counts(const Segmentation& seg, const SegmentTransitions& trans) {
  Matrix counts(trans.matrix.rows(), trans.matrix.cols());
  for (std::size_t i = 0; i < seg.size(); ++i) {
    const Segment& s = seg[i];
    const int first = trans.first_tag(s.label, s.length());
    add_intra_counts(counts, trans, s.label, s.length(), 1.0);
    if (i == 0) {
      if (trans.scheme == TransitionScheme::kBieuo) counts(idx(kOutside), idx(first)) += 1.0;
    } else {
      const Segment& p = seg[i - 1];
      counts(idx(trans.last_tag(p.label, p.length())), idx(first)) += 1.0;
    }
  }
  if (trans.scheme == TransitionScheme::kBieuo && !seg.empty()) {
    const Segment& last = seg.back();
    counts(idx(trans.last_tag(last.label, last.length())), idx(kOutside)) += 1.0;
  }
  return counts;
}

namespace {

struct Backpointer {
  double score = kNegInf;
  std::size_t prev_pos = 0;
  int prev_state = -1;  // -1 at the sentence start
  std::size_t prev_rank = 0;
  int label = kDelete;
  int length = 1;
};

Segmentation trace(const std::vector<std::vector<std::vector<Backpointer>>>& table, std::size_t pos,
                   int state, std::size_t rank) {
  Segmentation out;
  while (state >= 0) {
    const Backpointer& b = table[pos][idx(state)][rank];
    out.push_back({static_cast<int>(pos) - b.length, static_cast<int>(pos) - 1, b.label});
    pos = b.prev_pos;
    state = b.prev_state;
    rank = b.prev_rank;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

}  // namespace

ScoredSegmentation scrf_viterbi(const SegmentScores& scores, const SegmentTransitions& trans) {
  check_nonempty(scores);
  check_transitions(trans);
  const std::size_t n = scores.size();
  const std::size_t states = trans.num_states();
  std::vector<std::vector<std::vector<Backpointer>>> best(
      n + 1, std::vector<std::vector<Backpointer>>(states, std::vector<Backpointer>(1)));
  for (std::size_t j = 1; j <= n; ++j) {
    for (int l = 1; l <= scores.max_len() && idx(l) <= j; ++l) {
      const std::size_t start = j - idx(l);
      for (int y = 0; y < static_cast<int>(kNumLabels); ++y) {
        const int first = trans.first_tag(y, l);
        Backpointer& slot = best[j][idx(trans.last_tag(y, l))][0];
        const double local = scores.at(start, l, y) + trans.intra(y, l);
        if (start == 0) {
          const double v = trans.start(first) + local;
          if (v > slot.score) slot = {v, 0, -1, 0, y, l};
          continue;
        }
        for (std::size_t t = 0; t < states; ++t) {
          const double prev = best[start][t][0].score;
          if (prev == kNegInf) continue;
          const double v = prev + trans.between(static_cast<int>(t), first) + local;
          if (v > slot.score) slot = {v, start, static_cast<int>(t), 0, y, l};
        }
      }
    }
  }
  double top = kNegInf;
  int arg = -1;
  for (std::size_t t = 0; t < states; ++t) {
    if (best[n][t][0].score == kNegInf) continue;
    const double v = best[n][t][0].score + trans.end(static_cast<int>(t));
    if (v > top) {
      top = v;
      arg = static_cast<int>(t);
    }
  }
  return {trace(best, n, arg, 0), top};
}

std::vector<ScoredSegmentation> scrf_kbest(const SegmentScores& scores, const SegmentTransitions& trans,
                                           std::size_t k) {
  check_nonempty(scores);
  check_transitions(trans);
  if (k == 0) throw std::invalid_argument("scrf_kbest: k must be >= 1");
  const std::size_t n = scores.size();
  const std::size_t states = trans.num_states();
  std::vector<std::vector<std::vector<Backpointer>>> lists(
      n + 1, std::vector<std::vector<Backpointer>>(states));
  // Candidates are generated in tie-break order; stable sorting keeps it.
  const auto by_score = [](const Backpointer& a, const Backpointer& b) { return a.score > b.score; };
  for (std::size_t j = 1; j <= n; ++j) {
    std::vector<std::vector<Backpointer>> pending(states);
    for (int l = 1; l <= scores.max_len() && idx(l) <= j; ++l) {
      const std::size_t start = j - idx(l);
      for (int y = 0; y < static_cast<int>(kNumLabels); ++y) {
        const int first = trans.first_tag(y, l);
        auto& bucket = pending[idx(trans.last_tag(y, l))];
        const double local = scores.at(start, l, y) + trans.intra(y, l);
        if (start == 0) {
          bucket.push_back({trans.start(first) + local, 0, -1, 0, y, l});
          continue;
        }
        for (std::size_t t = 0; t < states; ++t) {
          const auto& prev = lists[start][t];
          for (std::size_t r = 0; r < prev.size(); ++r) {
            const double v = prev[r].score + trans.between(static_cast<int>(t), first) + local;
            bucket.push_back({v, start, static_cast<int>(t), r, y, l});
          }
        }
      }
    }
    for (std::size_t t = 0; t < states; ++t) {
      auto& bucket = pending[t];
      std::stable_sort(bucket.begin(), bucket.end(), by_score);
      if (bucket.size() > k) bucket.resize(k);
      lists[j][t] = std::move(bucket);
    }
  }
  struct Final {
    double score;
    int state;
    std::size_t rank;
  };
  std::vector<Final> finals;
  for (std::size_t t = 0; t < states; ++t) {
    for (std::size_t r = 0; r < lists[n][t].size(); ++r) {
      finals.push_back({lists[n][t][r].score + trans.end(static_cast<int>(t)), static_cast<int>(t), r});
    }
  }
  std::stable_sort(finals.begin(), finals.end(), [](const Final& a, const Final& b) { return a.score > b.score; });
  if (finals.size() > k) finals.resize(k);
  std::vector<ScoredSegmentation> out;
  out.reserve(finals.size());
  for (const Final& f : finals) out.push_back({trace(lists, n, f.state, f.rank), f.score});
  return out;
}

SegmentScores build_segment_scores(const Matrix& token, const Matrix& boundary, const Matrix& length,
                                   int max_len) {
  const std::size_t n = token.rows();
  SegmentScores out(n, max_len);
  Matrix prefix(n + 1, kNumLabels);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t y = 0; y < kNumLabels; ++y) prefix(i + 1, y) = prefix(i, y) + token(i, y);
  }
  for (std::size_t s = 0; s < n; ++s) {
    for (int l = 1; out.valid(s, l); ++l) {
      const std::size_t e = s + idx(l) - 1;
      const double len = static_cast<double>(l);
      for (std::size_t y = 0; y < kNumLabels; ++y) {
        out.at(s, l, static_cast<int>(y)) = (prefix(e + 1, y) - prefix(s, y)) +
                                            len * (boundary(s, y) - boundary(e, y)) +
                                            len * length(idx(l) - 1, y);
      }
    }
  }
  return out;
}

Expr scrf_nll(Expr token, Expr boundary, Expr length, Expr transitions, TransitionScheme scheme,
              const Segmentation& gold, int max_len) {
  Graph& g = *token.graph;
  const std::size_t n = token.rows();
  validate_segmentation(gold, n, max_len);
  if (length.rows() != idx(max_len)) throw std::invalid_argument("scrf_nll: length table must have max_len rows");
  const SegmentScores scores = build_segment_scores(token.value(), boundary.value(), length.value(), max_len);
  const SegmentTransitions trans{scheme, transitions.value()};
  ScrfMarginals m = scrf_marginals(scores, trans);
  const double loss = m.log_partition - segmentation_score(scores, trans, gold);

  // d loss / d segment score = marginal - gold indicator.
  SegmentScores weight(n, max_len);
  std::copy(m.segments.begin(), m.segments.end(), weight.values().begin());
  for (const Segment& s : gold) weight.at(idx(s.start), s.length(), s.label) -= 1.0;
  Matrix dtrans = m.transitions;
  const Matrix gold_counts = transition_counts(gold, trans);
  for (std::size_t i = 0; i < dtrans.size(); ++i) dtrans[i] -= gold_counts[i];

  return g.record(Matrix(1, 1, loss), [token, boundary, length, transitions, weight = std::move(weight),
                                       dtrans = std::move(dtrans)](Graph& g, std::size_t self) {
    const double d = g.grad(self)[0];
    Matrix& gt = g.grad(token.id);
    Matrix& gb = g.grad(boundary.id);
    Matrix& gl = g.grad(length.id);
    const std::size_t n = weight.size();
    for (std::size_t s = 0; s < n; ++s) {
      for (int l = 1; weight.valid(s, l); ++l) {
        const std::size_t e = s + idx(l) - 1;
        const double len = static_cast<double>(l);
        for (std::size_t y = 0; y < kNumLabels; ++y) {
          const double w = d * weight.at(s, l, static_cast<int>(y));
          if (w == 0.0) continue;
          for (std::size_t i = s; i <= e; ++i) gt(i, y) += w;
          gb(s, y) += w * len;
          gb(e, y) -= w * len;
          gl(idx(l) - 1, y) += w * len;
        }
      }
    }
    Matrix& gtr = g.grad(transitions.id);
    for (std::size_t i = 0; i < dtrans.size(); ++i) gtr[i] += d * dtrans[i];
  });
}

SegmentHead::SegmentHead(ParameterStore& params, const std::string& prefix, std::size_t input_dim,
                         int max_len, std::size_t length_dim, TransitionScheme scheme)
    : input_dim_(input_dim), max_len_(max_len), scheme_(scheme) {
  if (max_len < 1) throw std::invalid_argument("max segment length must be >= 1");
  weights_ = &params.add(prefix + "segment_W", 2 * input_dim + length_dim, kNumLabels);
  length_embedding_ = &params.add(prefix + "length_embedding", idx(max_len), length_dim);
  const std::size_t d = SegmentTransitions::dimension(scheme);
  transitions_ = &params.add(prefix + "transitions", d, d);
}

SegmentHead::Projections SegmentHead::project(Graph& g, Expr h) const {
  Expr w = g.param(*weights_);
  const std::size_t d = input_dim_;
  const std::size_t total = weights_->value.rows();
  Projections p;
  p.token = matmul(h, slice_rows(w, 0, d));
  p.boundary = matmul(h, slice_rows(w, d, 2 * d));
  p.length = matmul(g.param(*length_embedding_), slice_rows(w, 2 * d, total));
  p.transitions = g.param(*transitions_);
  return p;
}

double segment_emission(const Matrix& h, const Segment& seg, const Matrix& weights,
                        const Matrix& length_embedding) {
  const std::size_t d = h.cols();
  const std::size_t len_dim = length_embedding.cols();
  if (weights.rows() != 2 * d + len_dim) throw std::invalid_argument("segment_emission: weight shape");
  if (seg.start < 0 || seg.end < seg.start || idx(seg.end) >= h.rows()) {
    throw std::invalid_argument("segment_emission: span outside the sentence");
  }
  if (idx(seg.length()) > length_embedding.rows()) {
    throw std::invalid_argument("segment_emission: span longer than the maximum segment length");
  }
  const std::size_t y = idx(seg.label);
  const auto e_len = length_embedding.row(idx(seg.length()) - 1);
  double total = 0.0;
  for (int i = seg.start; i <= seg.end; ++i) {
    // h'_i = [h_i ; h_start - h_end ; e_len]
    std::vector<double> features;
    features.reserve(weights.rows());
    for (std::size_t c = 0; c < d; ++c) features.push_back(h(idx(i), c));
    for (std::size_t c = 0; c < d; ++c) features.push_back(h(idx(seg.start), c) - h(idx(seg.end), c));
    features.insert(features.end(), e_len.begin(), e_len.end());
    for (std::size_t r = 0; r < features.size(); ++r) total += weights(r, y) * features[r];
  }
  return total;
}

}  // namespace headliner
