#ifndef HEADLINER_METRICS_HPP_
#define HEADLINER_METRICS_HPP_

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace headliner {

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Harmonic mean, 0 when both inputs are 0.
double f1_score(double precision, double recall);

// KEEP is the positive class. A side with no kept tokens has value 0, except
// that two empty masks agree perfectly and score (1, 1, 1).
Prf token_prf(std::span<const int> pred, std::span<const int> gold);

// Lowercased n-gram multiset overlap, no stemming. A side with fewer than n
// tokens contributes zero n-grams and the affected ratio is 0.
Prf rouge_n(const std::vector<std::string>& candidate, const std::vector<std::string>& reference, int n);
// Longest common subsequence over lowercased tokens.
Prf rouge_l(const std::vector<std::string>& candidate, const std::vector<std::string>& reference);

struct MeanStdev {
  double mean = 0.0;
  double stdev = 0.0;  // population
};

MeanStdev mean_stdev(std::span<const double> values);
MeanStdev length_stats(std::span<const std::size_t> lengths);
// One decimal each, e.g. "9.1 ± 3.4"; `scale` multiplies both first.
std::string format_mean_stdev(const MeanStdev& m, double scale = 1.0);

// One evaluated item. Masks are optional: title evaluation only has tokens.
struct EvalItem {
  std::string id;
  std::optional<std::vector<int>> pred_mask;
  std::optional<std::vector<int>> gold_mask;
  std::vector<std::string> candidate;
  std::vector<std::string> reference;
};

struct EvalReport {
  std::size_t count = 0;
  bool has_masks = false;
  // Per-item (macro) token scores.
  MeanStdev precision, recall, f1;
  // Token counts pooled over the corpus.
  Prf micro;
  // ROUGE triples averaged over items.
  Prf rouge1, rouge2, rougeL;
  MeanStdev length;

  std::string to_table(const std::string& title = "") const;
  // Compact JSON with sorted keys.
  std::string to_json() const;
};

EvalReport evaluate(const std::vector<EvalItem>& items);

}  // namespace headliner

#endif  // HEADLINER_METRICS_HPP_
