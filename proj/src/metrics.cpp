#include "headliner/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>

#include "headliner/corpus.hpp"
#include "json.hpp"

namespace headliner {

double f1_score(double precision, double recall) {
  return precision + recall == 0.0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
}

namespace {

double ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

Prf make_prf(double overlap, double cand_total, double ref_total) {
  Prf r;
  r.precision = ratio(overlap, cand_total);
  r.recall = ratio(overlap, ref_total);
  r.f1 = f1_score(r.precision, r.recall);
  return r;
}

std::vector<std::string> lowered(const std::vector<std::string>& xs) {
  std::vector<std::string> out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back(lowercase(x));
  return out;
}

std::map<std::vector<std::string>, int> ngram_counts(const std::vector<std::string>& xs, int n) {
  std::map<std::vector<std::string>, int> counts;
  for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= xs.size(); ++i) {
    ++counts[std::vector<std::string>(xs.begin() + static_cast<std::ptrdiff_t>(i),
                                      xs.begin() + static_cast<std::ptrdiff_t>(i) + n)];
  }
  return counts;
}

}  // namespace

Prf token_prf(std::span<const int> pred, std::span<const int> gold) {
  if (pred.size() != gold.size()) throw std::invalid_argument("token_prf: mask lengths differ");
  double tp = 0, kept = 0, relevant = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    kept += pred[i] == 1;
    relevant += gold[i] == 1;
    tp += pred[i] == 1 && gold[i] == 1;
  }
  if (kept == 0 && relevant == 0) return {1.0, 1.0, 1.0};
  return make_prf(tp, kept, relevant);
}

Prf rouge_n(const std::vector<std::string>& candidate, const std::vector<std::string>& reference, int n) {
  if (n < 1) throw std::invalid_argument("rouge_n: n must be >= 1");
  const auto cand = ngram_counts(lowered(candidate), n);
  const auto ref = ngram_counts(lowered(reference), n);
  double overlap = 0, cand_total = 0, ref_total = 0;
  for (const auto& [gram, c] : cand) {
    cand_total += c;
    if (auto it = ref.find(gram); it != ref.end()) overlap += std::min(c, it->second);
  }
  for (const auto& [gram, c] : ref) ref_total += c;
  return make_prf(overlap, cand_total, ref_total);
}

Prf rouge_l(const std::vector<std::string>& candidate, const std::vector<std::string>& reference) {
  const auto a = lowered(candidate);
  const auto b = lowered(reference);
  // two-row LCS table
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  const auto lcs = static_cast<double>(prev[b.size()]);
  return make_prf(lcs, static_cast<double>(a.size()), static_cast<double>(b.size()));
}

MeanStdev mean_stdev(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("mean_stdev: no values");
  MeanStdev m;
  for (double v : values) m.mean += v;
  m.mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - m.mean) * (v - m.mean);
  m.stdev = std::sqrt(var / static_cast<double>(values.size()));
  return m;
}

MeanStdev length_stats(std::span<const std::size_t> lengths) {
  std::vector<double> v(lengths.begin(), lengths.end());
  return mean_stdev(v);
}

std::string format_mean_stdev(const MeanStdev& m, double scale) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f ± %.1f", m.mean * scale, m.stdev * scale);
  return buf;
}

EvalReport evaluate(const std::vector<EvalItem>& items) {
  if (items.empty()) throw std::invalid_argument("evaluate: no items");
  EvalReport r;
  r.count = items.size();
  r.has_masks = std::all_of(items.begin(), items.end(), [](const EvalItem& it) { return it.pred_mask && it.gold_mask; });

  std::vector<double> p, rc, f, lengths;
  double tp = 0, kept = 0, relevant = 0;
  Prf r1, r2, rl;
  for (const auto& it : items) {
    if (r.has_masks) {
      const Prf s = token_prf(*it.pred_mask, *it.gold_mask);
      p.push_back(s.precision);
      rc.push_back(s.recall);
      f.push_back(s.f1);
      for (std::size_t i = 0; i < it.pred_mask->size(); ++i) {
        kept += (*it.pred_mask)[i] == 1;
        relevant += (*it.gold_mask)[i] == 1;
        tp += (*it.pred_mask)[i] == 1 && (*it.gold_mask)[i] == 1;
      }
    }
    const Prf a = rouge_n(it.candidate, it.reference, 1);
    const Prf b = rouge_n(it.candidate, it.reference, 2);
    const Prf c = rouge_l(it.candidate, it.reference);
    for (auto [sum, x] : {std::pair{&r1, a}, std::pair{&r2, b}, std::pair{&rl, c}}) {
      sum->precision += x.precision;
      sum->recall += x.recall;
      sum->f1 += x.f1;
    }
    lengths.push_back(static_cast<double>(it.candidate.size()));
  }
  const auto n = static_cast<double>(items.size());
  for (auto [dst, sum] : {std::pair{&r.rouge1, r1}, std::pair{&r.rouge2, r2}, std::pair{&r.rougeL, rl}}) {
    *dst = {sum.precision / n, sum.recall / n, sum.f1 / n};
  }
  if (r.has_masks) {
    r.precision = mean_stdev(p);
    r.recall = mean_stdev(rc);
    r.f1 = mean_stdev(f);
    r.micro = (kept == 0 && relevant == 0) ? Prf{1.0, 1.0, 1.0} : make_prf(tp, kept, relevant);
  }
  r.length = mean_stdev(lengths);
  return r;
}

namespace {

// Left-aligns to a display width; "±" is two bytes but one column.
std::string pad(const std::string& s, std::size_t width) {
  std::size_t shown = 0;
  for (unsigned char c : s) shown += (c & 0xC0) != 0x80;
  return s + std::string(shown < width ? width - shown : 1, ' ');
}

}  // namespace

std::string EvalReport::to_table(const std::string& title) const {
  std::ostringstream out;
  char line[160];
  if (!title.empty()) out << title << "\n";
  out << "items: " << count << "\n";
  if (has_masks) {
    std::snprintf(line, sizeof line, "%-10s %-14s %-14s %-14s %-14s\n", "", "P", "R", "F1", "Length");
    out << line;
    out << pad("macro", 11) << pad(format_mean_stdev(precision, 100), 15) << pad(format_mean_stdev(recall, 100), 15)
        << pad(format_mean_stdev(f1, 100), 15) << format_mean_stdev(length) << "\n";
    std::snprintf(line, sizeof line, "%-10s %-14.1f %-14.1f %-14.1f\n", "micro", 100 * micro.precision,
                  100 * micro.recall, 100 * micro.f1);
    out << line;
  } else {
    out << "length     " << format_mean_stdev(length) << "\n";
  }
  std::snprintf(line, sizeof line, "%-10s %-8s %-8s %-8s\n", "ROUGE", "P", "R", "F1");
  out << line;
  for (auto [name, v] : {std::pair{"1", rouge1}, std::pair{"2", rouge2}, std::pair{"L", rougeL}}) {
    std::snprintf(line, sizeof line, "%-10s %-8.1f %-8.1f %-8.1f\n", name, 100 * v.precision, 100 * v.recall,
                  100 * v.f1);
    out << line;
  }
  return out.str();
}

std::string EvalReport::to_json() const {
  using json = nlohmann::json;
  auto prf = [](const Prf& x) { return json{{"precision", x.precision}, {"recall", x.recall}, {"f1", x.f1}}; };
  auto ms = [](const MeanStdev& x) { return json{{"mean", x.mean}, {"stdev", x.stdev}}; };
  json j{{"count", count},
         {"rouge1", prf(rouge1)},
         {"rouge2", prf(rouge2)},
         {"rougeL", prf(rougeL)},
         {"length", ms(length)}};
  if (has_masks) {
    j["precision"] = ms(precision);
    j["recall"] = ms(recall);
    j["f1"] = ms(f1);
    j["micro"] = prf(micro);
  }
  return j.dump();
}

}  // namespace headliner
