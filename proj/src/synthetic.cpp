#include "headliner/synthetic.hpp"

#include <algorithm>
#include <random>
#include <set>

namespace headliner::synthetic {

namespace {

constexpr int kContentWords = 60;
constexpr int kFunctionWords = 20;
constexpr int kFillerWords = 80;
constexpr int kSalientWords = 20;

std::string record_id(const char* prefix, std::size_t i) { return std::string(prefix) + std::to_string(i); }

int uniform(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

AnnotatedToken make_token(std::string surface, std::string pos, std::string dep, std::string shape) {
  AnnotatedToken t;
  t.surface = std::move(surface);
  t.tags = {std::move(pos), std::move(dep), std::move(shape), "O"};
  return t;
}

}  // namespace

std::vector<Paragraph> compression_corpus(std::size_t count, std::uint64_t seed, int min_len, int max_len) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution is_content(0.45);
  const std::vector<std::string> deps{"nsubj", "obj", "amod", "det", "prep"};
  std::vector<Paragraph> out;
  for (std::size_t r = 0; r < count; ++r) {
    Sentence s;
    std::vector<int> keep;
    const int n = uniform(rng, min_len, max_len);
    for (int i = 0; i < n; ++i) {
      const bool content = is_content(rng);
      std::string word = content ? "c" + std::to_string(uniform(rng, 0, kContentWords - 1))
                                 : "f" + std::to_string(uniform(rng, 0, kFunctionWords - 1));
      const std::string shape = i == 0 ? "Xx" : "x";
      s.tokens.push_back(make_token(std::move(word), content ? "CONTENT" : "FUNC",
                                    deps[static_cast<std::size_t>(uniform(rng, 0, 4))], shape));
      keep.push_back(content || i == 0 ? 1 : 0);
    }
    s.keep_labels = std::move(keep);
    Paragraph p;
    p.id = record_id("syn", r);
    p.sentences.push_back(std::move(s));
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<Paragraph> summary_corpus(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Paragraph> out;
  for (std::size_t r = 0; r < count; ++r) {
    Paragraph p;
    p.id = record_id("par", r);
    const int sentences = uniform(rng, 2, 5);
    const int focus = uniform(rng, 0, sentences - 1);
    std::set<std::string> salient_seen;
    std::vector<std::string> summary;
    for (int k = 0; k < sentences; ++k) {
      Sentence s;
      const int n = uniform(rng, 4, 10);
      std::bernoulli_distribution salient(k == focus ? 0.6 : 0.05);
      for (int i = 0; i < n; ++i) {
        std::string word;
        if (salient(rng)) {
          word = "s" + std::to_string(uniform(rng, 0, kSalientWords - 1));
          if (salient_seen.insert(word).second) summary.push_back(word);
        } else {
          word = "n" + std::to_string(uniform(rng, 0, kFillerWords - 1));
        }
        s.tokens.push_back(make_token(std::move(word), "X", "dep", "x"));
      }
      p.sentences.push_back(std::move(s));
    }
    if (summary.empty()) {
      // guarantee a non-empty summary by planting one salient word
      auto& t = p.sentences[static_cast<std::size_t>(focus)].tokens.front();
      t.surface = "s" + std::to_string(uniform(rng, 0, kSalientWords - 1));
      summary.push_back(t.surface);
    }
    p.summary = std::move(summary);
    p.saliency_labels = align_saliency_labels(p);
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<Paragraph> cyclic_lm_corpus(std::size_t count, std::uint64_t seed) {
  static const std::vector<std::string> symbols{"a", "b", "c"};
  std::mt19937_64 rng(seed);
  std::vector<Paragraph> out;
  for (std::size_t r = 0; r < count; ++r) {
    Sentence s;
    int cur = uniform(rng, 0, 2);
    const int n = uniform(rng, 3, 8);
    for (int i = 0; i < n; ++i) {
      s.tokens.push_back(make_token(symbols[static_cast<std::size_t>(cur)], "X", "dep", "x"));
      cur = (cur + 1) % 3;
    }
    Paragraph p;
    p.id = record_id("lm", r);
    p.sentences.push_back(std::move(s));
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace headliner::synthetic
