#include "doctest.h"

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "headliner/selector.hpp"
#include "headliner/synthetic.hpp"
#include "oracles.hpp"

using namespace headliner;

namespace {

Paragraph paragraph_of_lengths(const std::vector<std::size_t>& lengths) {
  Paragraph p;
  p.id = "p";
  int w = 0;
  for (std::size_t n : lengths) {
    Sentence s;
    for (std::size_t i = 0; i < n; ++i) {
      AnnotatedToken t;
      t.surface = "w" + std::to_string(w++);
      s.tokens.push_back(t);
    }
    p.sentences.push_back(s);
  }
  return p;
}

double pairwise_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  double wins = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[i] != 1 || labels[j] != 0) continue;
      pairs += 1.0;
      wins += scores[i] > scores[j] ? 1.0 : scores[i] == scores[j] ? 0.5 : 0.0;
    }
  }
  return wins / pairs;
}

}  // namespace

TEST_CASE("a zeroed selector scores every word at one half") {
  auto corpus = fixture::indexed(synthetic::summary_corpus(5, 1));
  SaliencyModel model(fixture::tiny_config(ModelKind::kSelector), corpus.vocab, corpus.tags);
  model.params().fill_values(0.0);
  for (const auto& p : corpus.records) {
    const auto probs = model.word_saliency(p, nullptr);
    REQUIRE(probs.size() == p.word_count());
    for (double v : probs) CHECK(v == 0.5);
  }
}

TEST_CASE("sentence saliency is the mean word probability") {
  CHECK(sentence_saliency(std::vector<double>{0.2, 0.4}) == doctest::Approx(0.3));
  CHECK(sentence_saliency(std::vector<double>{0.9}) == 0.9);
  CHECK(sentence_saliency(std::vector<double>{0.1, 0.2, 0.6}) == doctest::Approx(0.3));
  CHECK_THROWS(sentence_saliency(std::vector<double>{}));
}

TEST_CASE("selection picks the highest mean and the earliest on ties") {
  const auto p = paragraph_of_lengths({1, 1, 1});
  CHECK(select_sentence(p, std::vector<double>{0.3, 0.7, 0.7}) == 1);
  CHECK(select_sentence(p, std::vector<double>{0.5, 0.5, 0.5}) == 0);
  const auto q = paragraph_of_lengths({2, 3});
  // means 0.5 and 0.6
  CHECK(select_sentence(q, std::vector<double>{0.9, 0.1, 0.6, 0.6, 0.6}) == 1);
  CHECK_THROWS(select_sentence(q, std::vector<double>{0.1, 0.2}));
  CHECK(lead_sentence(q) == 0);
}

TEST_CASE("selection agrees with a brute-force argmax and ignores positive affine rescaling") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> len(1, 6), count(1, 6);
  std::uniform_real_distribution<double> prob(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::size_t> lengths(count(rng));
    for (auto& l : lengths) l = len(rng);
    const auto p = paragraph_of_lengths(lengths);
    std::vector<double> probs(p.word_count());
    for (double& v : probs) v = prob(rng);

    std::size_t expected = 0;
    double best = -1.0;
    std::size_t offset = 0;
    for (std::size_t s = 0; s < lengths.size(); ++s) {
      double total = 0.0;
      for (std::size_t i = 0; i < lengths[s]; ++i) total += probs[offset + i];
      if (total / static_cast<double>(lengths[s]) > best) {
        best = total / static_cast<double>(lengths[s]);
        expected = s;
      }
      offset += lengths[s];
    }
    CHECK(select_sentence(p, probs) == expected);

    std::vector<double> rescaled = probs;
    for (double& v : rescaled) v = 0.25 * v + 0.5;
    CHECK(select_sentence(p, rescaled) == expected);
  }
}

TEST_CASE("auc matches pairwise counting") {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> coarse(0, 4), label(0, 1);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> scores(30);
    std::vector<int> labels(30);
    for (std::size_t i = 0; i < 30; ++i) {
      scores[i] = coarse(rng) / 4.0;  // plenty of ties
      labels[i] = label(rng);
    }
    labels[0] = 1;
    labels[1] = 0;
    CHECK(roc_auc(scores, labels) == doctest::Approx(pairwise_auc(scores, labels)).epsilon(1e-12));
  }
  CHECK(roc_auc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}) == 0.5);
  CHECK(roc_auc(std::vector<double>{0.9, 0.1}, std::vector<int>{1, 0}) == 1.0);
}

TEST_CASE("initial selector loss is close to ln 2 and its gradients are correct") {
  auto corpus = fixture::indexed(synthetic::summary_corpus(8, 2));
  SaliencyModel model(fixture::tiny_config(ModelKind::kSelector), corpus.vocab, corpus.tags);
  double total = 0.0;
  for (const auto& p : corpus.records) {
    Graph g;
    total += model.loss(g, p, nullptr).scalar();
  }
  CHECK(total / static_cast<double>(corpus.records.size()) == doctest::Approx(std::log(2.0)).epsilon(0.01 / std::log(2.0)));

  const auto report = oracle::check_gradients(model.params(), [&](Graph& g) {
    return model.loss(g, corpus.records[0], nullptr);
  });
  CHECK(report.fraction() >= 0.99);

  Paragraph unlabeled = corpus.records[0];
  unlabeled.saliency_labels.reset();
  Graph g;
  CHECK_THROWS(model.loss(g, unlabeled, nullptr));
}

TEST_CASE("training separates salient words on synthetic paragraphs") {
  auto corpus = fixture::indexed(synthetic::summary_corpus(240, 4));
  auto [train, dev] = split_every(corpus.records, 5);
  SaliencyModel model(fixture::tiny_config(ModelKind::kSelector), corpus.vocab, corpus.tags);
  TrainerConfig config;
  config.lr = 0.02;
  config.max_epochs = 8;
  config.batch_size = 8;
  const auto result = train_selector(model, train, dev, config);
  REQUIRE(result.epochs.size() >= 3);
  for (std::size_t e = 1; e < 3; ++e) CHECK(result.epochs[e].train_loss <= result.epochs[e - 1].train_loss);
  CHECK(evaluate_selector(model, dev) > 0.95);

  // the dense sentence wins on most paragraphs
  std::size_t hits = 0;
  for (const auto& p : dev) {
    const auto chosen = select_sentence(p, model, nullptr);
    const auto probs = std::vector<double>(p.saliency_labels->begin(), p.saliency_labels->end());
    if (chosen == select_sentence(p, probs)) ++hits;
  }
  CHECK(hits >= dev.size() * 8 / 10);
}
