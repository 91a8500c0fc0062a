#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "headliner/ranker.hpp"
#include "headliner/synthetic.hpp"
#include "oracles.hpp"

using namespace headliner;

namespace {

ModelConfig lm_config() {
  ModelConfig c = fixture::tiny_config(ModelKind::kLm);
  c.embedding.word_dim = 6;
  c.encoder.hidden = 8;
  return c;
}

Vocabulary abc() { return Vocabulary({"a", "b", "c"}); }

CompressionCandidate candidate(std::vector<int> mask, double model_score, std::size_t rank) {
  CompressionCandidate c;
  c.mask = std::move(mask);
  c.model_score = model_score;
  c.rank = rank;
  return c;
}

}  // namespace

TEST_CASE("a zeroed language model is uniform over the vocabulary") {
  LanguageModel lm(lm_config(), abc());
  lm.params().fill_values(0.0);
  const std::vector<int> ids{2, 3, 4, 2};
  const double uniform = -std::log(static_cast<double>(lm.vocab().size()));
  for (bool backward : {false, true}) {
    const Matrix lp = lm.log_probs(ids, backward);
    REQUIRE(lp.rows() == ids.size());
    REQUIRE(lp.cols() == lm.vocab().size());
    for (double v : lp.values()) CHECK(v == doctest::Approx(uniform));
  }
  CHECK(lm.loglikelihood(ids) == doctest::Approx(2.0 * 4.0 * uniform));
}

TEST_CASE("each position is a distribution and the likelihood adds both directions") {
  LanguageModel lm(lm_config(), abc());
  const std::vector<int> ids{3, 2, 4};
  const Matrix fwd = lm.log_probs(ids, false);
  const Matrix bwd = lm.log_probs(ids, true);
  double expected = 0.0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    double mass = 0.0;
    for (double v : fwd.row(i)) mass += std::exp(v);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
    expected += fwd(i, static_cast<std::size_t>(ids[i])) + bwd(i, static_cast<std::size_t>(ids[i]));
  }
  CHECK(lm.loglikelihood(ids) == doctest::Approx(expected).epsilon(1e-12));

  // a single token is scored from the boundary on both sides
  const std::vector<int> one{3};
  CHECK(lm.loglikelihood(one) ==
        doctest::Approx(lm.log_probs(one, false)(0, 3) + lm.log_probs(one, true)(0, 3)).epsilon(1e-12));
}

TEST_CASE("output weights are the input embedding table") {
  LanguageModel lm(lm_config(), abc());
  const std::vector<int> ids{2};  // only the boundary token is read
  const double before = lm.log_probs(ids, false)(0, 4);
  for (double& v : lm.embedding().value.row(4)) v += 5.0;
  CHECK(std::abs(lm.log_probs(ids, false)(0, 4) - before) > 1e-4);
  CHECK_FALSE(lm.params().contains("lm_output"));
}

TEST_CASE("language model gradients match finite differences") {
  LanguageModel lm(lm_config(), abc());
  const std::vector<int> ids{2, 4, 3, 3};
  const auto report = oracle::check_gradients(lm.params(), [&](Graph& g) { return lm.loss(g, ids); });
  CHECK(report.fraction() >= 0.99);
}

TEST_CASE("training on a cycle prefers the cyclic order") {
  const auto corpus = synthetic::cyclic_lm_corpus(200, 3);
  LanguageModel lm(lm_config(), build_vocabulary(corpus));
  const auto sequences = lm_sequences(lm, corpus);
  const double v = static_cast<double>(lm.vocab().size());
  CHECK(perplexity(lm, sequences) == doctest::Approx(v).epsilon(0.1));

  TrainerConfig config = TrainerConfig::language_model();
  config.max_epochs = 1;
  config.dropout = 0.0;
  train_lm(lm, corpus, {}, config);
  CHECK(perplexity(lm, sequences) < v);

  config.max_epochs = 4;
  train_lm(lm, corpus, {}, config);
  const std::vector<std::string> good{"a", "b", "c", "a"};
  const std::vector<std::string> bad{"a", "c", "b", "a"};
  CHECK(lm.loglikelihood(good) > lm.loglikelihood(bad));
}

TEST_CASE("length penalty") {
  CHECK(length_penalty(1, 0.6) == doctest::Approx(1.0));
  CHECK(length_penalty(9, 0.6) == doctest::Approx(std::pow(14.0 / 6.0, 0.6)));
  CHECK(length_penalty(9, 0.6) == doctest::Approx(1.66259).epsilon(1e-5));
  CHECK(length_penalty(20, 0.0) == 1.0);
  CHECK_THROWS(length_penalty(0, 0.6));
}

TEST_CASE("rerank: lambda extremes and a brute-force ordering") {
  // lm score depends only on how many tokens are kept
  auto scorer = [](const CompressionCandidate& c) {
    return -1.5 * static_cast<double>(std::count(c.mask.begin(), c.mask.end(), 1));
  };
  std::vector<CompressionCandidate> cands{candidate({1, 1, 1, 0}, -1.0, 0), candidate({1, 0, 0, 0}, -2.0, 1),
                                          candidate({1, 1, 0, 0}, -2.5, 2)};

  CHECK(rerank(cands, scorer, 0.0, 0.6).best.rank == 0);
  CHECK(rerank(cands, scorer, 1e9, 0.6).best.rank == 1);

  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> score(-10.0, 0.0), lam(0.0, 2.0);
  std::uniform_int_distribution<int> bit(0, 1);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<CompressionCandidate> set;
    for (std::size_t r = 0; r < 6; ++r) {
      std::vector<int> mask(5);
      for (int& b : mask) b = bit(rng);
      mask[r % 5] = 1;
      set.push_back(candidate(mask, score(rng), r));
    }
    const double lambda = lam(rng);
    const auto result = rerank(set, scorer, lambda, 0.6);
    std::vector<double> combined;
    for (const auto& c : set) {
      const auto kept = static_cast<std::size_t>(std::count(c.mask.begin(), c.mask.end(), 1));
      combined.push_back(c.model_score + lambda * scorer(c) / std::pow((5.0 + kept) / 6.0, 0.6));
    }
    const auto best = static_cast<std::size_t>(std::max_element(combined.begin(), combined.end()) - combined.begin());
    CHECK(result.best.rank == best);
    CHECK(result.best.combined == doctest::Approx(combined[best]));

    auto shuffled = set;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto again = rerank(shuffled, scorer, lambda, 0.6);
    REQUIRE(again.ranked.size() == result.ranked.size());
    for (std::size_t i = 0; i < result.ranked.size(); ++i) CHECK(again.ranked[i].rank == result.ranked[i].rank);
  }
}

TEST_CASE("rerank ties keep the decoder order") {
  auto flat = [](const CompressionCandidate&) { return 0.0; };
  std::vector<CompressionCandidate> cands{candidate({1, 0}, -1.0, 1), candidate({0, 1}, -1.0, 0)};
  const auto result = rerank(cands, flat, 0.5, 0.6);
  CHECK(result.ranked[0].rank == 0);
  CHECK(result.ranked[1].rank == 1);
  CHECK_THROWS(rerank({}, flat, 0.5, 0.6));
  CHECK_THROWS(rerank({candidate({0, 0}, 0.0, 0)}, flat, 0.5, 0.6));
}
