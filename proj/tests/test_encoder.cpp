#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "headliner/encoder.hpp"
#include "oracles.hpp"

using namespace headliner;

namespace {

TagMaps small_tags() {
  TagMaps tags;
  for (auto& t : tags) t = TagMap({"A", "B"});
  return tags;
}

std::vector<AnnotatedToken> tokens_with_ids(const std::vector<int>& ids) {
  std::vector<AnnotatedToken> out;
  for (int id : ids) {
    AnnotatedToken t;
    t.surface = "w" + std::to_string(id);
    t.vocab_id = id;
    t.tag_ids = {1, 2, 1, 2};
    out.push_back(t);
  }
  return out;
}

bool all_finite(const Matrix& m) {
  for (double v : m.values()) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("embedding width follows the enabled channels") {
  EmbeddingConfig config;
  CHECK(config.input_dim() == 320);
  config.channels = {false, false, false, false};
  CHECK(config.input_dim() == 200);

  ParameterStore params;
  EmbeddingConfig full;
  Embedder embedder(full, 10, small_tags(), params, "");
  Graph g;
  const auto toks = tokens_with_ids({2, 3, 1});
  CHECK(embedder.embed(g, toks, nullptr).cols() == 320);
}

TEST_CASE("pretrained vectors: missing tokens use the unk row, bad widths are rejected") {
  const auto path = std::filesystem::temp_directory_path() / "headliner_pretrained.txt";
  {
    std::ofstream out(path);
    out << "ball 1 2 3\n<unk> 9 9 9\nnet 4 5 6\n";
  }
  const Vocabulary vocab({"ball", "flew", "net"});
  const Matrix table = load_pretrained_vectors(path, vocab, 3);
  CHECK(table.rows() == vocab.size());
  CHECK(table(static_cast<std::size_t>(vocab.id("ball")), 1) == 2.0);
  CHECK(table(static_cast<std::size_t>(vocab.id("flew")), 0) == 9.0);
  CHECK(table(static_cast<std::size_t>(vocab.id("net")), 2) == 6.0);
  CHECK_THROWS(load_pretrained_vectors(path, vocab, 4));

  EmbeddingConfig config;
  config.word_dim = 4;
  config.channels = {false, false, false, false};
  config.pretrained_path = path.string();
  config.pretrained_dim = 3;
  ParameterStore params;
  Embedder embedder(config, vocab.size(), small_tags(), params, "");
  embedder.load_pretrained(vocab);
  CHECK(config.input_dim() == 7);
  CHECK_FALSE(params.get("pretrained_embedding").trainable);
  Graph g;
  auto toks = tokens_with_ids({vocab.id("flew")});
  const Matrix& row = embedder.embed(g, toks, nullptr).value();
  CHECK(row(0, 4) == 9.0);
}

TEST_CASE("contextual vectors round-trip through the binary format") {
  const auto path = std::filesystem::temp_directory_path() / "headliner_ctx.bin";
  ContextualVectors store(2);
  store.add("r1", Matrix(3, 2, {0.5, -1.0, 2.0, 0.25, 0.0, 8.0}));
  store.add("r2", Matrix(1, 2, {1.0, 1.0}));
  store.save(path);
  const auto back = ContextualVectors::load(path);
  CHECK(back.dim() == 2);
  CHECK(back.size() == 2);
  REQUIRE(back.find("r1") != nullptr);
  CHECK(*back.find("r1") == *store.find("r1"));
  CHECK(contextual_rows(back, "r1", 1, 2) == Matrix(2, 2, {2.0, 0.25, 0.0, 8.0}));
  CHECK_THROWS(contextual_rows(back, "r3", 0, 1));
  CHECK_THROWS(contextual_rows(back, "r2", 0, 2));
  CHECK_THROWS(store.add("bad", Matrix(1, 3)));
}

TEST_CASE("recurrent encoder: zero weights give zero states, shapes and determinism") {
  ParameterStore params(3);
  EncoderConfig config;
  auto encoder = make_encoder(config, 6, params, "enc_");
  CHECK(encoder->output_dim() == 128);
  std::mt19937_64 rng(1);
  const Matrix x = oracle::random_matrix(rng, 5, 6);
  {
    Graph a(false), b(false);
    const Matrix ha = encoder->encode(a, a.constant(x)).value();
    const Matrix hb = encoder->encode(b, b.constant(x)).value();
    CHECK(ha == hb);
    CHECK(all_finite(ha));
  }
  {
    Graph g(false);
    CHECK(encoder->encode(g, g.constant(oracle::random_matrix(rng, 1, 6))).rows() == 1);
  }
  params.fill_values(0.0);
  Graph g(false);
  for (double v : encoder->encode(g, g.constant(x)).value().values()) CHECK(v == 0.0);
}

TEST_CASE("recurrent encoder: forget gate bias starts at one") {
  ParameterStore params;
  LstmLayer layer(params, "l_", 3, 4);
  const Parameter& b = params.get("l_b");
  for (std::size_t j = 0; j < 16; ++j) CHECK(b.value(0, j) == (j >= 4 && j < 8 ? 1.0 : 0.0));
  CHECK_FALSE(b.regularized);
}

TEST_CASE("recurrent encoder: training-mode dropout changes outputs, eval mode does not") {
  ParameterStore params(3);
  EncoderConfig config;
  config.hidden = 8;
  auto encoder = make_encoder(config, 6, params, "enc_");
  std::mt19937_64 rng(2);
  const Matrix x = oracle::random_matrix(rng, 4, 6);
  Graph eval1(false), eval2(false), train(true, 11);
  const Matrix e = encoder->encode(eval1, eval1.constant(x)).value();
  CHECK(encoder->encode(eval2, eval2.constant(x)).value() == e);
  CHECK_FALSE(encoder->encode(train, train.constant(x)).value() == e);
}

TEST_CASE("recurrent encoder gradients match finite differences") {
  ParameterStore params(4);
  EncoderConfig config;
  config.hidden = 3;
  auto encoder = make_encoder(config, 4, params, "enc_");
  std::mt19937_64 rng(3);
  const Matrix x = oracle::random_matrix(rng, 4, 4);
  const Matrix w = oracle::random_matrix(rng, 4, 6);
  auto loss = [&](Graph& g) { return sum(mul(encoder->encode(g, g.constant(x)), g.constant(w))); };
  const auto report = oracle::check_gradients(params, loss);
  CHECK(report.fraction() >= 0.99);
}

TEST_CASE("windowed encoder: radius zero is position independent") {
  ParameterStore params(6);
  EncoderConfig config{.kind = EncoderKind::kWindow, .window_radius = 0, .window_dim = 5};
  auto encoder = make_encoder(config, 3, params, "win_");
  Matrix x(4, 3, {1, 2, 3, 0, 0, 1, 1, 2, 3, -1, 0, 0});
  Graph g;
  const Matrix h = encoder->encode(g, g.constant(x)).value();
  CHECK(h.cols() == 5);
  for (std::size_t j = 0; j < 5; ++j) CHECK(h(0, j) == h(2, j));
  Graph single;
  const Matrix one = encoder->encode(single, single.constant(Matrix(1, 3, {1, 2, 3}))).value();
  for (std::size_t j = 0; j < 5; ++j) CHECK(one(0, j) == h(0, j));
}

TEST_CASE("windowed encoder: identical windows give identical states") {
  ParameterStore params(6);
  EncoderConfig config{.kind = EncoderKind::kWindow, .window_radius = 1, .window_dim = 4};
  auto encoder = make_encoder(config, 2, params, "win_");
  // rows 1 and 4 both see the window (1,0) (1,0) (2,0)
  const Matrix x(6, 2, {1, 0, 1, 0, 2, 0, 1, 0, 1, 0, 2, 0});
  Graph g;
  const Matrix h = encoder->encode(g, g.constant(x)).value();
  for (std::size_t j = 0; j < 4; ++j) CHECK(h(1, j) == h(4, j));
}

TEST_CASE("window stacking zero-pads the edges") {
  Graph g;
  const Matrix x(3, 1, {1, 2, 3});
  const Matrix s = window_stack(g.constant(x), 1).value();
  CHECK(s == Matrix(3, 3, {0, 1, 2, 1, 2, 3, 2, 3, 0}));
}

TEST_CASE("windowed encoder and embeddings pass the finite-difference check") {
  ParameterStore params(8);
  EmbeddingConfig emb;
  emb.word_dim = 3;
  emb.feature_dim = 2;
  Embedder embedder(emb, 6, small_tags(), params, "");
  EncoderConfig config{.kind = EncoderKind::kWindow, .window_radius = 1, .window_dim = 4};
  auto encoder = make_encoder(config, embedder.output_dim(), params, "win_");
  const auto toks = tokens_with_ids({2, 5, 2, 1});
  std::mt19937_64 rng(9);
  const Matrix w = oracle::random_matrix(rng, 4, 4);
  auto loss = [&](Graph& g) {
    return sum(mul(encoder->encode(g, embedder.embed(g, toks, nullptr)), g.constant(w)));
  };
  CHECK(oracle::check_gradients(params, loss).fraction() >= 0.99);
}

TEST_CASE("unknown encoder names are rejected") {
  CHECK(parse_encoder_kind("window") == EncoderKind::kWindow);
  CHECK(parse_encoder_kind("recurrent") == EncoderKind::kRecurrent);
  CHECK_THROWS(parse_encoder_kind("transformer"));
}
