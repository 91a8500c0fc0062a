// Small model configurations and corpora shared by the model-level tests.
#ifndef HEADLINER_TESTS_FIXTURES_HPP_
#define HEADLINER_TESTS_FIXTURES_HPP_

#include <vector>

#include "headliner/model.hpp"
#include "headliner/training.hpp"

namespace fixture {

using namespace headliner;

inline ModelConfig tiny_config(ModelKind kind, EncoderKind encoder = EncoderKind::kRecurrent) {
  ModelConfig c;
  c.kind = kind;
  c.embedding.word_dim = 8;
  c.embedding.feature_dim = 3;
  c.encoder.kind = encoder;
  c.encoder.hidden = 6;
  c.encoder.layers = 1;
  c.encoder.window_radius = 1;
  c.encoder.window_dim = 10;
  c.encoder.dropout = 0.0;
  c.emission_hidden = 6;
  c.length_dim = 3;
  c.max_segment_length = 3;
  c.seed = 5;
  return c;
}

struct IndexedCorpus {
  std::vector<Paragraph> records;
  Vocabulary vocab;
  TagMaps tags;
};

inline IndexedCorpus indexed(std::vector<Paragraph> records) {
  IndexedCorpus out;
  out.records = std::move(records);
  prepare_corpus(out.records, out.vocab, out.tags);
  return out;
}

}  // namespace fixture

#endif  // HEADLINER_TESTS_FIXTURES_HPP_
