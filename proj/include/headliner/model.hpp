#ifndef HEADLINER_MODEL_HPP_
#define HEADLINER_MODEL_HPP_

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>

#include "headliner/corpus.hpp"
#include "headliner/encoder.hpp"
#include "headliner/parameters.hpp"
#include "headliner/semicrf.hpp"

namespace headliner {

enum class ModelKind { kSelector, kNaive, kCrf, kScrf, kLm };

ModelKind parse_model_kind(std::string_view name);
std::string to_string(ModelKind kind);
bool is_compressor(ModelKind kind);

struct ModelConfig {
  ModelKind kind = ModelKind::kScrf;
  EmbeddingConfig embedding;
  EncoderConfig encoder;
  int emission_hidden = 64;
  int max_segment_length = 6;
  int length_dim = 30;
  TransitionScheme scheme = TransitionScheme::kBieuo;
  std::uint64_t seed = 1;

  // Canonical JSON (sorted keys, compact).
  std::string to_json() const;
  static ModelConfig from_json(std::string_view text);
  // Overlays the fields present in a JSON object onto this config.
  void merge_json(std::string_view text);
};

// Vocabulary, tag maps and parameters shared by every trainable component.
// Subclasses create their parameters in the constructor, so two models built
// from the same config hold identically named and shaped tensors.
class NeuralModel {
 public:
  NeuralModel(ModelConfig config, Vocabulary vocab, TagMaps tags);
  virtual ~NeuralModel() = default;
  NeuralModel(const NeuralModel&) = delete;
  NeuralModel& operator=(const NeuralModel&) = delete;

  ModelKind kind() const { return config_.kind; }
  const ModelConfig& config() const { return config_; }
  const Vocabulary& vocab() const { return vocab_; }
  const TagMaps& tags() const { return tags_; }
  ParameterStore& params() { return params_; }
  const ParameterStore& params() const { return params_; }

 protected:
  ModelConfig config_;
  Vocabulary vocab_;
  TagMaps tags_;
  ParameterStore params_;
};

// Embedding plus encoder stack used by the selector and the compressors.
class TokenEncoder {
 public:
  TokenEncoder(const ModelConfig& config, const Vocabulary& vocab, const TagMaps& tags,
               ParameterStore& params);
  std::size_t output_dim() const { return encoder_->output_dim(); }
  Expr encode(Graph& g, std::span<const AnnotatedToken> tokens, const Matrix* contextual) const;
  Embedder& embedder() { return embedder_; }

 private:
  Embedder embedder_;
  std::unique_ptr<Encoder> encoder_;
};

}  // namespace headliner

#endif  // HEADLINER_MODEL_HPP_
