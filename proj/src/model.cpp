#include "headliner/model.hpp"

#include <stdexcept>

#include "json.hpp"

namespace headliner {

using json = nlohmann::json;

ModelKind parse_model_kind(std::string_view name) {
  if (name == "selector") return ModelKind::kSelector;
  if (name == "naive") return ModelKind::kNaive;
  if (name == "crf") return ModelKind::kCrf;
  if (name == "scrf") return ModelKind::kScrf;
  if (name == "lm") return ModelKind::kLm;
  throw std::invalid_argument("unknown model kind: " + std::string(name));
}

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kSelector: return "selector";
    case ModelKind::kNaive: return "naive";
    case ModelKind::kCrf: return "crf";
    case ModelKind::kScrf: return "scrf";
    case ModelKind::kLm: return "lm";
  }
  return "?";
}

bool is_compressor(ModelKind kind) {
  return kind == ModelKind::kNaive || kind == ModelKind::kCrf || kind == ModelKind::kScrf;
}

namespace {

template <typename T>
void take(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void merge(const json& j, ModelConfig& c) {
  if (!j.is_object()) throw std::invalid_argument("model config must be a JSON object");
  if (j.contains("kind")) c.kind = parse_model_kind(j.at("kind").get<std::string>());
  take(j, "emission_hidden", c.emission_hidden);
  take(j, "max_segment_length", c.max_segment_length);
  take(j, "length_dim", c.length_dim);
  take(j, "seed", c.seed);
  if (j.contains("scheme")) c.scheme = parse_transition_scheme(j.at("scheme").get<std::string>());
  if (j.contains("embedding")) {
    const json& e = j.at("embedding");
    take(e, "word_dim", c.embedding.word_dim);
    take(e, "feature_dim", c.embedding.feature_dim);
    take(e, "pretrained_path", c.embedding.pretrained_path);
    take(e, "pretrained_dim", c.embedding.pretrained_dim);
    take(e, "contextual_path", c.embedding.contextual_path);
    take(e, "contextual_dim", c.embedding.contextual_dim);
    if (e.contains("channels")) {
      for (std::size_t ch = 0; ch < kNumFeatureChannels; ++ch) {
        c.embedding.channels[ch] = e.at("channels").value(kFeatureChannelNames[ch], c.embedding.channels[ch]);
      }
    }
  }
  if (j.contains("encoder")) {
    const json& e = j.at("encoder");
    if (e.contains("kind")) c.encoder.kind = parse_encoder_kind(e.at("kind").get<std::string>());
    take(e, "hidden", c.encoder.hidden);
    take(e, "layers", c.encoder.layers);
    take(e, "window_radius", c.encoder.window_radius);
    take(e, "window_dim", c.encoder.window_dim);
    take(e, "dropout", c.encoder.dropout);
  }
  if (c.max_segment_length < 1) throw std::invalid_argument("max_segment_length must be >= 1");
}

}  // namespace

std::string ModelConfig::to_json() const {
  json channels;
  for (std::size_t ch = 0; ch < kNumFeatureChannels; ++ch) channels[kFeatureChannelNames[ch]] = embedding.channels[ch];
  json j = {
      {"kind", to_string(kind)},
      {"emission_hidden", emission_hidden},
      {"max_segment_length", max_segment_length},
      {"length_dim", length_dim},
      {"scheme", to_string(scheme)},
      {"seed", seed},
      {"embedding",
       {{"word_dim", embedding.word_dim},
        {"feature_dim", embedding.feature_dim},
        {"channels", channels},
        {"pretrained_path", embedding.pretrained_path},
        {"pretrained_dim", embedding.pretrained_dim},
        {"contextual_path", embedding.contextual_path},
        {"contextual_dim", embedding.contextual_dim}}},
      {"encoder",
       {{"kind", to_string(encoder.kind)},
        {"hidden", encoder.hidden},
        {"layers", encoder.layers},
        {"window_radius", encoder.window_radius},
        {"window_dim", encoder.window_dim},
        {"dropout", encoder.dropout}}},
  };
  return j.dump();
}

ModelConfig ModelConfig::from_json(std::string_view text) {
  ModelConfig c;
  c.merge_json(text);
  return c;
}

void ModelConfig::merge_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("model config: ") + e.what());
  }
  merge(j, *this);
}

NeuralModel::NeuralModel(ModelConfig config, Vocabulary vocab, TagMaps tags)
    : config_(std::move(config)), vocab_(std::move(vocab)), tags_(std::move(tags)), params_(config_.seed) {}

TokenEncoder::TokenEncoder(const ModelConfig& config, const Vocabulary& vocab, const TagMaps& tags,
                           ParameterStore& params)
    : embedder_(config.embedding, vocab.size(), tags, params, ""),
      encoder_(make_encoder(config.encoder, embedder_.output_dim(), params, "")) {}

Expr TokenEncoder::encode(Graph& g, std::span<const AnnotatedToken> tokens, const Matrix* contextual) const {
  return encoder_->encode(g, embedder_.embed(g, tokens, contextual));
}

}  // namespace headliner
