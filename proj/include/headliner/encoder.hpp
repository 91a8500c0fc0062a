#ifndef HEADLINER_ENCODER_HPP_
#define HEADLINER_ENCODER_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>

#include "headliner/autodiff.hpp"
#include "headliner/corpus.hpp"
#include "headliner/parameters.hpp"

namespace headliner {

struct EmbeddingConfig {
  int word_dim = 200;
  int feature_dim = 30;
  std::array<bool, kNumFeatureChannels> channels{true, true, true, true};
  // Frozen second word channel, loaded from a text vector file.
  std::string pretrained_path;
  int pretrained_dim = 0;
  // Per-token vectors supplied alongside each record (binary CTXV file).
  std::string contextual_path;
  int contextual_dim = 0;

  std::size_t enabled_channels() const;
  std::size_t input_dim() const;
};

// Reads "token v1 ... vD" lines into a vocab-aligned table. Rows of tokens
// missing from the file copy the file's <unk> vector (zeros if absent).
Matrix load_pretrained_vectors(const std::filesystem::path& path, const Vocabulary& vocab,
                               int expected_dim);

// Per-record token vectors keyed by record id. Binary layout, little endian:
// "CTXV", u32 version, u32 dim, then {u32 id length, id bytes, u32 n, n*dim f32}.
class ContextualVectors {
 public:
  static constexpr std::uint32_t kVersion = 1;

  ContextualVectors() = default;
  explicit ContextualVectors(int dim) : dim_(dim) {}

  static ContextualVectors load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  void add(const std::string& id, Matrix rows);
  const Matrix* find(const std::string& id) const;
  int dim() const { return dim_; }
  std::size_t size() const { return records_.size(); }

 private:
  int dim_ = 0;
  std::map<std::string, Matrix> records_;
};

// Rows [offset, offset + n) of the record's vectors; throws when missing.
Matrix contextual_rows(const ContextualVectors& store, const std::string& id, std::size_t offset,
                       std::size_t n);

class Embedder {
 public:
  Embedder(const EmbeddingConfig& config, std::size_t vocab_size, const TagMaps& tags,
           ParameterStore& params, const std::string& prefix);

  std::size_t output_dim() const { return config_.input_dim(); }
  const EmbeddingConfig& config() const { return config_; }
  // Fills the frozen pretrained table from config().pretrained_path. Bundles
  // carry the table, so this runs only when a model is first built.
  void load_pretrained(const Vocabulary& vocab);

  // Row i concatenates word, pretrained, contextual and enabled feature
  // embeddings of token i.
  Expr embed(Graph& g, std::span<const AnnotatedToken> tokens, const Matrix* contextual) const;

 private:
  EmbeddingConfig config_;
  Parameter* words_ = nullptr;
  Parameter* pretrained_ = nullptr;
  std::array<Parameter*, kNumFeatureChannels> features_{};
};

enum class EncoderKind { kRecurrent, kWindow };

EncoderKind parse_encoder_kind(const std::string& name);
std::string to_string(EncoderKind kind);

struct EncoderConfig {
  EncoderKind kind = EncoderKind::kRecurrent;
  int hidden = 64;  // per direction
  int layers = 2;
  int window_radius = 2;
  int window_dim = 128;
  double dropout = 0.5;
};

class Encoder {
 public:
  virtual ~Encoder() = default;
  virtual std::size_t output_dim() const = 0;
  // n x d_in embeddings to n x d_h hidden states.
  virtual Expr encode(Graph& g, Expr embedded) const = 0;
};

// Single-direction LSTM layer with gates ordered (input, forget, cell, output).
class LstmLayer {
 public:
  LstmLayer(ParameterStore& params, const std::string& prefix, std::size_t input_dim,
            std::size_t hidden);
  // Returns n x hidden, rows in input order whichever direction is run.
  Expr run(Graph& g, Expr inputs, bool reverse) const;
  std::size_t hidden() const { return hidden_; }

 private:
  std::size_t hidden_;
  Parameter* input_weights_;
  Parameter* recurrent_weights_;
  Parameter* bias_;
};

class BiLstmEncoder : public Encoder {
 public:
  BiLstmEncoder(const EncoderConfig& config, std::size_t input_dim, ParameterStore& params,
                const std::string& prefix);
  std::size_t output_dim() const override { return 2 * hidden_; }
  Expr encode(Graph& g, Expr embedded) const override;

 private:
  std::size_t hidden_;
  double dropout_;
  std::vector<LstmLayer> forward_;
  std::vector<LstmLayer> backward_;
};

// h_i = tanh(W [e_{i-r}; ...; e_{i+r}] + b), zero rows outside the sentence.
class WindowedEncoder : public Encoder {
 public:
  WindowedEncoder(const EncoderConfig& config, std::size_t input_dim, ParameterStore& params,
                  const std::string& prefix);
  std::size_t output_dim() const override { return out_dim_; }
  Expr encode(Graph& g, Expr embedded) const override;
  int radius() const { return radius_; }

 private:
  int radius_;
  std::size_t out_dim_;
  double dropout_;
  Parameter* weights_;
  Parameter* bias_;
};

// Stacks each row with its r neighbours on either side (zero padded).
Expr window_stack(Expr rows, int radius);

std::unique_ptr<Encoder> make_encoder(const EncoderConfig& config, std::size_t input_dim,
                                      ParameterStore& params, const std::string& prefix);

}  // namespace headliner

#endif  // HEADLINER_ENCODER_HPP_
