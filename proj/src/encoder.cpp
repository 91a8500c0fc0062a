#include "headliner/encoder.hpp"

#include <fstream>
#include <iterator>
#include <sstream>
#include <stdexcept>

#include "binary_io.hpp"

namespace headliner {

std::size_t EmbeddingConfig::enabled_channels() const {
  std::size_t n = 0;
  for (bool on : channels) n += on ? 1 : 0;
  return n;
}

std::size_t EmbeddingConfig::input_dim() const {
  return static_cast<std::size_t>(word_dim) + static_cast<std::size_t>(pretrained_dim) +
         static_cast<std::size_t>(contextual_dim) +
         static_cast<std::size_t>(feature_dim) * enabled_channels();
}

Matrix load_pretrained_vectors(const std::filesystem::path& path, const Vocabulary& vocab,
                               int expected_dim) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open pretrained vectors: " + path.string());
  const auto dim = static_cast<std::size_t>(expected_dim);
  Matrix table(vocab.size(), dim);
  std::vector<bool> seen(vocab.size(), false);
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    std::istringstream fields(line);
    std::string token;
    if (!(fields >> token)) continue;
    std::vector<double> values{std::istream_iterator<double>(fields), std::istream_iterator<double>()};
    if (values.size() != dim) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_number) + ": vector has " +
                               std::to_string(values.size()) + " dimensions, expected " +
                               std::to_string(dim));
    }
    int id = token == "<unk>" ? kUnkId : vocab.id(token);
    if (id == kUnkId && token != "<unk>") continue;
    if (seen[static_cast<std::size_t>(id)]) continue;
    seen[static_cast<std::size_t>(id)] = true;
    std::copy(values.begin(), values.end(), table.row(static_cast<std::size_t>(id)).begin());
  }
  for (std::size_t id = 2; id < vocab.size(); ++id) {
    if (!seen[id]) std::copy_n(table.row(kUnkId).data(), dim, table.row(id).data());
  }
  return table;
}

ContextualVectors ContextualVectors::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open contextual vectors: " + path.string());
  std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  binary::Reader r(bytes);
  try {
    if (r.take(4) != "CTXV") throw binary::FormatError("bad magic");
    if (r.u32() != kVersion) throw binary::FormatError("unsupported version");
    ContextualVectors out(static_cast<int>(r.u32()));
    while (!r.done()) {
      std::string id = r.string();
      const auto n = r.u32();
      Matrix rows(n, static_cast<std::size_t>(out.dim_));
      for (double& v : rows.values()) v = r.f32();
      out.add(id, std::move(rows));
    }
    return out;
  } catch (const binary::FormatError& e) {
    throw std::runtime_error("contextual vectors " + path.string() + ": " + e.what());
  }
}

void ContextualVectors::save(const std::filesystem::path& path) const {
  std::string out = "CTXV";
  binary::put_u32(out, kVersion);
  binary::put_u32(out, static_cast<std::uint32_t>(dim_));
  for (const auto& [id, rows] : records_) {
    binary::put_string(out, id);
    binary::put_u32(out, static_cast<std::uint32_t>(rows.rows()));
    for (double v : rows.values()) binary::put_f32(out, static_cast<float>(v));
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write contextual vectors: " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

void ContextualVectors::add(const std::string& id, Matrix rows) {
  if (static_cast<int>(rows.cols()) != dim_) {
    throw std::invalid_argument("contextual vectors for '" + id + "' have the wrong width");
  }
  records_.insert_or_assign(id, std::move(rows));
}

const Matrix* ContextualVectors::find(const std::string& id) const {
  auto it = records_.find(id);
  return it == records_.end() ? nullptr : &it->second;
}

Matrix contextual_rows(const ContextualVectors& store, const std::string& id, std::size_t offset,
                       std::size_t n) {
  const Matrix* rows = store.find(id);
  if (rows == nullptr) throw std::runtime_error("no contextual vectors for record '" + id + "'");
  if (offset + n > rows->rows()) {
    throw std::runtime_error("contextual vectors for record '" + id + "' are too short");
  }
  Matrix out(n, rows->cols());
  std::copy_n(rows->data() + offset * rows->cols(), out.size(), out.data());
  return out;
}

Embedder::Embedder(const EmbeddingConfig& config, std::size_t vocab_size, const TagMaps& tags,
                   ParameterStore& params, const std::string& prefix)
    : config_(config) {
  words_ = &params.add(prefix + "word_embedding", vocab_size, static_cast<std::size_t>(config.word_dim));
  if (config.pretrained_dim > 0) {
    pretrained_ = &params.add_frozen(
        prefix + "pretrained_embedding",
        Matrix(vocab_size, static_cast<std::size_t>(config.pretrained_dim)));
  }
  for (std::size_t c = 0; c < kNumFeatureChannels; ++c) {
    if (!config.channels[c]) continue;
    features_[c] = &params.add(prefix + kFeatureChannelNames[c] + "_embedding", tags[c].size(),
                               static_cast<std::size_t>(config.feature_dim));
  }
}

void Embedder::load_pretrained(const Vocabulary& vocab) {
  if (pretrained_ == nullptr) return;
  pretrained_->value = load_pretrained_vectors(config_.pretrained_path, vocab, config_.pretrained_dim);
}

Expr Embedder::embed(Graph& g, std::span<const AnnotatedToken> tokens,
                     const Matrix* contextual) const {
  if (tokens.empty()) throw std::invalid_argument("embed: empty sentence");
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(t.vocab_id);
  std::vector<Expr> parts;
  parts.push_back(g.lookup(*words_, ids));
  if (pretrained_ != nullptr) parts.push_back(g.lookup(*pretrained_, ids));
  if (config_.contextual_dim > 0) {
    if (contextual == nullptr || contextual->rows() != tokens.size() ||
        static_cast<int>(contextual->cols()) != config_.contextual_dim) {
      throw std::runtime_error("embed: contextual vectors missing or misshapen");
    }
    parts.push_back(g.constant(*contextual));
  }
  for (std::size_t c = 0; c < kNumFeatureChannels; ++c) {
    if (features_[c] == nullptr) continue;
    std::vector<int> tag_ids;
    tag_ids.reserve(tokens.size());
    for (const auto& t : tokens) tag_ids.push_back(t.tag_ids[c]);
    parts.push_back(g.lookup(*features_[c], tag_ids));
  }
  return parts.size() == 1 ? parts.front() : concat_cols(parts);
}

EncoderKind parse_encoder_kind(const std::string& name) {
  if (name == "recurrent") return EncoderKind::kRecurrent;
  if (name == "window") return EncoderKind::kWindow;
  throw std::invalid_argument("unknown encoder: " + name);
}

std::string to_string(EncoderKind kind) {
  return kind == EncoderKind::kRecurrent ? "recurrent" : "window";
}

LstmLayer::LstmLayer(ParameterStore& params, const std::string& prefix, std::size_t input_dim,
                     std::size_t hidden)
    : hidden_(hidden) {
  input_weights_ = &params.add(prefix + "W", input_dim, 4 * hidden);
  recurrent_weights_ = &params.add(prefix + "U", hidden, 4 * hidden);
  bias_ = &params.add(prefix + "b", 1, 4 * hidden, Init::kZero, false);
  for (std::size_t j = hidden; j < 2 * hidden; ++j) bias_->value[j] = 1.0;
}

Expr LstmLayer::run(Graph& g, Expr inputs, bool reverse) const {
  const std::size_t n = inputs.rows();
  const std::size_t h = hidden_;
  Expr projected = add(matmul(inputs, g.param(*input_weights_)), g.param(*bias_));
  Expr recurrent = g.param(*recurrent_weights_);
  std::vector<Expr> outputs(n);
  Expr state{}, cell{};
  bool first = true;
  for (std::size_t step = 0; step < n; ++step) {
    const std::size_t t = reverse ? n - 1 - step : step;
    Expr gates = slice_rows(projected, t, t + 1);
    if (!first) gates = add(gates, matmul(state, recurrent));
    Expr in_gate = sigmoid(slice_cols(gates, 0, h));
    Expr forget_gate = sigmoid(slice_cols(gates, h, 2 * h));
    Expr candidate = tanh(slice_cols(gates, 2 * h, 3 * h));
    Expr out_gate = sigmoid(slice_cols(gates, 3 * h, 4 * h));
    cell = first ? mul(in_gate, candidate) : add(mul(forget_gate, cell), mul(in_gate, candidate));
    state = mul(out_gate, tanh(cell));
    outputs[t] = state;
    first = false;
  }
  return concat_rows(outputs);
}

BiLstmEncoder::BiLstmEncoder(const EncoderConfig& config, std::size_t input_dim,
                             ParameterStore& params, const std::string& prefix)
    : hidden_(static_cast<std::size_t>(config.hidden)), dropout_(config.dropout) {
  std::size_t in = input_dim;
  for (int l = 0; l < config.layers; ++l) {
    const std::string layer = prefix + "lstm" + std::to_string(l) + "_";
    forward_.emplace_back(params, layer + "fwd_", in, hidden_);
    backward_.emplace_back(params, layer + "bwd_", in, hidden_);
    in = 2 * hidden_;
  }
}

Expr BiLstmEncoder::encode(Graph& g, Expr embedded) const {
  Expr x = embedded;
  for (std::size_t l = 0; l < forward_.size(); ++l) {
    x = dropout(x, dropout_);
    std::array<Expr, 2> both{forward_[l].run(g, x, false), backward_[l].run(g, x, true)};
    x = concat_cols(both);
  }
  return x;
}

Expr window_stack(Expr rows, int radius) {
  Graph& g = *rows.graph;
  const Matrix& v = rows.value();
  const auto n = static_cast<long>(v.rows());
  const std::size_t d = v.cols();
  const std::size_t width = static_cast<std::size_t>(2 * radius + 1);
  Matrix out(v.rows(), width * d);
  for (long i = 0; i < n; ++i) {
    for (long k = -radius; k <= radius; ++k) {
      const long src = i + k;
      if (src < 0 || src >= n) continue;
      std::copy_n(v.row(static_cast<std::size_t>(src)).data(), d,
                  out.row(static_cast<std::size_t>(i)).data() + static_cast<std::size_t>(k + radius) * d);
    }
  }
  return g.record(std::move(out), [rows, radius, n, d](Graph& g, std::size_t self) {
    const Matrix& grad = g.grad(self);
    Matrix& dst = g.grad(rows.id);
    for (long i = 0; i < n; ++i) {
      for (long k = -radius; k <= radius; ++k) {
        const long src = i + k;
        if (src < 0 || src >= n) continue;
        const double* from = grad.row(static_cast<std::size_t>(i)).data() +
                             static_cast<std::size_t>(k + radius) * d;
        double* to = dst.row(static_cast<std::size_t>(src)).data();
        for (std::size_t c = 0; c < d; ++c) to[c] += from[c];
      }
    }
  });
}

WindowedEncoder::WindowedEncoder(const EncoderConfig& config, std::size_t input_dim,
                                 ParameterStore& params, const std::string& prefix)
    : radius_(config.window_radius),
      out_dim_(static_cast<std::size_t>(config.window_dim)),
      dropout_(config.dropout) {
  if (radius_ < 0) throw std::invalid_argument("window radius must be >= 0");
  weights_ = &params.add(prefix + "window_W",
                         static_cast<std::size_t>(2 * radius_ + 1) * input_dim, out_dim_);
  bias_ = &params.add(prefix + "window_b", 1, out_dim_, Init::kZero, false);
}

Expr WindowedEncoder::encode(Graph& g, Expr embedded) const {
  Expr x = dropout(embedded, dropout_);
  return tanh(add(matmul(window_stack(x, radius_), g.param(*weights_)), g.param(*bias_)));
}

std::unique_ptr<Encoder> make_encoder(const EncoderConfig& config, std::size_t input_dim,
                                      ParameterStore& params, const std::string& prefix) {
  if (config.kind == EncoderKind::kRecurrent) {
    return std::make_unique<BiLstmEncoder>(config, input_dim, params, prefix);
  }
  return std::make_unique<WindowedEncoder>(config, input_dim, params, prefix);
}

}  // namespace headliner
