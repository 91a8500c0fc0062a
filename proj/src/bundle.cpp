#include "headliner/bundle.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "binary_io.hpp"
#include "json.hpp"

namespace headliner {

using json = nlohmann::json;

namespace {

constexpr std::string_view kMagic = "HDLN";

std::string encode_tags(const TagMaps& tags) {
  json j = json::object();
  for (std::size_t c = 0; c < kNumFeatureChannels; ++c) j[kFeatureChannelNames[c]] = tags[c].tags();
  return j.dump();
}

TagMaps decode_tags(std::string_view text) {
  const json j = json::parse(text);
  TagMaps tags;
  for (std::size_t c = 0; c < kNumFeatureChannels; ++c) {
    tags[c] = TagMap(j.at(kFeatureChannelNames[c]).get<std::vector<std::string>>());
  }
  return tags;
}

std::string encode_tensors(const std::vector<NamedTensor>& tensors) {
  std::string out;
  binary::put_u32(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& t : tensors) {
    binary::put_string(out, t.name);
    out.push_back(t.trainable ? 1 : 0);
    binary::put_u32(out, static_cast<std::uint32_t>(t.value.rows()));
    binary::put_u32(out, static_cast<std::uint32_t>(t.value.cols()));
    for (double v : t.value.values()) binary::put_f64(out, v);
  }
  return out;
}

std::vector<NamedTensor> decode_tensors(std::string_view bytes) {
  binary::Reader r(bytes);
  std::vector<NamedTensor> out(r.u32());
  for (auto& t : out) {
    t.name = r.string();
    t.trainable = r.take(1)[0] != 0;
    const std::size_t rows = r.u32();
    const std::size_t cols = r.u32();
    if (rows != 0 && cols > (bytes.size() / 8) / rows) throw binary::FormatError("tensor larger than the file");
    t.value = Matrix(rows, cols);
    for (double& v : t.value.values()) v = r.f64();
  }
  if (!r.done()) throw binary::FormatError("trailing bytes after tensors");
  return out;
}

}  // namespace

Bundle make_bundle(const NeuralModel& model) {
  Bundle b;
  b.config = model.config();
  b.vocab = model.vocab();
  b.tags = model.tags();
  const auto& params = model.params();
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& p = params.at(i);
    b.tensors.push_back({p.name, p.trainable, p.value});
  }
  return b;
}

std::string serialize_bundle(const Bundle& bundle) {
  const std::vector<std::pair<std::string, std::string>> sections{
      {"config", bundle.config.to_json()},
      {"vocab", json(bundle.vocab.stored_tokens()).dump()},
      {"tags", encode_tags(bundle.tags)},
      {"tensors", encode_tensors(bundle.tensors)},
  };
  std::string out(kMagic);
  binary::put_u32(out, Bundle::kVersion);
  binary::put_u32(out, static_cast<std::uint32_t>(sections.size()));
  for (const auto& [name, body] : sections) {
    binary::put_string(out, name);
    binary::put_u64(out, body.size());
    out += body;
  }
  return out;
}

Bundle parse_bundle(std::string_view bytes) {
  try {
    binary::Reader r(bytes);
    if (r.take(kMagic.size()) != kMagic) throw BundleError("not a model bundle (bad magic)");
    const auto version = r.u32();
    if (version != Bundle::kVersion) {
      throw BundleError("unsupported bundle version " + std::to_string(version));
    }
    std::map<std::string, std::string_view> sections;
    for (auto count = r.u32(); count > 0; --count) {
      std::string name = r.string();
      const auto size = r.u64();
      if (size > bytes.size()) throw binary::FormatError("section larger than the file");
      sections[name] = r.take(static_cast<std::size_t>(size));
    }
    if (!r.done()) throw binary::FormatError("trailing bytes after sections");
    for (const char* need : {"config", "vocab", "tags", "tensors"}) {
      if (!sections.contains(need)) throw BundleError(std::string("bundle lacks the '") + need + "' section");
    }
    Bundle b;
    b.config = ModelConfig::from_json(sections["config"]);
    b.vocab = Vocabulary(json::parse(sections["vocab"]).get<std::vector<std::string>>());
    b.tags = decode_tags(sections["tags"]);
    b.tensors = decode_tensors(sections["tensors"]);
    return b;
  } catch (const BundleError&) {
    throw;
  } catch (const std::exception& e) {
    throw BundleError(std::string("corrupt bundle: ") + e.what());
  }
}

void save_bundle(const std::filesystem::path& path, const NeuralModel& model) {
  const std::string bytes = serialize_bundle(make_bundle(model));
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw BundleError("cannot write bundle: " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw BundleError("cannot write bundle: " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

Bundle load_bundle(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw BundleError("cannot open bundle: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_bundle(buf.str());
  } catch (const BundleError& e) {
    throw BundleError(path.string() + ": " + e.what());
  }
}

void restore_parameters(ParameterStore& params, const Bundle& bundle) {
  if (bundle.tensors.size() != params.size()) {
    throw BundleError("bundle has " + std::to_string(bundle.tensors.size()) + " tensors, model expects " +
                      std::to_string(params.size()));
  }
  // Check everything before touching any value.
  for (const auto& t : bundle.tensors) {
    if (!params.contains(t.name)) throw BundleError("unexpected tensor '" + t.name + "'");
    const auto& p = params.get(t.name);
    if (p.value.rows() != t.value.rows() || p.value.cols() != t.value.cols()) {
      throw BundleError("tensor '" + t.name + "' has the wrong shape");
    }
  }
  for (const auto& t : bundle.tensors) {
    auto& p = params.get(t.name);
    p.value = t.value;
    p.trainable = t.trainable;
  }
  params.zero_grads();
}

namespace {

template <typename Model, typename... Extra>
std::unique_ptr<Model> rebuild(const Bundle& bundle, Extra&&... extra) {
  auto model = std::make_unique<Model>(bundle.config, bundle.vocab, std::forward<Extra>(extra)...);
  restore_parameters(model->params(), bundle);
  return model;
}

}  // namespace

std::unique_ptr<Compressor> make_compressor(const Bundle& bundle) {
  if (!is_compressor(bundle.config.kind)) {
    throw BundleError("bundle holds a " + to_string(bundle.config.kind) + " model, not a compressor");
  }
  return rebuild<Compressor>(bundle, bundle.tags);
}

std::unique_ptr<SaliencyModel> make_selector(const Bundle& bundle) {
  if (bundle.config.kind != ModelKind::kSelector) {
    throw BundleError("bundle holds a " + to_string(bundle.config.kind) + " model, not a selector");
  }
  return rebuild<SaliencyModel>(bundle, bundle.tags);
}

std::unique_ptr<LanguageModel> make_language_model(const Bundle& bundle) {
  if (bundle.config.kind != ModelKind::kLm) {
    throw BundleError("bundle holds a " + to_string(bundle.config.kind) + " model, not a language model");
  }
  return rebuild<LanguageModel>(bundle);
}

}  // namespace headliner
