#ifndef HEADLINER_BUNDLE_HPP_
#define HEADLINER_BUNDLE_HPP_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "headliner/compressor.hpp"
#include "headliner/model.hpp"
#include "headliner/ranker.hpp"
#include "headliner/selector.hpp"

namespace headliner {

class BundleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NamedTensor {
  std::string name;
  bool trainable = true;
  Matrix value;
};

// Everything needed to rebuild a model: the model is reconstructed from the
// config, vocabulary and tags, then every tensor is overwritten by name.
struct Bundle {
  static constexpr std::uint32_t kVersion = 1;

  ModelConfig config;
  Vocabulary vocab;
  TagMaps tags;
  std::vector<NamedTensor> tensors;
};

Bundle make_bundle(const NeuralModel& model);

// "HDLN", u32 version, u32 section count, then sections {name, u64 size,
// bytes}: config, vocab and tags as canonical JSON, tensors as
// {name, u8 trainable, u32 rows, u32 cols, rows*cols f64}. Little endian.
std::string serialize_bundle(const Bundle& bundle);
// Throws BundleError on bad magic, unknown versions, truncation or
// malformed sections.
Bundle parse_bundle(std::string_view bytes);

// Writes through a temporary file and renames it into place.
void save_bundle(const std::filesystem::path& path, const NeuralModel& model);
Bundle load_bundle(const std::filesystem::path& path);

// Requires the bundle to name exactly the store's tensors with equal shapes.
void restore_parameters(ParameterStore& params, const Bundle& bundle);

std::unique_ptr<Compressor> make_compressor(const Bundle& bundle);
std::unique_ptr<SaliencyModel> make_selector(const Bundle& bundle);
std::unique_ptr<LanguageModel> make_language_model(const Bundle& bundle);

}  // namespace headliner

#endif  // HEADLINER_BUNDLE_HPP_
