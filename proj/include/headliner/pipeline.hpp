#ifndef HEADLINER_PIPELINE_HPP_
#define HEADLINER_PIPELINE_HPP_

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "headliner/bundle.hpp"
#include "headliner/metrics.hpp"

namespace headliner {

struct PipelineConfig {
  std::string selector_path;    // empty: always the first sentence
  std::string compressor_path;  // required
  std::string ranker_path;      // empty: no re-ranking
  std::string contextual_path;  // needed when a model uses contextual vectors
  std::size_t kbest = 10;
  double lambda = 0.1;
  double alpha = 0.6;
  int threads = 0;
};

struct TitleRecord {
  std::string id;
  std::size_t sentence = 0;
  std::vector<int> keep;
  std::vector<std::string> tokens;  // title tokens
  std::string title;
  CompressionCandidate chosen;
};

// Selector -> compressor (K-best for the semi-CRF) -> ranker. Every bundle
// is loaded in the constructor, so a missing file fails before any input is
// read.
class TitlePipeline {
 public:
  explicit TitlePipeline(const PipelineConfig& config);
  ~TitlePipeline();

  TitleRecord title(const Paragraph& paragraph) const;
  // Paragraphs are processed in parallel; output order matches input order.
  std::vector<TitleRecord> run(const std::vector<Paragraph>& paragraphs) const;

  const Compressor& compressor() const { return *compressor_; }

 private:
  PipelineConfig config_;
  std::unique_ptr<SaliencyModel> selector_;
  std::unique_ptr<Compressor> compressor_;
  std::unique_ptr<LanguageModel> ranker_;
  std::unique_ptr<ContextualVectors> contextual_;
};

// {"id", "keep", "sentence", "title"} as compact JSON with sorted keys.
std::string title_record_json(const TitleRecord& record);

struct Prediction {
  std::string id;
  std::size_t sentence = 0;
  std::vector<int> keep;
};

std::vector<Prediction> read_predictions(const std::filesystem::path& path);

// Scores predictions against a gold corpus. Compression gold yields token
// P/R/F1 and ROUGE of the kept tokens. Summary gold yields ROUGE against the
// summary for the titles, the selected sentences and the LEAD-1 baseline.
// Throws when the id sets differ, naming the missing ids.
std::vector<std::pair<std::string, EvalReport>> evaluate_predictions(const std::vector<Prediction>& predictions,
                                                                     const std::vector<Paragraph>& gold,
                                                                     Schema schema);

}  // namespace headliner

#endif  // HEADLINER_PIPELINE_HPP_
