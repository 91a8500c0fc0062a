#ifndef HEADLINER_TRAINING_HPP_
#define HEADLINER_TRAINING_HPP_

#include <optional>
#include <vector>

#include "headliner/compressor.hpp"
#include "headliner/encoder.hpp"
#include "headliner/metrics.hpp"
#include "headliner/ranker.hpp"
#include "headliner/selector.hpp"
#include "headliner/trainer.hpp"

namespace headliner {

// Contextual rows for words [offset, offset + n) of a paragraph, or nothing
// when no store is attached.
std::optional<Matrix> contextual_for(const ContextualVectors* store, const Paragraph& paragraph,
                                     std::size_t offset, std::size_t n);

struct SentenceRef {
  const Paragraph* paragraph = nullptr;
  std::size_t index = 0;
  std::size_t offset = 0;  // first word within the paragraph

  const Sentence& sentence() const { return paragraph->sentences[index]; }
};

// Every sentence that carries keep labels, in corpus order.
std::vector<SentenceRef> labelled_sentences(const std::vector<Paragraph>& corpus);

FitResult train_compressor(Compressor& model, const std::vector<Paragraph>& train, const std::vector<Paragraph>& dev,
                           const TrainerConfig& config, const ContextualVectors* contextual = nullptr);

// Paragraphs must carry saliency labels (see align_saliency_labels).
FitResult train_selector(SaliencyModel& model, const std::vector<Paragraph>& train,
                         const std::vector<Paragraph>& dev, const TrainerConfig& config,
                         const ContextualVectors* contextual = nullptr);

struct LmFitResult {
  FitResult fit;
  std::vector<double> dev_perplexity;  // one per epoch
};

// Every sentence of every paragraph is a training sequence. Each example's
// loss is its mean per-token cross-entropy over both directions.
LmFitResult train_lm(LanguageModel& model, const std::vector<Paragraph>& train, const std::vector<Paragraph>& dev,
                     const TrainerConfig& config);
std::vector<std::vector<int>> lm_sequences(const LanguageModel& model, const std::vector<Paragraph>& corpus);

// Decoded masks for every record of a compression corpus, in order.
std::vector<std::vector<int>> decode_corpus(const Compressor& model, const std::vector<Paragraph>& corpus,
                                            const ContextualVectors* contextual = nullptr, int threads = 0);
EvalReport evaluate_compressor(const Compressor& model, const std::vector<Paragraph>& corpus,
                               const ContextualVectors* contextual = nullptr, int threads = 0);
// AUC of word saliency against the aligned labels, pooled over the corpus.
double evaluate_selector(const SaliencyModel& model, const std::vector<Paragraph>& corpus,
                         const ContextualVectors* contextual = nullptr, int threads = 0);

// Builds vocabulary and tag maps from the corpus and indexes it in place.
void prepare_corpus(std::vector<Paragraph>& corpus, Vocabulary& vocab, TagMaps& tags);

// Deterministic split: every k-th record goes to dev.
std::pair<std::vector<Paragraph>, std::vector<Paragraph>> split_every(const std::vector<Paragraph>& corpus,
                                                                      std::size_t k);

}  // namespace headliner

#endif  // HEADLINER_TRAINING_HPP_
