#include "headliner/training.hpp"

#include <cmath>
#include <stdexcept>

#include "headliner/parallel.hpp"

namespace headliner {

std::optional<Matrix> contextual_for(const ContextualVectors* store, const Paragraph& paragraph,
                                     std::size_t offset, std::size_t n) {
  if (store == nullptr) return std::nullopt;
  return contextual_rows(*store, paragraph.id, offset, n);
}

namespace {

const Matrix* ptr(const std::optional<Matrix>& m) { return m ? &*m : nullptr; }

}  // namespace

std::vector<SentenceRef> labelled_sentences(const std::vector<Paragraph>& corpus) {
  std::vector<SentenceRef> out;
  for (const auto& p : corpus) {
    std::size_t offset = 0;
    for (std::size_t s = 0; s < p.sentences.size(); ++s) {
      if (p.sentences[s].keep_labels) out.push_back({&p, s, offset});
      offset += p.sentences[s].size();
    }
  }
  return out;
}

FitResult train_compressor(Compressor& model, const std::vector<Paragraph>& train, const std::vector<Paragraph>& dev,
                           const TrainerConfig& config, const ContextualVectors* contextual) {
  const auto train_refs = labelled_sentences(train);
  const auto dev_refs = labelled_sentences(dev);
  if (train_refs.empty()) throw std::invalid_argument("compressor training needs sentences with keep labels");
  auto loss_of = [&](Graph& g, const SentenceRef& ref) {
    const auto ctx = contextual_for(contextual, *ref.paragraph, ref.offset, ref.sentence().size());
    return model.loss(g, ref.sentence(), ptr(ctx));
  };
  return fit(
      model.params(), train_refs.size(), [&](Graph& g, std::size_t i) { return loss_of(g, train_refs[i]); },
      dev_refs.size(),
      [&](std::size_t i) {
        Graph g;
        return loss_of(g, dev_refs[i]).scalar();
      },
      config);
}

FitResult train_selector(SaliencyModel& model, const std::vector<Paragraph>& train, const std::vector<Paragraph>& dev,
                         const TrainerConfig& config, const ContextualVectors* contextual) {
  for (const auto* corpus : {&train, &dev}) {
    for (const auto& p : *corpus) {
      if (!p.saliency_labels) throw std::invalid_argument("paragraph '" + p.id + "' has no saliency labels");
    }
  }
  auto loss_of = [&](Graph& g, const Paragraph& p) {
    const auto ctx = contextual_for(contextual, p, 0, p.word_count());
    return model.loss(g, p, ptr(ctx));
  };
  return fit(
      model.params(), train.size(), [&](Graph& g, std::size_t i) { return loss_of(g, train[i]); }, dev.size(),
      [&](std::size_t i) {
        Graph g;
        return loss_of(g, dev[i]).scalar();
      },
      config);
}

std::vector<std::vector<int>> lm_sequences(const LanguageModel& model, const std::vector<Paragraph>& corpus) {
  std::vector<std::vector<int>> out;
  for (const auto& p : corpus) {
    for (const auto& s : p.sentences) out.push_back(model.ids(s.surfaces()));
  }
  return out;
}

LmFitResult train_lm(LanguageModel& model, const std::vector<Paragraph>& train, const std::vector<Paragraph>& dev,
                     const TrainerConfig& config) {
  const auto train_seq = lm_sequences(model, train);
  const auto dev_seq = lm_sequences(model, dev.empty() ? train : dev);
  std::size_t dev_tokens = 0;
  for (const auto& s : dev_seq) dev_tokens += s.size();

  LmFitResult out;
  // Dev loss is the summed NLL of a sentence so that the epoch mean converts
  // straight into corpus perplexity.
  out.fit = fit(
      model.params(), train_seq.size(),
      [&](Graph& g, std::size_t i) {
        return scale(model.loss(g, train_seq[i]), 1.0 / (2.0 * static_cast<double>(train_seq[i].size())));
      },
      dev_seq.size(), [&](std::size_t i) { return -model.loglikelihood(dev_seq[i]); }, config);
  const double per_token = static_cast<double>(dev_seq.size()) / (2.0 * static_cast<double>(dev_tokens));
  for (const auto& e : out.fit.epochs) out.dev_perplexity.push_back(std::exp(e.dev_loss * per_token));
  return out;
}

std::vector<std::vector<int>> decode_corpus(const Compressor& model, const std::vector<Paragraph>& corpus,
                                            const ContextualVectors* contextual, int threads) {
  return map_indices(
      corpus.size(),
      [&](std::size_t i) {
        const Paragraph& p = corpus[i];
        if (p.sentences.size() != 1) throw std::invalid_argument("record '" + p.id + "' is not a single sentence");
        const auto ctx = contextual_for(contextual, p, 0, p.sentences[0].size());
        return model.decode(p.sentences[0], ptr(ctx));
      },
      Execution::kParallel, threads);
}

EvalReport evaluate_compressor(const Compressor& model, const std::vector<Paragraph>& corpus,
                               const ContextualVectors* contextual, int threads) {
  const auto refs = labelled_sentences(corpus);
  if (refs.empty()) throw std::invalid_argument("evaluation needs sentences with keep labels");
  auto items = map_indices(
      refs.size(),
      [&](std::size_t i) {
        const auto& s = refs[i].sentence();
        const auto ctx = contextual_for(contextual, *refs[i].paragraph, refs[i].offset, s.size());
        EvalItem item;
        item.id = refs[i].paragraph->id;
        item.pred_mask = model.decode(s, ptr(ctx));
        item.gold_mask = *s.keep_labels;
        item.candidate = kept_tokens(s, *item.pred_mask);
        item.reference = kept_tokens(s, *item.gold_mask);
        return item;
      },
      Execution::kParallel, threads);
  return evaluate(items);
}

double evaluate_selector(const SaliencyModel& model, const std::vector<Paragraph>& corpus,
                         const ContextualVectors* contextual, int threads) {
  const auto probs = map_indices(
      corpus.size(),
      [&](std::size_t i) {
        const auto ctx = contextual_for(contextual, corpus[i], 0, corpus[i].word_count());
        return model.word_saliency(corpus[i], ptr(ctx));
      },
      Execution::kParallel, threads);
  std::vector<double> scores;
  std::vector<int> labels;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (!corpus[i].saliency_labels) throw std::invalid_argument("selector evaluation needs saliency labels");
    scores.insert(scores.end(), probs[i].begin(), probs[i].end());
    labels.insert(labels.end(), corpus[i].saliency_labels->begin(), corpus[i].saliency_labels->end());
  }
  return roc_auc(scores, labels);
}

void prepare_corpus(std::vector<Paragraph>& corpus, Vocabulary& vocab, TagMaps& tags) {
  vocab = build_vocabulary(corpus);
  tags = build_tag_maps(corpus);
  index_corpus(corpus, vocab, tags);
}

std::pair<std::vector<Paragraph>, std::vector<Paragraph>> split_every(const std::vector<Paragraph>& corpus,
                                                                      std::size_t k) {
  if (k < 2) throw std::invalid_argument("split_every: k must be >= 2");
  std::pair<std::vector<Paragraph>, std::vector<Paragraph>> out;
  for (std::size_t i = 0; i < corpus.size(); ++i) (i % k == k - 1 ? out.second : out.first).push_back(corpus[i]);
  return out;
}

}  // namespace headliner
