#include "headliner/pipeline.hpp"

#include <fstream>
#include <map>
#include <set>
#include <stdexcept>

#include "headliner/parallel.hpp"
#include "headliner/training.hpp"
#include "json.hpp"

namespace headliner {

using json = nlohmann::json;

namespace {

const Matrix* ptr(const std::optional<Matrix>& m) { return m ? &*m : nullptr; }

bool uses_contextual(const NeuralModel* model) {
  return model != nullptr && model->config().embedding.contextual_dim > 0;
}

}  // namespace

TitlePipeline::TitlePipeline(const PipelineConfig& config) : config_(config) {
  if (config.kbest < 1) throw std::invalid_argument("kbest must be >= 1");
  if (config.compressor_path.empty()) throw std::invalid_argument("a compressor bundle is required");
  compressor_ = make_compressor(load_bundle(config.compressor_path));
  if (!config.selector_path.empty()) selector_ = make_selector(load_bundle(config.selector_path));
  if (!config.ranker_path.empty()) ranker_ = make_language_model(load_bundle(config.ranker_path));
  if (uses_contextual(compressor_.get()) || uses_contextual(selector_.get())) {
    if (config.contextual_path.empty()) throw std::invalid_argument("models need contextual vectors; none given");
    contextual_ = std::make_unique<ContextualVectors>(ContextualVectors::load(config.contextual_path));
  }
}

TitlePipeline::~TitlePipeline() = default;

TitleRecord TitlePipeline::title(const Paragraph& paragraph) const {
  if (paragraph.sentences.empty()) throw std::invalid_argument("paragraph '" + paragraph.id + "' is empty");
  TitleRecord out;
  out.id = paragraph.id;

  if (selector_ && paragraph.sentences.size() > 1) {
    Paragraph indexed = paragraph;
    for (auto& s : indexed.sentences) index_sentence(s, selector_->vocab(), selector_->tags());
    const auto ctx = uses_contextual(selector_.get())
                         ? contextual_for(contextual_.get(), paragraph, 0, paragraph.word_count())
                         : std::nullopt;
    out.sentence = select_sentence(indexed, *selector_, ptr(ctx));
  } else {
    out.sentence = lead_sentence(paragraph);
  }

  Sentence sentence = paragraph.sentences[out.sentence];
  index_sentence(sentence, compressor_->vocab(), compressor_->tags());
  const auto ctx = uses_contextual(compressor_.get())
                       ? contextual_for(contextual_.get(), paragraph, paragraph.sentence_offset(out.sentence),
                                        sentence.size())
                       : std::nullopt;
  auto candidates = compressor_->candidates(sentence, config_.kbest, ptr(ctx));
  if (ranker_) {
    out.chosen = rerank(std::move(candidates), *ranker_, config_.lambda, config_.alpha).best;
  } else {
    out.chosen = std::move(candidates.front());
  }
  out.keep = out.chosen.mask;
  out.tokens = out.chosen.tokens;
  out.title = out.chosen.text;

  // deletion-only: the title is an in-order subsequence of the sentence
  if (kept_tokens(paragraph.sentences[out.sentence], out.keep) != out.tokens) {
    throw std::logic_error("title of '" + paragraph.id + "' is not a subsequence of its sentence");
  }
  return out;
}

std::vector<TitleRecord> TitlePipeline::run(const std::vector<Paragraph>& paragraphs) const {
  return map_indices(
      paragraphs.size(), [&](std::size_t i) { return title(paragraphs[i]); }, Execution::kParallel,
      config_.threads);
}

std::string title_record_json(const TitleRecord& record) {
  return json{{"id", record.id}, {"sentence", record.sentence}, {"title", record.title}, {"keep", record.keep}}
      .dump();
}

std::vector<Prediction> read_predictions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open predictions: " + path.string());
  std::vector<Prediction> out;
  std::string line;
  for (std::size_t number = 1; std::getline(in, line); ++number) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      Prediction p;
      p.id = j.at("id").get<std::string>();
      p.sentence = j.value("sentence", std::size_t{0});
      p.keep = j.at("keep").get<std::vector<int>>();
      out.push_back(std::move(p));
    } catch (const json::exception& e) {
      throw std::runtime_error(path.string() + ": line " + std::to_string(number) + ": " + e.what());
    }
  }
  return out;
}

std::vector<std::pair<std::string, EvalReport>> evaluate_predictions(const std::vector<Prediction>& predictions,
                                                                     const std::vector<Paragraph>& gold,
                                                                     Schema schema) {
  std::map<std::string, const Prediction*> by_id;
  for (const auto& p : predictions) {
    if (!by_id.emplace(p.id, &p).second) throw std::runtime_error("duplicate prediction id: " + p.id);
  }
  std::set<std::string> gold_ids;
  std::vector<std::string> missing;
  for (const auto& g : gold) {
    gold_ids.insert(g.id);
    if (!by_id.contains(g.id)) missing.push_back("prediction for '" + g.id + "'");
  }
  for (const auto& p : predictions) {
    if (!gold_ids.contains(p.id)) missing.push_back("gold record for '" + p.id + "'");
  }
  if (!missing.empty()) {
    std::string msg = "id mismatch; missing:";
    for (const auto& m : missing) msg += " " + m + ";";
    throw std::runtime_error(msg);
  }

  std::vector<EvalItem> titles, selected, lead;
  for (const auto& g : gold) {
    const Prediction& p = *by_id.at(g.id);
    if (p.sentence >= g.sentences.size()) throw std::runtime_error("prediction '" + g.id + "' names a missing sentence");
    const Sentence& s = g.sentences[p.sentence];
    if (p.keep.size() != s.size()) throw std::runtime_error("prediction '" + g.id + "' has a mask of the wrong length");
    EvalItem item;
    item.id = g.id;
    item.candidate = kept_tokens(s, p.keep);
    if (schema == Schema::kCompression) {
      if (!s.keep_labels) throw std::runtime_error("gold record '" + g.id + "' has no keep labels");
      item.pred_mask = p.keep;
      item.gold_mask = *s.keep_labels;
      item.reference = kept_tokens(s, *s.keep_labels);
      titles.push_back(std::move(item));
      continue;
    }
    if (!g.summary) throw std::runtime_error("gold record '" + g.id + "' has no summary");
    item.reference = *g.summary;
    titles.push_back(item);
    selected.push_back({g.id, std::nullopt, std::nullopt, s.surfaces(), *g.summary});
    lead.push_back({g.id, std::nullopt, std::nullopt, g.sentences[lead_sentence(g)].surfaces(), *g.summary});
  }
  if (titles.empty()) throw std::runtime_error("nothing to evaluate");
  std::vector<std::pair<std::string, EvalReport>> out;
  if (schema == Schema::kCompression) {
    out.emplace_back("compression", evaluate(titles));
  } else {
    out.emplace_back("title", evaluate(titles));
    out.emplace_back("selected sentence", evaluate(selected));
    out.emplace_back("LEAD-1", evaluate(lead));
  }
  return out;
}

}  // namespace headliner
