#include "doctest.h"

#include <filesystem>

#include "fixtures.hpp"
#include "headliner/pipeline.hpp"
#include "headliner/synthetic.hpp"
#include "json.hpp"

using namespace headliner;
namespace fs = std::filesystem;

namespace {

struct Bundles {
  fs::path dir = fs::temp_directory_path() / "headliner_pipeline_test";
  fs::path selector = dir / "selector.hdln";
  fs::path compressor = dir / "scrf.hdln";
  fs::path ranker = dir / "lm.hdln";

  Bundles() {
    fs::create_directories(dir);
    TrainerConfig t;
    t.lr = 0.01;
    t.max_epochs = 3;
    t.batch_size = 8;

    auto comp = fixture::indexed(synthetic::compression_corpus(150, 31));
    Compressor scrf(fixture::tiny_config(ModelKind::kScrf), comp.vocab, comp.tags);
    train_compressor(scrf, comp.records, {}, t);
    save_bundle(compressor, scrf);

    auto sum = fixture::indexed(synthetic::summary_corpus(80, 32));
    for (auto& paragraph : sum.records) paragraph.saliency_labels = align_saliency_labels(paragraph);
    SaliencyModel sel(fixture::tiny_config(ModelKind::kSelector), sum.vocab, sum.tags);
    train_selector(sel, sum.records, {}, t);
    save_bundle(selector, sel);

    LanguageModel lm(fixture::tiny_config(ModelKind::kLm), comp.vocab);
    train_lm(lm, comp.records, {}, TrainerConfig::language_model());
    save_bundle(ranker, lm);
  }
};

const Bundles& bundles() {
  static const Bundles b;
  return b;
}

PipelineConfig full_config() {
  PipelineConfig c;
  c.selector_path = bundles().selector.string();
  c.compressor_path = bundles().compressor.string();
  c.ranker_path = bundles().ranker.string();
  return c;
}

Paragraph one_sentence(const std::vector<std::string>& words, const std::vector<int>& keep, const std::string& id) {
  Paragraph p;
  p.id = id;
  Sentence s;
  for (const auto& w : words) {
    AnnotatedToken t;
    t.surface = w;
    t.tags = {"X", "dep", "x", "O"};
    s.tokens.push_back(t);
  }
  s.keep_labels = keep;
  p.sentences.push_back(s);
  return p;
}

}  // namespace

TEST_CASE("titles are in-order deletions of the selected sentence, in input order") {
  const TitlePipeline pipeline(full_config());
  const auto paragraphs = synthetic::summary_corpus(40, 77);
  const auto records = pipeline.run(paragraphs);
  REQUIRE(records.size() == paragraphs.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    CHECK(r.id == paragraphs[i].id);
    REQUIRE(r.sentence < paragraphs[i].sentences.size());
    const Sentence& s = paragraphs[i].sentences[r.sentence];
    REQUIRE(r.keep.size() == s.size());
    CHECK(kept_tokens(s, r.keep) == r.tokens);
    CHECK_FALSE(r.tokens.empty());
  }
}

TEST_CASE("lambda 0 with one candidate is the plain viterbi pipeline") {
  PipelineConfig config = full_config();
  config.kbest = 1;
  config.lambda = 0.0;
  const TitlePipeline reranked(config);
  const auto paragraphs = synthetic::summary_corpus(25, 78);
  const auto selector = make_selector(load_bundle(bundles().selector));
  for (const auto& p : paragraphs) {
    const auto r = reranked.title(p);
    Paragraph indexed = p;
    for (auto& s : indexed.sentences) index_sentence(s, selector->vocab(), selector->tags());
    CHECK(r.sentence == select_sentence(indexed, *selector, nullptr));
    Sentence s = p.sentences[r.sentence];
    index_sentence(s, reranked.compressor().vocab(), reranked.compressor().tags());
    CHECK(r.keep == reranked.compressor().decode(s, nullptr));
  }
}

TEST_CASE("a single-word paragraph is its own title") {
  const TitlePipeline pipeline(full_config());
  const auto r = pipeline.title(one_sentence({"Lonely"}, {1}, "w"));
  CHECK(r.title == "Lonely");
  CHECK(r.keep == std::vector<int>{1});
  const auto j = nlohmann::json::parse(title_record_json(r));
  CHECK(j["id"] == "w");
  CHECK(j["sentence"] == 0);
  CHECK(j["title"] == "Lonely");
}

TEST_CASE("a missing bundle fails before any input is read") {
  PipelineConfig config = full_config();
  config.ranker_path = (bundles().dir / "absent.hdln").string();
  CHECK_THROWS(TitlePipeline(config));
  config = full_config();
  config.compressor_path.clear();
  CHECK_THROWS(TitlePipeline(config));
}

TEST_CASE("a compressor fitted to the motivating sentence deletes to its headline") {
  const std::vector<std::string> words{"The", "round", "ball", "flew", "into", "the", "net", "last", "weekend"};
  const std::vector<int> keep{0, 0, 1, 1, 1, 0, 1, 0, 0};
  std::vector<Paragraph> corpus;
  for (int i = 0; i < 8; ++i) corpus.push_back(one_sentence(words, keep, "m" + std::to_string(i)));
  auto data = fixture::indexed(corpus);
  Compressor model(fixture::tiny_config(ModelKind::kScrf), data.vocab, data.tags);
  TrainerConfig t;
  t.lr = 0.05;
  t.max_epochs = 30;
  t.batch_size = 4;
  train_compressor(model, data.records, {}, t);
  const auto path = bundles().dir / "motivating.hdln";
  save_bundle(path, model);

  PipelineConfig config;
  config.compressor_path = path.string();
  const auto r = TitlePipeline(config).title(one_sentence(words, keep, "m"));
  CHECK(lowercase(r.title) == "ball flew into net");
}

TEST_CASE("evaluation matches ids, scores gold against itself perfectly and adds LEAD-1 for summaries") {
  const auto gold = synthetic::compression_corpus(20, 90);
  std::vector<Prediction> perfect;
  for (const auto& p : gold) perfect.push_back({p.id, 0, *p.sentences[0].keep_labels});
  const auto reports = evaluate_predictions(perfect, gold, Schema::kCompression);
  REQUIRE(reports.size() == 1);
  CHECK(reports[0].second.f1.mean == 1.0);
  CHECK(reports[0].second.rouge1.f1 == 1.0);
  const std::string table = reports[0].second.to_table();
  for (const char* column : {"P", "R", "F1", "Length"}) CHECK(table.find(column) != std::string::npos);

  auto partial = perfect;
  partial.erase(partial.begin() + 3);
  partial.push_back({"stray", 0, {1}});
  try {
    evaluate_predictions(partial, gold, Schema::kCompression);
    FAIL("expected an id mismatch");
  } catch (const std::runtime_error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("syn3") != std::string::npos);
    CHECK(msg.find("stray") != std::string::npos);
  }

  const TitlePipeline pipeline(full_config());
  const auto summaries = synthetic::summary_corpus(15, 91);
  std::vector<Prediction> preds;
  for (const auto& r : pipeline.run(summaries)) preds.push_back({r.id, r.sentence, r.keep});
  const auto named = evaluate_predictions(preds, summaries, Schema::kSummary);
  REQUIRE(named.size() == 3);
  CHECK(named[0].first == "title");
  CHECK(named[2].first == "LEAD-1");
  CHECK_FALSE(named[2].second.has_masks);
}
