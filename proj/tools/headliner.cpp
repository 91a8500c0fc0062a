// headliner: train, compress, title, eval and gen-synthetic.
#include <omp.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "headliner/bundle.hpp"
#include "headliner/pipeline.hpp"
#include "headliner/synthetic.hpp"
#include "headliner/training.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace headliner;

namespace {

struct GlobalOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  int threads = 0;
  std::optional<double> lambda;
  std::optional<double> alpha;
  std::optional<std::size_t> kbest;
  std::optional<int> max_seg_len;
  std::optional<std::string> encoder;
};

json read_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  try {
    json j = json::parse(in);
    if (!j.is_object()) throw std::runtime_error("config must be a JSON object: " + path);
    return j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error("bad config " + path + ": " + e.what());
  }
}

template <typename T>
void take(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

TrainerConfig trainer_config(ModelKind kind, const json& j) {
  TrainerConfig c = kind == ModelKind::kLm ? TrainerConfig::language_model() : TrainerConfig{};
  if (!j.is_object()) return c;
  if (j.contains("optimizer")) c.optimizer = parse_optimizer(j.at("optimizer").get<std::string>());
  take(j, "lr", c.lr);
  take(j, "l2", c.l2);
  take(j, "max_epochs", c.max_epochs);
  take(j, "patience_stop", c.patience_stop);
  take(j, "patience_halve", c.patience_halve);
  take(j, "dropout", c.dropout);
  take(j, "batch_size", c.batch_size);
  take(j, "seed", c.seed);
  return c;
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
  if (path.empty() || path == "-") {
    for (const auto& l : lines) std::cout << l << '\n';
    return;
  }
  const fs::path tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (const auto& l : lines) out << l << '\n';
    if (!out) throw std::runtime_error("cannot write " + path);
  }
  fs::rename(tmp, path);
}

std::unique_ptr<ContextualVectors> load_contextual(const std::string& path) {
  if (path.empty()) return nullptr;
  return std::make_unique<ContextualVectors>(ContextualVectors::load(path));
}

// ---------------------------------------------------------------- train

struct TrainOptions {
  std::string kind;
  std::string corpus;
  std::string dev;
  std::string out;
  std::string log;
  std::string schema;
  std::optional<int> epochs;
};

int cmd_train(const GlobalOptions& g, const TrainOptions& o) {
  const json config = read_config(g.config_path);
  ModelConfig model;
  if (config.contains("model")) model.merge_json(config.at("model").dump());
  model.kind = parse_model_kind(o.kind);
  TrainerConfig trainer = trainer_config(model.kind, config.value("trainer", json::object()));
  if (g.seed) {
    model.seed = *g.seed;
    trainer.seed = *g.seed;
  }
  if (g.max_seg_len) model.max_segment_length = *g.max_seg_len;
  if (g.encoder) model.encoder.kind = parse_encoder_kind(*g.encoder);
  if (o.epochs) trainer.max_epochs = *o.epochs;
  trainer.threads = g.threads > 0 ? g.threads : omp_get_max_threads();
  trainer.log_path = o.log.empty() ? o.out + ".log.csv" : o.log;
  model.encoder.dropout = trainer.dropout;

  Schema schema = model.kind == ModelKind::kSelector ? Schema::kSummary : Schema::kCompression;
  if (!o.schema.empty()) schema = parse_schema(o.schema);
  if (model.kind == ModelKind::kSelector && schema != Schema::kSummary) {
    throw std::runtime_error("the selector trains on the summary schema");
  }
  if (is_compressor(model.kind) && schema != Schema::kCompression) {
    throw std::runtime_error("compressors train on the compression schema");
  }

  std::vector<Paragraph> train = ingest_corpus(o.corpus, schema);
  std::vector<Paragraph> dev;
  if (o.dev.empty()) {
    std::tie(train, dev) = split_every(train, 10);
  } else {
    dev = ingest_corpus(o.dev, schema);
  }
  if (model.kind == ModelKind::kSelector) {
    for (auto* corpus : {&train, &dev}) {
      for (auto& p : *corpus) {
        if (!p.saliency_labels) p.saliency_labels = align_saliency_labels(p);
      }
    }
  }
  spdlog::info("training {} on {} records ({} dev)", o.kind, train.size(), dev.size());

  Vocabulary vocab;
  TagMaps tags;
  prepare_corpus(train, vocab, tags);
  index_corpus(dev, vocab, tags);
  const auto contextual = load_contextual(model.embedding.contextual_path);

  switch (model.kind) {
    case ModelKind::kSelector: {
      SaliencyModel m(model, vocab, tags);
      m.token_encoder().embedder().load_pretrained(vocab);
      train_selector(m, train, dev, trainer, contextual.get());
      save_bundle(o.out, m);
      std::cout << "dev word-saliency AUC: " << evaluate_selector(m, dev, contextual.get(), trainer.threads) << '\n';
      break;
    }
    case ModelKind::kLm: {
      LanguageModel m(model, vocab);
      const auto fit = train_lm(m, train, dev, trainer);
      save_bundle(o.out, m);
      std::cout << "dev perplexity: " << fit.dev_perplexity.at(static_cast<std::size_t>(fit.fit.best_epoch - 1))
                << '\n';
      break;
    }
    default: {
      Compressor m(model, vocab, tags);
      m.token_encoder().embedder().load_pretrained(vocab);
      train_compressor(m, train, dev, trainer, contextual.get());
      save_bundle(o.out, m);
      std::cout << evaluate_compressor(m, dev, contextual.get(), trainer.threads).to_table("dev");
      break;
    }
  }
  return 0;
}

// ---------------------------------------------------------------- title / compress

struct PipelineOptions {
  std::string input;
  std::string out;
  std::string selector;
  std::string compressor;
  std::string ranker;
  std::string contextual;
  std::string schema;
};

PipelineConfig pipeline_config(const GlobalOptions& g, const PipelineOptions& o) {
  const json j = read_config(g.config_path);
  PipelineConfig c;
  take(j, "selector", c.selector_path);
  take(j, "compressor", c.compressor_path);
  take(j, "ranker", c.ranker_path);
  take(j, "contextual", c.contextual_path);
  take(j, "kbest", c.kbest);
  take(j, "lambda", c.lambda);
  take(j, "alpha", c.alpha);
  if (!o.selector.empty()) c.selector_path = o.selector;
  if (!o.compressor.empty()) c.compressor_path = o.compressor;
  if (!o.ranker.empty()) c.ranker_path = o.ranker;
  if (!o.contextual.empty()) c.contextual_path = o.contextual;
  if (g.kbest) c.kbest = *g.kbest;
  if (g.lambda) c.lambda = *g.lambda;
  if (g.alpha) c.alpha = *g.alpha;
  c.threads = g.threads;
  for (const auto* path : {&c.selector_path, &c.compressor_path, &c.ranker_path, &c.contextual_path}) {
    if (!path->empty() && !fs::exists(*path)) throw std::runtime_error("missing file: " + *path);
  }
  return c;
}

int run_pipeline(const GlobalOptions& g, const PipelineOptions& o, Schema default_schema, bool select) {
  if (g.max_seg_len || g.encoder) {
    spdlog::warn("--max-seg-len and --encoder apply at training time; the bundle settings are used");
  }
  PipelineConfig config = pipeline_config(g, o);
  if (!select) config.selector_path.clear();
  const TitlePipeline pipeline(config);  // loads every bundle before reading input
  const Schema schema = o.schema.empty() ? default_schema : parse_schema(o.schema);
  const auto paragraphs = ingest_corpus(o.input, schema);
  const auto records = pipeline.run(paragraphs);
  std::vector<std::string> lines;
  lines.reserve(records.size());
  for (const auto& r : records) lines.push_back(title_record_json(r));
  write_lines(o.out, lines);
  spdlog::info("wrote {} records", records.size());
  return 0;
}

// ---------------------------------------------------------------- eval

struct EvalOptions {
  std::string pred;
  std::string gold;
  std::string schema = "compression";
  std::string json_out;
};

int cmd_eval(const EvalOptions& o) {
  const Schema schema = parse_schema(o.schema);
  const auto reports = evaluate_predictions(read_predictions(o.pred), ingest_corpus(o.gold, schema), schema);
  json all = json::object();
  for (const auto& [name, report] : reports) {
    std::cout << report.to_table(name) << '\n';
    all[name] = json::parse(report.to_json());
  }
  if (!o.json_out.empty()) write_lines(o.json_out, {all.dump()});
  return 0;
}

// ---------------------------------------------------------------- gen-synthetic

struct SyntheticOptions {
  std::string kind = "compression";
  std::size_t count = 2000;
  std::string out;
};

int cmd_gen_synthetic(const GlobalOptions& g, const SyntheticOptions& o) {
  const std::uint64_t seed = g.seed.value_or(1);
  if (o.kind == "compression") {
    write_corpus(o.out, synthetic::compression_corpus(o.count, seed), Schema::kCompression);
  } else if (o.kind == "summary") {
    write_corpus(o.out, synthetic::summary_corpus(o.count, seed), Schema::kSummary);
  } else {
    write_corpus(o.out, synthetic::cyclic_lm_corpus(o.count, seed), Schema::kCompression);
  }
  return 0;
}

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("headliner");
  spdlog::set_default_logger(logger);
  const char* env = std::getenv("HEADLINER_LOG");
  const std::string level = env == nullptr ? "info" : env;
  if (level == "error") {
    spdlog::set_level(spdlog::level::err);
  } else if (level == "debug") {
    spdlog::set_level(spdlog::level::debug);
  } else {
    if (level != "info") spdlog::warn("HEADLINER_LOG must be error, info or debug; using info");
    spdlog::set_level(spdlog::level::info);
  }
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();

  CLI::App app{"Section titles by sentence selection and deletion-based compression"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--config", g.config_path, "JSON configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "random seed");
  app.add_option("--threads", g.threads, "worker threads (0: all cores)")->check(CLI::NonNegativeNumber);
  app.add_option("--lambda", g.lambda, "weight of the language-model score");
  app.add_option("--alpha", g.alpha, "length-penalty exponent")->check(CLI::NonNegativeNumber);
  app.add_option("--kbest", g.kbest, "candidates per sentence")->check(CLI::PositiveNumber);
  app.add_option("--max-seg-len", g.max_seg_len, "longest segment (semi-CRF)")->check(CLI::PositiveNumber);
  app.add_option("--encoder", g.encoder, "token encoder")->check(CLI::IsMember({"recurrent", "window"}));

  TrainOptions train;
  auto* train_cmd = app.add_subcommand("train", "train a model and write a bundle");
  train_cmd->add_option("--kind", train.kind, "model kind")
      ->required()
      ->check(CLI::IsMember({"selector", "naive", "crf", "scrf", "lm"}));
  train_cmd->add_option("--corpus", train.corpus, "training corpus (JSON Lines, optionally .gz)")
      ->required()
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--dev", train.dev, "dev corpus (default: every 10th training record)")
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--out", train.out, "bundle path")->required();
  train_cmd->add_option("--log", train.log, "CSV training log (default: <out>.log.csv)");
  train_cmd->add_option("--schema", train.schema, "corpus schema")
      ->check(CLI::IsMember({"compression", "summary"}));
  train_cmd->add_option("--epochs", train.epochs, "maximum epochs")->check(CLI::PositiveNumber);

  PipelineOptions title;
  auto* title_cmd = app.add_subcommand("title", "select and compress one sentence per paragraph");
  title_cmd->add_option("--input", title.input, "paragraphs (summary schema)")->required()->check(CLI::ExistingFile);
  title_cmd->add_option("--out", title.out, "JSON Lines output (default: stdout)");
  title_cmd->add_option("--selector", title.selector, "selector bundle (default: first sentence)");
  title_cmd->add_option("--compressor", title.compressor, "compressor bundle");
  title_cmd->add_option("--ranker", title.ranker, "language-model bundle");
  title_cmd->add_option("--contextual", title.contextual, "contextual vector file");
  title_cmd->add_option("--schema", title.schema, "input schema")->check(CLI::IsMember({"compression", "summary"}));

  PipelineOptions compress;
  auto* compress_cmd = app.add_subcommand("compress", "compress every sentence record");
  compress_cmd->add_option("--input", compress.input, "sentences (compression schema)")
      ->required()
      ->check(CLI::ExistingFile);
  compress_cmd->add_option("--out", compress.out, "JSON Lines output (default: stdout)");
  compress_cmd->add_option("--compressor", compress.compressor, "compressor bundle");
  compress_cmd->add_option("--ranker", compress.ranker, "language-model bundle");
  compress_cmd->add_option("--contextual", compress.contextual, "contextual vector file");

  EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "score predictions against a gold corpus");
  eval_cmd->add_option("--pred", eval.pred, "predictions from compress or title")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--gold", eval.gold, "gold corpus")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--schema", eval.schema, "gold schema")->check(CLI::IsMember({"compression", "summary"}));
  eval_cmd->add_option("--json", eval.json_out, "also write the report as JSON");

  SyntheticOptions syn;
  auto* syn_cmd = app.add_subcommand("gen-synthetic", "write a rule-based corpus");
  syn_cmd->add_option("--kind", syn.kind, "corpus kind")->check(CLI::IsMember({"compression", "summary", "lm"}));
  syn_cmd->add_option("--count", syn.count, "records")->check(CLI::PositiveNumber);
  syn_cmd->add_option("--out", syn.out, "output path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (g.threads > 0) omp_set_num_threads(g.threads);
    if (*train_cmd) return cmd_train(g, train);
    if (*title_cmd) return run_pipeline(g, title, Schema::kSummary, true);
    if (*compress_cmd) return run_pipeline(g, compress, Schema::kCompression, false);
    if (*eval_cmd) return cmd_eval(eval);
    if (*syn_cmd) return cmd_gen_synthetic(g, syn);
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 2;
}
