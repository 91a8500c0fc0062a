#include "doctest.h"

#include <zlib.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "headliner/corpus.hpp"

using namespace headliner;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("headliner_corpus_" + name);
}

Paragraph sentence_paragraph(const std::string& id, const std::vector<std::string>& words) {
  Paragraph p;
  p.id = id;
  Sentence s;
  for (const auto& w : words) s.tokens.push_back({.surface = w});
  p.sentences.push_back(s);
  return p;
}

}  // namespace

TEST_CASE("compression record with matching keep labels") {
  const auto p = parse_record(
      R"({"id":"r1","tokens":["a","b","c","d","e"],"pos":["X","X","X","X","X"],"keep":[1,0,1,1,0]})",
      Schema::kCompression, 1);
  REQUIRE(p.sentences.size() == 1);
  REQUIRE(p.sentences[0].keep_labels.has_value());
  CHECK(p.sentences[0].keep_labels->size() == 5);
  CHECK(p.sentences[0].tokens[2].tags[kPos] == "X");
}

TEST_CASE("keep label length mismatch names the record") {
  try {
    parse_record(R"({"id":"bad7","tokens":["a","b","c","d","e"],"keep":[1,0,1,1]})", Schema::kCompression, 3);
    FAIL("expected an error");
  } catch (const CorpusError& e) {
    CHECK(std::string(e.what()).find("bad7") != std::string::npos);
  }
}

TEST_CASE("malformed JSON names the line number") {
  std::istringstream in("{\"id\":\"ok\",\"tokens\":[\"a\"]}\n{not json\n");
  try {
    parse_corpus(in, Schema::kCompression);
    FAIL("expected an error");
  } catch (const CorpusError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("tag arrays must be parallel to tokens") {
  CHECK_THROWS_AS(parse_record(R"({"id":"t","tokens":["a","b"],"ner":["O"]})", Schema::kCompression, 1),
                  CorpusError);
  CHECK_THROWS_AS(parse_record(R"({"id":"t","tokens":["a"],"keep":[2]})", Schema::kCompression, 1), CorpusError);
}

TEST_CASE("empty file yields an empty corpus") {
  const auto path = temp_file("empty.jsonl");
  std::ofstream(path).close();
  CHECK(ingest_corpus(path, Schema::kCompression).empty());
}

TEST_CASE("canonical records round-trip byte for byte") {
  const std::vector<std::string> lines{
      R"({"dep":["nsubj","ROOT"],"id":"a","keep":[1,0],"ner":["O","O"],"pos":["NN","VB"],"shape":["x","x"],"tokens":["Ball","flew"]})",
      R"({"id":"b","tokens":["only"]})",
      R"({"id":"c","keep":[0,0,1],"pos":["DT","NN","."],"tokens":["the","net","."]})"};
  for (const auto& line : lines) {
    CHECK(serialize_record(parse_record(line, Schema::kCompression, 1), Schema::kCompression) == line);
  }
  const std::string summary =
      R"({"id":"p","pos":[["DT","NN"],["VB"]],"sentences":[["The","ball"],["flew"]],"summary":["ball"]})";
  CHECK(serialize_record(parse_record(summary, Schema::kSummary, 1), Schema::kSummary) == summary);

  const auto path = temp_file("round.jsonl");
  {
    std::ofstream out(path);
    for (const auto& l : lines) out << l << "\n";
  }
  const auto corpus = ingest_corpus(path, Schema::kCompression);
  const auto again = temp_file("round2.jsonl");
  write_corpus(again, corpus, Schema::kCompression);
  std::ifstream a(path), b(again);
  CHECK(std::string(std::istreambuf_iterator<char>(a), {}) == std::string(std::istreambuf_iterator<char>(b), {}));
}

TEST_CASE("gzip input is decompressed") {
  const auto path = temp_file("zipped.jsonl.gz");
  gzFile f = gzopen(path.c_str(), "wb");
  REQUIRE(f != nullptr);
  const std::string body = "{\"id\":\"z\",\"tokens\":[\"x\",\"y\"],\"keep\":[1,1]}\n";
  gzwrite(f, body.data(), static_cast<unsigned>(body.size()));
  gzclose(f);
  const auto corpus = ingest_corpus(path, Schema::kCompression);
  REQUIRE(corpus.size() == 1);
  CHECK(corpus[0].id == "z");
  CHECK(corpus[0].sentences[0].surfaces() == std::vector<std::string>{"x", "y"});
}

TEST_CASE("vocabulary keeps the most frequent surfaces with first-seen ties") {
  const std::vector<Paragraph> one{sentence_paragraph("1", {"a", "a", "b"})};
  const auto v = build_vocabulary(one, 10);
  CHECK(v.size() == 4);
  CHECK(v.id("a") == 2);
  CHECK(v.id("b") == 3);
  CHECK(v.token(kPadId) == "<pad>");
  CHECK(v.token(kUnkId) == "<unk>");

  const std::vector<Paragraph> two{sentence_paragraph("2", {"a", "b", "c"})};
  const auto t = build_vocabulary(two, 2);
  CHECK(t.size() == 4);
  CHECK(t.id("a") == 2);
  CHECK(t.id("b") == 3);
  CHECK(t.id("c") == kUnkId);
  CHECK(t.id("A") == 2);

  CHECK(build_vocabulary(two, 2) == t);
}

TEST_CASE("vocabulary ids are a bijection and respect the size cap") {
  std::mt19937_64 rng(5);
  std::vector<Paragraph> corpus;
  for (int i = 0; i < 30; ++i) {
    std::vector<std::string> words;
    for (int k = 0; k < 12; ++k) words.push_back("w" + std::to_string(rng() % 40));
    corpus.push_back(sentence_paragraph(std::to_string(i), words));
  }
  for (std::size_t cap : {1u, 5u, 25u, 100u}) {
    const auto v = build_vocabulary(corpus, cap);
    CHECK(v.size() <= cap + 2);
    for (int id = 2; id < static_cast<int>(v.size()); ++id) CHECK(v.id(v.token(id)) == id);
  }
}

TEST_CASE("unknown tags map to the reserved id") {
  auto corpus = std::vector<Paragraph>{parse_record(R"({"id":"a","tokens":["x","y"],"pos":["NN","VB"]})",
                                                    Schema::kCompression, 1)};
  const auto tags = build_tag_maps(corpus);
  CHECK(tags[kPos].id("NN") != kUnkTagId);
  CHECK(tags[kPos].id("JJ") == kUnkTagId);
  const auto vocab = build_vocabulary(corpus);
  index_corpus(corpus, vocab, tags);
  CHECK(corpus[0].sentences[0].tokens[0].vocab_id == vocab.id("x"));
  CHECK(corpus[0].sentences[0].tokens[1].tag_ids[kPos] == tags[kPos].id("VB"));
}

TEST_CASE("saliency alignment") {
  Paragraph p = sentence_paragraph("p", {"the", "ball", "flew"});
  p.summary = std::vector<std::string>{"ball"};
  CHECK(align_saliency_labels(p) == std::vector<int>{0, 1, 0});

  p.summary = std::vector<std::string>{"goal"};
  CHECK(align_saliency_labels(p) == std::vector<int>{0, 0, 0});

  Paragraph q = sentence_paragraph("q", {"Ball"});
  q.summary = std::vector<std::string>{"ball"};
  CHECK(align_saliency_labels(q) == std::vector<int>{1});

  Paragraph punct = sentence_paragraph("r", {"ball", ",", "net"});
  punct.summary = std::vector<std::string>{",", "net", "the"};
  CHECK(align_saliency_labels(punct) == std::vector<int>{0, 0, 1});

  Paragraph missing = sentence_paragraph("m", {"x"});
  CHECK_THROWS_AS(align_saliency_labels(missing), CorpusError);
}

TEST_CASE("alignment length always equals the word count") {
  const auto p = parse_record(
      R"({"id":"s","sentences":[["A","red","ball"],["It","flew","."]],"summary":["ball","flew"]})",
      Schema::kSummary, 1);
  const auto t = align_saliency_labels(p);
  CHECK(t.size() == p.word_count());
  CHECK(t == std::vector<int>{0, 0, 1, 0, 1, 0});
  CHECK(p.sentence_offset(1) == 3);
}

TEST_CASE("stopword list ships fifty entries") {
  CHECK(stopwords().size() == 50);
  CHECK(stopwords().contains("the"));
  CHECK(is_punctuation("--"));
  CHECK_FALSE(is_punctuation("a."));
}
