#include "headliner/corpus.hpp"

#include <zlib.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <memory>
#include <sstream>
#include <unordered_map>

#include "json.hpp"

namespace headliner {

using nlohmann::json;

std::vector<std::string> Sentence::surfaces() const {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(t.surface);
  return out;
}

std::size_t Paragraph::word_count() const {
  std::size_t n = 0;
  for (const auto& s : sentences) n += s.size();
  return n;
}

std::size_t Paragraph::sentence_offset(std::size_t i) const {
  std::size_t n = 0;
  for (std::size_t k = 0; k < i; ++k) n += sentences.at(k).size();
  return n;
}

std::vector<AnnotatedToken> Paragraph::words() const {
  std::vector<AnnotatedToken> out;
  out.reserve(word_count());
  for (const auto& s : sentences) out.insert(out.end(), s.tokens.begin(), s.tokens.end());
  return out;
}

Schema parse_schema(std::string_view name) {
  if (name == "compression") return Schema::kCompression;
  if (name == "summary") return Schema::kSummary;
  throw CorpusError("unknown schema: " + std::string(name));
}

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

namespace {

std::string record_label(const json& j, std::size_t line_number) {
  if (j.is_object() && j.contains("id") && j["id"].is_string()) {
    return "record '" + j["id"].get<std::string>() + "'";
  }
  return "line " + std::to_string(line_number);
}

std::vector<std::string> string_list(const json& j, const char* key, const std::string& where) {
  if (!j.is_array()) throw CorpusError(where + ": field '" + key + "' must be an array of strings");
  std::vector<std::string> out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_string()) throw CorpusError(where + ": field '" + key + "' must contain strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

std::vector<int> binary_list(const json& j, const char* key, const std::string& where) {
  if (!j.is_array()) throw CorpusError(where + ": field '" + key + "' must be an array of 0/1");
  std::vector<int> out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number_integer() || (v.get<int>() != 0 && v.get<int>() != 1)) {
      throw CorpusError(where + ": field '" + key + "' must contain only 0 or 1");
    }
    out.push_back(v.get<int>());
  }
  return out;
}

Sentence make_sentence(const std::vector<std::string>& tokens,
                       const std::array<std::optional<std::vector<std::string>>, kNumFeatureChannels>& tags,
                       const std::string& where) {
  if (tokens.empty()) throw CorpusError(where + ": sentence has no tokens");
  Sentence s;
  s.tokens.resize(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].empty()) throw CorpusError(where + ": empty token surface");
    s.tokens[i].surface = tokens[i];
  }
  for (std::size_t c = 0; c < kNumFeatureChannels; ++c) {
    if (!tags[c]) continue;
    if (tags[c]->size() != tokens.size()) {
      throw CorpusError(where + ": '" + kFeatureChannelNames[c] + "' length " +
                        std::to_string(tags[c]->size()) + " does not match " +
                        std::to_string(tokens.size()) + " tokens");
    }
    for (std::size_t i = 0; i < tokens.size(); ++i) s.tokens[i].tags[c] = (*tags[c])[i];
  }
  return s;
}

Paragraph parse_compression(const json& j, const std::string& where) {
  Paragraph p;
  p.id = j["id"].get<std::string>();
  if (!j.contains("tokens")) throw CorpusError(where + ": missing 'tokens'");
  const auto tokens = string_list(j["tokens"], "tokens", where);
  std::array<std::optional<std::vector<std::string>>, kNumFeatureChannels> tags;
  for (std::size_t c = 0; c < kNumFeatureChannels; ++c) {
    if (j.contains(kFeatureChannelNames[c])) {
      tags[c] = string_list(j[kFeatureChannelNames[c]], kFeatureChannelNames[c], where);
    }
  }
  Sentence s = make_sentence(tokens, tags, where);
  if (j.contains("keep")) {
    auto keep = binary_list(j["keep"], "keep", where);
    if (keep.size() != tokens.size()) {
      throw CorpusError(where + ": keep labels length " + std::to_string(keep.size()) +
                        " does not match " + std::to_string(tokens.size()) + " tokens");
    }
    s.keep_labels = std::move(keep);
  }
  p.sentences.push_back(std::move(s));
  return p;
}

Paragraph parse_summary(const json& j, const std::string& where) {
  Paragraph p;
  p.id = j["id"].get<std::string>();
  if (!j.contains("sentences") || !j["sentences"].is_array()) {
    throw CorpusError(where + ": missing 'sentences'");
  }
  const json& sents = j["sentences"];
  for (std::size_t c = 0; c < kNumFeatureChannels; ++c) {
    const char* key = kFeatureChannelNames[c];
    if (j.contains(key) && (!j[key].is_array() || j[key].size() != sents.size())) {
      throw CorpusError(where + ": '" + key + "' must have one list per sentence");
    }
  }
  for (std::size_t k = 0; k < sents.size(); ++k) {
    const auto tokens = string_list(sents[k], "sentences", where);
    std::array<std::optional<std::vector<std::string>>, kNumFeatureChannels> tags;
    for (std::size_t c = 0; c < kNumFeatureChannels; ++c) {
      const char* key = kFeatureChannelNames[c];
      if (j.contains(key)) tags[c] = string_list(j[key][k], key, where);
    }
    p.sentences.push_back(make_sentence(tokens, tags, where));
  }
  if (j.contains("summary")) p.summary = string_list(j["summary"], "summary", where);
  return p;
}

bool channel_present(const std::vector<Sentence>& sentences, std::size_t c) {
  for (const auto& s : sentences) {
    for (const auto& t : s.tokens) {
      if (!t.tags[c].empty()) return true;
    }
  }
  return false;
}

bool is_blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(),
                     [](unsigned char ch) { return std::isspace(ch) != 0; });
}

}  // namespace

Paragraph parse_record(std::string_view line, Schema schema, std::size_t line_number) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw CorpusError("line " + std::to_string(line_number) + ": malformed JSON: " + e.what());
  }
  const std::string where = record_label(j, line_number);
  if (!j.is_object() || !j.contains("id") || !j["id"].is_string()) {
    throw CorpusError("line " + std::to_string(line_number) + ": record lacks a string 'id'");
  }
  return schema == Schema::kCompression ? parse_compression(j, where) : parse_summary(j, where);
}

std::vector<Paragraph> parse_corpus(std::istream& in, Schema schema) {
  std::vector<Paragraph> out;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (is_blank(line)) continue;
    out.push_back(parse_record(line, schema, line_number));
  }
  return out;
}

std::vector<Paragraph> ingest_corpus(const std::filesystem::path& path, Schema schema) {
  if (!std::filesystem::exists(path)) throw CorpusError("corpus not found: " + path.string());
  if (path.extension() != ".gz") {
    std::ifstream in(path);
    if (!in) throw CorpusError("cannot open corpus: " + path.string());
    return parse_corpus(in, schema);
  }
  std::unique_ptr<gzFile_s, int (*)(gzFile)> file(gzopen(path.c_str(), "rb"), gzclose);
  if (!file) throw CorpusError("cannot open corpus: " + path.string());
  std::string text;
  char buffer[1 << 16];
  int got = 0;
  while ((got = gzread(file.get(), buffer, sizeof(buffer))) > 0) {
    text.append(buffer, static_cast<std::size_t>(got));
  }
  if (got < 0) throw CorpusError("corrupt gzip stream: " + path.string());
  std::istringstream in(text);
  return parse_corpus(in, schema);
}

std::string serialize_record(const Paragraph& paragraph, Schema schema) {
  json j;
  j["id"] = paragraph.id;
  if (schema == Schema::kCompression) {
    if (paragraph.sentences.size() != 1) {
      throw CorpusError("record '" + paragraph.id + "': compression schema needs one sentence");
    }
    const Sentence& s = paragraph.sentences.front();
    j["tokens"] = s.surfaces();
    for (std::size_t c = 0; c < kNumFeatureChannels; ++c) {
      if (!channel_present(paragraph.sentences, c)) continue;
      std::vector<std::string> tags;
      for (const auto& t : s.tokens) tags.push_back(t.tags[c]);
      j[kFeatureChannelNames[c]] = tags;
    }
    if (s.keep_labels) j["keep"] = *s.keep_labels;
  } else {
    json sents = json::array();
    for (const auto& s : paragraph.sentences) sents.push_back(s.surfaces());
    j["sentences"] = sents;
    for (std::size_t c = 0; c < kNumFeatureChannels; ++c) {
      if (!channel_present(paragraph.sentences, c)) continue;
      json lists = json::array();
      for (const auto& s : paragraph.sentences) {
        std::vector<std::string> tags;
        for (const auto& t : s.tokens) tags.push_back(t.tags[c]);
        lists.push_back(tags);
      }
      j[kFeatureChannelNames[c]] = lists;
    }
    if (paragraph.summary) j["summary"] = *paragraph.summary;
  }
  return j.dump();
}

void write_corpus(const std::filesystem::path& path, const std::vector<Paragraph>& corpus,
                  Schema schema) {
  std::ofstream out(path);
  if (!out) throw CorpusError("cannot write corpus: " + path.string());
  for (const auto& p : corpus) out << serialize_record(p, schema) << '\n';
}

Vocabulary::Vocabulary() : tokens_{"<pad>", "<unk>"} {}

Vocabulary::Vocabulary(const std::vector<std::string>& tokens) : Vocabulary() {
  for (const auto& t : tokens) {
    if (ids_.contains(t)) throw CorpusError("duplicate vocabulary entry: " + t);
    ids_.emplace(t, static_cast<int>(tokens_.size()));
    tokens_.push_back(t);
  }
}

int Vocabulary::id(std::string_view surface) const {
  auto it = ids_.find(lowercase(surface));
  return it == ids_.end() ? kUnkId : it->second;
}

std::vector<std::string> Vocabulary::stored_tokens() const {
  return {tokens_.begin() + 2, tokens_.end()};
}

Vocabulary build_vocabulary(const std::vector<Paragraph>& corpus, std::size_t max_size) {
  struct Entry {
    std::size_t count = 0;
    std::size_t first_seen = 0;
  };
  std::unordered_map<std::string, Entry> counts;
  std::vector<std::string> order;
  for (const auto& p : corpus) {
    for (const auto& s : p.sentences) {
      for (const auto& t : s.tokens) {
        auto key = lowercase(t.surface);
        auto [it, inserted] = counts.try_emplace(key, Entry{0, order.size()});
        if (inserted) order.push_back(key);
        ++it->second.count;
      }
    }
  }
  std::stable_sort(order.begin(), order.end(), [&](const std::string& a, const std::string& b) {
    return counts[a].count > counts[b].count;
  });
  if (order.size() > max_size) order.resize(max_size);
  return Vocabulary(order);
}

TagMap::TagMap(const std::vector<std::string>& tags) {
  for (const auto& t : tags) add(t);
}

void TagMap::add(const std::string& tag) {
  if (ids_.contains(tag)) return;
  tags_.push_back(tag);
  ids_.emplace(tag, static_cast<int>(tags_.size()));
}

int TagMap::id(std::string_view tag) const {
  auto it = ids_.find(tag);
  return it == ids_.end() ? kUnkTagId : it->second;
}

TagMaps build_tag_maps(const std::vector<Paragraph>& corpus) {
  TagMaps maps;
  for (const auto& p : corpus) {
    for (const auto& s : p.sentences) {
      for (const auto& t : s.tokens) {
        for (std::size_t c = 0; c < kNumFeatureChannels; ++c) {
          if (!t.tags[c].empty()) maps[c].add(t.tags[c]);
        }
      }
    }
  }
  return maps;
}

void index_sentence(Sentence& sentence, const Vocabulary& vocab, const TagMaps& tags) {
  for (auto& t : sentence.tokens) {
    t.vocab_id = vocab.id(t.surface);
    for (std::size_t c = 0; c < kNumFeatureChannels; ++c) t.tag_ids[c] = tags[c].id(t.tags[c]);
  }
}

void index_corpus(std::vector<Paragraph>& corpus, const Vocabulary& vocab, const TagMaps& tags) {
  for (auto& p : corpus) {
    for (auto& s : p.sentences) index_sentence(s, vocab, tags);
  }
}

bool is_punctuation(std::string_view token) {
  return !token.empty() && std::all_of(token.begin(), token.end(), [](unsigned char c) {
    return std::ispunct(c) != 0;
  });
}

std::vector<int> align_saliency_labels(const Paragraph& paragraph) {
  if (!paragraph.summary) {
    throw CorpusError("record '" + paragraph.id + "': saliency alignment needs a summary");
  }
  std::unordered_set<std::string> summary;
  for (const auto& w : *paragraph.summary) summary.insert(lowercase(w));
  const auto& excluded = stopwords();
  std::vector<int> labels;
  labels.reserve(paragraph.word_count());
  for (const auto& s : paragraph.sentences) {
    for (const auto& t : s.tokens) {
      const auto w = lowercase(t.surface);
      const bool salient = summary.contains(w) && !excluded.contains(w) && !is_punctuation(w);
      labels.push_back(salient ? 1 : 0);
    }
  }
  return labels;
}

}  // namespace headliner
