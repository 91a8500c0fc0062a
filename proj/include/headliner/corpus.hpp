#ifndef HEADLINER_CORPUS_HPP_
#define HEADLINER_CORPUS_HPP_

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace headliner {

class CorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Linguistic annotation channels, in record order.
enum FeatureChannel : std::size_t { kPos = 0, kDep = 1, kShape = 2, kNer = 3 };
inline constexpr std::size_t kNumFeatureChannels = 4;
inline constexpr std::array<const char*, kNumFeatureChannels> kFeatureChannelNames = {
    "pos", "dep", "shape", "ner"};

inline constexpr int kPadId = 0;
inline constexpr int kUnkId = 1;
inline constexpr int kUnkTagId = 0;

struct AnnotatedToken {
  std::string surface;
  std::array<std::string, kNumFeatureChannels> tags;
  int vocab_id = kUnkId;
  std::array<int, kNumFeatureChannels> tag_ids{};
};

struct Sentence {
  std::vector<AnnotatedToken> tokens;
  // 1 = kept in the compression.
  std::optional<std::vector<int>> keep_labels;

  std::size_t size() const { return tokens.size(); }
  std::vector<std::string> surfaces() const;
};

struct Paragraph {
  std::string id;
  std::vector<Sentence> sentences;
  std::optional<std::vector<int>> saliency_labels;
  std::optional<std::vector<std::string>> summary;

  std::size_t word_count() const;
  // Index of the first word of sentence i within the paragraph.
  std::size_t sentence_offset(std::size_t i) const;
  std::vector<AnnotatedToken> words() const;
};

enum class Schema { kCompression, kSummary };

Schema parse_schema(std::string_view name);

// Reads JSON Lines; files ending in .gz are decompressed.
std::vector<Paragraph> ingest_corpus(const std::filesystem::path& path, Schema schema);
std::vector<Paragraph> parse_corpus(std::istream& in, Schema schema);
Paragraph parse_record(std::string_view line, Schema schema, std::size_t line_number);

// Compact JSON with sorted keys. Parsing then serializing a record in this
// form reproduces it byte for byte.
std::string serialize_record(const Paragraph& paragraph, Schema schema);
void write_corpus(const std::filesystem::path& path, const std::vector<Paragraph>& corpus,
                  Schema schema);

std::string lowercase(std::string_view s);

class Vocabulary {
 public:
  static constexpr std::size_t kDefaultMaxSize = 50000;

  Vocabulary();
  // Takes stored tokens in id order, starting at id 2.
  explicit Vocabulary(const std::vector<std::string>& tokens);

  int id(std::string_view surface) const;
  const std::string& token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const { return tokens_.size(); }
  // Tokens with ids 2..size-1.
  std::vector<std::string> stored_tokens() const;

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.tokens_ == b.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::map<std::string, int, std::less<>> ids_;
};

// Keeps the max_size most frequent lowercased surfaces; ties go to the
// surface seen first.
Vocabulary build_vocabulary(const std::vector<Paragraph>& corpus,
                            std::size_t max_size = Vocabulary::kDefaultMaxSize);

// Per-channel tag inventory. Id 0 is the unknown tag.
class TagMap {
 public:
  TagMap() = default;
  explicit TagMap(const std::vector<std::string>& tags);
  int id(std::string_view tag) const;
  std::size_t size() const { return tags_.size() + 1; }
  const std::vector<std::string>& tags() const { return tags_; }
  void add(const std::string& tag);

  friend bool operator==(const TagMap& a, const TagMap& b) { return a.tags_ == b.tags_; }

 private:
  std::vector<std::string> tags_;
  std::map<std::string, int, std::less<>> ids_;
};

using TagMaps = std::array<TagMap, kNumFeatureChannels>;

TagMaps build_tag_maps(const std::vector<Paragraph>& corpus);

// Fills vocab_id and tag_ids for every token.
void index_corpus(std::vector<Paragraph>& corpus, const Vocabulary& vocab, const TagMaps& tags);
void index_sentence(Sentence& sentence, const Vocabulary& vocab, const TagMaps& tags);

const std::unordered_set<std::string>& stopwords();
bool is_punctuation(std::string_view token);

// t_i = 1 iff the lowercased word occurs in the summary and is neither a
// stopword nor pure punctuation.
std::vector<int> align_saliency_labels(const Paragraph& paragraph);

}  // namespace headliner

#endif  // HEADLINER_CORPUS_HPP_
