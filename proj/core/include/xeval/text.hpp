#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace xeval {

struct Posting {
  std::size_t doc = 0;
  std::size_t sentence = 0;

  friend auto operator<=>(const Posting&, const Posting&) = default;
};

struct CorpusDocument {
  std::string id;
  std::vector<std::string> sentences;
  std::vector<std::vector<std::string>> tokens;  // per sentence
};

// Sentence-level inverted index over a small local corpus.
class CorpusIndex {
 public:
  CorpusIndex() = default;

  // Documents are indexed in the given order. Text is split into sentences
  // at '.', '!' or '?' followed by whitespace or end of text.
  static CorpusIndex build(std::vector<std::pair<std::string, std::string>> docs);

  const std::vector<CorpusDocument>& documents() const noexcept { return docs_; }
  const std::map<std::string, std::vector<Posting>>& postings() const noexcept { return postings_; }
  std::size_t posting_count() const;
  std::size_t sentence_count() const noexcept { return sentence_count_; }
  std::size_t token_count() const noexcept { return token_count_; }

  const std::vector<Posting>& lookup(std::string_view token) const;

 private:
  std::vector<CorpusDocument> docs_;
  std::map<std::string, std::vector<Posting>> postings_;
  std::size_t sentence_count_ = 0;
  std::size_t token_count_ = 0;
};

std::vector<std::string> split_sentences(std::string_view text);

// Lowercased maximal runs of ASCII alphanumerics; bytes >= 0x80 count as
// word characters so UTF-8 names stay whole.
std::vector<std::string> tokenize(std::string_view text);

// JSONL with one {"id": string, "text": string} object per line; blank
// lines are skipped. Errors report the 1-based line number.
CorpusIndex read_corpus(std::istream& in);
CorpusIndex build_index(const std::filesystem::path& corpus_path);

struct TextEvidence {
  std::string doc_id;
  std::size_t sentence_index = 0;
  std::string sentence;
  double score = 0.0;
  std::vector<std::string> matched;  // names found in the sentence

  friend bool operator==(const TextEvidence&, const TextEvidence&) = default;
};

// Scores each sentence 2 if both names occur as contiguous token runs, 1 if
// exactly one does. Ordered by score descending, then doc id, then sentence.
std::vector<TextEvidence> retrieve_evidence(const CorpusIndex& index, std::string_view name_u,
                                            std::string_view name_v, std::size_t top_n);

// 1.0 if any item matches both names, 0.5 if the best matches one, else 0.
double text_channel_score(const std::vector<TextEvidence>& evidence);

}  // namespace xeval
