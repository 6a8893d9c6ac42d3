#include "xeval/text.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "xeval/error.hpp"
#include "xeval/text_util.hpp"

namespace xeval {

namespace {

bool is_word_byte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

// True if `needle` occurs as a contiguous run inside `hay`.
bool contains_run(const std::vector<std::string>& hay, const std::vector<std::string>& needle) {
  if (needle.empty() || needle.size() > hay.size()) return false;
  return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

}  // namespace

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c != '.' && c != '!' && c != '?') continue;
    if (i + 1 < text.size() && !is_space(text[i + 1])) continue;
    auto sentence = trim(text.substr(start, i + 1 - start));
    if (!sentence.empty()) out.emplace_back(sentence);
    start = i + 1;
  }
  auto rest = trim(text.substr(std::min(start, text.size())));
  if (!rest.empty()) out.emplace_back(rest);
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_word_byte(c)) {
      current.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : ch);
    } else if (!current.empty()) {
      out.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

CorpusIndex CorpusIndex::build(std::vector<std::pair<std::string, std::string>> docs) {
  CorpusIndex idx;
  std::unordered_set<std::string> ids;
  for (auto& [id, text] : docs) {
    if (!ids.insert(id).second) throw DataError("duplicate document id '" + id + "'");
    CorpusDocument doc{id, split_sentences(text), {}};
    for (std::size_t s = 0; s < doc.sentences.size(); ++s) {
      doc.tokens.push_back(tokenize(doc.sentences[s]));
      idx.token_count_ += doc.tokens.back().size();
      const Posting posting{idx.docs_.size(), s};
      for (const std::string& tok : doc.tokens.back()) {
        auto& list = idx.postings_[tok];
        if (list.empty() || list.back() != posting) list.push_back(posting);
      }
    }
    idx.sentence_count_ += doc.sentences.size();
    idx.docs_.push_back(std::move(doc));
  }
  return idx;
}

std::size_t CorpusIndex::posting_count() const {
  std::size_t n = 0;
  for (const auto& [tok, list] : postings_) n += list.size();
  return n;
}

const std::vector<Posting>& CorpusIndex::lookup(std::string_view token) const {
  static const std::vector<Posting> empty;
  auto it = postings_.find(std::string(token));
  return it == postings_.end() ? empty : it->second;
}

CorpusIndex read_corpus(std::istream& in) {
  std::vector<std::pair<std::string, std::string>> docs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
    }
    if (!obj.is_object()) throw ParseError("expected a JSON object", line_no);
    auto id = obj.find("id");
    auto text = obj.find("text");
    if (id == obj.end() || !id->is_string()) throw ParseError("missing string field 'id'", line_no);
    if (text == obj.end() || !text->is_string())
      throw ParseError("missing string field 'text'", line_no);
    docs.emplace_back(id->get<std::string>(), text->get<std::string>());
  }
  return CorpusIndex::build(std::move(docs));
}

CorpusIndex build_index(const std::filesystem::path& corpus_path) {
  std::ifstream in(corpus_path);
  if (!in) throw UsageError("cannot open corpus file " + corpus_path.string());
  try {
    return read_corpus(in);
  } catch (const DataError& e) {
    throw DataError(corpus_path.string() + ": " + e.what());
  }
}

std::vector<TextEvidence> retrieve_evidence(const CorpusIndex& index, std::string_view name_u,
                                            std::string_view name_v, std::size_t top_n) {
  const auto tokens_u = tokenize(name_u);
  const auto tokens_v = tokenize(name_v);
  if (tokens_u.empty() || tokens_v.empty())
    throw UsageError("entity names must contain at least one word character");

  std::set<Posting> candidates;
  for (const Posting& p : index.lookup(tokens_u.front())) candidates.insert(p);
  for (const Posting& p : index.lookup(tokens_v.front())) candidates.insert(p);

  std::vector<TextEvidence> out;
  for (const Posting& p : candidates) {
    const CorpusDocument& doc = index.documents()[p.doc];
    const auto& toks = doc.tokens[p.sentence];
    TextEvidence ev{doc.id, p.sentence, doc.sentences[p.sentence], 0.0, {}};
    const bool has_u = contains_run(toks, tokens_u);
    const bool has_v = contains_run(toks, tokens_v);
    if (has_u) ev.matched.emplace_back(name_u);
    if (has_v) ev.matched.emplace_back(name_v);
    if (has_u && has_v)
      ev.score = 2.0;
    else if (has_u || has_v)
      ev.score = 1.0;
    if (ev.score > 0.0) out.push_back(std::move(ev));
  }
  std::sort(out.begin(), out.end(), [](const TextEvidence& a, const TextEvidence& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.doc_id != b.doc_id) return a.doc_id < b.doc_id;
    return a.sentence_index < b.sentence_index;
  });
  if (out.size() > top_n) out.resize(top_n);
  return out;
}

double text_channel_score(const std::vector<TextEvidence>& evidence) {
  double best = 0.0;
  for (const TextEvidence& ev : evidence) best = std::max(best, ev.score);
  if (best >= 2.0) return 1.0;
  if (best >= 1.0) return 0.5;
  return 0.0;
}

}  // namespace xeval
