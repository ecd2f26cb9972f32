#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "halueval/text.hpp"

namespace halueval {

struct Triplet {
  std::string subject;
  std::string relation;
  std::string object;

  bool operator==(const Triplet&) const = default;
};

struct KnowledgeItem {
  std::string snippet;
  std::vector<Triplet> triplets;
  std::string doc_id;
  CharRange span;  // into the source text the document was cut from
  double score = 0.0;
};

struct Document {
  std::string id;
  std::string text;
  /// Offset of `text` within its source, for pseudo-documents cut from a
  /// larger text.
  std::size_t source_offset = 0;
};

/// The built-in verb lexicon used to split sentences into triplets.
const std::vector<std::string>& default_verb_lexicon();

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

enum class SnippetMode {
  SentenceWindow,  // best-matching sentence plus neighbours
  WholeDocument,   // the matched document itself (sentence-window corpora)
};

struct RetrieverConfig {
  std::size_t k = 3;
  Bm25Params bm25;
  std::size_t window_sentences = 3;
  SnippetMode snippet_mode = SnippetMode::SentenceWindow;
  std::vector<std::string> abbreviations = text::default_abbreviations();
  std::vector<std::string> verb_lexicon = default_verb_lexicon();
};

/// In-memory inverted index over lowercased alphanumeric tokens.
class LexicalIndex {
 public:
  struct Posting {
    std::uint32_t doc;
    std::uint32_t tf;
  };

  std::size_t size() const noexcept { return docs_.size(); }
  const Document& document(std::size_t i) const { return docs_[i]; }
  std::size_t document_length(std::size_t i) const { return lengths_[i]; }
  double average_length() const noexcept { return avgdl_; }
  std::size_t document_frequency(const std::string& term) const;
  std::size_t term_frequency(std::size_t doc, const std::string& term) const;
  const std::unordered_map<std::string, std::vector<Posting>>& postings() const noexcept {
    return postings_;
  }

  /// BM25 score of every document with a positive score, unordered.
  std::vector<std::pair<std::size_t, double>> score(const std::vector<std::string>& query_terms,
                                                    const Bm25Params& params) const;

 private:
  friend LexicalIndex build_index(std::vector<Document> documents);

  std::vector<Document> docs_;
  std::vector<std::size_t> lengths_;
  std::unordered_map<std::string, std::vector<Posting>> postings_;
  double avgdl_ = 0.0;
};

/// Throws Error with EmptyCorpus, EmptyDocument(doc_id) or DuplicateDocId.
LexicalIndex build_index(std::vector<Document> documents);

/// Non-negative BM25 inverse document frequency,
/// ln(1 + (N - df + 0.5) / (df + 0.5)).
double bm25_idf(std::size_t n_docs, std::size_t df) noexcept;

/// Top-k documents by BM25, descending score, ties by ascending doc_id. Only
/// documents with a positive score are returned. Query terms are deduplicated.
std::vector<KnowledgeItem> retrieve(const LexicalIndex& index, std::string_view query,
                                    const RetrieverConfig& config);

/// Overlapping windows of `window` consecutive sentences, stride 1. Texts with
/// fewer sentences than `window` yield one document. Ids are
/// "<prefix>#<zero-padded start sentence>".
std::vector<Document> sentence_windows(std::string_view source, std::string_view prefix,
                                       std::size_t window,
                                       const std::vector<std::string>& abbreviations);

/// Per sentence: subject = words before the first lexicon verb, relation =
/// the verb group, object = the rest without trailing punctuation. A verb
/// group is the verb plus an optional following preposition; "was"/"were"
/// additionally absorb a following past participle. Sentences without a verb,
/// subject or object yield nothing.
std::vector<Triplet> extract_triplets(std::string_view snippet,
                                      const std::vector<std::string>& lexicon);
std::vector<Triplet> extract_triplets(std::string_view snippet);

/// "subject relation object."
std::string render_triplet(const Triplet& t);

/// Longest prefix of whole sentences within `max_tokens` whitespace words;
/// when the first sentence alone is too long, its first `max_tokens` words.
/// Throws Error(InvalidArgument) when max_tokens is 0.
std::string condense_snippet(std::string_view snippet, std::size_t max_tokens);

class Retriever {
 public:
  virtual ~Retriever() = default;
  virtual std::vector<KnowledgeItem> retrieve(std::string_view query) const = 0;
};

class Bm25Retriever final : public Retriever {
 public:
  Bm25Retriever(LexicalIndex index, RetrieverConfig config)
      : index_(std::move(index)), config_(std::move(config)) {}

  std::vector<KnowledgeItem> retrieve(std::string_view query) const override {
    return halueval::retrieve(index_, query, config_);
  }
  const LexicalIndex& index() const noexcept { return index_; }

 private:
  LexicalIndex index_;
  RetrieverConfig config_;
};

}  // namespace halueval
