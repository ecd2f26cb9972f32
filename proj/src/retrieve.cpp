#include "halueval/retrieve.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_set>

#include "halueval/error.hpp"

namespace halueval {

std::size_t LexicalIndex::document_frequency(const std::string& term) const {
  auto it = postings_.find(term);
  return it == postings_.end() ? 0 : it->second.size();
}

std::size_t LexicalIndex::term_frequency(std::size_t doc, const std::string& term) const {
  auto it = postings_.find(term);
  if (it == postings_.end()) return 0;
  auto p = std::lower_bound(it->second.begin(), it->second.end(), doc,
                            [](const Posting& a, std::size_t d) { return a.doc < d; });
  return (p != it->second.end() && p->doc == doc) ? p->tf : 0;
}

double bm25_idf(std::size_t n_docs, std::size_t df) noexcept {
  const double n = static_cast<double>(n_docs);
  const double d = static_cast<double>(df);
  return std::log(1.0 + (n - d + 0.5) / (d + 0.5));
}

std::vector<std::pair<std::size_t, double>> LexicalIndex::score(
    const std::vector<std::string>& query_terms, const Bm25Params& params) const {
  // Per-document term contributions, summed in ascending order so that
  // documents with equal contributions get bit-identical scores and the
  // doc_id tie-break applies.
  std::unordered_map<std::size_t, std::vector<double>> parts;
  std::unordered_set<std::string> seen;
  for (const auto& term : query_terms) {
    if (!seen.insert(term).second) continue;
    auto it = postings_.find(term);
    if (it == postings_.end()) continue;
    const double idf = bm25_idf(docs_.size(), it->second.size());
    for (const auto& p : it->second) {
      const double tf = p.tf;
      const double norm = params.k1 * (1.0 - params.b + params.b * lengths_[p.doc] / avgdl_);
      parts[p.doc].push_back(idf * tf * (params.k1 + 1.0) / (tf + norm));
    }
  }
  std::vector<std::pair<std::size_t, double>> out;
  for (auto& [doc, terms] : parts) {
    std::sort(terms.begin(), terms.end());
    double sum = 0.0;
    for (double t : terms) sum += t;
    if (sum > 0.0) out.emplace_back(doc, sum);
  }
  return out;
}

LexicalIndex build_index(std::vector<Document> documents) {
  if (documents.empty()) throw Error(Errc::EmptyCorpus, "no documents to index");
  LexicalIndex index;
  std::unordered_set<std::string> ids;
  std::size_t total = 0;
  for (std::size_t d = 0; d < documents.size(); ++d) {
    const auto& doc = documents[d];
    if (!ids.insert(doc.id).second) throw Error(Errc::DuplicateDocId, "duplicate doc_id", doc.id);
    const auto tokens = text::tokenize(doc.text);
    if (tokens.empty()) throw Error(Errc::EmptyDocument, "no tokens", doc.id);
    std::unordered_map<std::string, std::uint32_t> tf;
    for (const auto& t : tokens) ++tf[t];
    for (auto& [term, count] : tf) {
      index.postings_[term].push_back({static_cast<std::uint32_t>(d), count});
    }
    index.lengths_.push_back(tokens.size());
    total += tokens.size();
  }
  index.avgdl_ = static_cast<double>(total) / static_cast<double>(documents.size());
  index.docs_ = std::move(documents);
  return index;
}

namespace {

std::string make_snippet_window(const Document& doc, const std::unordered_set<std::string>& terms,
                                const RetrieverConfig& config, CharRange& span) {
  const auto sentences = text::split_sentences(doc.text, config.abbreviations);
  if (sentences.empty()) {
    span = {0, doc.text.size()};
    return doc.text;
  }
  std::size_t best = 0;
  std::size_t best_overlap = 0;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    std::unordered_set<std::string> present;
    for (auto& t : text::tokenize(
             std::string_view(doc.text).substr(sentences[i].begin, sentences[i].size()))) {
      if (terms.count(t)) present.insert(std::move(t));
    }
    if (present.size() > best_overlap) {
      best_overlap = present.size();
      best = i;
    }
  }
  const std::size_t width = std::max<std::size_t>(config.window_sentences, 1);
  const std::size_t before = (width - 1) / 2;
  const std::size_t after = width - 1 - before;
  const std::size_t lo = best >= before ? best - before : 0;
  const std::size_t hi = std::min(best + after, sentences.size() - 1);
  span = {sentences[lo].begin, sentences[hi].end};
  return doc.text.substr(span.begin, span.size());
}

}  // namespace

std::vector<KnowledgeItem> retrieve(const LexicalIndex& index, std::string_view query,
                                    const RetrieverConfig& config) {
  if (config.k == 0) throw Error(Errc::InvalidArgument, "k must be >= 1");
  const auto terms = text::tokenize(query);
  auto scored = index.score(terms, config.bm25);
  std::sort(scored.begin(), scored.end(), [&](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return index.document(a.first).id < index.document(b.first).id;
  });
  if (scored.size() > config.k) scored.resize(config.k);

  const std::unordered_set<std::string> term_set(terms.begin(), terms.end());
  std::vector<KnowledgeItem> out;
  out.reserve(scored.size());
  for (const auto& [d, score] : scored) {
    const auto& doc = index.document(d);
    KnowledgeItem item;
    item.doc_id = doc.id;
    item.score = score;
    CharRange local{0, doc.text.size()};
    if (config.snippet_mode == SnippetMode::WholeDocument) {
      item.snippet = doc.text;
    } else {
      item.snippet = make_snippet_window(doc, term_set, config, local);
    }
    item.span = {doc.source_offset + local.begin, doc.source_offset + local.end};
    item.triplets = extract_triplets(item.snippet, config.verb_lexicon);
    out.push_back(std::move(item));
  }
  return out;
}

std::vector<Document> sentence_windows(std::string_view source, std::string_view prefix,
                                       std::size_t window,
                                       const std::vector<std::string>& abbreviations) {
  const auto sentences = text::split_sentences(source, abbreviations);
  std::vector<Document> out;
  if (sentences.empty()) return out;
  window = std::max<std::size_t>(window, 1);
  const std::size_t count = sentences.size() >= window ? sentences.size() - window + 1 : 1;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t last = std::min(i + window, sentences.size()) - 1;
    const CharRange r{sentences[i].begin, sentences[last].end};
    char id[32];
    std::snprintf(id, sizeof id, "#%06zu", i);
    out.push_back({std::string(prefix) + id, std::string(source.substr(r.begin, r.size())),
                   r.begin});
  }
  return out;
}

const std::vector<std::string>& default_verb_lexicon() {
  static const std::vector<std::string> lexicon = {
      "is",       "are",      "was",   "were",  "has",   "have",    "had",
      "directed", "released", "composed", "wrote", "won", "plays", "played",
      "stars",    "starred",  "born",  "died",  "founded", "located"};
  return lexicon;
}

namespace {

std::string strip_punct(std::string_view w) {
  std::size_t b = 0, e = w.size();
  while (b < e && !text::is_alnum(w[b])) ++b;
  while (e > b && !text::is_alnum(w[e - 1])) --e;
  return text::to_lower(w.substr(b, e - b));
}

bool is_preposition(const std::string& w) {
  static const std::unordered_set<std::string> preps = {"in", "on", "at", "by", "for", "from",
                                                        "to", "with", "of", "into", "as"};
  return preps.count(w) > 0;
}

bool is_participle(const std::string& w, const std::unordered_set<std::string>& lexicon) {
  if (w == "is" || w == "are" || w == "was" || w == "were") return false;
  auto ends_with = [&](std::string_view suffix) {
    return w.size() > suffix.size() && w.compare(w.size() - suffix.size(), suffix.size(), suffix) == 0;
  };
  return lexicon.count(w) > 0 || ends_with("ed") || ends_with("en");
}

std::string join(const std::vector<std::string_view>& words, std::size_t b, std::size_t e) {
  std::string out;
  for (std::size_t i = b; i < e; ++i) {
    if (!out.empty()) out += ' ';
    out += words[i];
  }
  return out;
}

std::string trim_trailing_punct(std::string s) {
  while (!s.empty() && (s.back() == '.' || s.back() == '!' || s.back() == '?' || s.back() == ',' ||
                        s.back() == ';' || s.back() == ':')) {
    s.pop_back();
  }
  return std::string(text::trim(s));
}

}  // namespace

std::vector<Triplet> extract_triplets(std::string_view snippet,
                                      const std::vector<std::string>& lexicon) {
  const std::unordered_set<std::string> verbs(lexicon.begin(), lexicon.end());
  std::vector<Triplet> out;
  for (const auto& r : text::split_sentences(snippet)) {
    const auto words = text::words(snippet.substr(r.begin, r.size()));
    for (std::size_t i = 0; i < words.size(); ++i) {
      const auto w = strip_punct(words[i]);
      if (!verbs.count(w)) continue;
      std::size_t end = i + 1;
      if ((w == "was" || w == "were") && end < words.size() &&
          is_participle(strip_punct(words[end]), verbs)) {
        ++end;
      }
      if (end < words.size() && is_preposition(strip_punct(words[end]))) ++end;

      Triplet t{trim_trailing_punct(join(words, 0, i)), join(words, i, end),
                trim_trailing_punct(join(words, end, words.size()))};
      if (!t.subject.empty() && !t.object.empty()) out.push_back(std::move(t));
      break;
    }
  }
  return out;
}

std::vector<Triplet> extract_triplets(std::string_view snippet) {
  return extract_triplets(snippet, default_verb_lexicon());
}

std::string render_triplet(const Triplet& t) {
  return t.subject + " " + t.relation + " " + t.object + ".";
}

std::string condense_snippet(std::string_view snippet, std::size_t max_tokens) {
  if (max_tokens == 0) throw Error(Errc::InvalidArgument, "max_tokens must be >= 1");
  const auto sentences = text::split_sentences(snippet);
  if (sentences.empty()) return {};

  std::size_t used = 0;
  std::size_t last = sentences.size();
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    const auto n = text::word_count(snippet.substr(sentences[i].begin, sentences[i].size()));
    if (used + n > max_tokens) break;
    used += n;
    last = i;
  }
  if (last == sentences.size()) {
    const auto words = text::words(snippet.substr(sentences[0].begin));
    const auto& end_word = words[max_tokens - 1];
    const auto end = static_cast<std::size_t>(end_word.data() + end_word.size() - snippet.data());
    return std::string(snippet.substr(sentences[0].begin, end - sentences[0].begin));
  }
  return std::string(snippet.substr(sentences[0].begin, sentences[last].end - sentences[0].begin));
}

}  // namespace halueval
