#pragma once

// Keyword extraction from scene outlines: tf-idf and TextRank.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dramagen/error.hpp"
#include "dramagen/graph_rank.hpp"
#include "dramagen/utf8.hpp"
#include "dramagen/wordlists.hpp"

namespace dramagen {

enum class KeywordMethod { TfIdf, TextRank };

inline std::string_view to_string(KeywordMethod m) {
  return m == KeywordMethod::TfIdf ? "tfidf" : "textrank";
}

struct Keyword {
  std::string term;
  double score = 0.0;
  bool operator==(const Keyword&) const = default;
};

struct KeywordSet {
  KeywordMethod method = KeywordMethod::TfIdf;
  std::vector<Keyword> terms;  // non-increasing score
  bool is_short = false;       // fewer than k candidates were available

  std::vector<std::string> words() const {
    std::vector<std::string> out;
    for (const auto& t : terms) out.push_back(t.term);
    return out;
  }
  bool operator==(const KeywordSet&) const = default;
};

inline constexpr std::size_t kMaxKeywords = 10;

namespace detail {

inline void check_k(std::size_t k) {
  if (k == 0 || k > kMaxKeywords)
    throw ConfigError("keyword count must be in [1, " + std::to_string(kMaxKeywords) + "], got " + std::to_string(k));
}

}  // namespace detail

/// Token as used for tf-idf: surface form and lowercase key.
struct TermToken {
  std::string surface;
  std::string key;
};

/// Content tokens of a document: punctuation trimmed, stopwords and
/// closed-class words (auxiliaries, particles, adpositions, adverbs) dropped.
inline std::vector<TermToken> tfidf_tokens(std::string_view text) {
  std::vector<TermToken> out;
  for (const auto& w : utf8::split_ws(text)) {
    auto core = utf8::trim_punct(w);
    if (core.empty() || !utf8::has_letter(core)) continue;
    auto key = utf8::lower(core);
    if (wordlists::is_stopword(key) || wordlists::is_closed_class(key)) continue;
    out.push_back({std::move(core), std::move(key)});
  }
  return out;
}

using TermCounts = std::map<std::string, std::size_t>;

/// Term frequency: raw count over the total count of kept tokens.
inline double tf(std::string_view term, const TermCounts& doc_counts) {
  std::size_t total = 0;
  for (const auto& [_, c] : doc_counts) total += c;
  if (total == 0) throw Error("tf of an empty document");
  auto it = doc_counts.find(std::string(term));
  return it == doc_counts.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(total);
}

inline TermCounts count_terms(const std::vector<TermToken>& tokens) {
  TermCounts counts;
  for (const auto& t : tokens) ++counts[t.key];
  return counts;
}

/// Document frequencies over a collection (e.g. all outlines of a split).
class TermStats {
 public:
  void add_document(const TermCounts& counts) {
    ++documents_;
    for (const auto& [term, _] : counts) ++df_[term];
  }
  void add_document(std::string_view text) { add_document(count_terms(tfidf_tokens(text))); }

  /// Associative, commutative merge.
  void merge(const TermStats& other) {
    documents_ += other.documents_;
    for (const auto& [term, n] : other.df_) df_[term] += n;
  }

  std::size_t documents() const noexcept { return documents_; }
  std::size_t df(std::string_view term) const {
    auto it = df_.find(std::string(term));
    return it == df_.end() ? 0 : it->second;
  }
  /// Smoothed idf: ln((1+N)/(1+df)) + 1.
  double idf(std::string_view term) const {
    return std::log((1.0 + static_cast<double>(documents_)) / (1.0 + static_cast<double>(df(term)))) + 1.0;
  }

 private:
  std::size_t documents_ = 0;
  std::map<std::string, std::size_t> df_;
};

inline KeywordSet tfidf_keywords(std::string_view text, const TermStats& stats, std::size_t k = kMaxKeywords) {
  detail::check_k(k);
  const auto tokens = tfidf_tokens(text);
  KeywordSet out{KeywordMethod::TfIdf, {}, false};
  if (tokens.empty()) {
    out.is_short = true;
    return out;
  }
  const auto counts = count_terms(tokens);
  std::vector<Keyword> cands;
  std::unordered_map<std::string, bool> seen;
  for (const auto& t : tokens) {
    if (seen[t.key]) continue;
    seen[t.key] = true;
    cands.push_back({t.surface, tf(t.key, counts) * stats.idf(t.key)});
  }
  std::stable_sort(cands.begin(), cands.end(), [](const Keyword& a, const Keyword& b) { return a.score > b.score; });
  if (cands.size() < k) out.is_short = true;
  if (cands.size() > k) cands.resize(k);
  out.terms = std::move(cands);
  return out;
}

// ---------------------------------------------------------------------------

/// Lowercases and strips one German inflection ending (-en, -em, -er, -es,
/// -n, -e) when at least three characters remain.
inline std::string inflection_stem(std::string_view word) {
  auto d = utf8::decode(utf8::lower(word));
  static const std::u32string suffixes[] = {U"en", U"em", U"er", U"es", U"n", U"e"};
  for (const auto& s : suffixes) {
    if (d.size() >= s.size() + 3 && d.compare(d.size() - s.size(), s.size(), s) == 0) {
      d.resize(d.size() - s.size());
      break;
    }
  }
  return utf8::encode(d);
}

inline std::string dedup_key(std::string_view phrase) {
  std::string key;
  for (const auto& w : utf8::split_ws(phrase)) {
    if (!key.empty()) key += ' ';
    key += inflection_stem(w);
  }
  return key;
}

struct TextRankKeywordOptions {
  std::size_t k = kMaxKeywords;
  std::size_t window = 4;
  RankOptions rank{};
};

/// Co-occurrence graph of the text's non-stopword tokens (case preserved):
/// tokens less than `window` positions apart are linked. Exposed for tests.
struct TokenGraph {
  std::vector<std::string> nodes;      // first-occurrence order
  std::vector<long> token_node;        // per token position, -1 when not kept
  std::vector<std::string> cores;      // per token position
  std::vector<bool> break_after;       // punctuation between token i and i+1
  WeightedGraph graph;
};

inline TokenGraph build_token_graph(std::string_view text, std::size_t window) {
  TokenGraph tg;
  std::unordered_map<std::string, std::size_t> index;
  const auto words = utf8::split_ws(text);
  for (std::size_t i = 0; i < words.size(); ++i) {
    const auto& w = words[i];
    auto core = utf8::trim_punct(w);
    const bool lead_punct = !core.empty() && !w.starts_with(core);
    const bool trail_punct = !core.empty() ? !w.ends_with(core) : true;
    if (lead_punct && !tg.break_after.empty()) tg.break_after.back() = true;
    long node = -1;
    if (!core.empty() && utf8::has_letter(core) && !wordlists::is_stopword(utf8::lower(core))) {
      auto [it, inserted] = index.try_emplace(core, tg.nodes.size());
      if (inserted) tg.nodes.push_back(core);
      node = static_cast<long>(it->second);
    }
    tg.token_node.push_back(node);
    tg.cores.push_back(std::move(core));
    tg.break_after.push_back(trail_punct);
  }
  tg.graph = WeightedGraph(tg.nodes.size());
  const std::size_t n = tg.token_node.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (tg.token_node[i] < 0) continue;
    for (std::size_t j = i + 1; j < n && j - i < window; ++j) {
      if (tg.token_node[j] < 0 || tg.token_node[j] == tg.token_node[i]) continue;
      tg.graph.set_edge(static_cast<std::size_t>(tg.token_node[i]), static_cast<std::size_t>(tg.token_node[j]), 1.0);
    }
  }
  return tg;
}

/// TextRank keywords. The top-ranked tokens (at least k, at least a third of
/// the graph) are marked; runs of adjacent marked tokens form multi-word
/// keywords scored by their best member. Keywords that only differ in case
/// or inflection endings collapse onto their first occurrence.
inline KeywordSet textrank_keywords(std::string_view text, const TextRankKeywordOptions& opts = {}) {
  detail::check_k(opts.k);
  KeywordSet out{KeywordMethod::TextRank, {}, false};
  const auto tg = build_token_graph(text, std::max<std::size_t>(opts.window, 2));
  const std::size_t v = tg.nodes.size();
  if (v == 0) {
    out.is_short = true;
    return out;
  }
  const auto scores = rank_graph(tg.graph, opts.rank);

  std::vector<std::size_t> order(v);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  const std::size_t n_marked = std::min(v, std::max(opts.k, (v + 2) / 3));
  std::vector<bool> marked(v, false);
  for (std::size_t i = 0; i < n_marked; ++i) marked[order[i]] = true;

  struct Candidate {
    std::string phrase;
    double score;
  };
  std::vector<Candidate> cands;
  std::unordered_map<std::string, std::size_t> by_key;
  const auto add = [&](std::string phrase, double score) {
    auto key = dedup_key(phrase);
    auto [it, inserted] = by_key.try_emplace(key, cands.size());
    if (inserted) cands.push_back({std::move(phrase), score});
    else cands[it->second].score = std::max(cands[it->second].score, score);
  };

  std::string phrase;
  double phrase_score = 0;
  long prev_node = -1;
  const auto close = [&] {
    if (!phrase.empty()) add(std::move(phrase), phrase_score);
    phrase.clear();
    phrase_score = 0;
    prev_node = -1;
  };
  for (std::size_t i = 0; i < tg.token_node.size(); ++i) {
    const long node = tg.token_node[i];
    if (node < 0 || !marked[static_cast<std::size_t>(node)]) {
      close();
      continue;
    }
    if (node == prev_node) close();
    if (!phrase.empty()) phrase += ' ';
    phrase += tg.cores[i];
    phrase_score = std::max(phrase_score, scores[static_cast<std::size_t>(node)]);
    prev_node = node;
    if (tg.break_after[i]) close();
  }
  close();

  std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) { return a.score > b.score; });
  if (cands.size() < opts.k) out.is_short = true;
  for (std::size_t i = 0; i < cands.size() && i < opts.k; ++i) out.terms.push_back({cands[i].phrase, cands[i].score});
  return out;
}

inline KeywordSet textrank_keywords(std::string_view text, std::size_t k, std::size_t window = 4) {
  TextRankKeywordOptions opts;
  opts.k = k;
  opts.window = window;
  return textrank_keywords(text, opts);
}

/// Keyword file line: drama_id, scene index, method, comma-joined terms.
inline std::string keyword_line(std::string_view drama_id, std::size_t scene_index, const KeywordSet& ks) {
  std::string out = std::string(drama_id) + '\t' + std::to_string(scene_index) + '\t' + std::string(to_string(ks.method)) + '\t';
  for (std::size_t i = 0; i < ks.terms.size(); ++i) {
    if (i > 0) out += ", ";
    out += ks.terms[i].term;
  }
  return out;
}

}  // namespace dramagen
