#pragma once

// Historical-to-modern spelling lexicon built from line-aligned
// transliterated/normalized renderings of the same text.

#include <algorithm>
#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <spdlog/spdlog.h>

#include "dramagen/error.hpp"
#include "dramagen/utf8.hpp"

namespace dramagen {

/// Unit-cost edit distance (insert, delete, substitute) over any sequence of
/// comparable elements. Two-row dynamic program.
template <typename T>
std::size_t levenshtein(std::basic_string_view<T> a, std::basic_string_view<T> b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

/// UTF-8 strings are compared by code point.
inline std::size_t levenshtein(std::string_view a, std::string_view b) {
  const auto da = utf8::decode(a);
  const auto db = utf8::decode(b);
  return levenshtein<char32_t>(da, db);
}

namespace detail {

struct Match {
  std::size_t a = 0, b = 0, size = 0;
};

// Longest common block of a[alo,ahi) and b[blo,bhi). Among maximal blocks the
// one starting earliest in a wins, then earliest in b.
template <typename T>
Match longest_match(std::basic_string_view<T> a, std::size_t alo, std::size_t ahi,
                    std::basic_string_view<T> b, std::size_t blo, std::size_t bhi) {
  Match best{alo, blo, 0};
  // run[j] = length of the common suffix ending at a[i-1], b[j-1]
  std::vector<std::size_t> prev(bhi - blo + 1, 0), cur(bhi - blo + 1, 0);
  for (std::size_t i = alo; i < ahi; ++i) {
    for (std::size_t j = blo; j < bhi; ++j) {
      const std::size_t k = j - blo + 1;
      if (a[i] == b[j]) {
        cur[k] = prev[k - 1] + 1;
        const std::size_t len = cur[k];
        const std::size_t sa = i + 1 - len, sb = j + 1 - len;
        if (len > best.size || (len == best.size && (sa < best.a || (sa == best.a && sb < best.b)))) {
          best = {sa, sb, len};
        }
      } else {
        cur[k] = 0;
      }
    }
    std::swap(prev, cur);
    std::fill(cur.begin(), cur.end(), 0);
  }
  return best;
}

template <typename T>
std::size_t matched_chars(std::basic_string_view<T> a, std::size_t alo, std::size_t ahi,
                          std::basic_string_view<T> b, std::size_t blo, std::size_t bhi) {
  if (alo >= ahi || blo >= bhi) return 0;
  const Match m = longest_match(a, alo, ahi, b, blo, bhi);
  if (m.size == 0) return 0;
  return m.size + matched_chars(a, alo, m.a, b, blo, m.b) +
         matched_chars(a, m.a + m.size, ahi, b, m.b + m.size, bhi);
}

}  // namespace detail

/// Ratcliff/Obershelp similarity 2*M/(|a|+|b|), where M counts the characters
/// matched by recursively taking the longest common block and recursing on
/// both sides of it. Two empty inputs compare as 1.0.
template <typename T>
double gestalt_ratio(std::basic_string_view<T> a, std::basic_string_view<T> b) {
  const std::size_t total = a.size() + b.size();
  if (total == 0) return 1.0;
  const std::size_t m = detail::matched_chars(a, 0, a.size(), b, 0, b.size());
  return 2.0 * static_cast<double>(m) / static_cast<double>(total);
}

inline double gestalt_ratio(std::string_view a, std::string_view b) {
  const auto da = utf8::decode(a);
  const auto db = utf8::decode(b);
  return gestalt_ratio<char32_t>(da, db);
}

// ---------------------------------------------------------------------------

enum class Verdict { Kept, ExcludedLevenshtein, ExcludedGestalt };

inline std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Kept: return "kept";
    case Verdict::ExcludedLevenshtein: return "excluded_levenshtein";
    case Verdict::ExcludedGestalt: return "excluded_gestalt";
  }
  return "?";
}

struct WordPair {
  std::string transliterated;  // lowercase
  std::string normalized;      // lowercase, may hold one space for 1:2 splits
  Verdict verdict = Verdict::Kept;
  double score = 0.0;          // distance or ratio from the last filter

  bool operator==(const WordPair&) const = default;
};

/// Removes punctuation from a token. Apostrophes survive because elided forms
/// such as "thu’s" or "‘n" depend on them; `%`, `(` and `/` are ordinary
/// punctuation here.
inline std::string clean_token(std::string_view token) {
  std::string out;
  for (char32_t c : utf8::decode(token)) {
    if (utf8::is_punct(c) && c != U'_') continue;
    utf8::append(out, c);
  }
  // a token made only of apostrophes is not a word
  for (char32_t c : utf8::decode(out))
    if (!utf8::is_apostrophe(c)) return out;
  return {};
}

namespace detail {

inline std::vector<std::string> cleaned_tokens(std::string_view line) {
  std::vector<std::string> out;
  for (auto& tok : utf8::split_ws(line)) {
    auto c = clean_token(tok);
    if (!c.empty()) out.push_back(utf8::lower(c));
  }
  return out;
}

inline bool ends_with_apostrophe_s(std::string_view tok) {
  const auto d = utf8::decode(tok);
  return d.size() > 2 && d.back() == U's' && utf8::is_apostrophe(d[d.size() - 2]);
}

inline bool has_digit(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

}  // namespace detail

/// Collects candidate spelling pairs from two line-aligned renderings.
///
/// Tokens are aligned by position after punctuation cleaning and lowercasing.
/// An underscore in a normalized token ("wie_es") marks a one-to-two split of
/// the transliterated token; a transliterated token ending in an apostrophe-s
/// whose normalized counterpart is followed by "es" pairs with both words.
/// Misalignments are not repaired here: the faulty pairs they produce are
/// removed by filter_pairs(). Identity pairs and pairs containing digits are
/// discarded.
inline std::vector<WordPair> collect_word_pairs(const std::vector<std::string>& transliterated_doc,
                                                const std::vector<std::string>& normalized_doc) {
  if (transliterated_doc.size() != normalized_doc.size()) {
    const std::size_t first_missing = std::min(transliterated_doc.size(), normalized_doc.size()) + 1;
    throw AlignmentError("documents differ in line count (" +
                             std::to_string(transliterated_doc.size()) + " vs " +
                             std::to_string(normalized_doc.size()) + "); first unmatched line",
                         first_missing);
  }
  std::vector<WordPair> pairs;
  for (std::size_t line = 0; line < transliterated_doc.size(); ++line) {
    const auto t = detail::cleaned_tokens(transliterated_doc[line]);
    const auto n = detail::cleaned_tokens(normalized_doc[line]);
    std::size_t i = 0, j = 0;
    while (i < t.size() && j < n.size()) {
      std::string trans = t[i];
      std::string norm;
      if (n[j].find('_') != std::string::npos) {
        norm = n[j];
        std::replace(norm.begin(), norm.end(), '_', ' ');
        ++j;
      } else if (detail::ends_with_apostrophe_s(t[i]) && j + 1 < n.size() && n[j + 1] == "es") {
        norm = n[j] + " es";
        j += 2;
      } else {
        norm = n[j];
        ++j;
      }
      ++i;
      std::replace(trans.begin(), trans.end(), '_', ' ');
      if (trans == norm || detail::has_digit(trans) || detail::has_digit(norm)) continue;
      if (utf8::trim(norm).empty() || utf8::trim(trans).empty()) continue;
      pairs.push_back({std::move(trans), std::move(norm), Verdict::Kept, 0.0});
    }
  }
  return pairs;
}

struct LevenshteinFilter {
  std::size_t threshold = 3;
};
struct GestaltFilter {
  double min_ratio = 0.5;
};
using FilterMethod = std::variant<LevenshteinFilter, GestaltFilter>;

/// Marks each pair with a verdict; input order is preserved.
/// Levenshtein excludes pairs at or above the distance threshold; Gestalt
/// excludes pairs whose ratio falls below `min_ratio`, comparing against the
/// normalized side with its split space removed.
inline std::vector<WordPair> filter_pairs(std::vector<WordPair> pairs, const FilterMethod& method) {
  for (auto& p : pairs) {
    if (const auto* lev = std::get_if<LevenshteinFilter>(&method)) {
      const auto d = levenshtein(p.transliterated, p.normalized);
      p.score = static_cast<double>(d);
      p.verdict = d >= lev->threshold ? Verdict::ExcludedLevenshtein : Verdict::Kept;
    } else {
      const auto& g = std::get<GestaltFilter>(method);
      std::string joined = p.normalized;
      joined.erase(std::remove(joined.begin(), joined.end(), ' '), joined.end());
      p.score = gestalt_ratio(p.transliterated, joined);
      p.verdict = p.score < g.min_ratio ? Verdict::ExcludedGestalt : Verdict::Kept;
    }
  }
  return pairs;
}

/// transliterated -> normalized, lowercase, Kept pairs only.
class NormalizationLexicon {
 public:
  NormalizationLexicon() = default;

  static NormalizationLexicon from_pairs(const std::vector<WordPair>& pairs) {
    NormalizationLexicon lex;
    for (const auto& p : pairs)
      if (p.verdict == Verdict::Kept) lex.insert(p.transliterated, p.normalized);
    return lex;
  }

  /// Identity pairs are ignored. A conflicting value overwrites the old one
  /// with a warning.
  void insert(std::string_view transliterated, std::string_view normalized) {
    auto key = utf8::lower(transliterated);
    auto value = utf8::lower(normalized);
    if (key.empty() || value.empty() || key == value) return;
    auto [it, inserted] = pairs_.try_emplace(key, value);
    if (!inserted && it->second != value) {
      spdlog::warn("lexicon conflict for '{}': '{}' replaced by '{}'", key, it->second, value);
      it->second = std::move(value);
    }
  }

  void merge(const NormalizationLexicon& other) {
    for (const auto& [k, v] : other.pairs_) insert(k, v);
  }

  const std::string* find(std::string_view lowercase_word) const {
    auto it = pairs_.find(std::string(lowercase_word));
    return it == pairs_.end() ? nullptr : &it->second;
  }

  std::size_t size() const noexcept { return pairs_.size(); }
  bool empty() const noexcept { return pairs_.empty(); }
  const std::map<std::string, std::string>& pairs() const noexcept { return pairs_; }

  /// Two-column TSV, sorted by key, LF line endings.
  void write_tsv(std::ostream& os) const {
    for (const auto& [k, v] : pairs_) os << k << '\t' << v << '\n';
  }

  static NormalizationLexicon read_tsv(std::istream& is) {
    NormalizationLexicon lex;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      const auto tab = line.find('\t');
      if (tab == std::string::npos)
        throw Error("lexicon line " + std::to_string(lineno) + ": expected two tab-separated columns");
      lex.insert(line.substr(0, tab), line.substr(tab + 1));
    }
    return lex;
  }

 private:
  std::map<std::string, std::string> pairs_;
};

/// Looks the lowercased word up; on a hit the replacement takes the input's
/// first-letter capitalization.
inline std::string normalize_word(std::string_view word, const NormalizationLexicon& lexicon) {
  const auto* hit = lexicon.find(utf8::lower(word));
  if (hit == nullptr) return std::string(word);
  if (utf8::is_upper(utf8::first(word))) return utf8::capitalize_first(*hit);
  return *hit;
}

/// Normalizes the word core of a token, keeping surrounding punctuation.
inline std::string normalize_token(std::string_view token, const NormalizationLexicon& lexicon) {
  if (lexicon.empty()) return std::string(token);
  const auto d = utf8::decode(token);
  std::size_t b = 0, e = d.size();
  while (b < e && (utf8::is_punct(d[b]) || utf8::is_apostrophe(d[b]))) ++b;
  while (e > b && utf8::is_punct(d[e - 1])) --e;
  if (b == e) return std::string(token);
  const auto core = utf8::encode(std::u32string_view(d).substr(b, e - b));
  const auto fixed = normalize_word(core, lexicon);
  if (fixed == core) return std::string(token);
  return utf8::encode(std::u32string_view(d).substr(0, b)) + fixed +
         utf8::encode(std::u32string_view(d).substr(e));
}

/// Audit report: transliterated, normalized, score, verdict.
inline void write_filter_report(std::ostream& os, const std::vector<WordPair>& pairs) {
  os << "transliterated\tnormalized\tscore\tverdict\n";
  for (const auto& p : pairs) {
    std::ostringstream score;
    score.precision(4);
    score << std::fixed << p.score;
    os << p.transliterated << '\t' << p.normalized << '\t' << score.str() << '\t'
       << to_string(p.verdict) << '\n';
  }
}

}  // namespace dramagen
