#pragma once

// Sentence segmentation, speaker-labelled scene text and TextRank
// extractive summaries.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <istream>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dramagen/corpus.hpp"
#include "dramagen/error.hpp"
#include "dramagen/graph_rank.hpp"
#include "dramagen/tokenizer.hpp"
#include "dramagen/utf8.hpp"
#include "dramagen/wordlists.hpp"

namespace dramagen {

namespace detail {

inline bool is_terminal(char32_t c) { return c == U'.' || c == U'!' || c == U'?' || c == 0x2026; }

inline bool is_closer(char32_t c) {
  return c == U'"' || c == U'\'' || c == U')' || c == U']' || c == 0xBB || c == 0xAB ||
         c == 0x201C || c == 0x201D || c == 0x2019 || c == 0x2018 || c == 0x203A || c == 0x2039;
}

inline bool starts_sentence(char32_t c) {
  return utf8::is_upper(c) || c == U'"' || c == U'\'' || c == U'(' || c == U'[' || c == 0xBB ||
         c == 0xAB || c == 0x201E || c == 0x201C || c == 0x201A || c == 0x2018 || c == 0x2039 ||
         c == 0x203A || c == U'-' || c == 0x2013 || c == 0x2014;
}

// True when the word ending right before a single '.' is an abbreviation,
// an initial or an ordinal number.
inline bool is_abbreviation(std::u32string_view word) {
  while (!word.empty() && (utf8::is_punct(word.front()) && word.front() != U'.'))
    word.remove_prefix(1);
  if (word.empty()) return false;
  if (std::all_of(word.begin(), word.end(), [](char32_t c) { return utf8::is_digit(c); }))
    return true;
  if (word.size() == 1 && utf8::is_letter(word[0])) return true;
  std::string lower;
  for (char32_t c : word) utf8::append(lower, utf8::to_lower(c));
  return wordlists::german_abbreviations().count(lower) > 0;
}

}  // namespace detail

/// Rule-based segmentation: a sentence ends after `. ! ? …` (plus any closing
/// quotes) when whitespace follows and the next character is an uppercase
/// letter, an opening quote or a dash. Abbreviations, initials and ordinal
/// numbers do not end sentences. Line breaks are ordinary whitespace here;
/// callers split utterances first.
inline std::vector<std::string> split_sentences(std::string_view text) {
  const auto cps = utf8::decode(text);
  std::vector<std::string> out;
  std::size_t start = 0;
  const auto emit = [&](std::size_t b, std::size_t e) {
    while (b < e && utf8::is_space(cps[b])) ++b;
    while (e > b && utf8::is_space(cps[e - 1])) --e;
    if (b < e) out.push_back(utf8::encode(std::u32string_view(cps).substr(b, e - b)));
  };
  std::size_t i = 0;
  while (i < cps.size()) {
    if (!detail::is_terminal(cps[i])) {
      ++i;
      continue;
    }
    const std::size_t term = i;
    std::size_t j = i;
    while (j < cps.size() && detail::is_terminal(cps[j])) ++j;
    const bool single_period = (j - term == 1) && cps[term] == U'.';
    while (j < cps.size() && detail::is_closer(cps[j])) ++j;
    std::size_t k = j;
    while (k < cps.size() && utf8::is_space(cps[k])) ++k;
    if (k == j || k == cps.size() || !detail::starts_sentence(cps[k])) {
      i = j;
      continue;
    }
    if (single_period && j == term + 1) {
      std::size_t w = term;
      while (w > start && !utf8::is_space(cps[w - 1])) --w;
      if (detail::is_abbreviation(std::u32string_view(cps).substr(w, term - w))) {
        i = j;
        continue;
      }
    }
    emit(start, j);
    start = k;
    i = k;
  }
  emit(start, cps.size());
  return out;
}

// ---------------------------------------------------------------------------
// Speaker-labelled scene text: a speech is a `Name:` header line followed by
// its text lines. A header may carry text on the same line ("Name: text").

struct SpeechBlock {
  std::optional<std::string> speaker;  // absent for text before the first header
  std::vector<std::string> lines;
  bool operator==(const SpeechBlock&) const = default;
};

/// The speaker name if the line opens a speech, plus any inline text.
inline std::optional<std::pair<std::string, std::string>> parse_header(std::string_view line) {
  line = utf8::trim(line);
  if (line.empty()) return std::nullopt;
  auto end = line.find_first_of(" \t");
  std::string_view first = line.substr(0, end);
  if (first.size() < 2 || first.back() != ':') return std::nullopt;
  first.remove_suffix(1);
  if (!utf8::has_letter(first) || first.find(':') != std::string_view::npos) return std::nullopt;
  std::string rest = end == std::string_view::npos ? std::string() : std::string(utf8::trim(line.substr(end)));
  return std::make_pair(std::string(first), std::move(rest));
}

inline std::vector<SpeechBlock> parse_speeches(std::string_view text) {
  std::vector<SpeechBlock> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const auto line = utf8::trim(text.substr(pos, nl - pos));
    pos = nl + 1;
    if (line.empty()) continue;
    if (auto h = parse_header(line)) {
      out.push_back({h->first, {}});
      if (!h->second.empty()) out.back().lines.push_back(h->second);
    } else {
      if (out.empty()) out.push_back({std::nullopt, {}});
      out.back().lines.emplace_back(line);
    }
  }
  return out;
}

inline std::string render_speeches(const std::vector<SpeechBlock>& blocks) {
  std::string out;
  for (const auto& b : blocks) {
    if (b.speaker) out += *b.speaker + ":\n";
    for (const auto& l : b.lines) out += l + "\n";
  }
  return out;
}

/// Scene as model text. With speakers every speech is `name:` followed by one
/// sentence per line; without speakers every utterance is one line. Stage
/// directions are not part of the text.
inline std::string scene_text(const Scene& scene, bool with_speakers = true) {
  std::string out;
  for (const auto& it : scene.items) {
    if (it.kind != ItemKind::Speech) continue;
    if (with_speakers) {
      out += speaker_label(it.speaker) + ":\n";
      for (const auto& s : split_sentences(it.text)) out += s + "\n";
    } else {
      out += it.text + "\n";
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

/// Sentences with the speaker of each one.
struct StrippedScene {
  std::vector<std::string> sentences;
  std::vector<std::optional<std::string>> speakers;  // parallel to sentences
};

inline StrippedScene strip_speakers(const Scene& scene) {
  StrippedScene out;
  for (const auto& it : scene.items) {
    if (it.kind != ItemKind::Speech) continue;
    for (auto& s : split_sentences(it.text)) {
      out.sentences.push_back(std::move(s));
      out.speakers.emplace_back(speaker_label(it.speaker));
    }
  }
  if (out.sentences.empty()) throw Error("scene " + std::to_string(scene.index) + " has no speech content");
  return out;
}

/// Same as above for labelled scene text; each text line is an utterance
/// boundary.
inline StrippedScene strip_speakers(const std::vector<SpeechBlock>& blocks) {
  StrippedScene out;
  for (const auto& b : blocks)
    for (const auto& line : b.lines)
      for (auto& s : split_sentences(line)) {
        out.sentences.push_back(std::move(s));
        out.speakers.push_back(b.speaker);
      }
  return out;
}

struct SpeakerLine {
  std::optional<std::string> speaker;
  std::string sentence;
  bool operator==(const SpeakerLine&) const = default;
};

struct Outline {
  std::vector<SpeakerLine> lines;
  std::size_t token_count = 0;

  /// Prompt form: `Speaker:` line then the sentence, no blank lines.
  std::string text(bool with_speakers = true) const {
    std::string out;
    for (const auto& l : lines) {
      if (with_speakers && l.speaker) out += *l.speaker + ":\n";
      out += l.sentence + "\n";
    }
    return out;
  }
};

inline Outline reattach_speakers(const std::vector<std::size_t>& selected, const StrippedScene& stripped,
                                 const Tokenizer& tokenizer) {
  Outline out;
  for (auto idx : selected) {
    if (idx >= stripped.sentences.size())
      throw Error("internal: selected sentence " + std::to_string(idx) + " out of range");
    out.lines.push_back({stripped.speakers[idx], stripped.sentences[idx]});
  }
  out.token_count = tokenizer.count_tokens(out.text(true));
  return out;
}

/// Outline file: entries separated by one blank line.
inline std::string write_outline_file(const Outline& o, bool with_speakers) {
  std::string out;
  for (std::size_t i = 0; i < o.lines.size(); ++i) {
    if (i > 0) out += "\n";
    if (with_speakers && o.lines[i].speaker) out += *o.lines[i].speaker + ":\n";
    out += o.lines[i].sentence + "\n";
  }
  return out;
}

inline Outline read_outline_file(std::string_view text, bool with_speakers) {
  Outline o;
  std::optional<std::string> pending;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const auto line = utf8::trim(text.substr(pos, nl - pos));
    pos = nl + 1;
    if (line.empty()) continue;
    if (with_speakers && !pending) {
      if (auto h = parse_header(line); h && h->second.empty()) {
        pending = h->first;
        continue;
      }
    }
    o.lines.push_back({pending, std::string(line)});
    pending.reset();
  }
  return o;
}

// ---------------------------------------------------------------------------
// TextRank over sentences.

namespace detail {

inline std::vector<std::string> similarity_words(std::string_view sentence) {
  std::vector<std::string> out;
  for (const auto& w : utf8::split_ws(sentence)) {
    auto t = utf8::lower(utf8::trim_punct(w));
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

}  // namespace detail

/// Sentence graph: weight = |shared content words| / (log|Si| + log|Sj|),
/// defined when both sentences have more than one word.
inline WeightedGraph sentence_graph(const std::vector<std::string>& sentences) {
  const std::size_t n = sentences.size();
  std::vector<std::size_t> lengths(n);
  std::vector<std::set<std::string>> content(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto words = detail::similarity_words(sentences[i]);
    lengths[i] = words.size();
    for (const auto& w : words)
      if (!wordlists::is_stopword(w) && utf8::has_letter(w)) content[i].insert(w);
  }
  WeightedGraph g(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (lengths[i] <= 1 || lengths[j] <= 1) continue;
      std::size_t shared = 0;
      for (const auto& w : content[i]) shared += content[j].count(w);
      if (shared == 0) continue;
      const double denom = std::log(static_cast<double>(lengths[i])) + std::log(static_cast<double>(lengths[j]));
      g.set_edge(i, j, static_cast<double>(shared) / denom);
    }
  }
  return g;
}

inline std::vector<double> textrank_sentence_scores(const std::vector<std::string>& sentences,
                                                    const RankOptions& opts = {}) {
  return rank_graph(sentence_graph(sentences), opts);
}

/// Takes items by descending score (ties: lower index) until the next one
/// would overflow the budget. Returns indices in ascending order.
inline std::vector<std::size_t> select_within_budget(const std::vector<double>& scores,
                                                     const std::vector<std::size_t>& costs,
                                                     std::size_t budget) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<std::size_t> picked;
  std::size_t used = 0;
  for (auto idx : order) {
    if (used + costs[idx] > budget) break;
    used += costs[idx];
    picked.push_back(idx);
  }
  std::sort(picked.begin(), picked.end());
  return picked;
}

inline std::vector<std::size_t> textrank_sentences(const std::vector<std::string>& sentences,
                                                   std::size_t budget_tokens, const Tokenizer& tokenizer) {
  if (sentences.empty() || budget_tokens == 0) return {};
  std::vector<std::size_t> costs;
  costs.reserve(sentences.size());
  for (const auto& s : sentences) costs.push_back(tokenizer.count_tokens(s));
  return select_within_budget(textrank_sentence_scores(sentences), costs, budget_tokens);
}

namespace detail {

inline std::vector<std::size_t> labelled_costs(const StrippedScene& s, const Tokenizer& tok) {
  std::vector<std::size_t> costs;
  for (std::size_t i = 0; i < s.sentences.size(); ++i) {
    std::string line = s.speakers[i] ? *s.speakers[i] + ":\n" : std::string();
    line += s.sentences[i] + "\n";
    costs.push_back(tok.count_tokens(line));
  }
  return costs;
}

}  // namespace detail

/// Gold outline: TextRank over the scene's sentences with speakers removed,
/// speakers re-attached to the selected sentences. The budget covers the
/// labelled form.
inline Outline gold_outline(const Scene& scene, std::size_t budget_tokens, const Tokenizer& tokenizer) {
  const auto stripped = strip_speakers(scene);
  const auto picked = select_within_budget(textrank_sentence_scores(stripped.sentences),
                                           detail::labelled_costs(stripped, tokenizer), budget_tokens);
  return reattach_speakers(picked, stripped, tokenizer);
}

/// Summary of labelled text (e.g. the remote part of the generated scene)
/// within `budget_tokens`, in outline form.
inline std::string summarize_text(std::string_view text, std::size_t budget_tokens, const Tokenizer& tokenizer) {
  if (budget_tokens == 0) return {};
  const auto stripped = strip_speakers(parse_speeches(text));
  if (stripped.sentences.empty()) return {};
  const auto picked = select_within_budget(textrank_sentence_scores(stripped.sentences),
                                           detail::labelled_costs(stripped, tokenizer), budget_tokens);
  return reattach_speakers(picked, stripped, tokenizer).text(true);
}

}  // namespace dramagen
