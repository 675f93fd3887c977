#pragma once

// Automatic evaluation: speech statistics, strided perplexity, n-gram
// overlap, topic drift and distinct-n.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "dramagen/error.hpp"
#include "dramagen/lm_backend.hpp"
#include "dramagen/textproc.hpp"
#include "dramagen/utf8.hpp"

namespace dramagen {

namespace detail {

/// Sentences of every speech. Header lines are format and not counted; each
/// text line is a sentence boundary.
inline std::vector<std::vector<std::string>> speech_sentences(std::string_view scene_text) {
  std::vector<std::vector<std::string>> out;
  for (const auto& block : parse_speeches(scene_text)) {
    std::vector<std::string> sents;
    for (const auto& line : block.lines)
      for (auto& s : split_sentences(line)) sents.push_back(std::move(s));
    if (!sents.empty()) out.push_back(std::move(sents));
  }
  return out;
}

inline std::vector<std::string> lower_tokens(std::string_view text) {
  auto words = utf8::split_ws(text);
  for (auto& w : words) w = utf8::lower(w);
  return words;
}

using Ngram = std::vector<std::string>;

inline std::set<Ngram> ngram_set(const std::vector<std::string>& tokens, std::size_t n) {
  std::set<Ngram> out;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) out.emplace(tokens.begin() + static_cast<long>(i), tokens.begin() + static_cast<long>(i + n));
  return out;
}

inline void check_n(std::size_t n) {
  if (n == 0) throw MetricError("n-gram order must be positive");
}

}  // namespace detail

inline double sentences_per_speech(std::string_view scene_text) {
  const auto speeches = detail::speech_sentences(scene_text);
  if (speeches.empty()) throw MetricError("no speech in scene");
  std::size_t total = 0;
  for (const auto& s : speeches) total += s.size();
  return static_cast<double>(total) / static_cast<double>(speeches.size());
}

/// Mean number of whitespace tokens per sentence.
inline double avg_sentence_length(std::string_view scene_text) {
  std::size_t sentences = 0, tokens = 0;
  for (const auto& speech : detail::speech_sentences(scene_text))
    for (const auto& s : speech) {
      ++sentences;
      tokens += utf8::split_ws(s).size();
    }
  if (sentences == 0) throw MetricError("no sentence in scene");
  return static_cast<double>(tokens) / static_cast<double>(sentences);
}

/// Sliding-window perplexity. Windows of the model's context length advance
/// by `stride`; each window scores only the tokens not scored before, with
/// the rest of the window as context, so every token is counted once.
inline double perplexity(std::string_view text, LanguageModel& lm, std::size_t stride = 100) {
  if (stride == 0) throw MetricError("stride must be positive");
  const auto spans = lm.tokenize(text);
  const std::size_t n = spans.size();
  if (n == 0) throw MetricError("perplexity of an empty text");
  const std::size_t window = lm.max_context();
  const std::size_t step = std::min(stride, window);
  const auto slice = [&](std::size_t a, std::size_t b) { return token_slice(text, spans, a, b); };
  double nll = 0;
  std::size_t counted = 0;
  std::size_t prev_end = 0;
  for (std::size_t begin = 0; begin < n; begin += step) {
    const std::size_t end = std::min(begin + window, n);
    const auto scored = lm.score(slice(prev_end, end), slice(begin, prev_end));
    for (double lp : scored.logprobs) nll -= lp;
    counted += scored.logprobs.size();
    prev_end = end;
    if (end == n) break;
  }
  if (counted == 0) throw MetricError("backend scored no tokens");
  return std::exp(nll / static_cast<double>(counted));
}

/// F1 of the n-gram type sets (lowercased whitespace tokens) of two token
/// sequences; 0 when either set is empty.
inline double ngram_overlap_f1(const std::vector<std::string>& start, const std::vector<std::string>& generated,
                               std::size_t n) {
  detail::check_n(n);
  const auto a = detail::ngram_set(start, n);
  const auto b = detail::ngram_set(generated, n);
  if (a.empty() || b.empty()) return 0.0;
  std::size_t shared = 0;
  for (const auto& g : b) shared += a.count(g);
  if (shared == 0) return 0.0;
  const double precision = static_cast<double>(shared) / static_cast<double>(b.size());
  const double recall = static_cast<double>(shared) / static_cast<double>(a.size());
  return 2 * precision * recall / (precision + recall);
}

inline double ngram_overlap_f1(std::string_view start_text, std::string_view generated_text, std::size_t n) {
  return ngram_overlap_f1(detail::lower_tokens(start_text), detail::lower_tokens(generated_text), n);
}

/// Relative decrease of overlap F1 from the first to the second half of the
/// generated text (halves by token count, middle token to the first half).
/// Negative when the second half overlaps more. Missing when the first half
/// has no overlap.
inline std::optional<double> topic_drift(std::string_view start_text, std::string_view generated_text,
                                         std::size_t n) {
  const auto start = detail::lower_tokens(start_text);
  const auto gen = detail::lower_tokens(generated_text);
  const std::size_t half = (gen.size() + 1) / 2;
  const std::vector<std::string> first(gen.begin(), gen.begin() + static_cast<long>(half));
  const std::vector<std::string> second(gen.begin() + static_cast<long>(half), gen.end());
  const double f1_first = ngram_overlap_f1(start, first, n);
  if (f1_first == 0.0) return std::nullopt;
  return (f1_first - ngram_overlap_f1(start, second, n)) / f1_first;
}

/// Unique n-grams over all n-grams (lowercased whitespace tokens).
inline double distinct_n(std::string_view text, std::size_t n) {
  detail::check_n(n);
  const auto tokens = detail::lower_tokens(text);
  if (tokens.size() < n) throw MetricError("text has no " + std::to_string(n) + "-gram");
  const std::size_t total = tokens.size() - n + 1;
  return static_cast<double>(detail::ngram_set(tokens, n).size()) / static_cast<double>(total);
}

// ---------------------------------------------------------------------------

inline constexpr std::size_t kMaxN = 3;

/// Per-scene values; absent when undefined for the scene.
struct SceneMetrics {
  std::optional<double> sentences_per_speech, avg_sentence_length, perplexity;
  std::array<std::optional<double>, kMaxN> overlap_f1{};   // n = 1..3
  std::array<std::optional<double>, kMaxN> topic_drift{};  // n = 1..3; reported for 2 and 3
  std::array<std::optional<double>, kMaxN> distinct{};     // n = 1..3
};

struct SceneSample {
  std::string id;
  std::string start;
  std::optional<std::string> generated;  // absent: scene missing from the run
};

inline SceneMetrics evaluate_scene(std::string_view start, std::string_view generated, LanguageModel* lm,
                                   std::size_t stride = 100) {
  SceneMetrics m;
  const auto guard = [](auto&& f) -> std::optional<double> {
    try {
      return f();
    } catch (const MetricError&) {
      return std::nullopt;
    }
  };
  m.sentences_per_speech = guard([&] { return sentences_per_speech(generated); });
  m.avg_sentence_length = guard([&] { return avg_sentence_length(generated); });
  if (lm) m.perplexity = guard([&] { return perplexity(generated, *lm, stride); });
  for (std::size_t n = 1; n <= kMaxN; ++n) {
    m.overlap_f1[n - 1] = ngram_overlap_f1(start, generated, n);
    m.topic_drift[n - 1] = topic_drift(start, generated, n);
    m.distinct[n - 1] = guard([&] { return distinct_n(generated, n); });
  }
  return m;
}

/// Mean of the defined values plus how many were undefined.
struct Aggregate {
  std::optional<double> mean;
  std::size_t missing = 0;
  bool operator==(const Aggregate&) const = default;
};

struct MetricsReport {
  std::string model;
  std::size_t scene_count = 0;    // scenes evaluated
  std::size_t missing_scenes = 0; // scenes absent from the run
  Aggregate sentences_per_speech, avg_sentence_length, perplexity;
  std::array<Aggregate, kMaxN> overlap_f1{}, topic_drift{}, distinct{};
};

namespace detail {

inline Aggregate aggregate(const std::vector<std::optional<double>>& values) {
  Aggregate a;
  double sum = 0;
  std::size_t count = 0;
  for (const auto& v : values) {
    if (!v) {
      ++a.missing;
      continue;
    }
    sum += *v;
    ++count;
  }
  if (count > 0) a.mean = sum / static_cast<double>(count);
  return a;
}

}  // namespace detail

/// Metrics of one model configuration: per-scene values averaged with equal
/// weight. Scenes without generated text are counted and left out.
inline MetricsReport evaluate_run(std::string model, const std::vector<SceneSample>& scenes, LanguageModel* lm,
                                  std::size_t stride = 100) {
  MetricsReport r;
  r.model = std::move(model);
  std::vector<SceneMetrics> per;
  for (const auto& s : scenes) {
    if (!s.generated) {
      ++r.missing_scenes;
      continue;
    }
    per.push_back(evaluate_scene(s.start, *s.generated, lm, stride));
  }
  r.scene_count = per.size();
  const auto collect = [&](auto member) {
    std::vector<std::optional<double>> v;
    for (const auto& m : per) v.push_back(member(m));
    return detail::aggregate(v);
  };
  r.sentences_per_speech = collect([](const SceneMetrics& m) { return m.sentences_per_speech; });
  r.avg_sentence_length = collect([](const SceneMetrics& m) { return m.avg_sentence_length; });
  r.perplexity = collect([](const SceneMetrics& m) { return m.perplexity; });
  for (std::size_t i = 0; i < kMaxN; ++i) {
    r.overlap_f1[i] = collect([i](const SceneMetrics& m) { return m.overlap_f1[i]; });
    r.topic_drift[i] = collect([i](const SceneMetrics& m) { return m.topic_drift[i]; });
    r.distinct[i] = collect([i](const SceneMetrics& m) { return m.distinct[i]; });
  }
  return r;
}

// ---------------------------------------------------------------------------

namespace detail {

inline std::string fmt_value(const std::optional<double>& v, bool percent, int decimals) {
  if (!v) return "-";
  char buf[64];
  if (percent) std::snprintf(buf, sizeof buf, "%.*f%%", decimals, *v * 100.0);
  else std::snprintf(buf, sizeof buf, "%.*f", decimals, *v);
  return buf;
}

inline nlohmann::ordered_json agg_json(const Aggregate& a) {
  return {{"mean", a.mean ? nlohmann::ordered_json(*a.mean) : nlohmann::ordered_json(nullptr)}, {"missing", a.missing}};
}

}  // namespace detail

/// Results table: one column per model, one row per metric.
inline std::string format_report_table(const std::vector<MetricsReport>& reports) {
  struct Row {
    std::string label;
    std::vector<std::string> cells;
  };
  std::vector<Row> rows;
  const auto add = [&](std::string label, auto get, bool percent, int decimals) {
    Row row{std::move(label), {}};
    for (const auto& r : reports) row.cells.push_back(detail::fmt_value(get(r).mean, percent, decimals));
    rows.push_back(std::move(row));
  };
  Row head{"", {}};
  for (const auto& r : reports) head.cells.push_back(r.model);
  rows.push_back(head);
  add("Sentences per speech", [](const MetricsReport& r) { return r.sentences_per_speech; }, false, 2);
  add("Sentence length", [](const MetricsReport& r) { return r.avg_sentence_length; }, false, 2);
  add("Perplexity", [](const MetricsReport& r) { return r.perplexity; }, false, 2);
  for (std::size_t n = 1; n <= kMaxN; ++n)
    add("Overlap F1 (" + std::to_string(n) + "-gram)", [n](const MetricsReport& r) { return r.overlap_f1[n - 1]; }, true, 1);
  for (std::size_t n = 2; n <= kMaxN; ++n)
    add("Topic drift (" + std::to_string(n) + "-gram)", [n](const MetricsReport& r) { return r.topic_drift[n - 1]; }, true, 2);
  for (std::size_t n = 1; n <= kMaxN; ++n)
    add("Distinct-" + std::to_string(n), [n](const MetricsReport& r) { return r.distinct[n - 1]; }, false, 3);
  Row count{"Scenes", {}};
  for (const auto& r : reports) count.cells.push_back(std::to_string(r.scene_count));
  rows.push_back(count);

  std::size_t label_w = 0;
  std::vector<std::size_t> col_w(reports.size(), 0);
  for (const auto& row : rows) {
    label_w = std::max(label_w, utf8::decode(row.label).size());
    for (std::size_t c = 0; c < row.cells.size(); ++c) col_w[c] = std::max(col_w[c], utf8::decode(row.cells[c]).size());
  }
  std::string out;
  for (const auto& row : rows) {
    std::string line = row.label + std::string(label_w - utf8::decode(row.label).size(), ' ');
    for (std::size_t c = 0; c < row.cells.size(); ++c)
      line += "  " + std::string(col_w[c] - utf8::decode(row.cells[c]).size(), ' ') + row.cells[c];
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
  }
  return out;
}

inline nlohmann::ordered_json report_json(const MetricsReport& r) {
  using json = nlohmann::ordered_json;
  json j;
  j["model"] = r.model;
  j["scene_count"] = r.scene_count;
  j["missing_scenes"] = r.missing_scenes;
  j["sentences_per_speech"] = detail::agg_json(r.sentences_per_speech);
  j["avg_sentence_length"] = detail::agg_json(r.avg_sentence_length);
  j["perplexity"] = detail::agg_json(r.perplexity);
  for (std::size_t n = 1; n <= kMaxN; ++n) j["overlap_f1_" + std::to_string(n)] = detail::agg_json(r.overlap_f1[n - 1]);
  for (std::size_t n = 2; n <= kMaxN; ++n) j["topic_drift_" + std::to_string(n)] = detail::agg_json(r.topic_drift[n - 1]);
  for (std::size_t n = 1; n <= kMaxN; ++n) j["distinct_" + std::to_string(n)] = detail::agg_json(r.distinct[n - 1]);
  return j;
}

}  // namespace dramagen
