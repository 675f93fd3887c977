#pragma once

// Iterative scene generation with rule-based post-editing.

#include <algorithm>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <spdlog/spdlog.h>

#include "json.hpp"

#include "dramagen/error.hpp"
#include "dramagen/lm_backend.hpp"
#include "dramagen/normalizer.hpp"
#include "dramagen/prompt.hpp"
#include "dramagen/textproc.hpp"
#include "dramagen/utf8.hpp"

namespace dramagen {

enum class Selection { FirstValid, MostValidLines };

struct GenConfig {
  std::size_t max_iterations = 15;
  PromptBudget budget{};
  std::size_t name_edit_threshold = 2;
  SamplingParams params = SamplingParams::generation_defaults();
  Selection selection = Selection::FirstValid;
  Markers markers{};

  std::size_t per_iter_tokens() const noexcept { return params.max_new_tokens; }
};

// ---------------------------------------------------------------------------

/// Speaker names of `Name:` header lines, first spelling kept, duplicates
/// (ignoring case) dropped.
inline std::vector<std::string> extract_cast(std::string_view start, std::string_view outline = {}) {
  std::vector<std::string> cast;
  std::set<std::string> seen;
  for (auto text : {start, outline}) {
    for (const auto& block : parse_speeches(text)) {
      if (!block.speaker) continue;
      if (seen.insert(utf8::lower(*block.speaker)).second) cast.push_back(*block.speaker);
    }
  }
  if (cast.empty()) spdlog::warn("no speaker names found in scene start or outline; names will not be corrected");
  return cast;
}

struct SpeakerCheck {
  enum Kind { Keep, Corrected, Invalid } kind = Invalid;
  std::string name;  // canonical cast spelling for Keep/Corrected
  std::size_t distance = 0;
  bool operator==(const SpeakerCheck&) const = default;
};

/// Case-insensitive match against the cast; the nearest name within
/// `threshold` edits replaces an unknown one. An empty cast keeps every name.
inline SpeakerCheck correct_speaker(std::string_view name, const std::vector<std::string>& cast,
                                    std::size_t threshold = 2) {
  if (cast.empty()) return {SpeakerCheck::Keep, std::string(name), 0};
  const auto key = utf8::lower(name);
  std::optional<std::size_t> best;
  std::size_t best_d = 0;
  for (std::size_t i = 0; i < cast.size(); ++i) {
    const auto d = levenshtein(key, utf8::lower(cast[i]));
    if (!best || d < best_d || (d == best_d && cast[i] < cast[*best])) {
      best = i;
      best_d = d;
    }
  }
  if (best_d == 0) return {SpeakerCheck::Keep, cast[*best], 0};
  if (best_d <= threshold) return {SpeakerCheck::Corrected, cast[*best], best_d};
  return {SpeakerCheck::Invalid, std::string(name), best_d};
}

// ---------------------------------------------------------------------------

struct LineVerdict {
  std::optional<std::string> speaker;  // as written in the candidate
  std::string text;                    // empty for a header without speech
  std::string verdict;                 // kept | corrected | duplicate | invalid_speaker | empty_speech
  bool operator==(const LineVerdict&) const = default;
};

struct CandidateReport {
  std::vector<LineVerdict> lines;
  std::string text;  // post-edited text to append
  std::size_t valid_lines = 0;
  bool end_of_text = false;
  bool accepted() const noexcept { return valid_lines > 0 || (end_of_text && lines.empty()); }
};

struct PosteditResult {
  std::vector<CandidateReport> reports;
  std::optional<std::size_t> selected;
  bool accepted() const noexcept { return selected.has_value(); }
  const CandidateReport& chosen() const { return reports.at(*selected); }
};

namespace detail {

inline std::set<std::string> text_lines(std::string_view generated) {
  std::set<std::string> out;
  for (const auto& block : parse_speeches(generated))
    for (const auto& l : block.lines) out.insert(l);
  return out;
}

}  // namespace detail

/// Post-edits one candidate: text after the end-of-text marker is cut; lines
/// already present in the generated text (or earlier in the candidate) are
/// dropped; speakers are corrected or, when unknown, removed with their
/// speech; headers left without speech are removed. Text before the first
/// header continues the previous speech.
inline CandidateReport postedit_candidate(std::string_view candidate, const std::set<std::string>& existing,
                                          const std::vector<std::string>& cast, const GenConfig& cfg) {
  CandidateReport r;
  if (auto at = candidate.find(cfg.markers.end_of_text); at != std::string_view::npos) {
    candidate = candidate.substr(0, at);
    r.end_of_text = true;
  }
  auto seen = existing;
  std::vector<SpeechBlock> kept;
  for (const auto& block : parse_speeches(candidate)) {
    std::optional<std::string> speaker;
    std::string header_verdict = "kept";
    if (block.speaker) {
      const auto check = correct_speaker(*block.speaker, cast, cfg.name_edit_threshold);
      if (check.kind == SpeakerCheck::Invalid) {
        if (block.lines.empty()) r.lines.push_back({block.speaker, {}, "invalid_speaker"});
        for (const auto& l : block.lines) r.lines.push_back({block.speaker, l, "invalid_speaker"});
        continue;
      }
      speaker = check.name;
      if (check.kind == SpeakerCheck::Corrected) header_verdict = "corrected";
    }
    SpeechBlock out{speaker, {}};
    for (const auto& l : block.lines) {
      if (!seen.insert(l).second) {
        r.lines.push_back({block.speaker, l, "duplicate"});
        continue;
      }
      r.lines.push_back({block.speaker, l, header_verdict});
      out.lines.push_back(l);
    }
    if (out.lines.empty()) {
      if (block.lines.empty()) r.lines.push_back({block.speaker, {}, "empty_speech"});
      continue;
    }
    r.valid_lines += out.lines.size();
    kept.push_back(std::move(out));
  }
  r.text = render_speeches(kept);
  return r;
}

inline PosteditResult postedit(const std::vector<std::string>& candidates, std::string_view generated,
                               const std::vector<std::string>& cast, const GenConfig& cfg) {
  PosteditResult out;
  const auto existing = detail::text_lines(generated);
  for (const auto& c : candidates) out.reports.push_back(postedit_candidate(c, existing, cast, cfg));
  for (std::size_t i = 0; i < out.reports.size(); ++i) {
    if (!out.reports[i].accepted()) continue;
    if (!out.selected) {
      out.selected = i;
      if (cfg.selection == Selection::FirstValid) break;
    } else if (out.reports[i].valid_lines > out.reports[*out.selected].valid_lines) {
      out.selected = i;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

struct TraceRecord {
  std::size_t iteration = 0;
  bool backoff = false;  // regenerated without outline
  std::string prompt;
  std::size_t prompt_tokens = 0;
  std::size_t local_tokens = 0;
  std::vector<std::string> candidates;
  PosteditResult result;
};

struct SceneResult {
  std::string start;
  std::string continuation;
  std::vector<TraceRecord> trace;
  std::size_t iterations = 0;
  bool ended = false;  // end-of-text reached
  std::string text() const { return start + continuation; }
};

/// Backend failure mid-scene; carries everything generated so far.
class GenerationAborted : public Error {
 public:
  GenerationAborted(const std::string& what, SceneResult partial)
      : Error(what), partial_(std::move(partial)) {}
  const SceneResult& partial() const noexcept { return partial_; }

 private:
  SceneResult partial_;
};

inline nlohmann::ordered_json trace_json(const TraceRecord& t) {
  using json = nlohmann::ordered_json;
  json reports = json::array();
  for (const auto& r : t.result.reports) {
    json lines = json::array();
    for (const auto& l : r.lines)
      lines.push_back(json{{"speaker", l.speaker ? json(*l.speaker) : json(nullptr)}, {"text", l.text},
                           {"verdict", l.verdict}});
    reports.push_back(json{{"lines", lines}, {"valid_lines", r.valid_lines}, {"end_of_text", r.end_of_text}});
  }
  return json{{"iteration", t.iteration},
              {"backoff", t.backoff},
              {"prompt", t.prompt},
              {"prompt_tokens", t.prompt_tokens},
              {"local_tokens", t.local_tokens},
              {"candidates", t.candidates},
              {"reports", reports},
              {"verdict", t.result.accepted() ? "accepted" : "backoff"},
              {"selected", t.result.selected ? json(*t.result.selected) : json(nullptr)},
              {"accepted_text", t.result.accepted() ? json(t.result.chosen().text) : json(nullptr)}};
}

/// One trace record per line.
inline std::string trace_jsonl(const std::vector<TraceRecord>& trace) {
  std::string out;
  for (const auto& t : trace) out += trace_json(t).dump() + "\n";
  return out;
}

/// Leading whole lines of a scene text holding at least `min_tokens` tokens.
/// Returns {start, rest}.
inline std::pair<std::string, std::string> split_scene_start(std::string_view text, const Tokenizer& tok,
                                                             std::size_t min_tokens = 100) {
  std::size_t pos = 0, count = 0;
  while (pos < text.size() && count < min_tokens) {
    auto nl = text.find('\n', pos);
    nl = nl == std::string_view::npos ? text.size() : nl + 1;
    count += tok.count_tokens(text.substr(pos, nl - pos));
    pos = nl;
  }
  return {std::string(text.substr(0, pos)), std::string(text.substr(pos))};
}

/// Generates a scene continuation. Each iteration assembles the prompt,
/// samples candidates, post-edits them and appends the selected one; when no
/// candidate is usable the iteration is retried once without outline. Stops
/// after an accepted end-of-text or `max_iterations`.
inline SceneResult generate_scene(std::string_view start, const std::optional<std::string>& outline,
                                  LanguageModel& backend, const GenConfig& cfg) {
  if (utf8::trim(start).empty()) throw ConfigError("scene start is empty");
  SceneResult res;
  res.start = std::string(start);
  if (res.start.back() != '\n') res.start += '\n';
  const std::string outline_text = outline.value_or(std::string());
  const auto cast = extract_cast(res.start, outline_text);

  const auto attempt = [&](std::string_view outl, bool backoff) -> const TraceRecord& {
    TraceRecord rec;
    rec.iteration = res.iterations;
    rec.backoff = backoff;
    const std::string generated = res.text();
    const auto prompt = assemble_prompt(outl, generated, backend, cfg.budget, cfg.markers);
    rec.prompt = prompt.text;
    rec.prompt_tokens = prompt.tokens;
    rec.local_tokens = prompt.local_tokens;
    try {
      rec.candidates = backend.generate(prompt.text, cfg.params);
    } catch (const Error& e) {
      res.trace.push_back(rec);
      throw GenerationAborted(std::string("iteration ") + std::to_string(res.iterations) + ": " + e.what(), res);
    }
    rec.result = postedit(rec.candidates, generated, cast, cfg);
    res.trace.push_back(std::move(rec));
    return res.trace.back();
  };

  while (res.iterations < cfg.max_iterations) {
    ++res.iterations;
    const TraceRecord* rec = &attempt(outline_text, false);
    if (!rec->result.accepted() && !outline_text.empty()) rec = &attempt({}, true);
    if (!rec->result.accepted()) continue;
    const auto& chosen = rec->result.chosen();
    res.continuation += chosen.text;
    if (chosen.end_of_text) {
      res.ended = true;
      break;
    }
  }
  return res;
}

}  // namespace dramagen
