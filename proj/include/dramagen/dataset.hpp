#pragma once

// Training instances for the outline and generation models, and the
// train/dev/test split.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "dramagen/error.hpp"
#include "dramagen/keywords.hpp"
#include "dramagen/prompt.hpp"
#include "dramagen/tokenizer.hpp"

namespace dramagen {

struct OutlineInstance {
  KeywordSet keywords;
  std::string outline_text;
  std::string serialized;  // BOS + keywords + SEP + outline + EOS
};

namespace detail {

inline void reject_markers(std::string_view what, std::string_view text, const Markers& m) {
  for (auto mk : m.all())
    if (!mk.empty() && text.find(mk) != std::string_view::npos)
      throw ConfigError(std::string(what) + " contains the marker " + std::string(mk));
}

}  // namespace detail

inline std::string join_keywords(const std::vector<std::string>& words) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i > 0) out += ", ";
    out += words[i];
  }
  return out;
}

/// Outline-model input at inference time: BOS + keywords + SEP.
inline std::string outline_prompt(const KeywordSet& keywords, const Markers& m = {}) {
  if (keywords.terms.empty()) throw ConfigError("empty keyword set");
  const auto joined = join_keywords(keywords.words());
  detail::reject_markers("keywords", joined, m);
  return m.bos + joined + m.sep;
}

inline OutlineInstance build_outline_instance(const KeywordSet& keywords, std::string_view outline,
                                              const Markers& m = {}) {
  if (utf8::trim(outline).empty()) throw ConfigError("empty outline");
  detail::reject_markers("outline", outline, m);
  OutlineInstance inst{keywords, std::string(outline), outline_prompt(keywords, m)};
  inst.serialized += outline;
  inst.serialized += m.eos;
  return inst;
}

struct GenerationInstance {
  std::string outline;
  std::string remote_summary;
  std::string local_context;
  std::string prompt;
  std::string target;
  std::size_t prompt_tokens = 0;
  std::size_t target_tokens = 0;
};

/// Slides a window of `target_tokens` tokens over the scene text followed by
/// the end-of-text marker. Targets partition that stream: each one runs from
/// its first token up to the next window's first token. The prompt of each
/// window is assembled from the outline and all text before the window.
inline std::vector<GenerationInstance> build_generation_instances(std::string_view scene_text,
                                                                  std::string_view outline, const Tokenizer& tok,
                                                                  const PromptBudget& budget = {},
                                                                  std::size_t target_tokens = 100,
                                                                  const Markers& m = {}) {
  if (target_tokens == 0) throw ConfigError("target window must be positive");
  const std::string stream = std::string(scene_text) + m.end_of_text;
  const auto spans = tok.tokenize(stream);
  std::vector<GenerationInstance> out;
  for (std::size_t first = 0; first < spans.size(); first += target_tokens) {
    const std::size_t last = std::min(first + target_tokens, spans.size());
    const std::size_t begin = first == 0 ? 0 : spans[first].begin;
    const std::size_t end = last == spans.size() ? stream.size() : spans[last].begin;
    const auto p = assemble_prompt(outline, std::string_view(stream).substr(0, begin), tok, budget, m);
    GenerationInstance inst;
    inst.outline = p.outline;
    inst.remote_summary = p.remote;
    inst.local_context = p.local;
    inst.prompt = p.text;
    inst.prompt_tokens = p.tokens;
    inst.target = stream.substr(begin, end - begin);
    inst.target_tokens = last - first;
    out.push_back(std::move(inst));
  }
  return out;
}

// ---------------------------------------------------------------------------

struct CorpusSplit {
  std::vector<std::string> train, dev, test;
  std::uint64_t seed = 0;
};

inline constexpr std::uint64_t kDefaultSplitSeed = 42;

/// Deterministic split by drama: ids are sorted, shuffled with a seeded
/// Fisher-Yates pass (mt19937_64, unbiased bounded draws) and cut into
/// contiguous parts. Sizes are rounded; every part gets at least one id.
inline CorpusSplit split_corpus(std::vector<std::string> ids, std::array<double, 3> ratios = {0.8, 0.1, 0.1},
                                std::uint64_t seed = kDefaultSplitSeed) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  if (ids.size() < 3) throw ConfigError("need at least 3 dramas to split, got " + std::to_string(ids.size()));
  for (double r : ratios)
    if (r < 0) throw ConfigError("split ratios must be non-negative");
  if (std::abs(ratios[0] + ratios[1] + ratios[2] - 1.0) > 1e-9) throw ConfigError("split ratios must sum to 1");

  std::mt19937_64 rng(seed);
  const auto bounded = [&](std::uint64_t n) {  // uniform in [0, n)
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do x = rng();
    while (x >= limit);
    return x % n;
  };
  for (std::size_t i = ids.size() - 1; i > 0; --i) std::swap(ids[i], ids[bounded(i + 1)]);

  const std::size_t n = ids.size();
  std::size_t n_dev = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(ratios[1] * static_cast<double>(n))));
  std::size_t n_test = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(ratios[2] * static_cast<double>(n))));
  while (n_dev + n_test > n - 1) (n_dev >= n_test ? n_dev : n_test)--;
  const std::size_t n_train = n - n_dev - n_test;

  CorpusSplit s;
  s.seed = seed;
  s.train.assign(ids.begin(), ids.begin() + static_cast<long>(n_train));
  s.dev.assign(ids.begin() + static_cast<long>(n_train), ids.begin() + static_cast<long>(n_train + n_dev));
  s.test.assign(ids.begin() + static_cast<long>(n_train + n_dev), ids.end());
  return s;
}

inline nlohmann::ordered_json split_json(const CorpusSplit& s) {
  return {{"seed", s.seed}, {"train", s.train}, {"dev", s.dev}, {"test", s.test}};
}

inline CorpusSplit split_from_json(const nlohmann::ordered_json& j) {
  CorpusSplit s;
  s.seed = j.at("seed").get<std::uint64_t>();
  s.train = j.at("train").get<std::vector<std::string>>();
  s.dev = j.at("dev").get<std::vector<std::string>>();
  s.test = j.at("test").get<std::vector<std::string>>();
  return s;
}

// ---------------------------------------------------------------------------

/// One exported record; fields are written in a fixed order.
struct ExportRecord {
  std::string drama_id;
  std::size_t scene_index = 0;
  std::string kind;  // "outline" or "generation"
  std::string prompt;
  std::string target;
};

inline std::string export_line(const ExportRecord& r) {
  nlohmann::ordered_json j;
  j["drama_id"] = r.drama_id;
  j["scene_index"] = r.scene_index;
  j["kind"] = r.kind;
  j["prompt"] = r.prompt;
  j["target"] = r.target;
  return j.dump() + "\n";
}

inline ExportRecord outline_record(std::string_view drama_id, std::size_t scene, const OutlineInstance& inst,
                                   const Markers& m = {}) {
  return {std::string(drama_id), scene, "outline", outline_prompt(inst.keywords, m), inst.outline_text + m.eos};
}

inline ExportRecord generation_record(std::string_view drama_id, std::size_t scene, const GenerationInstance& inst) {
  return {std::string(drama_id), scene, "generation", inst.prompt, inst.target};
}

}  // namespace dramagen
