#pragma once

// Pipeline configuration file: one `key = value` per line, `#` comments.

#include <array>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dramagen/error.hpp"
#include "dramagen/generator.hpp"
#include "dramagen/keywords.hpp"
#include "dramagen/lm_backend.hpp"
#include "dramagen/utf8.hpp"

namespace dramagen {

enum class OutlineMode { Extracted, TextRankKeywords, TfIdfKeywords, None };

inline std::string_view to_string(OutlineMode m) {
  switch (m) {
    case OutlineMode::Extracted: return "extracted";
    case OutlineMode::TextRankKeywords: return "textrank-kw";
    case OutlineMode::TfIdfKeywords: return "tfidf-kw";
    case OutlineMode::None: return "none";
  }
  return "none";
}

inline OutlineMode outline_mode_from(std::string_view s) {
  for (auto m : {OutlineMode::Extracted, OutlineMode::TextRankKeywords, OutlineMode::TfIdfKeywords, OutlineMode::None})
    if (to_string(m) == s) return m;
  throw ConfigError("unknown outline mode: " + std::string(s));
}

struct PipelineConfig {
  // paths
  std::string corpus_dir;   // GerDraCor TEI files
  std::string dta_dir;      // DTA TEI files (transliterated/normalized pairs)
  std::string lexicon;      // normalization lexicon TSV
  std::string work_dir = "work";

  // backend
  std::string backend = "mock";  // mock | remote
  std::string endpoint;
  std::int64_t timeout_ms = 120000;
  std::uint64_t mock_seed = 0;
  std::size_t max_context = 1024;
  std::size_t vocab_size = 100;

  // generation
  GenConfig gen{};
  OutlineMode outline_mode = OutlineMode::Extracted;
  std::size_t outline_budget = 250;
  std::size_t start_tokens = 100;
  std::size_t perplexity_stride = 100;

  // dataset / keywords
  std::uint64_t split_seed = 42;
  std::array<double, 3> split_ratios{0.8, 0.1, 0.1};
  KeywordMethod keyword_method = KeywordMethod::TextRank;
  std::size_t keyword_k = 10;

  std::size_t jobs = 0;  // 0: hardware concurrency
};

namespace detail {

inline std::string fmt_double(double v) {
  char buf[40];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);  // shortest round-trip form
  return std::string(buf, p);
}

template <typename T>
T parse_number(std::string_view key, std::string_view v) {
  T out{};
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ConfigError("config key '" + std::string(key) + "': invalid number '" + std::string(v) + "'");
  return out;
}

}  // namespace detail

inline std::string write_config(const PipelineConfig& c) {
  using detail::fmt_double;
  std::ostringstream o;
  const auto& g = c.gen;
  o << "corpus_dir = " << c.corpus_dir << "\n"
    << "dta_dir = " << c.dta_dir << "\n"
    << "lexicon = " << c.lexicon << "\n"
    << "work_dir = " << c.work_dir << "\n"
    << "backend = " << c.backend << "\n"
    << "endpoint = " << c.endpoint << "\n"
    << "timeout_ms = " << c.timeout_ms << "\n"
    << "mock_seed = " << c.mock_seed << "\n"
    << "max_context = " << c.max_context << "\n"
    << "vocab_size = " << c.vocab_size << "\n"
    << "max_iterations = " << g.max_iterations << "\n"
    << "prompt_budget = " << g.budget.prompt_budget << "\n"
    << "local_window = " << g.budget.local_window << "\n"
    << "per_iter_tokens = " << g.params.max_new_tokens << "\n"
    << "name_edit_threshold = " << g.name_edit_threshold << "\n"
    << "top_p = " << fmt_double(g.params.top_p) << "\n"
    << "repetition_penalty = " << fmt_double(g.params.repetition_penalty) << "\n"
    << "no_repeat_ngram = " << (g.params.no_repeat_ngram ? std::to_string(*g.params.no_repeat_ngram) : "0") << "\n"
    << "num_return_sequences = " << g.params.num_return_sequences << "\n"
    << "selection = " << (g.selection == Selection::FirstValid ? "first-valid" : "most-valid-lines") << "\n"
    << "outline_mode = " << to_string(c.outline_mode) << "\n"
    << "outline_budget = " << c.outline_budget << "\n"
    << "start_tokens = " << c.start_tokens << "\n"
    << "perplexity_stride = " << c.perplexity_stride << "\n"
    << "split_seed = " << c.split_seed << "\n"
    << "split_ratios = " << fmt_double(c.split_ratios[0]) << "," << fmt_double(c.split_ratios[1]) << ","
    << fmt_double(c.split_ratios[2]) << "\n"
    << "keyword_method = " << to_string(c.keyword_method) << "\n"
    << "keyword_k = " << c.keyword_k << "\n"
    << "jobs = " << c.jobs << "\n";
  return o.str();
}

/// Applies one `key = value` setting. Unknown keys are an error.
inline void set_config_value(PipelineConfig& c, std::string_view key, std::string_view v) {
  using detail::parse_number;
  auto& g = c.gen;
  const auto sz = [&] { return parse_number<std::size_t>(key, v); };
  const auto real = [&] { return parse_number<double>(key, v); };
  if (key == "corpus_dir") c.corpus_dir = v;
  else if (key == "dta_dir") c.dta_dir = v;
  else if (key == "lexicon") c.lexicon = v;
  else if (key == "work_dir") c.work_dir = v;
  else if (key == "backend") {
    if (v != "mock" && v != "remote") throw ConfigError("backend must be mock or remote");
    c.backend = v;
  } else if (key == "endpoint") c.endpoint = v;
  else if (key == "timeout_ms") c.timeout_ms = parse_number<std::int64_t>(key, v);
  else if (key == "mock_seed") c.mock_seed = parse_number<std::uint64_t>(key, v);
  else if (key == "max_context") c.max_context = sz();
  else if (key == "vocab_size") c.vocab_size = sz();
  else if (key == "max_iterations") g.max_iterations = sz();
  else if (key == "prompt_budget") g.budget.prompt_budget = sz();
  else if (key == "local_window") g.budget.local_window = sz();
  else if (key == "per_iter_tokens") g.params.max_new_tokens = sz();
  else if (key == "name_edit_threshold") g.name_edit_threshold = sz();
  else if (key == "top_p") g.params.top_p = real();
  else if (key == "repetition_penalty") g.params.repetition_penalty = real();
  else if (key == "no_repeat_ngram") {
    const auto n = sz();
    g.params.no_repeat_ngram = n == 0 ? std::nullopt : std::optional<std::size_t>(n);
  } else if (key == "num_return_sequences") g.params.num_return_sequences = sz();
  else if (key == "selection") {
    if (v == "first-valid") g.selection = Selection::FirstValid;
    else if (v == "most-valid-lines") g.selection = Selection::MostValidLines;
    else throw ConfigError("selection must be first-valid or most-valid-lines");
  } else if (key == "outline_mode") c.outline_mode = outline_mode_from(v);
  else if (key == "outline_budget") c.outline_budget = sz();
  else if (key == "start_tokens") c.start_tokens = sz();
  else if (key == "perplexity_stride") c.perplexity_stride = sz();
  else if (key == "split_seed") c.split_seed = parse_number<std::uint64_t>(key, v);
  else if (key == "split_ratios") {
    std::vector<double> parts;
    std::size_t pos = 0;
    while (true) {
      const auto comma = v.find(',', pos);
      parts.push_back(parse_number<double>(key, utf8::trim(v.substr(pos, comma == v.npos ? v.npos : comma - pos))));
      if (comma == v.npos) break;
      pos = comma + 1;
    }
    if (parts.size() != 3) throw ConfigError("split_ratios needs three values");
    const std::array<double, 3> r{parts[0], parts[1], parts[2]};
    c.split_ratios = r;
  } else if (key == "keyword_method") {
    if (v == "tfidf") c.keyword_method = KeywordMethod::TfIdf;
    else if (v == "textrank") c.keyword_method = KeywordMethod::TextRank;
    else throw ConfigError("keyword_method must be tfidf or textrank");
  } else if (key == "keyword_k") c.keyword_k = sz();
  else if (key == "jobs") c.jobs = sz();
  else throw ConfigError("unknown config key: " + std::string(key));
}

inline PipelineConfig parse_config(std::string_view text) {
  PipelineConfig c;
  std::size_t pos = 0, line_no = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = utf8::trim(text.substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    try {
      set_config_value(c, utf8::trim(line.substr(0, eq)), utf8::trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return c;
}

inline PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace dramagen
