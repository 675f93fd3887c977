// dramagen: command-line driver for the drama generation pipeline.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"

#include "dramagen/pipeline.hpp"

namespace {

using namespace dramagen;

struct GlobalOptions {
  std::string config_path;
  std::optional<std::string> backend;
  std::optional<std::string> endpoint;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> jobs;
  std::optional<std::string> outline_mode;
  std::optional<std::string> work_dir;
  std::vector<std::string> set;
  bool verbose = false;
  bool quiet = false;
};

PipelineConfig effective_config(const GlobalOptions& g) {
  PipelineConfig c = g.config_path.empty() ? PipelineConfig{} : load_config(g.config_path);
  for (const auto& kv : g.set) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    set_config_value(c, utf8::trim(std::string_view(kv).substr(0, eq)), utf8::trim(std::string_view(kv).substr(eq + 1)));
  }
  if (g.work_dir) c.work_dir = *g.work_dir;
  if (g.backend) set_config_value(c, "backend", *g.backend);
  if (g.seed) c.mock_seed = *g.seed;
  if (g.jobs) c.jobs = *g.jobs;
  if (g.outline_mode) c.outline_mode = outline_mode_from(*g.outline_mode);
  if (c.backend == "remote") c.endpoint = resolve_endpoint(g.endpoint, c.endpoint);
  c.gen.params.validate();
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_mt("dramagen"));
  spdlog::set_pattern("[%l] %v");

  CLI::App app{"German drama generation pipeline: corpus parsing, spelling normalization, outlines, "
               "keywords, training data, scene generation and evaluation."};
  app.require_subcommand(1);
  GlobalOptions g;
  app.add_option("--config", g.config_path, "Pipeline config file (key = value lines)")->check(CLI::ExistingFile);
  app.add_option("--backend", g.backend, "Language model backend")->check(CLI::IsMember({"mock", "remote"}));
  app.add_option("--endpoint", g.endpoint,
                 "Remote backend URL; overrides " + std::string(kEndpointEnv) + " and the config file");
  app.add_option("--seed", g.seed, "Seed for the backend (mock sampling, remote sampling seed)");
  app.add_option("--jobs", g.jobs, "Parallel workers (default: available cores)");
  app.add_option("--outline-mode", g.outline_mode, "Outline used in generation prompts")
      ->check(CLI::IsMember({"extracted", "textrank-kw", "tfidf-kw", "none"}));
  app.add_option("--work-dir", g.work_dir, "Artifact directory (default from config: work)");
  app.add_option("--set", g.set, "Override a config key (key=value, repeatable)");
  app.add_flag("-v,--verbose", g.verbose, "Debug logging");
  app.add_flag("-q,--quiet", g.quiet, "Only log warnings and errors");

  // parse
  auto* parse = app.add_subcommand("parse", "TEI files -> tagged corpus (corpus.txt)");
  std::vector<std::string> parse_inputs;
  std::string parse_source = "gerdracor", parse_mode = "speeches";
  std::optional<std::string> parse_lexicon;
  bool no_dedup = false;
  parse->add_option("inputs", parse_inputs, "TEI files or directories")->required()->check(CLI::ExistingPath);
  parse->add_option("--source", parse_source, "Corpus kind")->check(CLI::IsMember({"gerdracor", "dta"}));
  parse->add_option("--mode", parse_mode, "Keep speeches only or also stage directions")
      ->check(CLI::IsMember({"speeches", "full"}));
  parse->add_option("--lexicon", parse_lexicon, "Normalization lexicon TSV applied to GerDraCor text")
      ->check(CLI::ExistingFile);
  parse->add_flag("--no-dedup", no_dedup, "Keep dramas with duplicate titles");

  // build-lexicon
  auto* lexicon = app.add_subcommand("build-lexicon", "Aligned DTA texts -> lexicon.tsv + lexicon_audit.tsv");
  std::vector<std::string> lex_trans, lex_norm;
  std::string lex_filter = "levenshtein";
  std::size_t lev_threshold = 3;
  double gestalt_min = 0.5;
  lexicon->add_option("--transliterated", lex_trans, "Transliterated text files (repeatable)")
      ->required()->check(CLI::ExistingFile);
  lexicon->add_option("--normalized", lex_norm, "Normalized text files, same order")
      ->required()->check(CLI::ExistingFile);
  lexicon->add_option("--filter", lex_filter, "Pair filter")->check(CLI::IsMember({"levenshtein", "gestalt"}));
  lexicon->add_option("--threshold", lev_threshold, "Levenshtein: exclude pairs at this distance or more");
  lexicon->add_option("--min-ratio", gestalt_min, "Gestalt: exclude pairs below this ratio");

  // outline / keywords / dataset
  app.add_subcommand("outline", "Scenes -> gold outlines (outlines.jsonl)");
  auto* keywords = app.add_subcommand("keywords", "Outlines -> keywords (keywords.tsv)");
  std::optional<std::string> kw_method;
  std::optional<std::size_t> kw_k;
  keywords->add_option("--method", kw_method, "Keyword extractor")->check(CLI::IsMember({"tfidf", "textrank"}));
  keywords->add_option("-k", kw_k, "Keywords per scene (1-10)");
  auto* dataset = app.add_subcommand("dataset", "Split + training instances (split.json, dataset/*.jsonl)");
  std::optional<std::uint64_t> split_seed;
  dataset->add_option("--split-seed", split_seed, "Seed of the train/dev/test split");

  // generate / evaluate
  auto* generate = app.add_subcommand("generate", "Test scene starts + outlines -> generated scenes and traces");
  std::optional<std::string> run_label;
  std::size_t gen_limit = 100;
  bool resume = false;
  generate->add_option("--label", run_label, "Run name under runs/ (default: outline mode)");
  generate->add_option("--limit", gen_limit, "Number of test scenes");
  generate->add_flag("--resume", resume, "Keep scenes finished by an earlier run");
  auto* evaluate = app.add_subcommand("evaluate", "All runs + human scenes -> report.txt, report.json");
  std::size_t eval_limit = 100;
  evaluate->add_option("--limit", eval_limit, "Number of test scenes");

  auto* show_config = app.add_subcommand("config", "Print the effective configuration");

  CLI11_PARSE(app, argc, argv);
  if (g.verbose) spdlog::set_level(spdlog::level::debug);
  if (g.quiet) spdlog::set_level(spdlog::level::warn);

  try {
    auto cfg = effective_config(g);
    if (kw_method) set_config_value(cfg, "keyword_method", *kw_method);
    if (kw_k) cfg.keyword_k = *kw_k;
    if (split_seed) cfg.split_seed = *split_seed;
    const Pipeline pipe(cfg);

    if (*show_config) {
      std::cout << write_config(cfg);
    } else if (*parse) {
      Pipeline::ParseRequest req;
      for (const auto& p : parse_inputs) req.inputs.emplace_back(p);
      req.source = parse_source == "dta" ? SourceKind::DTA : SourceKind::GerDraCor;
      req.mode = parse_mode == "full" ? TaggedMode::Full : TaggedMode::SpeechesOnly;
      req.dedup = !no_dedup;
      if (parse_lexicon) req.lexicon = *parse_lexicon;
      pipe.parse(req);
    } else if (*lexicon) {
      std::vector<fs::path> t(lex_trans.begin(), lex_trans.end()), n(lex_norm.begin(), lex_norm.end());
      const FilterMethod f = lex_filter == "gestalt" ? FilterMethod{GestaltFilter{gestalt_min}}
                                                     : FilterMethod{LevenshteinFilter{lev_threshold}};
      spdlog::info("lexicon: {} entries", pipe.build_lexicon(t, n, f));
    } else if (app.got_subcommand("outline")) {
      spdlog::info("outlines: {}", pipe.outline());
    } else if (*keywords) {
      spdlog::info("keyword sets: {}", pipe.keywords());
    } else if (*dataset) {
      const auto s = pipe.dataset();
      spdlog::info("split: {} train, {} dev, {} test", s.train.size(), s.dev.size(), s.test.size());
    } else if (*generate) {
      const auto label = run_label.value_or(std::string(to_string(cfg.outline_mode)));
      if (label.empty() || label.find_first_of("/\\") != std::string::npos || label == "." || label == "..")
        throw ConfigError("invalid run label '" + label + "'");
      const auto sum = pipe.generate(label, gen_limit, resume);
      if (sum.failed > 0) return 1;
    } else if (*evaluate) {
      const auto reports = pipe.evaluate(eval_limit);
      std::cerr << format_report_table(reports);
    }
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
