#pragma once

// Pipeline stages over a work directory. Each stage reads the artifacts of
// earlier stages and writes its own:
//
//   parse          corpus.txt
//   build-lexicon  lexicon.tsv, lexicon_audit.tsv
//   outline        outlines.jsonl
//   keywords       keywords.tsv
//   dataset        split.json, dataset/{train,dev,test}.jsonl
//   generate       runs/<label>/scenes/<drama>_<scene>.json, traces/..., scenes.jsonl
//   evaluate       report.txt, report.json

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <spdlog/spdlog.h>

#include "json.hpp"

#include "dramagen/config.hpp"
#include "dramagen/corpus.hpp"
#include "dramagen/dataset.hpp"
#include "dramagen/generator.hpp"
#include "dramagen/keywords.hpp"
#include "dramagen/lm_backend.hpp"
#include "dramagen/metrics.hpp"
#include "dramagen/normalizer.hpp"
#include "dramagen/remote_backend.hpp"
#include "dramagen/textproc.hpp"

namespace dramagen {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// File helpers.

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("missing artifact: " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Writes through a temporary file so readers never see partial artifacts.
inline void write_file(const fs::path& p, std::string_view content) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  const fs::path tmp = p.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("write failed: " + tmp.string());
  }
  fs::rename(tmp, p);
}

inline std::vector<ojson> read_jsonl(const fs::path& p) {
  std::vector<ojson> out;
  std::istringstream in(read_file(p));
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (utf8::trim(line).empty()) continue;
    try {
      out.push_back(ojson::parse(line));
    } catch (const ojson::exception& e) {
      throw Error(p.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

/// Runs fn(0..n-1) on up to `jobs` threads (0: hardware concurrency). The
/// first exception is rethrown after all workers stop.
inline void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min(jobs, n);
  if (jobs <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < jobs; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!error) error = std::current_exception();
          next = n;
        }
      }
    });
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

inline std::string scene_key(std::string_view drama_id, std::size_t scene) {
  return std::string(drama_id) + "_" + std::to_string(scene);
}

// ---------------------------------------------------------------------------

/// Backend for one unit of work. Mock backends are seeded from the global
/// seed and `key`, so results do not depend on scheduling.
inline std::unique_ptr<LanguageModel> make_backend(const PipelineConfig& c, std::string_view key,
                                                   MockConfig::Scoring scoring = MockConfig::Scoring::Uniform) {
  if (c.backend == "remote") {
    RemoteConfig rc;
    rc.endpoint = resolve_endpoint(std::nullopt, c.endpoint);
    rc.timeout = std::chrono::milliseconds(c.timeout_ms);
    rc.seed = c.mock_seed;
    return std::make_unique<RemoteBackend>(rc);
  }
  MockConfig mc;
  mc.seed = c.mock_seed ^ fnv1a(key);
  mc.max_context = c.max_context;
  mc.vocab_size = c.vocab_size;
  mc.scoring = scoring;
  mc.markers = c.gen.markers;
  return std::make_unique<MockBackend>(mc);
}

class Pipeline {
 public:
  explicit Pipeline(PipelineConfig cfg) : cfg_(std::move(cfg)), dir_(cfg_.work_dir) {}

  const PipelineConfig& config() const noexcept { return cfg_; }
  fs::path path(const std::string& rel) const { return dir_ / rel; }

  // -- parse ---------------------------------------------------------------

  struct ParseRequest {
    std::vector<fs::path> inputs;  // TEI files or directories of *.xml
    SourceKind source = SourceKind::GerDraCor;
    TaggedMode mode = TaggedMode::SpeechesOnly;
    bool dedup = true;
    std::optional<fs::path> lexicon;
  };

  std::size_t parse(const ParseRequest& req) const {
    std::vector<fs::path> files;
    for (const auto& in : req.inputs) {
      if (fs::is_directory(in)) {
        for (const auto& e : fs::directory_iterator(in))
          if (e.is_regular_file() && e.path().extension() == ".xml") files.push_back(e.path());
      } else {
        files.push_back(in);
      }
    }
    std::sort(files.begin(), files.end());
    std::optional<NormalizationLexicon> lex;
    if (req.lexicon) {
      std::istringstream in(read_file(*req.lexicon));
      lex = NormalizationLexicon::read_tsv(in);
    }
    std::vector<std::optional<Drama>> parsed(files.size());
    std::atomic<std::size_t> failed{0};
    parallel_for(files.size(), cfg_.jobs, [&](std::size_t i) {
      ParseOptions o;
      o.source = req.source;
      o.lexicon = lex ? &*lex : nullptr;
      o.fallback_id = files[i].stem().string();
      try {
        parsed[i] = parse_tei(read_file(files[i]), o);
      } catch (const XmlParseError& e) {
        spdlog::error("{}: {}", files[i].string(), e.what());
        ++failed;
      }
    });
    std::vector<Drama> dramas;
    for (auto& d : parsed)
      if (d) dramas.push_back(std::move(*d));
    if (req.dedup) dramas = deduplicate_by_title(std::move(dramas));
    write_file(path("corpus.txt"), write_tagged(dramas, req.mode));
    spdlog::info("parsed {} dramas ({} failed)", dramas.size(), failed.load());
    if (failed > 0) throw Error(std::to_string(failed.load()) + " file(s) failed to parse");
    return dramas.size();
  }

  std::vector<Drama> corpus() const { return read_tagged(read_file(path("corpus.txt"))); }

  // -- build-lexicon -------------------------------------------------------

  /// Line-aligned transliterated/normalized text pairs.
  std::size_t build_lexicon(const std::vector<fs::path>& transliterated, const std::vector<fs::path>& normalized,
                            const FilterMethod& filter) const {
    if (transliterated.size() != normalized.size())
      throw ConfigError("need the same number of transliterated and normalized files");
    const auto lines = [](const fs::path& p) {
      std::vector<std::string> out;
      std::istringstream in(read_file(p));
      std::string l;
      while (std::getline(in, l)) {
        if (!l.empty() && l.back() == '\r') l.pop_back();
        out.push_back(l);
      }
      return out;
    };
    std::vector<WordPair> all;
    for (std::size_t i = 0; i < transliterated.size(); ++i) {
      try {
        auto pairs = filter_pairs(collect_word_pairs(lines(transliterated[i]), lines(normalized[i])), filter);
        all.insert(all.end(), pairs.begin(), pairs.end());
      } catch (const AlignmentError& e) {
        throw Error(transliterated[i].string() + ": " + e.what());
      }
    }
    const auto lex = NormalizationLexicon::from_pairs(all);
    std::ostringstream tsv, audit;
    lex.write_tsv(tsv);
    write_filter_report(audit, all);
    write_file(path("lexicon.tsv"), tsv.str());
    write_file(path("lexicon_audit.tsv"), audit.str());
    return lex.size();
  }

  // -- outline -------------------------------------------------------------

  struct OutlineRecord {
    std::string drama_id;
    std::size_t scene_index = 0;
    Outline outline;
  };

  std::size_t outline() const {
    const auto dramas = corpus();
    std::vector<std::pair<const Drama*, const Scene*>> scenes;
    for (const auto& d : dramas)
      for (const auto& s : d.scenes) scenes.emplace_back(&d, &s);
    std::vector<std::optional<std::string>> lines(scenes.size());
    parallel_for(scenes.size(), cfg_.jobs, [&](std::size_t i) {
      const auto& [d, s] = scenes[i];
      const auto tok = make_backend(cfg_, scene_key(d->id, s->index));
      try {
        const auto o = gold_outline(*s, cfg_.outline_budget, *tok);
        if (o.lines.empty()) return;
        ojson j;
        j["drama_id"] = d->id;
        j["scene_index"] = s->index;
        j["outline"] = o.text(true);
        j["outline_plain"] = o.text(false);
        j["tokens"] = o.token_count;
        lines[i] = j.dump() + "\n";
      } catch (const Error& e) {
        spdlog::warn("{} scene {}: {}", d->id, s->index, e.what());
      }
    });
    std::string out;
    std::size_t n = 0;
    for (const auto& l : lines)
      if (l) {
        out += *l;
        ++n;
      }
    write_file(path("outlines.jsonl"), out);
    return n;
  }

  /// (drama, scene) -> outline record fields.
  std::map<std::pair<std::string, std::size_t>, ojson> outlines() const {
    std::map<std::pair<std::string, std::size_t>, ojson> out;
    for (auto& j : read_jsonl(path("outlines.jsonl")))
      out[{j.at("drama_id").get<std::string>(), j.at("scene_index").get<std::size_t>()}] = j;
    return out;
  }

  // -- keywords ------------------------------------------------------------

  TermStats outline_term_stats() const {
    TermStats stats;
    for (const auto& [_, j] : outlines()) stats.add_document(j.at("outline_plain").get<std::string>());
    return stats;
  }

  KeywordSet keywords_for(std::string_view outline_plain, KeywordMethod method, const TermStats& stats) const {
    return method == KeywordMethod::TfIdf ? tfidf_keywords(outline_plain, stats, cfg_.keyword_k)
                                          : textrank_keywords(outline_plain, cfg_.keyword_k);
  }

  std::size_t keywords() const {
    const auto all = outlines();
    const auto stats = outline_term_stats();
    std::string out;
    for (const auto& [key, j] : all)
      out += keyword_line(key.first, key.second,
                          keywords_for(j.at("outline_plain").get<std::string>(), cfg_.keyword_method, stats)) +
             "\n";
    write_file(path("keywords.tsv"), out);
    return all.size();
  }

  std::map<std::pair<std::string, std::size_t>, KeywordSet> read_keywords() const {
    std::map<std::pair<std::string, std::size_t>, KeywordSet> out;
    std::istringstream in(read_file(path("keywords.tsv")));
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::vector<std::string> cols;
      std::size_t pos = 0;
      for (int c = 0; c < 3; ++c) {
        const auto tab = line.find('\t', pos);
        if (tab == std::string::npos) throw Error("keywords.tsv: malformed line: " + line);
        cols.push_back(line.substr(pos, tab - pos));
        pos = tab + 1;
      }
      KeywordSet ks;
      ks.method = cols[2] == "tfidf" ? KeywordMethod::TfIdf : KeywordMethod::TextRank;
      const std::string terms = line.substr(pos);
      for (std::size_t b = 0; b < terms.size();) {
        auto e = terms.find(", ", b);
        if (e == std::string::npos) e = terms.size();
        ks.terms.push_back({terms.substr(b, e - b), 0.0});
        b = e + 2;
      }
      out[{cols[0], static_cast<std::size_t>(std::stoul(cols[1]))}] = std::move(ks);
    }
    return out;
  }

  // -- dataset -------------------------------------------------------------

  CorpusSplit dataset() const {
    const auto dramas = corpus();
    std::vector<std::string> ids;
    for (const auto& d : dramas) ids.push_back(d.id);
    const auto split = split_corpus(ids, cfg_.split_ratios, cfg_.split_seed);
    write_file(path("split.json"), split_json(split).dump(2) + "\n");

    const auto outl = outlines();
    const auto kws = read_keywords();
    std::map<std::string, const Drama*> by_id;
    for (const auto& d : dramas) by_id[d.id] = &d;
    const Markers& m = cfg_.gen.markers;
    const std::vector<std::pair<std::string, const std::vector<std::string>*>> parts = {
        {"train", &split.train}, {"dev", &split.dev}, {"test", &split.test}};
    for (const auto& [name, part] : parts) {
      std::vector<std::pair<const Drama*, const Scene*>> scenes;
      for (const auto& id : *part)
        for (const auto& s : by_id.at(id)->scenes) scenes.emplace_back(by_id.at(id), &s);
      std::vector<std::string> chunks(scenes.size());
      parallel_for(scenes.size(), cfg_.jobs, [&](std::size_t i) {
        const auto& [d, s] = scenes[i];
        const auto o = outl.find({d->id, s->index});
        if (o == outl.end()) return;
        const auto outline_text = o->second.at("outline").get<std::string>();
        const auto tok = make_backend(cfg_, scene_key(d->id, s->index));
        if (auto k = kws.find({d->id, s->index}); k != kws.end() && !k->second.terms.empty())
          chunks[i] += export_line(outline_record(d->id, s->index, build_outline_instance(k->second, outline_text, m), m));
        for (const auto& inst : build_generation_instances(scene_text(*s), outline_text, *tok, cfg_.gen.budget,
                                                           cfg_.gen.params.max_new_tokens, m))
          chunks[i] += export_line(generation_record(d->id, s->index, inst));
      });
      std::string out;
      for (const auto& c : chunks) out += c;
      write_file(path("dataset/" + name + ".jsonl"), out);
    }
    return split;
  }

  // -- generate ------------------------------------------------------------

  struct TestScene {
    std::string drama_id;
    std::size_t scene_index = 0;
    std::string start;
    std::string reference;  // rest of the human-written scene
    std::string outline;
    std::string outline_plain;
  };

  /// Test-split scenes with an outline and text beyond the start, in split
  /// order, at most `limit`.
  std::vector<TestScene> test_scenes(std::size_t limit) const {
    const auto split = split_from_json(ojson::parse(read_file(path("split.json"))));
    const auto dramas = corpus();
    const auto outl = outlines();
    std::map<std::string, const Drama*> by_id;
    for (const auto& d : dramas) by_id[d.id] = &d;
    WhitespaceTokenizer fallback(cfg_.gen.markers);
    std::vector<TestScene> out;
    for (const auto& id : split.test) {
      const auto it = by_id.find(id);
      if (it == by_id.end()) throw Error("split.json names unknown drama " + id);
      for (const auto& s : it->second->scenes) {
        if (out.size() >= limit) return out;
        const auto o = outl.find({id, s.index});
        if (o == outl.end()) continue;
        const auto tok = make_backend(cfg_, scene_key(id, s.index));
        auto [start, rest] = split_scene_start(scene_text(s), *tok, cfg_.start_tokens);
        if (utf8::trim(rest).empty()) continue;
        out.push_back({id, s.index, std::move(start), std::move(rest), o->second.at("outline").get<std::string>(),
                       o->second.at("outline_plain").get<std::string>()});
      }
    }
    return out;
  }

  /// Outline for the configured mode; generated outlines come from the
  /// backend fed with the scene's keywords.
  std::optional<std::string> outline_for(const TestScene& ts, LanguageModel& lm, const TermStats& stats) const {
    if (cfg_.outline_mode == OutlineMode::None) return std::nullopt;
    if (cfg_.outline_mode == OutlineMode::Extracted) return ts.outline;
    const auto method = cfg_.outline_mode == OutlineMode::TfIdfKeywords ? KeywordMethod::TfIdf : KeywordMethod::TextRank;
    const auto ks = keywords_for(ts.outline_plain, method, stats);
    if (ks.terms.empty()) return std::nullopt;
    auto params = SamplingParams::outline_defaults(cfg_.gen.markers);
    params.max_new_tokens = cfg_.outline_budget;
    const auto cands = lm.generate(outline_prompt(ks, cfg_.gen.markers), params);
    std::string text = cands.empty() ? std::string() : cands.front();
    if (auto at = text.find(cfg_.gen.markers.eos); at != std::string::npos) text.resize(at);
    if (utf8::trim(text).empty()) return std::nullopt;
    if (text.back() != '\n') text += '\n';
    return text;
  }

  struct GenerateSummary {
    std::size_t generated = 0, resumed = 0, failed = 0;
  };

  GenerateSummary generate(const std::string& label, std::size_t limit, bool resume) const {
    const fs::path run = path("runs/" + label);
    const auto scenes = test_scenes(limit);
    const auto stats = outline_term_stats();
    GenerateSummary sum;
    std::mutex mu;
    std::vector<std::optional<std::string>> records(scenes.size());
    parallel_for(scenes.size(), cfg_.jobs, [&](std::size_t i) {
      const auto& ts = scenes[i];
      const auto key = scene_key(ts.drama_id, ts.scene_index);
      const fs::path scene_file = run / "scenes" / (key + ".json");
      if (resume && fs::exists(scene_file)) {
        records[i] = ojson::parse(read_file(scene_file)).dump() + "\n";
        std::lock_guard lock(mu);
        ++sum.resumed;
        return;
      }
      const auto lm = make_backend(cfg_, key);
      ojson j;
      j["drama_id"] = ts.drama_id;
      j["scene_index"] = ts.scene_index;
      j["label"] = label;
      j["outline_mode"] = to_string(cfg_.outline_mode);
      SceneResult res;
      std::optional<std::string> outline;
      std::string error;
      try {
        outline = outline_for(ts, *lm, stats);
        res = generate_scene(ts.start, outline, *lm, cfg_.gen);
      } catch (const GenerationAborted& e) {
        res = e.partial();
        error = e.what();
      } catch (const Error& e) {
        error = e.what();
      }
      j["start"] = ts.start;
      j["outline"] = outline ? ojson(*outline) : ojson(nullptr);
      j["generated"] = res.continuation;
      j["reference"] = ts.reference;
      j["iterations"] = res.iterations;
      j["ended"] = res.ended;
      write_file(run / "traces" / (key + ".jsonl"), trace_jsonl(res.trace));
      std::lock_guard lock(mu);
      if (!error.empty()) {
        spdlog::error("{}: {}", key, error);
        ++sum.failed;
        return;  // no scene file: a later --resume retries it
      }
      write_file(scene_file, j.dump(2) + "\n");
      records[i] = j.dump() + "\n";
      ++sum.generated;
    });
    std::string out;
    for (const auto& r : records)
      if (r) out += *r;
    write_file(run / "scenes.jsonl", out);
    spdlog::info("run '{}': {} generated, {} resumed, {} failed", label, sum.generated, sum.resumed, sum.failed);
    return sum;
  }

  // -- evaluate ------------------------------------------------------------

  /// Reports for every run under runs/ (sorted by label) plus the human
  /// reference scenes.
  std::vector<MetricsReport> evaluate(std::size_t limit) const {
    const auto scenes = test_scenes(limit);
    std::vector<std::string> labels;
    if (fs::exists(path("runs")))
      for (const auto& e : fs::directory_iterator(path("runs")))
        if (e.is_directory()) labels.push_back(e.path().filename().string());
    std::sort(labels.begin(), labels.end());

    const auto scorer = make_backend(cfg_, "evaluate", MockConfig::Scoring::Bigram);
    std::vector<MetricsReport> reports;
    for (const auto& label : labels) {
      std::map<std::pair<std::string, std::size_t>, std::string> gen;
      const auto file = path("runs/" + label + "/scenes.jsonl");
      if (fs::exists(file))
        for (const auto& j : read_jsonl(file))
          gen[{j.at("drama_id").get<std::string>(), j.at("scene_index").get<std::size_t>()}] =
              j.at("generated").get<std::string>();
      std::vector<SceneSample> samples;
      for (const auto& ts : scenes) {
        SceneSample s{scene_key(ts.drama_id, ts.scene_index), ts.start, std::nullopt};
        if (auto it = gen.find({ts.drama_id, ts.scene_index}); it != gen.end()) s.generated = it->second;
        samples.push_back(std::move(s));
      }
      reports.push_back(evaluate_run(label, samples, scorer.get(), cfg_.perplexity_stride));
    }
    std::vector<SceneSample> human;
    for (const auto& ts : scenes) human.push_back({scene_key(ts.drama_id, ts.scene_index), ts.start, ts.reference});
    reports.push_back(evaluate_run("human", human, scorer.get(), cfg_.perplexity_stride));

    ojson arr = ojson::array();
    for (const auto& r : reports) arr.push_back(report_json(r));
    write_file(path("report.txt"), format_report_table(reports));
    write_file(path("report.json"), arr.dump(2) + "\n");
    return reports;
  }

 private:
  PipelineConfig cfg_;
  fs::path dir_;
};

}  // namespace dramagen
