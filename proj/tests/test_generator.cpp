#include <gtest/gtest.h>

#include <random>

#include "dramagen/generator.hpp"
#include "dramagen/lm_backend.hpp"
#include "gen_support.hpp"
#include "oracles.hpp"

using namespace dramagen;
using testing_support::labelled_text;

namespace {

const std::string kStart = "dalton:\nEin abscheuliches Unglück.\nfrau_von_wichmann:\nDalton – ist es –\n";

/// Mock that fails with a transport error on the given call.
class FailingMock : public MockBackend {
 public:
  explicit FailingMock(std::size_t fail_on) : fail_on_(fail_on) {}
  std::vector<std::string> generate(std::string_view prompt, const SamplingParams& params) override {
    if (++calls_ == fail_on_) throw TransportError("connection refused", 3);
    return MockBackend::generate(prompt, params);
  }

 private:
  std::size_t fail_on_, calls_ = 0;
};

}  // namespace

TEST(CorrectSpeaker, Examples) {
  const std::vector<std::string> cast{"Dalton", "Belmont"};
  EXPECT_EQ(correct_speaker("Daltn", cast), (SpeakerCheck{SpeakerCheck::Corrected, "Dalton", 1}));
  EXPECT_EQ(correct_speaker("Dalton", cast), (SpeakerCheck{SpeakerCheck::Keep, "Dalton", 0}));
  EXPECT_EQ(correct_speaker("dalton", cast).kind, SpeakerCheck::Keep);
  EXPECT_EQ(correct_speaker("dalton", cast).name, "Dalton");
  EXPECT_EQ(correct_speaker("Rosamunde", cast).kind, SpeakerCheck::Invalid);
  EXPECT_EQ(correct_speaker("Baltom", cast).kind, SpeakerCheck::Corrected);  // distance 2 to Dalton
  EXPECT_EQ(correct_speaker("Bxltxn", cast).kind, SpeakerCheck::Invalid);    // distance 3
  EXPECT_EQ(correct_speaker("Ida", {"Ina", "Ila"}).name, "Ila");           // tie: lexicographic
  EXPECT_EQ(correct_speaker("Wer", {}).kind, SpeakerCheck::Keep);
}

TEST(CorrectSpeaker, MatchesNearestNameOracle) {
  std::mt19937 rng(4);
  const std::u32string alphabet = U"abdeäo";
  const auto word = [&](std::size_t max) {
    std::u32string s(1 + rng() % max, U'a');
    for (auto& c : s) c = alphabet[rng() % alphabet.size()];
    return utf8::encode(s);
  };
  for (int t = 0; t < 2000; ++t) {
    std::vector<std::string> cast;
    for (unsigned i = 0, n = 1 + rng() % 4; i < n; ++i) cast.push_back(word(6));
    const auto name = word(6);
    std::size_t best = SIZE_MAX;
    for (const auto& c : cast) best = std::min(best, oracle::edit_distance(utf8::decode(name), utf8::decode(c)));
    const auto r = correct_speaker(name, cast, 2);
    if (best == 0) EXPECT_EQ(r.kind, SpeakerCheck::Keep);
    else if (best <= 2) EXPECT_EQ(r.kind, SpeakerCheck::Corrected);
    else EXPECT_EQ(r.kind, SpeakerCheck::Invalid);
    EXPECT_EQ(r.distance, best);
  }
}

TEST(ExtractCast, Examples) {
  EXPECT_EQ(extract_cast(kStart), (std::vector<std::string>{"dalton", "frau_von_wichmann"}));
  EXPECT_TRUE(extract_cast("kein Name hier\n").empty());
  EXPECT_EQ(extract_cast("anna:\nA.\nAnna:\nB.\n", "paul:\nC.\nanna:\nD.\n"),
            (std::vector<std::string>{"anna", "paul"}));
}

TEST(Postedit, DuplicateOnlyCandidateBacksOff) {
  GenConfig cfg;
  const auto r = postedit({"dalton:\nEin abscheuliches Unglück.\n"}, kStart, extract_cast(kStart), cfg);
  EXPECT_FALSE(r.accepted());
  EXPECT_EQ(r.reports[0].lines[0].verdict, "duplicate");
}

TEST(Postedit, MisspelledNameCorrected) {
  GenConfig cfg;
  const auto r = postedit({"Daltn:\nGuten Tag."}, "", {"Dalton"}, cfg);
  ASSERT_TRUE(r.accepted());
  EXPECT_EQ(r.chosen().text, "Dalton:\nGuten Tag.\n");
  EXPECT_EQ(r.chosen().lines[0].verdict, "corrected");
}

TEST(Postedit, EmptySpeechDropped) {
  GenConfig cfg;
  const auto r = postedit({"Dalton:\nBelmont:\nHallo."}, "", {"Dalton", "Belmont"}, cfg);
  ASSERT_TRUE(r.accepted());
  EXPECT_EQ(r.chosen().text, "Belmont:\nHallo.\n");
  EXPECT_EQ(r.chosen().lines[0].verdict, "empty_speech");
}

TEST(Postedit, InvalidSpeakerRemovedWithSpeech) {
  GenConfig cfg;
  const auto r = postedit({"Rosamunde:\nWer bin ich?\nDalton:\nNiemand.\n"}, "", {"Dalton", "Belmont"}, cfg);
  ASSERT_TRUE(r.accepted());
  EXPECT_EQ(r.chosen().text, "Dalton:\nNiemand.\n");
  EXPECT_EQ(r.chosen().valid_lines, 1u);
}

TEST(Postedit, EndOfTextHandling) {
  GenConfig cfg;
  const auto r = postedit({"Dalton:\nLebwohl.\n<|endoftext|>Belmont:\nDanach.\n"}, "", {"Dalton", "Belmont"}, cfg);
  ASSERT_TRUE(r.accepted());
  EXPECT_TRUE(r.chosen().end_of_text);
  EXPECT_EQ(r.chosen().text, "Dalton:\nLebwohl.\n");
  const auto only_end = postedit({"<|endoftext|>"}, kStart, {"Dalton"}, cfg);
  ASSERT_TRUE(only_end.accepted());
  EXPECT_EQ(only_end.chosen().text, "");
}

TEST(Postedit, DuplicatesWithinCandidateAndContinuation) {
  GenConfig cfg;
  const auto r = postedit({"und weiter.\nDalton:\nJa.\nBelmont:\nJa.\n"}, "", {"Dalton", "Belmont"}, cfg);
  ASSERT_TRUE(r.accepted());
  EXPECT_EQ(r.chosen().text, "und weiter.\nDalton:\nJa.\n");
}

TEST(Postedit, SelectionModes) {
  GenConfig cfg;
  const std::vector<std::string> cands = {"Rosamunde:\nX.\n", "Dalton:\nEins.\n", "Dalton:\nEins.\nZwei.\n"};
  EXPECT_EQ(*postedit(cands, "", {"Dalton"}, cfg).selected, 1u);
  cfg.selection = Selection::MostValidLines;
  EXPECT_EQ(*postedit(cands, "", {"Dalton"}, cfg).selected, 2u);
}

TEST(AssemblePrompt, BelowThresholdKeepsEverything) {
  WhitespaceTokenizer tok;
  const auto outline = labelled_text(200, "o"), generated = labelled_text(300, "g");
  const auto p = assemble_prompt(outline, generated, tok);
  EXPECT_EQ(p.text, outline + "<SEP><SEP>" + generated);
  EXPECT_TRUE(p.remote.empty());
  EXPECT_EQ(p.tokens, 502u);
}

TEST(AssemblePrompt, OverThresholdSummarizesDistantContext) {
  WhitespaceTokenizer tok;
  const auto outline = labelled_text(200, "o"), generated = labelled_text(800, "g");
  const auto p = assemble_prompt(outline, generated, tok);
  const auto spans = tok.tokenize(generated);
  EXPECT_EQ(p.local, generated.substr(spans[550].begin));
  EXPECT_EQ(p.local_tokens, 250u);
  EXPECT_FALSE(p.remote.empty());
  EXPECT_LE(p.tokens, 924u);
  EXPECT_EQ(p.text, outline + "<SEP>" + p.remote + "<SEP>" + p.local);
  // the summary only holds sentences from the first 550 tokens
  for (const auto& line : parse_speeches(p.remote))
    for (const auto& l : line.lines) EXPECT_NE(generated.substr(0, spans[550].begin).find(l), std::string::npos) << l;
}

TEST(AssemblePrompt, EmptyOutlineBaseline) {
  WhitespaceTokenizer tok;
  const auto generated = labelled_text(40, "g");
  EXPECT_EQ(assemble_prompt("", generated, tok).text, "<SEP><SEP>" + generated);
  EXPECT_TRUE(assemble_prompt("", labelled_text(2000), tok).text.starts_with("<SEP>"));
}

TEST(AssemblePrompt, OversizedOutlineRejected) {
  WhitespaceTokenizer tok;
  EXPECT_THROW(assemble_prompt(labelled_text(700, "o"), "", tok), ConfigError);
  EXPECT_NO_THROW(assemble_prompt(labelled_text(672, "o"), labelled_text(2000), tok));
}

TEST(AssemblePrompt, AlwaysWithinBudget) {
  WhitespaceTokenizer tok;
  std::mt19937 rng(12);
  for (int t = 0; t < 200; ++t) {
    const auto outline = labelled_text(rng() % 673, "o");
    const auto generated = labelled_text(rng() % 3000, "g");
    const auto p = assemble_prompt(outline, generated, tok);
    EXPECT_LE(p.tokens, 924u);
    EXPECT_EQ(p.tokens, tok.count_tokens(p.text));
  }
}

TEST(GenerateScene, StopsAtEndOfText) {
  MockBackend m;
  m.enqueue({"dalton:\nBelmont –\n"});
  m.enqueue({"frau_von_wichmann:\nAch – lebt meine arme Julie noch?\n<|endoftext|>"});
  m.enqueue({"dalton:\nZu viel.\n"});
  GenConfig cfg;
  const auto res = generate_scene(kStart, std::nullopt, m, cfg);
  EXPECT_EQ(res.iterations, 2u);
  EXPECT_TRUE(res.ended);
  EXPECT_EQ(m.generate_calls(), 2u);
  EXPECT_EQ(res.continuation, "dalton:\nBelmont –\nfrau_von_wichmann:\nAch – lebt meine arme Julie noch?\n");
  EXPECT_EQ(res.text(), kStart + res.continuation);
}

TEST(GenerateScene, StopsAtIterationCap) {
  MockBackend m;
  GenConfig cfg;
  cfg.max_iterations = 5;
  cfg.params.stop_token.clear();
  const auto res = generate_scene(kStart, std::nullopt, m, cfg);
  EXPECT_EQ(res.iterations, 5u);
  EXPECT_FALSE(res.ended);
}

TEST(GenerateScene, BackOffWithoutOutline) {
  MockBackend m;
  const std::string outline = "dalton:\nDer Plan.\n";
  m.enqueue({"Rosamunde:\nFremd.\n", "Kunigunde:\nAuch fremd.\n"});
  m.enqueue({"dalton:\nNeu.\n"});
  m.enqueue({"frau_von_wichmann:\nEnde.\n<|endoftext|>"});
  GenConfig cfg;
  const auto res = generate_scene(kStart, outline, m, cfg);
  ASSERT_EQ(res.trace.size(), 3u);
  EXPECT_FALSE(res.trace[0].backoff);
  EXPECT_FALSE(res.trace[0].result.accepted());
  EXPECT_TRUE(res.trace[1].backoff);
  EXPECT_EQ(res.trace[1].iteration, 1u);
  EXPECT_TRUE(res.trace[1].prompt.starts_with("<SEP><SEP>"));
  EXPECT_TRUE(res.trace[2].prompt.starts_with(outline));  // outline restored
  EXPECT_EQ(res.iterations, 2u);
  const auto j = trace_json(res.trace[0]);
  EXPECT_EQ(j["verdict"], "backoff");
  EXPECT_EQ(j["reports"][0]["lines"][0]["verdict"], "invalid_speaker");
  EXPECT_EQ(trace_json(res.trace[1])["accepted_text"], "dalton:\nNeu.\n");
}

TEST(GenerateScene, BackendFailureKeepsPartialScene) {
  FailingMock m(3);
  GenConfig cfg;
  cfg.params.stop_token.clear();
  try {
    generate_scene(kStart, std::nullopt, m, cfg);
    FAIL();
  } catch (const GenerationAborted& e) {
    EXPECT_EQ(e.partial().iterations, 3u);
    EXPECT_EQ(e.partial().trace.size(), 3u);
    EXPECT_TRUE(e.partial().trace.back().candidates.empty());
    EXPECT_TRUE(e.partial().text().starts_with(kStart));
  }
}

TEST(GenerateScene, InvariantsUnderMockSampling) {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    MockConfig mc;
    mc.seed = seed;
    MockBackend a(mc), b(mc);
    GenConfig cfg;
    const auto start = labelled_text(100, "s");
    const std::optional<std::string> outline = seed % 2 ? std::optional<std::string>(labelled_text(60, "o")) : std::nullopt;
    const auto res = generate_scene(start, outline, a, cfg);
    const auto again = generate_scene(start, outline, b, cfg);
    EXPECT_EQ(res.text(), again.text());
    EXPECT_EQ(trace_jsonl(res.trace), trace_jsonl(again.trace));

    const auto cast = extract_cast(start, outline.value_or(""));
    std::string grown = res.start;
    std::set<std::string> lines;
    for (const auto& block : parse_speeches(start))
      for (const auto& l : block.lines) lines.insert(l);
    for (const auto& rec : res.trace) {
      EXPECT_LE(rec.prompt_tokens, 924u);
      EXPECT_LE(rec.prompt_tokens + cfg.per_iter_tokens(), 1024u);
      if (!rec.result.accepted()) continue;
      const auto& add = rec.result.chosen().text;
      for (const auto& block : parse_speeches(add)) {
        if (block.speaker) EXPECT_NE(std::find(cast.begin(), cast.end(), *block.speaker), cast.end()) << *block.speaker;
        for (const auto& l : block.lines) EXPECT_TRUE(lines.insert(l).second) << "repeated line " << l;
      }
      grown += add;
    }
    EXPECT_EQ(grown, res.text());
    EXPECT_LE(res.iterations, cfg.max_iterations);
  }
}

TEST(SplitSceneStart, TakesWholeLines) {
  WhitespaceTokenizer tok;
  const auto text = labelled_text(300);
  const auto [start, rest] = split_scene_start(text, tok, 100);
  EXPECT_EQ(start + rest, text);
  EXPECT_GE(tok.count_tokens(start), 100u);
  EXPECT_LT(tok.count_tokens(start), 110u);
  EXPECT_TRUE(start.ends_with("\n"));
}
