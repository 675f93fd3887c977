#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "dramagen/normalizer.hpp"
#include "dramagen/utf8.hpp"
#include "oracles.hpp"
#include "word_pairs.hpp"

using namespace dramagen;
using namespace testing_support;

namespace {

std::vector<WordPair> as_pairs(const std::vector<std::pair<std::string, std::string>>& v) {
  std::vector<WordPair> out;
  for (const auto& [t, n] : v) out.push_back({utf8::lower(t), utf8::lower(n)});
  return out;
}

std::string random_string(std::mt19937& rng, std::size_t max_len, const std::u32string& alphabet) {
  std::u32string s(rng() % (max_len + 1), U'a');
  for (auto& c : s) c = alphabet[rng() % alphabet.size()];
  return utf8::encode(s);
}

}  // namespace

TEST(Levenshtein, Examples) {
  EXPECT_EQ(levenshtein("abc", "abc"), 0u);
  EXPECT_EQ(levenshtein("nachtheil", "nachteil"), 1u);
  EXPECT_EQ(levenshtein("", "abc"), 3u);
  EXPECT_EQ(levenshtein("zen", "zähne"), 3u);  // ä is one code point
}

TEST(Levenshtein, MatchesFullMatrixOracle) {
  std::mt19937 rng(7);
  const std::u32string alphabet = U"abcdäöüß";
  for (int i = 0; i < 10000; ++i) {
    const auto a = random_string(rng, 12, alphabet), b = random_string(rng, 12, alphabet);
    ASSERT_EQ(levenshtein(a, b), oracle::edit_distance(utf8::decode(a), utf8::decode(b))) << a << " / " << b;
  }
}

TEST(Levenshtein, MetricProperties) {
  std::mt19937 rng(11);
  const std::u32string alphabet = U"abc";
  for (int i = 0; i < 2000; ++i) {
    const auto a = random_string(rng, 8, alphabet), b = random_string(rng, 8, alphabet),
               c = random_string(rng, 8, alphabet);
    EXPECT_EQ(levenshtein(a, b), levenshtein(b, a));
    EXPECT_LE(levenshtein(a, c), levenshtein(a, b) + levenshtein(b, c));
    EXPECT_EQ(levenshtein(a, b) == 0, a == b);
  }
}

TEST(Gestalt, Examples) {
  EXPECT_DOUBLE_EQ(gestalt_ratio("abc", "abc"), 1.0);
  EXPECT_DOUBLE_EQ(gestalt_ratio("abc", "xyz"), 0.0);
  EXPECT_DOUBLE_EQ(gestalt_ratio("hizt", "jetzt"), 4.0 / 9.0);
  EXPECT_DOUBLE_EQ(gestalt_ratio("nachtheil", "nachteil"), 16.0 / 17.0);
  EXPECT_DOUBLE_EQ(gestalt_ratio("", ""), 1.0);
  EXPECT_DOUBLE_EQ(gestalt_ratio("", "a"), 0.0);
}

TEST(Gestalt, ExhaustiveSmallPairsMatchOracle) {
  // every pair over {a,b,c,d} with |a| + |b| <= 8
  std::vector<std::vector<std::string>> by_len(9);
  by_len[0].push_back("");
  for (std::size_t len = 1; len <= 8; ++len)
    for (const auto& s : by_len[len - 1])
      for (char c : std::string("abcd")) by_len[len].push_back(s + c);
  std::size_t checked = 0;
  for (std::size_t la = 0; la <= 8; ++la)
    for (std::size_t lb = 0; la + lb <= 8; ++lb)
      for (const auto& a : by_len[la])
        for (const auto& b : by_len[lb]) {
          ASSERT_EQ(gestalt_ratio(a, b), oracle::gestalt(a, b)) << a << " / " << b;
          ++checked;
        }
  EXPECT_EQ(checked, 757305u);
}

TEST(Gestalt, RandomLongerPairsMatchOracle) {
  std::mt19937 rng(3);
  const std::u32string alphabet = U"abcd";
  for (int i = 0; i < 20000; ++i) {
    const auto a = random_string(rng, 8, alphabet), b = random_string(rng, 8, alphabet);
    ASSERT_EQ(gestalt_ratio(a, b), oracle::gestalt(a, b)) << a << " / " << b;
  }
}

TEST(FilterPairs, CollectedPairsSurviveBothFilters) {
  for (const auto& f : {FilterMethod{LevenshteinFilter{}}, FilterMethod{GestaltFilter{}}})
    for (const auto& p : filter_pairs(as_pairs(kCollected), f))
      EXPECT_EQ(p.verdict, Verdict::Kept) << p.transliterated << " " << p.score;
}

TEST(FilterPairs, LevenshteinExclusions) {
  for (const auto& p : filter_pairs(as_pairs(kLevenshteinExcluded), LevenshteinFilter{3}))
    EXPECT_EQ(p.verdict, Verdict::ExcludedLevenshtein) << p.transliterated << " " << p.score;
}

TEST(FilterPairs, GestaltExclusions) {
  for (const auto& p : filter_pairs(as_pairs(kGestaltExcluded), GestaltFilter{0.5}))
    EXPECT_EQ(p.verdict, Verdict::ExcludedGestalt) << p.transliterated << " " << p.score;
}

TEST(FilterPairs, OrderPreservingAndDeterministic) {
  auto all = as_pairs(kCollected);
  for (auto& p : as_pairs(kGestaltExcluded)) all.push_back(p);
  const auto a = filter_pairs(all, GestaltFilter{});
  const auto b = filter_pairs(all, GestaltFilter{});
  ASSERT_EQ(a.size(), all.size());
  EXPECT_EQ(a, b);
  for (std::size_t i = 0; i < all.size(); ++i) EXPECT_EQ(a[i].transliterated, all[i].transliterated);
}

TEST(CollectPairs, ApostropheSJoinsFollowingEs) {
  const auto pairs = collect_word_pairs({"Thu’s gut!"}, {"Tue es gut!"});
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0].transliterated, "thu’s");
  EXPECT_EQ(pairs[0].normalized, "tue es");
  EXPECT_EQ(filter_pairs(pairs, GestaltFilter{})[0].verdict, Verdict::Kept);
}

TEST(CollectPairs, UnderscoreMarksSplit) {
  const auto pairs = collect_word_pairs({"So wie's kommt"}, {"So wie_es kommt"});
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0].normalized, "wie es");
}

TEST(CollectPairs, AddedBlankSpaceYieldsFaultyPairThatGestaltRemoves) {
  const auto pairs = collect_word_pairs({"Hinweg sie nah’n Dort sind wir sicher"},
                                        {"Hinweg sie nah ‘n Dort sind wir sicher"});
  const auto it = std::find_if(pairs.begin(), pairs.end(), [](const WordPair& p) { return p.transliterated == "dort"; });
  ASSERT_NE(it, pairs.end());
  EXPECT_EQ(it->normalized, "‘n");
  for (const auto& p : filter_pairs(pairs, GestaltFilter{}))
    if (p.transliterated == "dort") EXPECT_EQ(p.verdict, Verdict::ExcludedGestalt);
}

TEST(CollectPairs, IdentityLinesAndCleaning) {
  EXPECT_TRUE(collect_word_pairs({"Ein Haus, (100%) / gut."}, {"Ein Haus, (100%) / gut."}).empty());
  const auto pairs = collect_word_pairs({"„Nachtheil“"}, {"Nachteil."});
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0].transliterated, "nachtheil");
}

TEST(CollectPairs, LineCountMismatchNamesFirstLine) {
  try {
    collect_word_pairs({"a", "b", "c"}, {"a"});
    FAIL();
  } catch (const AlignmentError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(Lexicon, CaseRestoration) {
  NormalizationLexicon lex;
  lex.insert("nachtheil", "nachteil");
  EXPECT_EQ(normalize_word("Nachtheil", lex), "Nachteil");
  EXPECT_EQ(normalize_word("nachtheil", lex), "nachteil");
  EXPECT_EQ(normalize_word("Haus", lex), "Haus");
  EXPECT_EQ(normalize_token("„Nachtheil,“", lex), "„Nachteil,“");
}

TEST(Lexicon, NormalizeIsIdempotentAndKeepsFirstCase) {
  NormalizationLexicon lex;
  for (const auto& [t, n] : kCollected) lex.insert(t, n);
  for (const auto& [t, n] : kCollected) {
    for (const auto& w : {t, utf8::capitalize_first(t), utf8::lower(t)}) {
      const auto once = normalize_word(w, lex);
      EXPECT_EQ(normalize_word(once, lex), once);
      EXPECT_EQ(utf8::is_upper(utf8::first(once)), utf8::is_upper(utf8::first(w))) << w;
    }
  }
}

TEST(Lexicon, FromPairsKeepsOnlyKeptAndDropsIdentity) {
  auto pairs = filter_pairs(as_pairs(kCollected), GestaltFilter{});
  auto bad = filter_pairs(as_pairs(kGestaltExcluded), GestaltFilter{});
  pairs.insert(pairs.end(), bad.begin(), bad.end());
  pairs.push_back({"haus", "haus"});
  const auto lex = NormalizationLexicon::from_pairs(pairs);
  EXPECT_EQ(lex.size(), kCollected.size());
  EXPECT_EQ(lex.find("hizt"), nullptr);
  EXPECT_EQ(lex.find("haus"), nullptr);
}

TEST(Lexicon, TsvRoundTripAndMergeConflicts) {
  NormalizationLexicon a, b;
  a.insert("thür", "tür");
  a.insert("thun", "tun");
  b.insert("thun", "tuen");
  a.merge(b);
  EXPECT_EQ(*a.find("thun"), "tuen");
  std::stringstream ss;
  a.write_tsv(ss);
  EXPECT_EQ(ss.str(), "thun\ttuen\nthür\ttür\n");
  const auto back = NormalizationLexicon::read_tsv(ss);
  EXPECT_EQ(back.pairs(), a.pairs());
  std::stringstream bad("only-one-column\n");
  EXPECT_THROW(NormalizationLexicon::read_tsv(bad), Error);
}
