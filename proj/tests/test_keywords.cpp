#include <gtest/gtest.h>

#include <random>

#include "dramagen/keywords.hpp"
#include "oracles.hpp"

using namespace dramagen;

TEST(TermFrequency, Examples) {
  const TermCounts doc{{"a", 2}, {"b", 1}, {"c", 1}};
  EXPECT_DOUBLE_EQ(tf("a", doc), 0.5);
  EXPECT_DOUBLE_EQ(tf("c", doc), 0.25);
  EXPECT_DOUBLE_EQ(tf("z", doc), 0.0);
  EXPECT_THROW(tf("a", TermCounts{}), Error);
}

TEST(TermFrequency, SumsToOne) {
  std::mt19937 rng(2);
  const std::vector<std::string> words = {"Haus", "Garten", "Liebe", "und", "der", "Vater", "nicht", "Brief", "ist",
                                          "Geld", "Ehre", "Tochter"};
  for (int d = 0; d < 100; ++d) {
    std::string text;
    for (unsigned i = 0, n = 1 + rng() % 40; i < n; ++i) text += words[rng() % words.size()] + " ";
    const auto counts = count_terms(tfidf_tokens(text));
    if (counts.empty()) continue;
    double sum = 0;
    for (const auto& [t, _] : counts) sum += tf(t, counts);
    EXPECT_NEAR(sum, 1.0, 1e-9);
  }
}

TEST(TfIdf, SingleDocumentRanksByCount) {
  TermStats stats;
  stats.add_document("Haus Haus Garten");
  const auto ks = tfidf_keywords("Haus Haus Garten", stats);
  ASSERT_EQ(ks.terms.size(), 2u);
  EXPECT_EQ(ks.terms[0].term, "Haus");
  // tf 2/3 and 1/3, idf ln(2/2)+1 = 1
  EXPECT_DOUBLE_EQ(ks.terms[0].score, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(ks.terms[1].score, 1.0 / 3.0);
  EXPECT_TRUE(ks.is_short);
}

TEST(TfIdf, RarerTermScoresHigher) {
  TermStats stats;
  stats.add_document("Haus Garten");
  stats.add_document("Haus Brief");
  stats.add_document("Haus Tisch");
  EXPECT_GT(stats.idf("garten"), stats.idf("haus"));
  const auto ks = tfidf_keywords("Haus Garten", stats);
  EXPECT_EQ(ks.terms[0].term, "Garten");
  EXPECT_DOUBLE_EQ(ks.terms[0].score, 0.5 * (std::log(4.0 / 2.0) + 1.0));
}

TEST(TfIdf, StopwordsOnlyGivesEmptySet) {
  TermStats stats;
  const auto ks = tfidf_keywords("und der die das ist nicht auch", stats);
  EXPECT_TRUE(ks.terms.empty());
  EXPECT_TRUE(ks.is_short);
}

TEST(TfIdf, MergeIsAssociative) {
  TermStats a, b, c;
  a.add_document("Haus Garten");
  b.add_document("Haus Brief");
  c.add_document("Tisch");
  TermStats ab = a, bc = b;
  ab.merge(b);
  ab.merge(c);
  bc.merge(c);
  TermStats a_bc = a;
  a_bc.merge(bc);
  EXPECT_EQ(ab.documents(), 3u);
  for (const auto* t : {"haus", "garten", "brief", "tisch", "fehlt"}) EXPECT_EQ(ab.df(t), a_bc.df(t));
}

TEST(Keywords, KBounds) {
  TermStats stats;
  EXPECT_THROW(tfidf_keywords("Haus", stats, 11), ConfigError);
  EXPECT_THROW(tfidf_keywords("Haus", stats, 0), ConfigError);
  EXPECT_THROW(textrank_keywords("Haus", 11), ConfigError);
  std::string many;
  for (int i = 0; i < 30; ++i) many += "Wort" + std::string(1, static_cast<char>('a' + i % 26)) + std::to_string(i) + " ";
  stats.add_document(many);
  EXPECT_EQ(tfidf_keywords(many, stats).terms.size(), 10u);
  EXPECT_LE(textrank_keywords(many, 10).terms.size(), 10u);
}

TEST(TextRankKeywords, RepeatedToken) {
  const auto ks = textrank_keywords("Krieg Krieg Krieg", 10);
  EXPECT_EQ(ks.words(), (std::vector<std::string>{"Krieg"}));
}

TEST(TextRankKeywords, InflectedRepeatsCollapse) {
  const auto ks = textrank_keywords("Ich besuche die gute Oma. Das Geschenk ist von der guten Oma.", 10);
  std::size_t with_oma = 0;
  for (const auto& w : ks.words()) with_oma += w.find("Oma") != std::string::npos;
  EXPECT_EQ(with_oma, 1u);
  EXPECT_EQ(dedup_key("die gute Oma").substr(4), dedup_key("der guten Oma").substr(4));
  EXPECT_EQ(inflection_stem("guten"), "gut");
  EXPECT_EQ(inflection_stem("Oma"), "oma");
}

TEST(TextRankKeywords, ScoresMatchLinearSolveOnBridgedCliques) {
  // K4 {Anker, Boje, Segel, Mast}, bridge Mast-Wolke, K3 {Wolke, Regen, Sturm}
  const std::string text = "Anker, Boje, Segel, Mast, und und Wolke, Regen, Sturm.";
  const std::vector<std::string> nodes = {"Anker", "Boje", "Segel", "Mast", "Wolke", "Regen", "Sturm"};
  std::vector<std::vector<double>> w(7, std::vector<double>(7, 0.0));
  const auto link = [&](std::size_t a, std::size_t b) { w[a][b] = w[b][a] = 1.0; };
  for (std::size_t a = 0; a < 4; ++a)
    for (std::size_t b = a + 1; b < 4; ++b) link(a, b);
  for (std::size_t a = 4; a < 7; ++a)
    for (std::size_t b = a + 1; b < 7; ++b) link(a, b);
  link(3, 4);
  const auto expected = oracle::pagerank_linear(w);

  const auto tg = build_token_graph(text, 4);
  ASSERT_EQ(tg.nodes, nodes);
  const auto ks = textrank_keywords(text, 7);
  ASSERT_EQ(ks.terms.size(), 7u);
  for (const auto& kw : ks.terms) {
    const auto idx = static_cast<std::size_t>(std::find(nodes.begin(), nodes.end(), kw.term) - nodes.begin());
    ASSERT_LT(idx, nodes.size());
    EXPECT_NEAR(kw.score, expected[idx], 1e-5) << kw.term;
  }
  const auto score_of = [&](const std::string& t) {
    for (const auto& kw : ks.terms)
      if (kw.term == t) return kw.score;
    return -1.0;
  };
  for (const auto* big : {"Anker", "Boje", "Segel", "Mast"})
    for (const auto* small : {"Regen", "Sturm"}) EXPECT_GT(score_of(big), score_of(small));
}

TEST(TextRankKeywords, AdjacentTopTokensMerge) {
  const auto ks = textrank_keywords("Der alte Kaufmann liebt Geld. Der alte Kaufmann zählt Geld.", 10);
  bool merged = false;
  for (const auto& w : ks.words()) merged |= w.find(' ') != std::string::npos;
  EXPECT_TRUE(merged);
}

TEST(Keywords, TermsOccurInSourceAndAreDeterministic) {
  std::mt19937 rng(9);
  const std::vector<std::string> words = {"Herz", "Liebe", "Vater,", "Brief", "und", "der", "Nacht.", "Tür", "Geld",
                                          "Ehre", "guten", "gute", "Tochter"};
  TermStats stats;
  std::vector<std::string> docs;
  for (int d = 0; d < 60; ++d) {
    std::string text;
    for (unsigned i = 0, n = 1 + rng() % 40; i < n; ++i) text += words[rng() % words.size()] + " ";
    docs.push_back(text);
    stats.add_document(text);
  }
  for (const auto& text : docs) {
    for (const auto& ks : {tfidf_keywords(text, stats), textrank_keywords(text, 10)}) {
      EXPECT_LE(ks.terms.size(), 10u);
      for (std::size_t i = 0; i < ks.terms.size(); ++i) {
        EXPECT_NE(text.find(ks.terms[i].term), std::string::npos) << ks.terms[i].term;
        if (i > 0) EXPECT_GE(ks.terms[i - 1].score, ks.terms[i].score);
      }
    }
    EXPECT_EQ(tfidf_keywords(text, stats), tfidf_keywords(text, stats));
    EXPECT_EQ(textrank_keywords(text, 10), textrank_keywords(text, 10));
  }
}

TEST(Keywords, KeywordLineFormat) {
  KeywordSet ks{KeywordMethod::TextRank, {{"Oma", 0.5}, {"Geschenk", 0.25}}, false};
  EXPECT_EQ(keyword_line("ger000066", 3, ks), "ger000066\t3\ttextrank\tOma, Geschenk");
}
