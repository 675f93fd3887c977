#pragma once

#include <string>
#include <string_view>
#include <unordered_set>

namespace dramagen::wordlists {

using WordSet = std::unordered_set<std::string_view>;

// Standard German stopword list (the one shipped with NLTK), lowercase.
inline const WordSet& german_stopwords() {
  static const WordSet words = {
      "aber", "alle", "allem", "allen", "aller", "alles", "als", "also", "am", "an", "ander",
      "andere", "anderem", "anderen", "anderer", "anderes", "anderm", "andern", "anderr",
      "anders", "auch", "auf", "aus", "bei", "bin", "bis", "bist", "da", "damit", "dann",
      "der", "den", "des", "dem", "die", "das", "dass", "daß", "derselbe", "derselben",
      "denselben", "desselben", "demselben", "dieselbe", "dieselben", "dasselbe", "dazu",
      "dein", "deine", "deinem", "deinen", "deiner", "deines", "denn", "derer", "dessen",
      "dich", "dir", "du", "dies", "diese", "diesem", "diesen", "dieser", "dieses", "doch",
      "dort", "durch", "ein", "eine", "einem", "einen", "einer", "eines", "einig", "einige",
      "einigem", "einigen", "einiger", "einiges", "einmal", "er", "ihn", "ihm", "es", "etwas",
      "euer", "eure", "eurem", "euren", "eurer", "eures", "für", "gegen", "gewesen", "hab",
      "habe", "haben", "hat", "hatte", "hatten", "hier", "hin", "hinter", "ich", "mich", "mir",
      "ihr", "ihre", "ihrem", "ihren", "ihrer", "ihres", "euch", "im", "in", "indem", "ins",
      "ist", "jede", "jedem", "jeden", "jeder", "jedes", "jene", "jenem", "jenen", "jener",
      "jenes", "jetzt", "kann", "kein", "keine", "keinem", "keinen", "keiner", "keines",
      "können", "könnte", "machen", "man", "manche", "manchem", "manchen", "mancher",
      "manches", "mein", "meine", "meinem", "meinen", "meiner", "meines", "mit", "muss",
      "musste", "nach", "nicht", "nichts", "noch", "nun", "nur", "ob", "oder", "ohne", "sehr",
      "sein", "seine", "seinem", "seinen", "seiner", "seines", "selbst", "sich", "sie",
      "ihnen", "sind", "so", "solche", "solchem", "solchen", "solcher", "solches", "soll",
      "sollte", "sondern", "sonst", "über", "um", "und", "uns", "unsere", "unserem",
      "unseren", "unser", "unseres", "unter", "viel", "vom", "von", "vor", "während", "war",
      "waren", "warst", "was", "weg", "weil", "weiter", "welche", "welchem", "welchen",
      "welcher", "welches", "wenn", "werde", "werden", "wie", "wieder", "will", "wir", "wird",
      "wirst", "wo", "wollen", "wollte", "würde", "würden", "zu", "zum", "zur", "zwar",
      "zwischen"};
  return words;
}

// Closed-class words excluded from tf-idf keywords in place of a POS tagger:
// auxiliary and modal verb forms, particles, adpositions and adverbs.
inline const WordSet& german_closed_class() {
  static const WordSet words = {
      // auxiliaries and modals
      "bin", "bist", "ist", "sind", "seid", "sei", "seist", "seien", "war", "warst", "waren",
      "wart", "wäre", "wärst", "wären", "gewesen", "habe", "hast", "hat", "habt", "haben",
      "hatte", "hattest", "hatten", "hattet", "hätte", "hättest", "hätten", "gehabt", "werde",
      "wirst", "wird", "werdet", "werden", "wurde", "wurdest", "wurden", "würde", "würdest",
      "würden", "worden", "geworden", "kann", "kannst", "können", "könnt", "konnte",
      "konnten", "könnte", "könnten", "muss", "muß", "musst", "mußt", "müssen", "müsst",
      "musste", "mußte", "mussten", "müsste", "müßte", "darf", "darfst", "dürfen", "durfte",
      "dürfte", "soll", "sollst", "sollen", "sollt", "sollte", "sollten", "will", "willst",
      "wollen", "wollt", "wollte", "wollten", "mag", "magst", "mögen", "mochte", "möchte",
      "möchten",
      // particles and interjection-like fillers
      "ja", "nein", "doch", "schon", "mal", "halt", "eben", "wohl", "denn", "nur", "bloß",
      "etwa", "gar", "ganz", "zwar", "nicht", "nie", "niemals", "sogar", "ach", "oh", "o",
      "ah", "ha", "he", "nun", "na", "ei", "pfui", "weh", "wehe", "ja",
      // adpositions
      "an", "auf", "aus", "bei", "bis", "durch", "für", "gegen", "hinter", "in", "mit",
      "nach", "neben", "ohne", "seit", "über", "um", "unter", "von", "vor", "während",
      "wegen", "zu", "zwischen", "gegenüber", "trotz", "statt", "anstatt", "entlang",
      "außer", "innerhalb", "außerhalb", "laut", "samt", "nebst", "am", "im", "ins", "ans",
      "aufs", "vom", "zum", "zur", "beim", "durchs", "fürs", "ums",
      // adverbs
      "hier", "da", "dort", "dann", "jetzt", "heute", "gestern", "morgen", "immer", "noch",
      "wieder", "sehr", "auch", "so", "also", "nun", "bald", "gleich", "oft", "selten",
      "manchmal", "vielleicht", "gern", "gerne", "sofort", "hin", "her", "hinaus", "heraus",
      "herein", "hinein", "darum", "deshalb", "daher", "dabei", "dafür", "dagegen", "damit",
      "danach", "davon", "dazu", "darauf", "daran", "darin", "darüber", "wo", "wann", "wie",
      "warum", "weshalb", "wohin", "woher", "allein", "fast", "kaum", "genug", "zuerst",
      "zuletzt", "endlich", "einmal", "nochmal", "überall", "nirgends", "irgendwo",
      "freilich", "wirklich", "eigentlich", "ebenso", "sonst", "längst", "stets", "weg",
      "fort", "oben", "unten", "vorn", "hinten", "draußen", "drinnen", "schnell", "lange"};
  return words;
}

// Abbreviations (lowercase, without the final period) that do not end a
// sentence.
inline const WordSet& german_abbreviations() {
  static const WordSet words = {
      "dr", "hr", "hrn", "fr", "frl", "prof", "st", "sr", "nr", "no", "bzw", "usw", "etc",
      "ca", "vgl", "z.b", "d.h", "u.a", "u.s.w", "s", "str", "geb", "gest", "hl", "kgl",
      "königl", "mdl", "mlle", "mme", "mons", "mr", "mrs", "ms", "sen", "jun", "bd",
      "kap", "abs", "inkl", "evtl", "ggf", "sog", "tel", "hrsg", "v", "vs", "z", "b", "d",
      "h", "u", "a", "o", "dgl", "desgl", "resp", "exc", "excell", "durchl", "gen", "lt",
      "capt", "kapt", "ew", "majest", "wohlgeb", "hochw"};
  return words;
}

inline bool is_stopword(std::string_view lowercase) {
  return german_stopwords().count(lowercase) > 0;
}

inline bool is_closed_class(std::string_view lowercase) {
  return german_closed_class().count(lowercase) > 0;
}

}  // namespace dramagen::wordlists
