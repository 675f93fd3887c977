#pragma once

// Language-model interface and the deterministic mock backend.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "dramagen/error.hpp"
#include "dramagen/tokenizer.hpp"
#include "dramagen/utf8.hpp"

namespace dramagen {

struct SamplingParams {
  double top_p = 0.9;
  double repetition_penalty = 1.0;
  std::optional<std::size_t> no_repeat_ngram;
  std::size_t num_return_sequences = 1;
  std::size_t max_new_tokens = 100;
  std::string stop_token;  // empty: no stop token

  void validate() const {
    if (!(top_p > 0.0 && top_p <= 1.0)) throw ConfigError("top_p must be in (0, 1]");
    if (repetition_penalty < 1.0) throw ConfigError("repetition_penalty must be >= 1");
    if (num_return_sequences < 1) throw ConfigError("num_return_sequences must be >= 1");
    if (no_repeat_ngram && *no_repeat_ngram == 0) throw ConfigError("no_repeat_ngram must be positive");
  }

  /// Outline model decoding: nucleus 0.9, repetition penalty 2.0, stop at <EOS>.
  static SamplingParams outline_defaults(const Markers& m = {}) {
    SamplingParams p;
    p.top_p = 0.9;
    p.repetition_penalty = 2.0;
    p.num_return_sequences = 1;
    p.max_new_tokens = 250;
    p.stop_token = m.eos;
    return p;
  }

  /// Scene generation decoding: 10 candidates of 100 tokens, repetition
  /// penalty 1.01, no repeated 4-grams.
  static SamplingParams generation_defaults(const Markers& m = {}) {
    SamplingParams p;
    p.top_p = 0.9;
    p.repetition_penalty = 1.01;
    p.no_repeat_ngram = 4;
    p.num_return_sequences = 10;
    p.max_new_tokens = 100;
    p.stop_token = m.end_of_text;
    return p;
  }

  bool operator==(const SamplingParams&) const = default;
};

struct ScoredText {
  std::vector<std::string> tokens;
  std::vector<double> logprobs;  // natural log, one per token
};

struct BackendInfo {
  std::string model_name;
  std::size_t max_context = 1024;
  std::size_t vocab_size = 0;
};

class LanguageModel : public Tokenizer {
 public:
  virtual std::size_t max_context() const = 0;
  virtual BackendInfo info() const = 0;
  /// `num_return_sequences` candidate continuations of `prompt`.
  virtual std::vector<std::string> generate(std::string_view prompt, const SamplingParams& params) = 0;
  /// Log-probabilities of the tokens of `text` given `context`.
  virtual ScoredText score(std::string_view text, std::string_view context = {}) = 0;

 protected:
  void check_generate_budget(std::string_view prompt, const SamplingParams& params) const {
    const std::size_t need = count_tokens(prompt) + params.max_new_tokens;
    if (need > max_context())
      throw BudgetError("prompt of " + std::to_string(count_tokens(prompt)) + " tokens plus " +
                        std::to_string(params.max_new_tokens) + " new tokens exceeds context of " +
                        std::to_string(max_context()));
  }
  void check_score_budget(std::string_view text, std::string_view context) const {
    const std::size_t need = count_tokens(context) + count_tokens(text);
    if (need > max_context())
      throw BudgetError("scoring " + std::to_string(need) + " tokens exceeds context of " +
                        std::to_string(max_context()));
  }
};

/// 64-bit FNV-1a; stable across platforms, used to key scripted outputs.
inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

/// Cuts a candidate after its stop token and to at most `max_tokens` tokens.
inline std::string clip_candidate(std::string_view text, const Tokenizer& tok, std::size_t max_tokens,
                                  std::string_view stop_token) {
  if (!stop_token.empty()) {
    if (auto at = text.find(stop_token); at != std::string_view::npos) text = text.substr(0, at + stop_token.size());
  }
  const auto spans = tok.tokenize(text);
  if (spans.size() <= max_tokens) return std::string(text);
  if (max_tokens == 0) return {};
  return std::string(text.substr(0, spans[max_tokens - 1].end));
}

struct MockConfig {
  std::uint64_t seed = 0;
  std::size_t max_context = 1024;
  std::size_t vocab_size = 100;
  enum class Scoring { Uniform, Bigram } scoring = Scoring::Uniform;
  /// Probability that a sampled candidate ends the scene.
  double end_probability = 0.08;
  Markers markers{};
};

/// Deterministic stand-in for a language model.
///
/// generate() answers from, in order: the by-prompt script (keyed by
/// fnv1a(prompt)), the queue script (consumed one call at a time), and a
/// seeded sampler producing speaker-labelled German word salad that honours
/// top_p, repetition_penalty, no_repeat_ngram and max_new_tokens. score()
/// gives every token -ln(V) (Uniform) or a hash of the token and its
/// predecessor (Bigram), so results depend only on the text.
class MockBackend : public LanguageModel {
 public:
  MockBackend() : MockBackend(MockConfig{}) {}
  explicit MockBackend(MockConfig cfg) : cfg_(std::move(cfg)), tok_(cfg_.markers) {}

  std::vector<TokenSpan> tokenize(std::string_view text) const override { return tok_.tokenize(text); }
  std::size_t max_context() const override { return cfg_.max_context; }
  BackendInfo info() const override { return {"mock", cfg_.max_context, cfg_.vocab_size}; }

  void script(std::string_view prompt, std::vector<std::string> candidates) {
    std::lock_guard lock(mu_);
    by_prompt_[fnv1a(prompt)] = std::move(candidates);
  }
  void enqueue(std::vector<std::string> candidates) {
    std::lock_guard lock(mu_);
    queue_.push_back(std::move(candidates));
  }
  std::size_t generate_calls() const {
    std::lock_guard lock(mu_);
    return calls_;
  }
  const MockConfig& config() const noexcept { return cfg_; }

  std::vector<std::string> generate(std::string_view prompt, const SamplingParams& params) override {
    params.validate();
    check_generate_budget(prompt, params);
    std::vector<std::string> raw;
    const std::uint64_t h = fnv1a(prompt);
    {
      std::lock_guard lock(mu_);
      ++calls_;
      if (auto it = by_prompt_.find(h); it != by_prompt_.end()) {
        raw = it->second;
      } else if (!queue_.empty()) {
        raw = std::move(queue_.front());
        queue_.pop_front();
      }
    }
    std::vector<std::string> out;
    if (!raw.empty()) {
      for (std::size_t i = 0; i < raw.size() && i < params.num_return_sequences; ++i)
        out.push_back(clip_candidate(raw[i], tok_, params.max_new_tokens, params.stop_token));
      return out;
    }
    for (std::size_t i = 0; i < params.num_return_sequences; ++i)
      out.push_back(sample(prompt, params, h, i));
    return out;
  }

  ScoredText score(std::string_view text, std::string_view context = {}) override {
    check_score_budget(text, context);
    ScoredText out;
    const auto spans = tok_.tokenize(text);
    std::string prev;
    if (cfg_.scoring == MockConfig::Scoring::Bigram) {
      const auto cspans = tok_.tokenize(context);
      if (!cspans.empty()) prev = std::string(context.substr(cspans.back().begin, cspans.back().end - cspans.back().begin));
    }
    for (const auto& s : spans) {
      std::string t(text.substr(s.begin, s.end - s.begin));
      double lp = -std::log(static_cast<double>(cfg_.vocab_size));
      if (cfg_.scoring == MockConfig::Scoring::Bigram) {
        const auto hv = fnv1a(prev + '\x1f' + t);
        lp = -(0.5 + static_cast<double>(hv % 1000) / 200.0);
      }
      out.tokens.push_back(t);
      out.logprobs.push_back(lp);
      prev = std::move(t);
    }
    return out;
  }

 private:
  static const std::vector<std::string>& vocabulary() {
    static const std::vector<std::string> words = {
        "Herr", "Fräulein", "Gott", "Himmel", "Liebe", "Herz", "Vater", "Mutter", "Tochter",
        "Sohn", "Haus", "Brief", "Geld", "Ehre", "Nacht", "Tag", "Welt", "Leben", "Tod",
        "Glück", "Freund", "Feind", "König", "Stadt", "Garten", "Tür", "Fenster", "Wort",
        "Blut", "Hand", "Augen", "Seele", "Schuld", "Treue", "Rache", "Hoffnung", "ich", "du",
        "er", "sie", "wir", "ihr", "nicht", "und", "aber", "doch", "nur", "noch", "schon",
        "jetzt", "hier", "dort", "immer", "nie", "so", "wie", "was", "wer", "warum", "ist",
        "bin", "war", "hat", "habe", "kommt", "geht", "sagt", "weiß", "will", "kann", "muss",
        "liebe", "hasse", "fürchte", "glaube", "verstehe", "bitte", "danke", "sehen", "hören",
        "sprechen", "schweigen", "gehen", "bleiben", "mein", "dein", "sein", "unser", "euer",
        "guter", "armer", "schöne", "alte", "junge", "ganze", "letzte", "erste", "ja", "nein",
        "ach", "o", "mit", "von", "zu", "in", "auf", "für"};
    return words;
  }

  static std::vector<std::string> cast_from(std::string_view prompt) {
    std::set<std::string> names;
    std::size_t pos = 0;
    while (pos < prompt.size()) {
      auto nl = prompt.find('\n', pos);
      if (nl == std::string_view::npos) nl = prompt.size();
      auto line = utf8::trim(prompt.substr(pos, nl - pos));
      pos = nl + 1;
      auto sep = line.rfind('>');  // marker glued to a header
      if (sep != std::string_view::npos) line = line.substr(sep + 1);
      const auto sp = line.find_first_of(" \t");
      auto first = line.substr(0, sp);
      if (first.size() >= 2 && first.back() == ':' && utf8::has_letter(first)) names.emplace(first.substr(0, first.size() - 1));
    }
    if (names.empty()) return {"A", "B"};
    return {names.begin(), names.end()};
  }

  std::string sample(std::string_view prompt, const SamplingParams& params, std::uint64_t h, std::size_t idx) const {
    std::mt19937_64 rng(cfg_.seed ^ (h + 0x9E3779B97F4A7C15ULL * (idx + 1)));
    const auto unit = [&] { return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0); };
    const auto& vocab = vocabulary();
    const auto cast = cast_from(prompt);

    std::vector<std::string> tokens;  // emitted tokens, for n-gram and penalty checks
    std::map<std::string, std::size_t> used;
    std::string out;
    const std::size_t budget = params.max_new_tokens;
    const std::size_t n = params.no_repeat_ngram.value_or(0);

    const auto creates_repeat = [&](const std::string& next) {
      if (n == 0 || tokens.size() + 1 < n) return false;
      std::vector<std::string> gram(tokens.end() - static_cast<long>(n - 1), tokens.end());
      gram.push_back(next);
      for (std::size_t s = 0; s + n <= tokens.size(); ++s)
        if (std::equal(gram.begin(), gram.end(), tokens.begin() + static_cast<long>(s))) return true;
      return false;
    };
    const auto emit = [&](const std::string& t, const char* sep) {
      out += t;
      out += sep;
      tokens.push_back(t);
      ++used[t];
    };

    // Nucleus sampling over Zipf weights, damped for already used words.
    const auto pick_word = [&](bool capitalize, std::string_view suffix) -> std::optional<std::string> {
      std::vector<std::pair<double, std::size_t>> w;
      for (std::size_t i = 0; i < vocab.size(); ++i) {
        double weight = 1.0 / static_cast<double>(i + 2);
        if (auto u = used.find(vocab[i]); u != used.end())
          weight /= std::pow(params.repetition_penalty, static_cast<double>(u->second));
        w.emplace_back(weight, i);
      }
      std::stable_sort(w.begin(), w.end(), [](auto& a, auto& b) { return a.first > b.first; });
      double total = 0;
      for (auto& x : w) total += x.first;
      std::vector<std::pair<double, std::size_t>> nucleus;
      double mass = 0;
      for (auto& x : w) {
        nucleus.push_back(x);
        mass += x.first / total;
        if (mass >= params.top_p) break;
      }
      for (int attempt = 0; attempt < 16 && !nucleus.empty(); ++attempt) {
        double nt = 0;
        for (auto& x : nucleus) nt += x.first;
        double r = unit() * nt;
        std::size_t chosen = 0;
        for (; chosen + 1 < nucleus.size(); ++chosen) {
          r -= nucleus[chosen].first;
          if (r <= 0) break;
        }
        std::string word = vocab[nucleus[chosen].second];
        if (capitalize) word = utf8::capitalize_first(word);
        word += suffix;
        if (!creates_repeat(word)) return word;
        nucleus.erase(nucleus.begin() + static_cast<long>(chosen));
      }
      return std::nullopt;
    };

    std::size_t speaker = static_cast<std::size_t>(rng() % cast.size());
    bool ended = false;
    while (tokens.size() + 2 <= budget) {
      const auto header = cast[speaker] + ":";
      if (creates_repeat(header)) break;
      emit(header, "\n");
      const std::size_t len = 3 + static_cast<std::size_t>(rng() % 6);
      const std::string_view end_mark = rng() % 4 == 0 ? "?" : ".";
      std::size_t words = 0;
      bool closed = false;
      for (; words < len && tokens.size() < budget; ++words) {
        const bool last = words + 1 == len || tokens.size() + 1 == budget;
        auto w = pick_word(words == 0, last ? end_mark : std::string_view{});
        if (!w) break;
        emit(*w, last ? "\n" : " ");
        closed = last;
      }
      if (words == 0) break;
      if (!closed) {
        out.back() = '\n';
        break;
      }
      if (!params.stop_token.empty() && tokens.size() < budget && unit() < cfg_.end_probability) {
        out += params.stop_token;
        ended = true;
        break;
      }
      speaker = (speaker + 1 + static_cast<std::size_t>(rng() % std::max<std::size_t>(cast.size() - 1, 1))) % cast.size();
    }
    (void)ended;
    return clip_candidate(out, tok_, budget, params.stop_token);
  }

  MockConfig cfg_;
  WhitespaceTokenizer tok_;
  mutable std::mutex mu_;
  std::map<std::uint64_t, std::vector<std::string>> by_prompt_;
  std::deque<std::vector<std::string>> queue_;
  std::size_t calls_ = 0;
};

}  // namespace dramagen
