#pragma once

// HTTP client for an external inference server. Wire format: docs/protocol.md.

#include <chrono>
#include <cstdlib>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <vector>

#include <spdlog/spdlog.h>

#include "httplib.h"
#include "json.hpp"

#include "dramagen/error.hpp"
#include "dramagen/lm_backend.hpp"

namespace dramagen {

namespace wire {

using json = nlohmann::ordered_json;

inline json generate_request(std::string_view prompt, const SamplingParams& p, std::optional<std::uint64_t> seed) {
  json j;
  j["prompt"] = prompt;
  j["top_p"] = p.top_p;
  j["repetition_penalty"] = p.repetition_penalty;
  j["no_repeat_ngram_size"] = p.no_repeat_ngram ? json(*p.no_repeat_ngram) : json(nullptr);
  j["num_return_sequences"] = p.num_return_sequences;
  j["max_new_tokens"] = p.max_new_tokens;
  j["stop_token"] = p.stop_token;
  if (seed) j["seed"] = *seed;
  return j;
}

inline SamplingParams sampling_from(const json& j) {
  SamplingParams p;
  p.top_p = j.at("top_p").get<double>();
  p.repetition_penalty = j.at("repetition_penalty").get<double>();
  if (j.contains("no_repeat_ngram_size") && !j["no_repeat_ngram_size"].is_null())
    p.no_repeat_ngram = j["no_repeat_ngram_size"].get<std::size_t>();
  p.num_return_sequences = j.at("num_return_sequences").get<std::size_t>();
  p.max_new_tokens = j.at("max_new_tokens").get<std::size_t>();
  p.stop_token = j.value("stop_token", std::string());
  return p;
}

inline std::vector<std::string> parse_candidates(const json& j, std::size_t expected) {
  auto c = j.at("candidates").get<std::vector<std::string>>();
  if (c.size() != expected)
    throw BackendError("expected " + std::to_string(expected) + " candidates, got " + std::to_string(c.size()));
  return c;
}

inline json score_request(std::string_view text, std::string_view context) {
  return json{{"text", text}, {"context", context}};
}

inline ScoredText parse_scored(const json& j) {
  ScoredText s;
  s.tokens = j.at("tokens").get<std::vector<std::string>>();
  s.logprobs = j.at("logprobs").get<std::vector<double>>();
  if (s.tokens.size() != s.logprobs.size()) throw BackendError("score response: tokens and logprobs differ in length");
  for (double lp : s.logprobs)
    if (lp > 0) throw BackendError("score response: positive log-probability");
  return s;
}

inline json scored_json(const ScoredText& s) { return json{{"tokens", s.tokens}, {"logprobs", s.logprobs}}; }

inline BackendInfo parse_info(const json& j) {
  BackendInfo i;
  i.model_name = j.at("model_name").get<std::string>();
  i.max_context = j.at("max_context").get<std::size_t>();
  i.vocab_size = j.value("vocab_size", std::size_t{0});
  if (i.max_context == 0) throw BackendError("info response: max_context must be positive");
  return i;
}

inline json info_json(const BackendInfo& i) {
  return json{{"model_name", i.model_name}, {"max_context", i.max_context}, {"vocab_size", i.vocab_size}};
}

inline std::vector<TokenSpan> parse_offsets(const json& j, std::size_t text_size) {
  std::vector<TokenSpan> out;
  for (const auto& pair : j.at("offsets")) {
    TokenSpan s{pair.at(0).get<std::size_t>(), pair.at(1).get<std::size_t>()};
    if (s.begin > s.end || s.end > text_size || (!out.empty() && s.begin < out.back().end))
      throw BackendError("tokenize response: invalid offsets");
    out.push_back(s);
  }
  return out;
}

inline json offsets_json(const std::vector<TokenSpan>& spans) {
  json arr = json::array();
  for (const auto& s : spans) arr.push_back(json::array({s.begin, s.end}));
  return json{{"offsets", arr}};
}

}  // namespace wire

inline constexpr const char* kEndpointEnv = "DRAMAGEN_ENDPOINT";

/// Endpoint precedence: command-line flag, then environment, then config file.
inline std::string resolve_endpoint(const std::optional<std::string>& flag, const std::optional<std::string>& config) {
  if (flag && !flag->empty()) return *flag;
  if (const char* env = std::getenv(kEndpointEnv); env && *env) return env;
  if (config && !config->empty()) return *config;
  throw ConfigError("no backend endpoint (use --endpoint, " + std::string(kEndpointEnv) + " or the config file)");
}

struct RemoteConfig {
  std::string endpoint;  // e.g. http://localhost:8000
  std::chrono::milliseconds timeout{120000};
  int attempts = 3;
  std::chrono::milliseconds base_delay{500};  // doubled after every failed attempt
  std::optional<std::uint64_t> seed;
};

class RemoteBackend : public LanguageModel {
 public:
  explicit RemoteBackend(RemoteConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.endpoint.empty()) throw ConfigError("remote backend needs an endpoint");
    if (cfg_.attempts < 1) throw ConfigError("attempts must be >= 1");
  }

  std::vector<TokenSpan> tokenize(std::string_view text) const override {
    if (text.empty()) return {};
    std::string key(text);
    {
      std::lock_guard lock(mu_);
      if (auto it = token_cache_.find(key); it != token_cache_.end()) return it->second;
    }
    auto spans = wire::parse_offsets(post("/tokenize", wire::json{{"text", text}}), text.size());
    std::lock_guard lock(mu_);
    if (token_cache_.size() > 4096) token_cache_.clear();
    token_cache_.emplace(std::move(key), spans);
    return spans;
  }

  std::size_t max_context() const override { return info().max_context; }

  BackendInfo info() const override {
    {
      std::lock_guard lock(mu_);
      if (info_) return *info_;
    }
    auto i = wire::parse_info(request("GET", "/info", nullptr));
    std::lock_guard lock(mu_);
    info_ = i;
    return i;
  }

  std::vector<std::string> generate(std::string_view prompt, const SamplingParams& params) override {
    params.validate();
    check_generate_budget(prompt, params);
    auto cands = wire::parse_candidates(post("/generate", wire::generate_request(prompt, params, cfg_.seed)),
                                        params.num_return_sequences);
    for (auto& c : cands) c = clip_candidate(c, *this, params.max_new_tokens, params.stop_token);
    return cands;
  }

  ScoredText score(std::string_view text, std::string_view context = {}) override {
    if (text.empty()) return {};
    check_score_budget(text, context);
    return wire::parse_scored(post("/score", wire::score_request(text, context)));
  }

  const RemoteConfig& config() const noexcept { return cfg_; }

 private:
  wire::json post(const std::string& path, const wire::json& body) const { return request("POST", path, &body); }

  wire::json request(const std::string& method, const std::string& path, const wire::json* body) const {
    httplib::Client cli(cfg_.endpoint);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(cfg_.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(cfg_.timeout - secs);
    cli.set_connection_timeout(secs.count(), usecs.count());
    cli.set_read_timeout(secs.count(), usecs.count());
    cli.set_write_timeout(secs.count(), usecs.count());
    const std::string payload = body ? body->dump() : std::string();
    std::string last_error;
    auto delay = cfg_.base_delay;
    for (int attempt = 1; attempt <= cfg_.attempts; ++attempt) {
      auto res = method == "GET" ? cli.Get(path) : cli.Post(path, payload, "application/json");
      if (res && res->status >= 200 && res->status < 300) {
        try {
          return wire::json::parse(res->body);
        } catch (const wire::json::exception& e) {
          throw BackendError(path + ": malformed response body: " + e.what());
        }
      }
      if (res && res->status >= 400 && res->status < 500)
        throw BackendError(path + ": HTTP " + std::to_string(res->status) + ": " + res->body);
      last_error = res ? "HTTP " + std::to_string(res->status) : httplib::to_string(res.error());
      spdlog::warn("{} {} attempt {}/{} failed: {}", method, path, attempt, cfg_.attempts, last_error);
      if (attempt < cfg_.attempts && delay.count() > 0) {
        std::this_thread::sleep_for(delay);
        delay *= 2;
      }
    }
    throw TransportError(method + " " + path + ": " + last_error, cfg_.attempts);
  }

  RemoteConfig cfg_;
  mutable std::mutex mu_;
  mutable std::optional<BackendInfo> info_;
  mutable std::unordered_map<std::string, std::vector<TokenSpan>> token_cache_;
};

}  // namespace dramagen
