#pragma once

// Three-part generation prompt: outline, summary of distant context, and the
// nearest generated tokens.

#include <cstddef>
#include <string>
#include <string_view>

#include "dramagen/error.hpp"
#include "dramagen/textproc.hpp"
#include "dramagen/tokenizer.hpp"

namespace dramagen {

struct PromptBudget {
  std::size_t prompt_budget = 924;
  std::size_t local_window = 250;
};

struct PromptParts {
  std::string outline;
  std::string remote;  // empty unless the context had to be summarized
  std::string local;
  std::string text;    // outline + SEP + remote + SEP + local
  std::size_t tokens = 0;
  std::size_t local_tokens = 0;
};

namespace detail {

inline std::string join_prompt(std::string_view outline, std::string_view remote, std::string_view local,
                               std::string_view sep) {
  std::string out;
  out.reserve(outline.size() + remote.size() + local.size() + 2 * sep.size());
  out += outline;
  out += sep;
  out += remote;
  out += sep;
  out += local;
  return out;
}

}  // namespace detail

/// Builds the prompt for the next iteration. While everything fits in
/// `prompt_budget` the whole context is kept; otherwise the last
/// `local_window` tokens are kept verbatim and the rest is replaced by a
/// TextRank summary filling the remaining budget. An empty outline gives the
/// baseline prompt.
inline PromptParts assemble_prompt(std::string_view outline, std::string_view generated, const Tokenizer& tok,
                                   const PromptBudget& budget = {}, const Markers& markers = {}) {
  const std::size_t sep_tokens = 2 * tok.count_tokens(markers.sep);
  const std::size_t outline_tokens = tok.count_tokens(outline);
  if (outline_tokens + budget.local_window + sep_tokens > budget.prompt_budget)
    throw ConfigError("outline of " + std::to_string(outline_tokens) + " tokens leaves no room for " +
                      std::to_string(budget.local_window) + " tokens of local context within " +
                      std::to_string(budget.prompt_budget));

  PromptParts p;
  p.outline = std::string(outline);
  const auto spans = tok.tokenize(generated);
  p.text = detail::join_prompt(outline, {}, generated, markers.sep);
  p.tokens = tok.count_tokens(p.text);
  if (p.tokens <= budget.prompt_budget) {
    p.local = std::string(generated);
    p.local_tokens = spans.size();
    return p;
  }

  const std::size_t cut = spans.size() - budget.local_window;
  p.local = std::string(generated.substr(spans[cut].begin));
  p.local_tokens = budget.local_window;
  const std::string_view distant = generated.substr(0, spans[cut].begin);
  std::size_t remote_budget = budget.prompt_budget - outline_tokens - budget.local_window - sep_tokens;
  // Subword tokenizers are not additive over concatenation; shrink until the
  // joined prompt fits.
  while (true) {
    p.remote = summarize_text(distant, remote_budget, tok);
    p.text = detail::join_prompt(outline, p.remote, p.local, markers.sep);
    p.tokens = tok.count_tokens(p.text);
    if (p.tokens <= budget.prompt_budget) return p;
    const std::size_t excess = p.tokens - budget.prompt_budget;
    if (remote_budget == 0) break;
    remote_budget = remote_budget > excess ? remote_budget - excess : 0;
  }
  throw BudgetError("prompt of " + std::to_string(p.tokens) + " tokens does not fit " +
                    std::to_string(budget.prompt_budget));
}

}  // namespace dramagen
