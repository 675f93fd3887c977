#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "dramagen/utf8.hpp"

namespace dramagen {

/// Special marker strings. All tokenizers treat them as single tokens.
struct Markers {
  std::string bos = "<BOS>";
  std::string sep = "<SEP>";
  std::string eos = "<EOS>";
  std::string end_of_text = "<|endoftext|>";

  std::vector<std::string_view> all() const { return {bos, sep, eos, end_of_text}; }
};

/// Byte range [begin, end) of one token inside the tokenized text.
struct TokenSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  bool operator==(const TokenSpan&) const = default;
};

class Tokenizer {
 public:
  virtual ~Tokenizer() = default;
  virtual std::vector<TokenSpan> tokenize(std::string_view text) const = 0;
  virtual std::size_t count_tokens(std::string_view text) const { return tokenize(text).size(); }
};

/// Whitespace-delimited tokens; marker strings are atomic even when glued to
/// neighbouring text ("a<SEP>b" is three tokens).
class WhitespaceTokenizer : public Tokenizer {
 public:
  WhitespaceTokenizer() = default;
  explicit WhitespaceTokenizer(Markers markers) : markers_(std::move(markers)) {}

  std::vector<TokenSpan> tokenize(std::string_view text) const override {
    std::vector<TokenSpan> out;
    const auto marks = markers_.all();
    std::size_t i = 0;
    std::size_t start = std::string_view::npos;
    const auto close = [&](std::size_t at) {
      if (start != std::string_view::npos) out.push_back({start, at});
      start = std::string_view::npos;
    };
    while (i < text.size()) {
      std::size_t marker_len = 0;
      if (text[i] == '<') {
        for (auto m : marks)
          if (!m.empty() && text.substr(i, m.size()) == m) {
            marker_len = m.size();
            break;
          }
      }
      if (marker_len > 0) {
        close(i);
        out.push_back({i, i + marker_len});
        i += marker_len;
        continue;
      }
      const auto c = static_cast<unsigned char>(text[i]);
      std::size_t len = 1;
      bool space = false;
      if (c < 0x80) {
        space = c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
      } else {
        // multi-byte: decode one code point to test for Unicode spaces
        len = (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xE ? 3 : (c >> 3) == 0x1E ? 4 : 1;
        len = std::min(len, text.size() - i);
        const auto cp = utf8::decode(text.substr(i, len));
        space = cp.size() == 1 && utf8::is_space(cp[0]);
      }
      if (space) {
        close(i);
      } else if (start == std::string_view::npos) {
        start = i;
      }
      i += len;
    }
    close(text.size());
    return out;
  }

  const Markers& markers() const noexcept { return markers_; }

 private:
  Markers markers_;
};

/// Text of the tokens [first, last) of `text`, taken verbatim from the source
/// (inner whitespace and newlines preserved).
inline std::string_view token_slice(std::string_view text, const std::vector<TokenSpan>& spans,
                                    std::size_t first, std::size_t last) {
  if (first >= last || first >= spans.size()) return {};
  last = std::min(last, spans.size());
  return text.substr(spans[first].begin, spans[last - 1].end - spans[first].begin);
}

}  // namespace dramagen
