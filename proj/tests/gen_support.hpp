#pragma once

// Builders for speaker-labelled texts of an exact token count.

#include <string>

namespace testing_support {

/// `tokens` whitespace tokens: a header line every ten tokens, sentences of
/// nine words in between. Words are unique per `tag`.
inline std::string labelled_text(std::size_t tokens, const std::string& tag = "w") {
  static const char* speakers[] = {"anna:", "paul:", "graf:"};
  std::string out;
  std::size_t sentence = 0;
  for (std::size_t i = 0; i < tokens; ++i) {
    const std::size_t k = i % 10;
    if (k == 0) {
      if (i > 0) out += "\n";
      out += std::string(speakers[(i / 10) % 3]) + "\n";
      continue;
    }
    if (k > 1) out += " ";
    out += tag + std::to_string(sentence) + "_" + std::to_string(k);
    if (k == 9 || i + 1 == tokens) {
      out += ".";
      ++sentence;
    }
  }
  return out + "\n";
}

}  // namespace testing_support
