#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace dramagen::utf8 {

/// Decodes UTF-8 into code points. Invalid bytes decode to U+FFFD so the
/// result length never exceeds the byte length.
inline std::u32string decode(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    char32_t cp = 0;
    std::size_t len = 0;
    if (c < 0x80) {
      cp = c;
      len = 1;
    } else if ((c >> 5) == 0x6) {
      cp = c & 0x1F;
      len = 2;
    } else if ((c >> 4) == 0xE) {
      cp = c & 0x0F;
      len = 3;
    } else if ((c >> 3) == 0x1E) {
      cp = c & 0x07;
      len = 4;
    } else {
      out.push_back(U'�');
      ++i;
      continue;
    }
    if (i + len > s.size()) {
      out.push_back(U'�');
      ++i;
      continue;
    }
    bool ok = true;
    for (std::size_t k = 1; k < len; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc >> 6) != 0x2) {
        ok = false;
        break;
      }
      cp = (cp << 6) | (cc & 0x3F);
    }
    if (!ok) {
      out.push_back(U'�');
      ++i;
      continue;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

inline void append(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

inline std::string encode(std::u32string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char32_t cp : s) append(out, cp);
  return out;
}

// Case mapping covers ASCII, Latin-1 and Latin Extended-A, which is what
// historical and modern German text uses.
inline char32_t to_lower(char32_t c) {
  if (c >= U'A' && c <= U'Z') return c + 32;
  if ((c >= 0xC0 && c <= 0xDE) && c != 0xD7) return c + 32;
  if (c == 0x1E9E) return 0xDF;  // capital sharp s
  if (c >= 0x100 && c <= 0x17F) {
    if (c == 0x130 || c == 0x131 || c == 0x138 || c == 0x149 || c == 0x17F) return c;
    const bool odd_upper = (c >= 0x139 && c <= 0x148) || (c >= 0x179 && c <= 0x17E);
    if (odd_upper) return (c % 2 == 1) ? c + 1 : c;
    if (c == 0x178) return 0xFF;
    return (c % 2 == 0) ? c + 1 : c;
  }
  return c;
}

inline char32_t to_upper(char32_t c) {
  if (c >= U'a' && c <= U'z') return c - 32;
  if ((c >= 0xE0 && c <= 0xFE) && c != 0xF7) return c - 32;
  if (c == 0xFF) return 0x178;
  if (c >= 0x100 && c <= 0x17F) {
    if (c == 0x130 || c == 0x131 || c == 0x138 || c == 0x149 || c == 0x17F) return c;
    const bool odd_upper = (c >= 0x139 && c <= 0x148) || (c >= 0x179 && c <= 0x17E);
    if (odd_upper) return (c % 2 == 0) ? c - 1 : c;
    return (c % 2 == 1) ? c - 1 : c;
  }
  return c;
}

inline bool is_upper(char32_t c) { return to_lower(c) != c; }
inline bool is_lower(char32_t c) { return to_upper(c) != c || c == 0xDF; }
inline bool is_letter(char32_t c) {
  return is_upper(c) || is_lower(c) || c == 0xDF || c == 0x17F || (c >= 0x250 && c <= 0x2AF);
}
inline bool is_digit(char32_t c) { return c >= U'0' && c <= U'9'; }

inline bool is_space(char32_t c) {
  return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\f' || c == U'\v' ||
         c == 0xA0 || c == 0x2009 || c == 0x200A || c == 0x202F || c == 0x3000 ||
         (c >= 0x2000 && c <= 0x2008);
}

/// Apostrophe-like characters that may be part of a word (elision marks).
inline bool is_apostrophe(char32_t c) {
  return c == U'\'' || c == 0x2019 || c == 0x2018 || c == 0x02BC;
}

/// Punctuation and symbol characters, excluding apostrophes.
inline bool is_punct(char32_t c) {
  if (is_apostrophe(c)) return false;
  if (c < 0x80) {
    return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) || (c >= 0x5B && c <= 0x60) ||
           (c >= 0x7B && c <= 0x7E);
  }
  if (c >= 0xA1 && c <= 0xBF && c != 0xAA && c != 0xB5 && c != 0xBA) return true;
  if (c == 0xD7 || c == 0xF7) return true;
  if (c >= 0x2010 && c <= 0x205E) return true;
  if (c >= 0x2E00 && c <= 0x2E4F) return true;
  if (c >= 0x3000 && c <= 0x303F) return c != 0x3000;
  return false;
}

inline std::string lower(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char32_t c : decode(s)) append(out, to_lower(c));
  return out;
}

/// First code point of `s`, or 0 when empty.
inline char32_t first(std::string_view s) {
  if (s.empty()) return 0;
  const auto d = decode(s.substr(0, std::min<std::size_t>(4, s.size())));
  return d.empty() ? 0 : d.front();
}

inline std::string capitalize_first(std::string_view s) {
  auto d = decode(s);
  if (!d.empty()) d[0] = to_upper(d[0]);
  return encode(d);
}

/// Splits at any Unicode whitespace; empty pieces are dropped.
inline std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char32_t c : decode(s)) {
    if (is_space(c)) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      append(cur, c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

/// Strips leading and trailing punctuation (apostrophes kept).
inline std::string trim_punct(std::string_view s) {
  auto d = decode(s);
  std::size_t b = 0, e = d.size();
  while (b < e && is_punct(d[b])) ++b;
  while (e > b && is_punct(d[e - 1])) --e;
  return encode(std::u32string_view(d).substr(b, e - b));
}

inline std::string_view trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n\f\v";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline bool has_letter(std::string_view s) {
  for (char32_t c : decode(s))
    if (is_letter(c)) return true;
  return false;
}

}  // namespace dramagen::utf8
