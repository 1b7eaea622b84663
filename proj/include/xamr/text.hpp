#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace xamr::text {

// Separator placed between identifier tokens in bucket keys.
inline constexpr char kUnitSeparator = '\x1F';
// Separator placed between a key family tag and the key body.
inline constexpr char kRecordSeparator = '\x1E';

inline bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline std::string_view trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && is_space(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

// Case-fold (ASCII), trim and collapse internal whitespace to single blanks.
// Control bytes count as whitespace, so the result never contains a
// separator byte.
inline std::string normalize(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char ch : s) {
    auto c = static_cast<unsigned char>(ch);
    if (is_space(c) || c < 0x20 || c == 0x7F) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : ch);
  }
  return out;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(s.substr(start));
      return parts;
    }
    parts.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

template <typename Range>
std::string join(const Range& parts, std::string_view sep) {
  std::string out;
  bool first = true;
  for (const auto& p : parts) {
    if (!first) out.append(sep);
    out.append(p);
    first = false;
  }
  return out;
}

inline constexpr std::string_view kWikiPrefix = "/wiki/";

// Non-empty trimmed parts of a "/"-separated multi-value surface. A surface
// made of wiki paths ("/wiki/A" or "/wiki/A/wiki/B") splits only at each
// path start, so every path survives whole as an opaque id.
inline std::vector<std::string_view> alternatives(std::string_view surface) {
  std::vector<std::string_view> out;
  surface = trim(surface);
  if (surface.substr(0, kWikiPrefix.size()) == kWikiPrefix) {
    std::size_t start = 0;
    while (start < surface.size()) {
      auto next = surface.find(kWikiPrefix, start + 1);
      if (next == std::string_view::npos) next = surface.size();
      auto t = trim(surface.substr(start, next - start));
      while (!t.empty() && (t.back() == '/' || is_space(static_cast<unsigned char>(t.back())))) t.remove_suffix(1);
      if (t.size() > kWikiPrefix.size()) out.push_back(t);
      start = next;
    }
    return out;
  }
  for (auto part : split(surface, '/')) {
    auto t = trim(part);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

// Byte offset of the given code point index in a UTF-8 string, or nullopt
// when the index is past the end. Index == number of code points maps to size().
inline std::optional<std::size_t> utf8_byte_offset(std::string_view s, std::size_t code_point) {
  std::size_t cp = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || (static_cast<unsigned char>(s[i]) & 0xC0) != 0x80) {
      if (cp == code_point) return i;
      ++cp;
    }
  }
  return std::nullopt;
}

inline std::size_t utf8_length(std::string_view s) {
  std::size_t n = 0;
  for (char c : s)
    if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++n;
  return n;
}

inline std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
  if (needle.empty()) return 0;
  std::size_t n = 0;
  for (std::size_t pos = haystack.find(needle); pos != std::string_view::npos;
       pos = haystack.find(needle, pos + needle.size()))
    ++n;
  return n;
}

// Render control (separator) bytes as their Unicode control pictures.
inline std::string printable_key(std::string_view key) {
  std::string out;
  out.reserve(key.size() + 8);
  for (char c : key) {
    const auto u = static_cast<unsigned char>(c);
    if (u < 0x20) {
      out += "\xE2\x90";  // U+2400 block
      out.push_back(static_cast<char>(0x80 + u));
    } else {
      out.push_back(c);
    }
  }
  return out;
}

}  // namespace xamr::text
