#pragma once

#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>

#include "xamr/error.hpp"
#include "xamr/text.hpp"

namespace xamr {

// Roleset -> VerbNet classes, and normalized surface -> canonical entity id.
// Alias keys are stored normalized, so lookups never re-normalize them.
struct Lexicons {
  std::map<std::string, std::set<std::string>> vn_classes;
  std::unordered_map<std::string, std::string> aliases;

  const std::set<std::string>* classes_of(const std::string& roleset) const {
    auto it = vn_classes.find(roleset);
    return it == vn_classes.end() ? nullptr : &it->second;
  }

  // `normalized` must already be in text::normalize() form.
  const std::string* alias_of(const std::string& normalized) const {
    auto it = aliases.find(normalized);
    return it == aliases.end() ? nullptr : &it->second;
  }

  void add_alias(const std::string& surface, std::string canonical_id) {
    aliases[text::normalize(surface)] = std::move(canonical_id);
  }
};

namespace detail {

inline bool valid_token(std::string_view s) {
  if (s.empty()) return false;
  // control bytes are reserved for key separators
  for (char c : s)
    if (static_cast<unsigned char>(c) < 0x20) return false;
  return true;
}

// Two-column TSV reader; '#' comment lines and blank lines skipped.
template <typename RowFn>
void read_tsv_pairs(std::istream& in, const std::string& source, const char* key_name, const char* value_name,
                    RowFn&& on_row) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto t = text::trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError(source, lineno, value_name, "missing TAB-separated column");
    auto key = std::string(text::trim(std::string_view(line).substr(0, tab)));
    auto value = std::string(text::trim(std::string_view(line).substr(tab + 1)));
    if (key.empty()) throw ParseError(source, lineno, key_name, "blank field");
    if (!valid_token(value)) throw ParseError(source, lineno, value_name, "blank field or reserved character");
    on_row(std::move(key), std::move(value));
  }
}

}  // namespace detail

inline void read_vn_map(std::istream& in, Lexicons& lex, const std::string& source = "<vn-map>") {
  detail::read_tsv_pairs(in, source, "roleset", "class_id", [&](std::string rs, std::string cls) {
    lex.vn_classes[std::move(rs)].insert(std::move(cls));
  });
}

inline void read_alias_map(std::istream& in, Lexicons& lex, const std::string& source = "<alias-map>") {
  detail::read_tsv_pairs(in, source, "surface", "canonical_id", [&](std::string surface, std::string id) {
    auto key = text::normalize(surface);
    if (key.empty()) return;
    lex.aliases[std::move(key)] = std::move(id);
  });
}

// Either path may be empty, in which case that map stays empty.
inline Lexicons load_lexicons(const std::string& vn_path, const std::string& alias_path) {
  Lexicons lex;
  if (!vn_path.empty()) {
    std::ifstream in(vn_path);
    if (!in) throw Error("cannot open VerbNet map '" + vn_path + "'");
    read_vn_map(in, lex, vn_path);
  }
  if (!alias_path.empty()) {
    std::ifstream in(alias_path);
    if (!in) throw Error("cannot open alias map '" + alias_path + "'");
    read_alias_map(in, lex, alias_path);
  }
  return lex;
}

}  // namespace xamr
