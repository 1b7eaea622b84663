#pragma once

#include <cctype>
#include <map>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "json.hpp"
#include "xamr/corpus.hpp"
#include "xamr/error.hpp"
#include "xamr/llm/prompt.hpp"
#include "xamr/text.hpp"

namespace xamr::llm {

// Modeled fields of one structured annotation. Empty strings mean "absent".
struct AnnotationResponse {
  std::string roleset;
  std::string arg0;
  std::string arg0_coref;
  std::string arg1;
  std::string arg1_coref;
  std::optional<std::string> arg1_roleset;
  std::string arg_location;
  std::string arg_time;
  std::string event_description;
  std::optional<std::string> best_match;

  std::string raw;
  bool time_flagged = false;
  std::vector<std::string> warnings;
  // chain-of-thought and unknown keys, kept only for logging
  std::map<std::string, std::string> extra;

  bool same_fields(const AnnotationResponse& o) const {
    return roleset == o.roleset && arg0 == o.arg0 && arg0_coref == o.arg0_coref && arg1 == o.arg1 &&
           arg1_coref == o.arg1_coref && arg1_roleset == o.arg1_roleset && arg_location == o.arg_location &&
           arg_time == o.arg_time && event_description == o.event_description && best_match == o.best_match;
  }
};

class ResponseParseError : public Error {
 public:
  ResponseParseError(const std::string& what, std::string raw)
      : Error("unparseable annotation response: " + what), raw_(std::move(raw)) {}
  const std::string& raw() const { return raw_; }

 private:
  std::string raw_;
};

namespace detail {

enum class Field {
  roleset, arg0, arg0_coref, arg1, arg1_coref, arg1_roleset, location, time, description, best_match, other
};

inline std::string key_signature(std::string_view key) {
  std::string out;
  for (char c : key)
    if (std::isalnum(static_cast<unsigned char>(c))) out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline Field classify_key(std::string_view key) {
  static const std::map<std::string, Field> table = {
      {"rolesetid", Field::roleset},          {"roleset", Field::roleset},
      {"arg0", Field::arg0},                  {"arg0coreference", Field::arg0_coref},
      {"arg0coref", Field::arg0_coref},       {"arg1", Field::arg1},
      {"arg1coreference", Field::arg1_coref}, {"arg1coref", Field::arg1_coref},
      {"arg1rolesetid", Field::arg1_roleset}, {"arg1roleset", Field::arg1_roleset},
      {"arglocation", Field::location},       {"argloc", Field::location},
      {"argtime", Field::time},               {"eventdescription", Field::description},
      {"bestmatchingeventdescription", Field::best_match},
  };
  auto it = table.find(key_signature(key));
  return it == table.end() ? Field::other : it->second;
}

inline bool is_placeholder(std::string_view v) {
  static const char* const kNone[] = {"", "n/a", "na", "none", "null", "nil", "unknown", "-"};
  const std::string n = text::normalize(v);
  for (const char* p : kNone)
    if (n == p) return true;
  return false;
}

// Scalar or list value as text; lists join with "/" the way annotators write
// multi-values. Placeholders become "".
inline std::string value_text(const nlohmann::json& v) {
  std::string s;
  if (v.is_null()) return {};
  if (v.is_string()) {
    s = v.get<std::string>();
  } else if (v.is_array()) {
    std::vector<std::string> parts;
    for (const auto& e : v) {
      auto t = value_text(e);
      if (!t.empty()) parts.push_back(std::move(t));
    }
    s = text::join(parts, "/");
  } else if (v.is_boolean()) {
    s = v.get<bool>() ? "Yes" : "No";
  } else {
    s = v.dump();
  }
  s = std::string(text::trim(s));
  return is_placeholder(s) ? std::string() : s;
}

// Pull the JSON object out of a reply that may wrap it in prose or code fences.
inline std::string extract_json_object(const std::string& raw) {
  std::string body = raw;
  if (auto fence = body.find("```"); fence != std::string::npos) {
    auto line_end = body.find('\n', fence);
    auto close = line_end == std::string::npos ? std::string::npos : body.find("```", line_end);
    if (line_end != std::string::npos)
      body = body.substr(line_end + 1, close == std::string::npos ? std::string::npos : close - line_end - 1);
  }
  auto open = body.find('{');
  auto close = body.rfind('}');
  if (open == std::string::npos || close == std::string::npos || close < open) return {};
  return body.substr(open, close - open + 1);
}

inline const std::regex& month_day_year() {
  static const std::regex re(
      R"(^(0?[1-9]|1[0-2]|jan|feb|mar|apr|may|jun|jul|aug|sep|sept|oct|nov|dec|january|february|march|april|june|july|august|september|october|november|december)-(0?[1-9]|[12][0-9]|3[01])-([0-9]{4})$)",
      std::regex::icase);
  return re;
}

}  // namespace detail

// AMR-style sense suffixes ("acquire-01") become PropBank style ("acquire.01").
inline std::string normalize_roleset(std::string rs) {
  const std::size_t n = rs.size();
  if (n > 3 && rs[n - 3] == '-' && std::isdigit(static_cast<unsigned char>(rs[n - 2])) &&
      std::isdigit(static_cast<unsigned char>(rs[n - 1])) && rs.find('.') == std::string::npos)
    rs[n - 3] = '.';
  return rs;
}

inline bool valid_month_day_year(const std::string& s) { return std::regex_match(s, detail::month_day_year()); }

inline bool is_wiki_path(const std::string& s) {
  return s.size() > text::kWikiPrefix.size() && s.compare(0, text::kWikiPrefix.size(), text::kWikiPrefix) == 0;
}

// Tolerant parse: code fences and surrounding prose are skipped, keys match
// ignoring case and punctuation, and keys outside the modeled set are kept
// in `extra`. A missing roleset is an error; format problems in the wiki and
// time fields only add warnings.
inline AnnotationResponse parse_response(const std::string& raw) {
  const std::string payload = detail::extract_json_object(raw);
  if (payload.empty()) throw ResponseParseError("no JSON object found", raw);
  nlohmann::json j = nlohmann::json::parse(payload, nullptr, false, true);
  if (j.is_discarded() || !j.is_object()) throw ResponseParseError("malformed JSON object", raw);

  AnnotationResponse r;
  r.raw = raw;
  bool saw_roleset = false;
  for (const auto& [key, value] : j.items()) {
    std::string v = detail::value_text(value);
    switch (detail::classify_key(key)) {
      case detail::Field::roleset:
        saw_roleset = true;
        r.roleset = v;
        break;
      case detail::Field::arg0: r.arg0 = v; break;
      case detail::Field::arg0_coref: r.arg0_coref = v; break;
      case detail::Field::arg1: r.arg1 = v; break;
      case detail::Field::arg1_coref: r.arg1_coref = v; break;
      case detail::Field::arg1_roleset:
        if (!v.empty()) r.arg1_roleset = v;
        break;
      case detail::Field::location: r.arg_location = v; break;
      case detail::Field::time: r.arg_time = v; break;
      case detail::Field::description: r.event_description = v; break;
      case detail::Field::best_match:
        if (!v.empty()) r.best_match = v;
        break;
      case detail::Field::other: r.extra[key] = v; break;
    }
  }
  if (!saw_roleset || r.roleset.empty()) throw ResponseParseError("missing key 'Roleset ID'", raw);
  r.roleset = normalize_roleset(r.roleset);
  if (!xamr::detail::valid_roleset(r.roleset)) throw ResponseParseError("malformed Roleset ID '" + r.roleset + "'", raw);
  if (r.arg1_roleset) {
    *r.arg1_roleset = normalize_roleset(*r.arg1_roleset);
    if (!xamr::detail::valid_roleset(*r.arg1_roleset)) {
      r.warnings.push_back("ARG-1 Roleset ID ignored, malformed: " + *r.arg1_roleset);
      r.arg1_roleset.reset();
    }
  }

  auto check_wiki = [&](const std::string& v, const char* name) {
    if (!v.empty() && !is_wiki_path(v)) r.warnings.push_back(std::string(name) + " is not a /wiki/ path: " + v);
  };
  check_wiki(r.arg0_coref, "ARG-0 Coreference");
  check_wiki(r.arg1_coref, "ARG-1 Coreference");
  check_wiki(r.arg_location, "ARG-Location");
  if (!r.arg_time.empty() && !valid_month_day_year(r.arg_time)) {
    r.time_flagged = true;
    r.warnings.push_back("ARG-Time is not Month-Day-Year: " + r.arg_time);
  }
  return r;
}

inline std::string render_response(const AnnotationResponse& r) {
  nlohmann::ordered_json j;
  if (r.best_match) j[std::string(kBestMatchKey)] = *r.best_match;
  j["Roleset ID"] = r.roleset;
  j["ARG-0"] = r.arg0;
  j["ARG-0 Coreference"] = r.arg0_coref;
  j["ARG-1"] = r.arg1;
  j["ARG-1 Coreference"] = r.arg1_coref;
  if (r.arg1_roleset) j["ARG-1 Roleset ID"] = *r.arg1_roleset;
  j["ARG-Location"] = r.arg_location;
  j["ARG-Time"] = r.arg_time;
  j["Event Description"] = r.event_description;
  return j.dump(2);
}

// Graph form of a response. Wiki paths are preferred over raw argument text
// since they are already canonical ids.
inline XAmr to_xamr(const AnnotationResponse& r) {
  XAmr x;
  x.roleset = r.roleset;
  auto pick = [](const std::string& coref, const std::string& surface) -> std::optional<ArgValue> {
    const std::string& v = coref.empty() ? surface : coref;
    if (text::alternatives(v).empty()) return std::nullopt;
    return ArgValue{v};
  };
  x.arg0 = pick(r.arg0_coref, r.arg0);
  if (r.arg1_roleset) {
    x.arg1 = Arg1Value::make_event(*r.arg1_roleset);
  } else if (auto e = pick(r.arg1_coref, r.arg1)) {
    x.arg1 = Arg1Value::make_entity(e->surface);
  }
  x.arg_loc = pick(r.arg_location, {});
  x.arg_time = pick(r.arg_time, {});
  return x;
}

// Every argument, location and time included, is filled.
inline bool is_complete(const AnnotationResponse& r) {
  const XAmr x = to_xamr(r);
  return !r.event_description.empty() && x.arg0 && x.arg1 && x.arg_loc && x.arg_time;
}

}  // namespace xamr::llm
