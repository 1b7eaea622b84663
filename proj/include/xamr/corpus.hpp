#pragma once

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <regex>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"

#include "xamr/error.hpp"
#include "xamr/partition.hpp"
#include "xamr/text.hpp"

namespace xamr {

using AnnotatorId = std::string;

enum class Split { train, dev, test, dev_small };

inline std::string_view to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::dev: return "dev";
    case Split::test: return "test";
    case Split::dev_small: return "dev_small";
  }
  return "?";
}

inline std::optional<Split> parse_split(std::string_view s) {
  if (s == "train") return Split::train;
  if (s == "dev") return Split::dev;
  if (s == "test") return Split::test;
  if (s == "dev_small") return Split::dev_small;
  return std::nullopt;
}

// An argument filler. `surface` may hold several "/"-separated alternatives;
// canonical tokens are derived on demand (see canonicalize_argument).
struct ArgValue {
  std::string surface;

  friend bool operator==(const ArgValue&, const ArgValue&) = default;
};

enum class Arg1Kind { entity, event };

// ARG-1 is either an entity or a nested event named by the roleset of its
// head predicate. `connecting_roleset` records a connecting predicate the
// annotator placed between the two events (e.g. agree.01 between sign.02 and
// acquire.01).
struct Arg1Value {
  Arg1Kind kind = Arg1Kind::entity;
  std::optional<ArgValue> entity;
  std::optional<std::string> linked_roleset;
  std::optional<std::string> connecting_roleset;
  std::optional<MentionId> linked_mention;

  static Arg1Value make_entity(std::string surface) {
    Arg1Value v;
    v.kind = Arg1Kind::entity;
    v.entity = ArgValue{std::move(surface)};
    return v;
  }
  static Arg1Value make_event(std::string roleset, std::optional<std::string> via = std::nullopt) {
    Arg1Value v;
    v.kind = Arg1Kind::event;
    v.linked_roleset = std::move(roleset);
    v.connecting_roleset = std::move(via);
    return v;
  }

  friend bool operator==(const Arg1Value&, const Arg1Value&) = default;
};

struct XAmr {
  std::string roleset;
  std::optional<ArgValue> arg0;
  std::optional<Arg1Value> arg1;
  std::optional<ArgValue> arg_loc;
  std::optional<ArgValue> arg_time;

  bool is_nested() const { return arg1 && arg1->kind == Arg1Kind::event; }

  friend bool operator==(const XAmr&, const XAmr&) = default;
};

struct Mention {
  MentionId mention_id;
  std::string topic_id;
  std::string doc_id;
  long sentence_id = 0;
  std::string sentence;
  std::string trigger_text;
  std::size_t trigger_start = 0;  // code points, half-open
  std::size_t trigger_end = 0;
  std::string lemma;
  std::string gold_cluster;
  Split split = Split::dev;
  std::map<AnnotatorId, XAmr> annotations;

  const XAmr* annotation(const AnnotatorId& who) const {
    auto it = annotations.find(who);
    return it == annotations.end() ? nullptr : &it->second;
  }

  friend bool operator==(const Mention&, const Mention&) = default;
};

// Immutable, indexed collection of mentions. `context` holds mentions that
// are outside the scored set but remain reachable through nested ARG-1 links
// (see subset()).
class Corpus {
 public:
  Corpus() = default;

  explicit Corpus(std::vector<Mention> mentions, std::vector<Mention> context = {})
      : mentions_(std::move(mentions)), context_(std::move(context)) {
    build_indexes();
  }

  const std::vector<Mention>& mentions() const { return mentions_; }
  const std::vector<Mention>& context() const { return context_; }
  std::size_t size() const { return mentions_.size(); }
  bool empty() const { return mentions_.empty(); }

  const std::map<std::string, std::vector<std::size_t>>& by_topic() const { return by_topic_; }
  const std::map<std::string, std::vector<std::size_t>>& by_doc() const { return by_doc_; }
  const Partition& gold() const { return gold_; }

  std::optional<std::size_t> index_of(const MentionId& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  const Mention* find(const MentionId& id) const {
    auto i = index_of(id);
    return i ? &mentions_[*i] : nullptr;
  }

  // Lookup that also sees context mentions; used when following links.
  const Mention* find_linked(const MentionId& id) const {
    if (const Mention* m = find(id)) return m;
    auto it = context_index_.find(id);
    return it == context_index_.end() ? nullptr : &context_[it->second];
  }

  std::vector<MentionId> mention_ids() const {
    std::vector<MentionId> ids;
    ids.reserve(mentions_.size());
    for (const auto& m : mentions_) ids.push_back(m.mention_id);
    return ids;
  }

  std::vector<AnnotatorId> annotators() const {
    std::vector<AnnotatorId> out;
    for (const auto& m : mentions_)
      for (const auto& [a, x] : m.annotations)
        if (std::find(out.begin(), out.end(), a) == out.end()) out.push_back(a);
    std::sort(out.begin(), out.end());
    return out;
  }

  friend bool operator==(const Corpus& a, const Corpus& b) { return a.mentions_ == b.mentions_; }

 private:
  void build_indexes() {
    std::vector<std::pair<MentionId, std::string>> labels;
    labels.reserve(mentions_.size());
    for (std::size_t i = 0; i < mentions_.size(); ++i) {
      const Mention& m = mentions_[i];
      if (!index_.emplace(m.mention_id, i).second) throw Error("duplicate mention_id '" + m.mention_id + "'");
      by_topic_[m.topic_id].push_back(i);
      by_doc_[m.doc_id].push_back(i);
      labels.emplace_back(m.mention_id, m.gold_cluster);
    }
    for (std::size_t i = 0; i < context_.size(); ++i) {
      if (index_.count(context_[i].mention_id)) continue;
      context_index_.emplace(context_[i].mention_id, i);
    }
    gold_ = Partition::from_labels(labels);
  }

  std::vector<Mention> mentions_;
  std::vector<Mention> context_;
  std::unordered_map<MentionId, std::size_t> index_;
  std::unordered_map<MentionId, std::size_t> context_index_;
  std::map<std::string, std::vector<std::size_t>> by_topic_;
  std::map<std::string, std::vector<std::size_t>> by_doc_;
  Partition gold_;
};

// ---------------------------------------------------------------------------
// JSON-lines mention records

namespace detail {

inline bool valid_roleset(const std::string& rs) {
  static const std::regex pattern(R"(^[A-Za-z0-9][A-Za-z0-9_'\-]*(\.([0-9]{2}|[Xx]{2}))?$)");
  return std::regex_match(rs, pattern);
}

class RecordReader {
 public:
  RecordReader(const nlohmann::json& j, const std::string& source, std::size_t line)
      : j_(j), source_(source), line_(line) {}

  [[noreturn]] void fail(const std::string& field, const std::string& what) const {
    throw ParseError(source_, line_, field, what);
  }

  std::string required_string(const nlohmann::json& obj, const std::string& key, const std::string& path) const {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) fail(path, "missing");
    if (!it->is_string()) fail(path, "expected a string");
    return it->get<std::string>();
  }

  std::string required_string(const std::string& key) const { return required_string(j_, key, key); }

  long long required_int(const std::string& key) const {
    auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) fail(key, "missing");
    if (!it->is_number_integer()) fail(key, "expected an integer");
    return it->get<long long>();
  }

  // Absent, null, blank or separator-only values all map to nullopt.
  std::optional<ArgValue> optional_arg(const nlohmann::json& obj, const std::string& key,
                                       const std::string& path) const {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) fail(path, "expected a string");
    auto s = std::string(text::trim(it->get<std::string>()));
    if (text::alternatives(s).empty()) return std::nullopt;
    return ArgValue{std::move(s)};
  }

 private:
  const nlohmann::json& j_;
  const std::string& source_;
  std::size_t line_;
};

inline XAmr parse_xamr(const RecordReader& r, const nlohmann::json& a, const std::string& path) {
  if (!a.is_object()) r.fail(path, "expected an object");
  XAmr x;
  x.roleset = std::string(text::trim(r.required_string(a, "roleset", path + ".roleset")));
  if (x.roleset.empty()) r.fail(path + ".roleset", "empty roleset");
  if (!valid_roleset(x.roleset)) r.fail(path + ".roleset", "malformed roleset '" + x.roleset + "'");
  x.arg0 = r.optional_arg(a, "arg0", path + ".arg0");
  x.arg_loc = r.optional_arg(a, "arg_loc", path + ".arg_loc");
  x.arg_time = r.optional_arg(a, "arg_time", path + ".arg_time");

  auto it = a.find("arg1");
  if (it != a.end() && !it->is_null()) {
    const std::string p1 = path + ".arg1";
    if (!it->is_object()) r.fail(p1, "expected an object {kind, text, roleset}");
    auto kind = r.required_string(*it, "kind", p1 + ".kind");
    if (kind == "entity") {
      if (it->contains("roleset") && !(*it)["roleset"].is_null()) r.fail(p1 + ".roleset", "entity ARG-1 carries a roleset");
      if (auto v = r.optional_arg(*it, "text", p1 + ".text")) {
        Arg1Value a1;
        a1.kind = Arg1Kind::entity;
        a1.entity = std::move(v);
        x.arg1 = std::move(a1);
      }
    } else if (kind == "event") {
      auto rs = std::string(text::trim(r.required_string(*it, "roleset", p1 + ".roleset")));
      if (!valid_roleset(rs)) r.fail(p1 + ".roleset", "malformed roleset '" + rs + "'");
      std::optional<std::string> via;
      if (auto v = it->find("via"); v != it->end() && !v->is_null()) {
        if (!v->is_string()) r.fail(p1 + ".via", "expected a string");
        auto s = std::string(text::trim(v->get<std::string>()));
        if (!s.empty()) {
          if (!valid_roleset(s)) r.fail(p1 + ".via", "malformed roleset '" + s + "'");
          via = std::move(s);
        }
      }
      x.arg1 = Arg1Value::make_event(std::move(rs), std::move(via));
    } else {
      r.fail(p1 + ".kind", "expected 'entity' or 'event', got '" + kind + "'");
    }
  }
  return x;
}

inline bool valid_mention_id(const std::string& id) {
  for (char c : id)
    if (c == ',' || static_cast<unsigned char>(c) < 0x20) return false;
  return !id.empty();
}

}  // namespace detail

inline Mention parse_mention_record(const std::string& line_text, const std::string& source, std::size_t line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(source, line, "<record>", std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError(source, line, "<record>", "expected a JSON object");
  detail::RecordReader r(j, source, line);

  Mention m;
  m.mention_id = r.required_string("mention_id");
  if (!detail::valid_mention_id(m.mention_id)) r.fail("mention_id", "empty or contains a reserved character");
  m.topic_id = r.required_string("topic_id");
  m.doc_id = r.required_string("doc_id");
  m.sentence_id = static_cast<long>(r.required_int("sentence_id"));
  m.sentence = r.required_string("sentence");
  m.trigger_text = r.required_string("trigger_text");
  auto start = r.required_int("trigger_start");
  auto end = r.required_int("trigger_end");
  if (start < 0 || end < 0) r.fail("trigger_start", "negative span offset");
  if (start > end) r.fail("trigger_start", "span start exceeds end");
  auto b = text::utf8_byte_offset(m.sentence, static_cast<std::size_t>(start));
  auto e = text::utf8_byte_offset(m.sentence, static_cast<std::size_t>(end));
  if (!b || !e) r.fail("trigger_end", "span exceeds sentence bounds");
  if (std::string_view(m.sentence).substr(*b, *e - *b) != m.trigger_text)
    r.fail("trigger_text", "span does not slice trigger_text");
  m.trigger_start = static_cast<std::size_t>(start);
  m.trigger_end = static_cast<std::size_t>(end);
  m.lemma = std::string(text::trim(r.required_string("lemma")));
  if (m.lemma.empty()) r.fail("lemma", "empty lemma");
  m.gold_cluster = std::string(text::trim(r.required_string("gold_cluster")));
  if (m.gold_cluster.empty()) r.fail("gold_cluster", "empty gold_cluster");
  auto split = parse_split(r.required_string("split"));
  if (!split) r.fail("split", "expected one of train, dev, test, dev_small");
  m.split = *split;

  if (auto it = j.find("annotations"); it != j.end() && !it->is_null()) {
    if (!it->is_object()) r.fail("annotations", "expected an object keyed by annotator id");
    for (const auto& [who, a] : it->items()) {
      if (!detail::valid_mention_id(who)) r.fail("annotations", "empty annotator id or reserved character");
      m.annotations.emplace(who, detail::parse_xamr(r, a, "annotations." + who));
    }
  }
  return m;
}

inline Corpus read_corpus_jsonl(std::istream& in, const std::string& source = "<corpus>") {
  std::vector<Mention> mentions;
  std::unordered_map<MentionId, std::size_t> first_line;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    Mention m = parse_mention_record(line, source, lineno);
    auto [it, fresh] = first_line.emplace(m.mention_id, lineno);
    if (!fresh)
      throw ParseError(source, lineno, "mention_id",
                       "duplicate mention_id '" + m.mention_id + "' (first on line " + std::to_string(it->second) +
                           ", again on line " + std::to_string(lineno) + ")");
    mentions.push_back(std::move(m));
  }
  return Corpus(std::move(mentions));
}

enum class CorpusFormat { jsonl };

inline Corpus load_corpus(const std::string& path, CorpusFormat format = CorpusFormat::jsonl) {
  (void)format;
  std::ifstream in(path);
  if (!in) throw Error("cannot open corpus file '" + path + "'");
  return read_corpus_jsonl(in, path);
}

namespace detail {

inline nlohmann::ordered_json xamr_to_json(const XAmr& x) {
  nlohmann::ordered_json a;
  a["roleset"] = x.roleset;
  if (x.arg0) a["arg0"] = x.arg0->surface;
  if (x.arg1) {
    nlohmann::ordered_json a1;
    if (x.arg1->kind == Arg1Kind::entity) {
      a1["kind"] = "entity";
      if (x.arg1->entity) a1["text"] = x.arg1->entity->surface;
    } else {
      a1["kind"] = "event";
      a1["roleset"] = x.arg1->linked_roleset.value_or("");
      if (x.arg1->connecting_roleset) a1["via"] = *x.arg1->connecting_roleset;
    }
    a["arg1"] = std::move(a1);
  }
  if (x.arg_loc) a["arg_loc"] = x.arg_loc->surface;
  if (x.arg_time) a["arg_time"] = x.arg_time->surface;
  return a;
}

}  // namespace detail

inline std::string mention_to_json_line(const Mention& m) {
  nlohmann::ordered_json j;
  j["mention_id"] = m.mention_id;
  j["topic_id"] = m.topic_id;
  j["doc_id"] = m.doc_id;
  j["sentence_id"] = m.sentence_id;
  j["sentence"] = m.sentence;
  j["trigger_text"] = m.trigger_text;
  j["trigger_start"] = m.trigger_start;
  j["trigger_end"] = m.trigger_end;
  j["lemma"] = m.lemma;
  j["gold_cluster"] = m.gold_cluster;
  j["split"] = std::string(to_string(m.split));
  nlohmann::ordered_json anns = nlohmann::ordered_json::object();
  for (const auto& [who, x] : m.annotations) anns[who] = detail::xamr_to_json(x);
  j["annotations"] = std::move(anns);
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::strict);
}

inline void write_corpus_jsonl(std::ostream& out, const Corpus& corpus) {
  for (const auto& m : corpus.mentions()) out << mention_to_json_line(m) << '\n';
}

// ---------------------------------------------------------------------------
// Sub-corpora

struct MentionSelector {
  std::variant<Split, std::vector<MentionId>> value;
};

// Mentions reachable from `seed` through resolved ARG-1 links that are not in
// `inside`; returned in the order first reached.
inline std::vector<Mention> linked_closure(const Corpus& corpus, const std::vector<const Mention*>& seed,
                                           const std::unordered_set<MentionId>& inside) {
  std::vector<Mention> out;
  std::unordered_set<MentionId> taken;
  std::vector<const Mention*> stack(seed.rbegin(), seed.rend());
  while (!stack.empty()) {
    const Mention* m = stack.back();
    stack.pop_back();
    for (const auto& [who, x] : m->annotations) {
      if (!x.is_nested() || !x.arg1->linked_mention) continue;
      const MentionId& target = *x.arg1->linked_mention;
      if (inside.count(target) || taken.count(target)) continue;
      if (const Mention* t = corpus.find_linked(target)) {
        taken.insert(target);
        out.push_back(*t);
        stack.push_back(t);
      }
    }
  }
  return out;
}

inline Corpus subset(const Corpus& corpus, const MentionSelector& selector) {
  std::unordered_set<MentionId> keep;
  if (const auto* ids = std::get_if<std::vector<MentionId>>(&selector.value)) {
    if (ids->empty()) throw Error("subset: empty selector");
    std::vector<MentionId> unknown;
    for (const auto& id : *ids) {
      if (!corpus.find(id)) unknown.push_back(id);
      keep.insert(id);
    }
    if (!unknown.empty()) throw Error("subset: unknown mention ids: " + text::join(unknown, ","));
  } else {
    Split s = std::get<Split>(selector.value);
    for (const auto& m : corpus.mentions())
      if (m.split == s) keep.insert(m.mention_id);
  }
  std::vector<Mention> kept;
  std::vector<const Mention*> seed;
  for (const auto& m : corpus.mentions())
    if (keep.count(m.mention_id)) {
      kept.push_back(m);
      seed.push_back(&m);
    }
  return Corpus(std::move(kept), linked_closure(corpus, seed, keep));
}

// One mention id per line; blank lines and '#' comments ignored.
inline std::vector<MentionId> read_id_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open id list '" + path + "'");
  std::vector<MentionId> ids;
  std::string line;
  while (std::getline(in, line)) {
    auto t = text::trim(line);
    if (t.empty() || t[0] == '#') continue;
    ids.emplace_back(t);
  }
  return ids;
}

}  // namespace xamr
