#pragma once

#include <compare>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "xamr/corpus.hpp"
#include "xamr/error.hpp"
#include "xamr/lexicons.hpp"
#include "xamr/text.hpp"

namespace xamr {

enum class RolesetMode { verbatim, vn_class };

enum class EidKind { eid0, eidN, eidLT };

inline std::string_view to_string(EidKind k) {
  switch (k) {
    case EidKind::eid0: return "eid0";
    case EidKind::eidN: return "eidN";
    case EidKind::eidLT: return "eidLT";
  }
  return "?";
}

// Token standing in for an absent slot when empty slots are allowed.
inline constexpr std::string_view kEmptySlot = "\xE2\x88\x85";  // U+2205

inline constexpr int kMaxDepthLimit = 8;

struct EidConfig {
  RolesetMode roleset_mode = RolesetMode::verbatim;
  int max_depth = 3;
  bool allow_empty_slots = false;
  bool multi_value_expansion = true;
  bool include_connecting_roleset = false;

  void validate() const {
    if (max_depth < 0 || max_depth > kMaxDepthLimit)
      throw Error("eid: max_depth must lie in [0, " + std::to_string(kMaxDepthLimit) + "], got " +
                  std::to_string(max_depth));
  }

  friend bool operator==(const EidConfig&, const EidConfig&) = default;
};

struct EventIdentifier {
  EidKind kind = EidKind::eid0;
  std::vector<std::string> tokens;

  friend auto operator<=>(const EventIdentifier&, const EventIdentifier&) = default;
  friend bool operator==(const EventIdentifier&, const EventIdentifier&) = default;
};

using IdentifierSet = std::set<EventIdentifier>;

class MissingAnnotation : public Error {
 public:
  MissingAnnotation(const MentionId& mention, const AnnotatorId& annotator)
      : Error("mention '" + mention + "' has no annotation by '" + annotator + "'") {}
};

// ---------------------------------------------------------------------------
// Canonicalization

// Normalize each "/" alternative, map it through the alias table, drop
// repeats while keeping first-seen order.
inline std::vector<std::string> canonicalize_argument(const ArgValue& value, const Lexicons& lex,
                                                      bool multi_value_expansion = true) {
  std::vector<std::string> out;
  auto add = [&](std::string_view part) {
    std::string norm = text::normalize(part);
    if (norm.empty()) return;
    const std::string* alias = lex.alias_of(norm);
    std::string tok = alias ? *alias : std::move(norm);
    for (const auto& t : out)
      if (t == tok) return;
    out.push_back(std::move(tok));
  };
  if (multi_value_expansion) {
    for (auto part : text::alternatives(value.surface)) add(part);
  } else {
    add(value.surface);
  }
  return out;
}

inline std::vector<std::string> canonicalize_roleset(const std::string& roleset, RolesetMode mode,
                                                     const Lexicons& lex) {
  if (mode == RolesetMode::vn_class)
    if (const auto* classes = lex.classes_of(roleset); classes && !classes->empty())
      return {classes->begin(), classes->end()};  // std::set keeps them sorted
  return {roleset};
}

// ---------------------------------------------------------------------------
// Identifier construction

namespace detail {

using Tuple = std::vector<std::string>;

inline std::vector<Tuple> extend(const std::vector<Tuple>& prefixes, const std::vector<std::string>& slot) {
  std::vector<Tuple> out;
  out.reserve(prefixes.size() * slot.size());
  for (const auto& p : prefixes)
    for (const auto& tok : slot) {
      Tuple t = p;
      t.push_back(tok);
      out.push_back(std::move(t));
    }
  return out;
}

inline std::vector<std::string> slot_tokens(const std::optional<ArgValue>& v, const EidConfig& cfg,
                                            const Lexicons& lex) {
  if (v) {
    auto toks = canonicalize_argument(*v, lex, cfg.multi_value_expansion);
    if (!toks.empty()) return toks;
  }
  if (cfg.allow_empty_slots) return {std::string(kEmptySlot)};
  return {};
}

// ARG-1 of an event treated as the end of a chain: entity tokens, or the
// canonical linked roleset when the ARG-1 is an event that is not expanded.
inline std::vector<std::string> terminal_arg1_tokens(const XAmr& x, const EidConfig& cfg, const Lexicons& lex) {
  if (x.arg1 && x.arg1->kind == Arg1Kind::event && x.arg1->linked_roleset)
    return canonicalize_roleset(*x.arg1->linked_roleset, cfg.roleset_mode, lex);
  if (x.arg1 && x.arg1->kind == Arg1Kind::entity) return slot_tokens(x.arg1->entity, cfg, lex);
  return slot_tokens(std::nullopt, cfg, lex);
}

inline std::vector<Tuple> eid0_tuples(const XAmr& x, const EidConfig& cfg, const Lexicons& lex) {
  std::vector<Tuple> acc{Tuple{}};
  acc = extend(acc, slot_tokens(x.arg0, cfg, lex));
  acc = extend(acc, canonicalize_roleset(x.roleset, cfg.roleset_mode, lex));
  acc = extend(acc, terminal_arg1_tokens(x, cfg, lex));
  return acc;
}

inline IdentifierSet to_set(EidKind kind, std::vector<Tuple> tuples) {
  IdentifierSet out;
  for (auto& t : tuples) out.insert(EventIdentifier{kind, std::move(t)});
  return out;
}

}  // namespace detail

// Standard identifier <ARG-0, roleset, ARG-1> over all canonical alternatives.
inline IdentifierSet eid0(const XAmr& x, const EidConfig& cfg, const Lexicons& lex) {
  return detail::to_set(EidKind::eid0, detail::eid0_tuples(x, cfg, lex));
}

// Location/time identifier <ARG-0, roleset, ARG-Loc, ARG-Time>. ARG-1 plays
// no part.
inline IdentifierSet eid_lt(const XAmr& x, const EidConfig& cfg, const Lexicons& lex) {
  std::vector<detail::Tuple> acc{detail::Tuple{}};
  acc = detail::extend(acc, detail::slot_tokens(x.arg0, cfg, lex));
  acc = detail::extend(acc, canonicalize_roleset(x.roleset, cfg.roleset_mode, lex));
  acc = detail::extend(acc, detail::slot_tokens(x.arg_loc, cfg, lex));
  acc = detail::extend(acc, detail::slot_tokens(x.arg_time, cfg, lex));
  return detail::to_set(EidKind::eidLT, std::move(acc));
}

// Nested identifiers. Follows eventive ARG-1 links from `root` (via `follow`,
// which returns the linked event's annotation or nullptr when unresolved) for
// at most cfg.max_depth hops, giving the chain e0 .. eT. With T == 0 the
// result is eid0(root). Otherwise, for every cut j in [0, T) it emits
//   <ARG-0(e0), RS(e0), ..., ARG-0(ej), RS(ej)> ++ eid0(eT)
// expanded over canonical alternatives.
template <typename Follow>
IdentifierSet eid_n(const XAmr& root, Follow&& follow, const EidConfig& cfg, const Lexicons& lex) {
  cfg.validate();
  std::vector<const XAmr*> chain{&root};
  while (static_cast<int>(chain.size()) <= cfg.max_depth && chain.back()->is_nested()) {
    const XAmr* next = follow(*chain.back()->arg1);
    if (!next) break;
    chain.push_back(next);
  }
  if (chain.size() == 1) return eid0(root, cfg, lex);

  const auto terminal = detail::eid0_tuples(*chain.back(), cfg, lex);
  if (terminal.empty()) return {};

  std::vector<detail::Tuple> out;
  std::vector<detail::Tuple> prefix{detail::Tuple{}};
  for (std::size_t j = 0; j + 1 < chain.size(); ++j) {
    const XAmr& e = *chain[j];
    prefix = detail::extend(prefix, detail::slot_tokens(e.arg0, cfg, lex));
    prefix = detail::extend(prefix, canonicalize_roleset(e.roleset, cfg.roleset_mode, lex));
    if (cfg.include_connecting_roleset && e.arg1 && e.arg1->connecting_roleset)
      prefix = detail::extend(prefix, canonicalize_roleset(*e.arg1->connecting_roleset, cfg.roleset_mode, lex));
    if (prefix.empty()) break;
    for (const auto& p : prefix)
      for (const auto& t : terminal) {
        detail::Tuple full = p;
        full.insert(full.end(), t.begin(), t.end());
        out.push_back(std::move(full));
      }
  }
  return detail::to_set(EidKind::eidN, std::move(out));
}

// Pure nested identifiers with every link treated as unresolved.
inline IdentifierSet eid_n(const XAmr& root, const EidConfig& cfg, const Lexicons& lex) {
  return eid_n(root, [](const Arg1Value&) -> const XAmr* { return nullptr; }, cfg, lex);
}

// Link follower over a corpus: the annotation of the linked mention by the
// same annotator.
struct CorpusLinks {
  const Corpus& corpus;
  const AnnotatorId& annotator;

  const XAmr* operator()(const Arg1Value& a) const {
    if (!a.linked_mention) return nullptr;
    const Mention* m = corpus.find_linked(*a.linked_mention);
    return m ? m->annotation(annotator) : nullptr;
  }
};

inline const XAmr& require_annotation(const Mention& m, const AnnotatorId& annotator) {
  const XAmr* x = m.annotation(annotator);
  if (!x) throw MissingAnnotation(m.mention_id, annotator);
  return *x;
}

inline IdentifierSet eid0(const Mention& m, const AnnotatorId& annotator, const EidConfig& cfg, const Lexicons& lex) {
  return eid0(require_annotation(m, annotator), cfg, lex);
}

inline IdentifierSet eid_lt(const Mention& m, const AnnotatorId& annotator, const EidConfig& cfg,
                            const Lexicons& lex) {
  return eid_lt(require_annotation(m, annotator), cfg, lex);
}

inline IdentifierSet eid_n(const Corpus& corpus, const Mention& m, const AnnotatorId& annotator, const EidConfig& cfg,
                           const Lexicons& lex) {
  return eid_n(require_annotation(m, annotator), CorpusLinks{corpus, annotator}, cfg, lex);
}

// Injective text key: kind, then tokens, joined by the unit separator.
inline std::string identifier_key(const EventIdentifier& id) {
  std::string key(to_string(id.kind));
  for (const auto& t : id.tokens) {
    if (t.find(text::kUnitSeparator) != std::string::npos)
      throw Error("identifier token contains the separator byte: '" + text::printable_key(t) + "'");
    key.push_back(text::kUnitSeparator);
    key += t;
  }
  return key;
}

}  // namespace xamr
