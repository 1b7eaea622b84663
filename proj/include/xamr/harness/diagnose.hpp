#pragma once

#include <algorithm>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "xamr/cluster.hpp"
#include "xamr/corpus.hpp"
#include "xamr/eid.hpp"
#include "xamr/lexicons.hpp"
#include "xamr/method_spec.hpp"
#include "xamr/partition.hpp"
#include "xamr/text.hpp"

namespace xamr::harness {

inline constexpr const char* kNoVnClass = "no VN class";
inline constexpr const char* kMissingSlot = "missing slot";
inline constexpr const char* kAliasMiss = "alias miss";
inline constexpr const char* kRolesetMismatch = "roleset mismatch";
inline constexpr const char* kSharedIdentifier = "shared identifier";
inline constexpr const char* kOther = "other";

struct Assignment {
  MentionId mention_id;
  std::string gold_label;
  std::size_t gold_cluster = 0;
  std::size_t pred_cluster = 0;
};

// A pair the prediction gets wrong: "missed" (gold together, predicted apart)
// or "spurious" (predicted together, gold apart).
struct Mismatch {
  MentionId a, b;
  std::string kind;
  std::string category;
  std::vector<std::string> keys_a, keys_b;
};

struct DiagnosticsReport {
  std::vector<Assignment> assignments;
  std::vector<Mismatch> mismatches;
  bool truncated = false;
};

namespace detail {

inline bool share_key(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) return true;
    a[i] < b[j] ? ++i : ++j;
  }
  return false;
}

// Surface reduced for the near-identity test: wiki prefix dropped,
// underscores read as spaces, then normalized.
inline std::string loose_form(const std::string& token) {
  std::string s = token;
  if (s.rfind(text::kWikiPrefix, 0) == 0) s = s.substr(text::kWikiPrefix.size());
  std::replace(s.begin(), s.end(), '_', ' ');
  return text::normalize(s);
}

inline bool near_identical(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  for (const auto& x : a)
    for (const auto& y : b) {
      const auto lx = loose_form(x), ly = loose_form(y);
      if (lx.empty() || ly.empty()) continue;
      if (lx.find(ly) != std::string::npos || ly.find(lx) != std::string::npos) return true;
    }
  return false;
}

using SlotRef = std::optional<ArgValue>* (*)(XAmr&);

inline std::optional<ArgValue>* arg0_slot(XAmr& x) { return &x.arg0; }
inline std::optional<ArgValue>* loc_slot(XAmr& x) { return &x.arg_loc; }
inline std::optional<ArgValue>* time_slot(XAmr& x) { return &x.arg_time; }
inline std::optional<ArgValue>* arg1_entity_slot(XAmr& x) {
  return x.arg1 && x.arg1->kind == Arg1Kind::entity ? &x.arg1->entity : nullptr;
}

}  // namespace detail

// Mechanical hint for why a gold-coreferent pair was split: the first single
// repair of `b` (towards `a`) that makes the two share a key names the cause.
inline std::string categorize_missed(const Corpus& corpus, const Mention& a, const Mention& b, const MethodSpec& spec,
                                     const Lexicons& lex) {
  std::vector<AnnotatorId> missing;
  const auto ka = mention_keys(corpus, a, spec, lex, &missing);
  const auto kb = mention_keys(corpus, b, spec, lex, &missing);
  if (!missing.empty() || ka.empty() || kb.empty()) return kMissingSlot;

  const auto annotators = spec.annotators.ids();
  const bool vn = uses_vn(spec.base) || (spec.second && uses_vn(*spec.second));

  Mention fixed = b;
  bool rolesets_differ = false, unmapped = false;
  for (const auto& who : annotators) {
    const XAmr* xa = a.annotation(who);
    auto it = fixed.annotations.find(who);
    if (!xa || it == fixed.annotations.end() || xa->roleset == it->second.roleset) continue;
    rolesets_differ = true;
    unmapped |= !lex.classes_of(xa->roleset) || !lex.classes_of(it->second.roleset);
    it->second.roleset = xa->roleset;
  }
  if (rolesets_differ && detail::share_key(ka, mention_keys(corpus, fixed, spec, lex)))
    return vn && unmapped ? kNoVnClass : kRolesetMismatch;

  const EidConfig cfg = spec.config_for(spec.base);
  for (detail::SlotRef slot : {detail::arg0_slot, detail::arg1_entity_slot, detail::loc_slot, detail::time_slot}) {
    Mention repaired = b;
    bool candidate = false;
    for (const auto& who : annotators) {
      const XAmr* pa = a.annotation(who);
      auto it = repaired.annotations.find(who);
      if (!pa || it == repaired.annotations.end()) continue;
      XAmr xa = *pa;
      auto* sa = slot(xa);
      auto* sb = slot(it->second);
      if (!sa || !sb || !*sa || !*sb) continue;
      const auto ta = canonicalize_argument(**sa, lex, cfg.multi_value_expansion);
      const auto tb = canonicalize_argument(**sb, lex, cfg.multi_value_expansion);
      if (ta == tb || !detail::near_identical(ta, tb)) continue;
      *sb = *sa;
      candidate = true;
    }
    if (candidate && detail::share_key(ka, mention_keys(corpus, repaired, spec, lex))) return kAliasMiss;
  }
  return kOther;
}

// Pairs are listed per gold cluster (missed) and per predicted cluster
// (spurious), in mention order, up to `max_pairs`.
inline DiagnosticsReport diagnose(const Corpus& corpus, const Partition& pred, const MethodSpec& spec,
                                  const Lexicons& lex, std::size_t max_pairs = 100000) {
  spec.validate();
  const Partition& gold = corpus.gold();
  require_same_mentions(gold, pred);
  DiagnosticsReport r;
  for (const auto& m : corpus.mentions())
    r.assignments.push_back({m.mention_id, m.gold_cluster, *gold.cluster_of(m.mention_id), *pred.cluster_of(m.mention_id)});

  auto keys_of = [&](const Mention& m) {
    std::vector<std::string> out;
    for (const auto& k : mention_keys(corpus, m, spec, lex)) out.push_back(text::printable_key(k));
    return out;
  };
  auto add = [&](const Mention& a, const Mention& b, const char* kind, std::string category) {
    if (r.mismatches.size() >= max_pairs) {
      r.truncated = true;
      return false;
    }
    r.mismatches.push_back({a.mention_id, b.mention_id, kind, std::move(category), keys_of(a), keys_of(b)});
    return true;
  };

  for (const auto& c : gold.clusters())
    for (std::size_t i = 0; i < c.size(); ++i)
      for (std::size_t j = i + 1; j < c.size(); ++j) {
        if (pred.cluster_of(c[i]) == pred.cluster_of(c[j])) continue;
        const Mention& a = *corpus.find(c[i]);
        const Mention& b = *corpus.find(c[j]);
        if (!add(a, b, "missed", categorize_missed(corpus, a, b, spec, lex))) return r;
      }
  for (const auto& c : pred.clusters())
    for (std::size_t i = 0; i < c.size(); ++i)
      for (std::size_t j = i + 1; j < c.size(); ++j) {
        if (gold.cluster_of(c[i]) == gold.cluster_of(c[j])) continue;
        const Mention& a = *corpus.find(c[i]);
        const Mention& b = *corpus.find(c[j]);
        const bool direct = detail::share_key(mention_keys(corpus, a, spec, lex), mention_keys(corpus, b, spec, lex));
        if (!add(a, b, "spurious", direct ? kSharedIdentifier : "transitive")) return r;
      }
  return r;
}

inline void write_diagnostics_tsv(std::ostream& out, const DiagnosticsReport& r) {
  out << "mention_a\tmention_b\tkind\tcategory\tkeys_a\tkeys_b\n";
  for (const auto& m : r.mismatches)
    out << m.a << '\t' << m.b << '\t' << m.kind << '\t' << m.category << '\t' << text::join(m.keys_a, " | ") << '\t'
        << text::join(m.keys_b, " | ") << '\n';
}

inline void write_assignments_tsv(std::ostream& out, const DiagnosticsReport& r) {
  out << "mention_id\tgold_label\tgold_cluster\tpred_cluster\n";
  for (const auto& a : r.assignments)
    out << a.mention_id << '\t' << a.gold_label << '\t' << a.gold_cluster << '\t' << a.pred_cluster << '\n';
}

}  // namespace xamr::harness
