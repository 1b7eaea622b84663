#pragma once

#include <cstdlib>
#include <map>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "xamr/corpus.hpp"

namespace xamr {

struct LinkIssue {
  enum class Kind { unresolved, ambiguous, cycle };

  Kind kind;
  MentionId source;
  AnnotatorId annotator;
  std::string linked_roleset;
  std::vector<MentionId> candidates;
  std::optional<MentionId> chosen;

  friend bool operator==(const LinkIssue&, const LinkIssue&) = default;
};

inline std::string_view to_string(LinkIssue::Kind k) {
  switch (k) {
    case LinkIssue::Kind::unresolved: return "unresolved";
    case LinkIssue::Kind::ambiguous: return "ambiguous";
    case LinkIssue::Kind::cycle: return "cycle";
  }
  return "?";
}

struct ResolutionReport {
  std::size_t resolved = 0;
  std::vector<LinkIssue> issues;

  std::size_t count(LinkIssue::Kind k) const {
    std::size_t n = 0;
    for (const auto& i : issues) n += i.kind == k;
    return n;
  }

  friend bool operator==(const ResolutionReport&, const ResolutionReport&) = default;
};

struct Resolution {
  Corpus corpus;
  ResolutionReport report;
};

// Link every eventive ARG-1 to the same-document mention that the same
// annotator labelled with the linked roleset. Several candidates: nearest
// sentence wins, ties go to the earlier sentence, then to file order. A link
// that would close a cycle is dropped and reported. Existing links are
// discarded first, so the operation is idempotent.
inline Resolution resolve_nested_links(const Corpus& corpus) {
  std::vector<Mention> mentions = corpus.mentions();
  for (auto& m : mentions)
    for (auto& [who, x] : m.annotations)
      if (x.arg1) x.arg1->linked_mention.reset();

  // (doc, annotator, roleset) -> mention indices in file order
  std::map<std::tuple<std::string, AnnotatorId, std::string>, std::vector<std::size_t>> by_roleset;
  for (std::size_t i = 0; i < mentions.size(); ++i)
    for (const auto& [who, x] : mentions[i].annotations) by_roleset[{mentions[i].doc_id, who, x.roleset}].push_back(i);

  ResolutionReport report;
  // annotator -> source index -> target index, accepted so far
  std::map<AnnotatorId, std::unordered_map<std::size_t, std::size_t>> next;

  auto closes_cycle = [&](const std::unordered_map<std::size_t, std::size_t>& links, std::size_t source,
                          std::size_t target) {
    std::size_t cur = target;
    for (std::size_t steps = 0; steps <= mentions.size(); ++steps) {
      if (cur == source) return true;
      auto it = links.find(cur);
      if (it == links.end()) return false;
      cur = it->second;
    }
    return true;
  };

  for (std::size_t i = 0; i < mentions.size(); ++i) {
    Mention& m = mentions[i];
    for (auto& [who, x] : m.annotations) {
      if (!x.is_nested()) continue;
      const std::string& rs = *x.arg1->linked_roleset;
      std::vector<std::size_t> cands;
      if (auto it = by_roleset.find({m.doc_id, who, rs}); it != by_roleset.end())
        for (std::size_t c : it->second)
          if (c != i) cands.push_back(c);

      if (cands.empty()) {
        report.issues.push_back({LinkIssue::Kind::unresolved, m.mention_id, who, rs, {}, std::nullopt});
        continue;
      }
      std::size_t best = cands.front();
      auto rank = [&](std::size_t c) {
        return std::make_tuple(std::labs(mentions[c].sentence_id - m.sentence_id), mentions[c].sentence_id, c);
      };
      for (std::size_t c : cands)
        if (rank(c) < rank(best)) best = c;

      auto& links = next[who];
      if (closes_cycle(links, i, best)) {
        report.issues.push_back({LinkIssue::Kind::cycle, m.mention_id, who, rs, {mentions[best].mention_id},
                                 std::nullopt});
        continue;
      }
      if (cands.size() > 1) {
        std::vector<MentionId> ids;
        for (std::size_t c : cands) ids.push_back(mentions[c].mention_id);
        report.issues.push_back({LinkIssue::Kind::ambiguous, m.mention_id, who, rs, std::move(ids),
                                 mentions[best].mention_id});
      }
      links[i] = best;
      x.arg1->linked_mention = mentions[best].mention_id;
      ++report.resolved;
    }
  }
  return {Corpus(std::move(mentions), corpus.context()), std::move(report)};
}

}  // namespace xamr
