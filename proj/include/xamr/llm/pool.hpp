#pragma once

#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "xamr/corpus.hpp"
#include "xamr/eid.hpp"
#include "xamr/lexicons.hpp"
#include "xamr/llm/prompt.hpp"
#include "xamr/llm/response.hpp"
#include "xamr/union_find.hpp"

namespace xamr::llm {

struct PoolEntry {
  MentionId mention_id;
  std::string description;
  bool complete = false;
  XAmr annotation;

  friend bool operator==(const PoolEntry&, const PoolEntry&) = default;
};

// Event descriptions grouped by topic, each topic in corpus order.
struct EventDescriptionPool {
  std::map<std::string, std::vector<PoolEntry>> topics;

  std::vector<ListedDescription> eligible(const std::string& topic) const {
    std::vector<ListedDescription> out;
    auto it = topics.find(topic);
    if (it == topics.end()) return out;
    for (const auto& e : it->second)
      if (e.complete) out.push_back({e.mention_id, e.description});
    return out;
  }

  std::size_t size() const {
    std::size_t n = 0;
    for (const auto& [t, v] : topics) n += v.size();
    return n;
  }

  friend bool operator==(const EventDescriptionPool&, const EventDescriptionPool&) = default;
};

inline EventDescriptionPool build_pool(const Corpus& corpus, const std::map<MentionId, AnnotationResponse>& g1) {
  EventDescriptionPool pool;
  for (const auto& m : corpus.mentions()) {
    auto it = g1.find(m.mention_id);
    if (it == g1.end() || it->second.event_description.empty()) continue;
    pool.topics[m.topic_id].push_back(
        {m.mention_id, it->second.event_description, is_complete(it->second), to_xamr(it->second)});
  }
  return pool;
}

namespace detail {

inline std::vector<std::string> dedupe_keys(const XAmr& x, const EidConfig& cfg, const Lexicons& lex) {
  std::vector<std::string> keys;
  for (const auto& id : eid_n(x, cfg, lex)) keys.push_back(identifier_key(id));
  for (const auto& id : eid_lt(x, cfg, lex)) keys.push_back(identifier_key(id));
  return keys;
}

}  // namespace detail

// Collapses complete entries that share an identifier (transitively) onto the
// earliest one. Incomplete entries are never shown to G2 and pass through.
// Links are not followed: a pool entry only knows its own annotation.
inline EventDescriptionPool dedupe_pool(const EventDescriptionPool& pool, const EidConfig& cfg, const Lexicons& lex) {
  EventDescriptionPool out;
  for (const auto& [topic, entries] : pool.topics) {
    UnionFind<std::size_t> uf(entries.size());
    std::unordered_map<std::string, std::size_t> first_with_key;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (!entries[i].complete) continue;
      for (const auto& k : detail::dedupe_keys(entries[i].annotation, cfg, lex)) {
        auto [it, fresh] = first_with_key.emplace(k, i);
        if (!fresh) uf.unite(it->second, i);
      }
    }
    std::vector<bool> seen(entries.size(), false);
    auto& kept = out.topics[topic];
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (!entries[i].complete) {
        kept.push_back(entries[i]);
        continue;
      }
      const std::size_t root = uf.find(i);
      if (seen[root]) continue;
      seen[root] = true;
      kept.push_back(entries[i]);
    }
  }
  return out;
}

}  // namespace xamr::llm
