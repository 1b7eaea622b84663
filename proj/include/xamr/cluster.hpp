#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include "xamr/corpus.hpp"
#include "xamr/eid.hpp"
#include "xamr/error.hpp"
#include "xamr/lexicons.hpp"
#include "xamr/method_spec.hpp"
#include "xamr/partition.hpp"
#include "xamr/text.hpp"
#include "xamr/union_find.hpp"

namespace xamr {

// Bucket keys per mention, aligned with corpus.mentions(). Each list is
// sorted and free of duplicates.
using KeySets = std::vector<std::vector<std::string>>;

struct KeyBuild {
  KeySets keys;
  // (mention, annotator) pairs whose annotation was needed but absent.
  std::vector<std::pair<MentionId, AnnotatorId>> missing;
};

struct ClusterOptions {
  unsigned threads = 1;
};

namespace detail {

inline constexpr char kConjSeparator = '\x1C';
inline constexpr char kAnnotatorSeparator = '\x1D';

inline void sort_unique(std::vector<std::string>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

inline std::vector<std::string> conjoin(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::string> out;
  out.reserve(a.size() * b.size());
  for (const auto& x : a)
    for (const auto& y : b) {
      std::string k;
      k.reserve(x.size() + y.size() + 1);
      k += x;
      k.push_back(kConjSeparator);
      k += y;
      out.push_back(std::move(k));
    }
  return out;
}

// Keys of one base for one mention under one annotator. Returns false when
// the annotation was needed and missing.
inline bool base_keys(const Corpus& corpus, const Mention& m, Base base, const AnnotatorId& annotator,
                      const MethodSpec& spec, const Lexicons& lex, std::vector<std::string>& out) {
  std::string tag(to_string(base));
  tag.push_back(text::kRecordSeparator);
  if (base == Base::LEM) {
    out.push_back(tag + text::normalize(m.lemma));
    return true;
  }
  const XAmr* x = m.annotation(annotator);
  if (!x) return false;
  const EidConfig cfg = spec.config_for(base);
  switch (base) {
    case Base::PB:
    case Base::PB_VN:
      for (auto& t : canonicalize_roleset(x->roleset, cfg.roleset_mode, lex)) out.push_back(tag + t);
      break;
    case Base::EID_N:
    case Base::EID_N_VN:
      for (const auto& id : eid_n(*x, CorpusLinks{corpus, annotator}, cfg, lex)) out.push_back(tag + identifier_key(id));
      break;
    case Base::EID_LT:
    case Base::EID_LT_VN:
      for (const auto& id : eid_lt(*x, cfg, lex)) out.push_back(tag + identifier_key(id));
      break;
    case Base::LEM:
      break;
  }
  return true;
}

inline std::vector<std::string> method_keys(const Corpus& corpus, const Mention& m, const AnnotatorId& annotator,
                                            const MethodSpec& spec, const Lexicons& lex, bool& missing) {
  std::vector<std::string> k1;
  missing |= !base_keys(corpus, m, spec.base, annotator, spec, lex, k1);
  if (spec.combiner == Combiner::single) return k1;
  std::vector<std::string> k2;
  missing |= !base_keys(corpus, m, *spec.second, annotator, spec, lex, k2);
  if (spec.combiner == Combiner::disj) {
    k1.insert(k1.end(), std::make_move_iterator(k2.begin()), std::make_move_iterator(k2.end()));
    return k1;
  }
  sort_unique(k1);
  sort_unique(k2);
  return conjoin(k1, k2);
}

inline std::vector<std::string> prefixed(const AnnotatorId& who, std::vector<std::string> keys) {
  for (auto& k : keys) k = who + kAnnotatorSeparator + k;
  return keys;
}

}  // namespace detail

// Sorted, duplicate-free bucket keys of one mention under a method.
// Annotators whose annotation was needed but absent go to `missing`.
inline std::vector<std::string> mention_keys(const Corpus& corpus, const Mention& m, const MethodSpec& spec,
                                             const Lexicons& lex, std::vector<AnnotatorId>* missing = nullptr) {
  std::vector<std::string> keys;
  auto note = [&](const AnnotatorId& who, bool miss) {
    if (miss && missing) missing->push_back(who);
  };
  if (spec.annotators.mode == Combiner::single) {
    bool miss = false;
    keys = detail::method_keys(corpus, m, spec.annotators.first, spec, lex, miss);
    note(spec.annotators.first, miss);
  } else {
    std::vector<std::vector<std::string>> per;
    for (const auto& who : spec.annotators.ids()) {
      bool miss = false;
      auto k = detail::method_keys(corpus, m, who, spec, lex, miss);
      note(who, miss);
      detail::sort_unique(k);
      per.push_back(detail::prefixed(who, std::move(k)));
    }
    if (spec.annotators.mode == Combiner::disj) {
      keys = std::move(per[0]);
      keys.insert(keys.end(), per[1].begin(), per[1].end());
    } else {
      keys = detail::conjoin(per[0], per[1]);
    }
  }
  detail::sort_unique(keys);
  return keys;
}

// Per-mention key sets for a method. and-combinations (of bases or of
// annotators) become composite keys over the Cartesian product, so two
// mentions share a composite key exactly when they share a key on both sides;
// or-combinations take the union of tagged keys.
inline KeyBuild bucket_keys(const Corpus& corpus, const MethodSpec& spec, const Lexicons& lex,
                            const ClusterOptions& opts = {}) {
  spec.validate();
  const auto& mentions = corpus.mentions();
  KeyBuild kb;
  kb.keys.resize(mentions.size());
  std::vector<std::vector<AnnotatorId>> missing(mentions.size());

  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) kb.keys[i] = mention_keys(corpus, mentions[i], spec, lex, &missing[i]);
  };

  const std::size_t n = mentions.size();
  const unsigned threads = std::max(1u, std::min<unsigned>(opts.threads, static_cast<unsigned>(n / 64 + 1)));
  if (threads == 1) {
    work(0, n);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      std::size_t b = t * chunk, e = std::min(n, b + chunk);
      if (b < e) pool.emplace_back(work, b, e);
    }
    for (auto& th : pool) th.join();
  }
  for (std::size_t i = 0; i < n; ++i)
    for (auto& who : missing[i]) kb.missing.emplace_back(mentions[i].mention_id, std::move(who));
  return kb;
}

// ---------------------------------------------------------------------------
// Explicit edges

struct EdgeSet {
  // Unordered pairs stored as (smaller, larger).
  std::set<std::pair<MentionId, MentionId>> edges;

  void add(const MentionId& a, const MentionId& b) {
    if (a == b) return;
    edges.emplace(std::min(a, b), std::max(a, b));
  }
  std::size_t size() const { return edges.size(); }

  friend bool operator==(const EdgeSet&, const EdgeSet&) = default;
};

inline EdgeSet edge_union(const EdgeSet& a, const EdgeSet& b) {
  EdgeSet out = a;
  out.edges.insert(b.edges.begin(), b.edges.end());
  return out;
}

inline EdgeSet edge_intersection(const EdgeSet& a, const EdgeSet& b) {
  EdgeSet out;
  std::set_intersection(a.edges.begin(), a.edges.end(), b.edges.begin(), b.edges.end(),
                        std::inserter(out.edges, out.edges.end()));
  return out;
}

// Mentions sharing a key, inverted: key -> member indices in input order.
inline std::vector<std::vector<std::size_t>> buckets_of(const KeySets& keys) {
  std::unordered_map<std::string_view, std::size_t> slot;
  std::vector<std::vector<std::size_t>> buckets;
  for (std::size_t i = 0; i < keys.size(); ++i)
    for (const auto& k : keys[i]) {
      auto [it, fresh] = slot.emplace(k, buckets.size());
      if (fresh) buckets.emplace_back();
      buckets[it->second].push_back(i);
    }
  return buckets;
}

// Every unordered pair inside every bucket (complete subgraph per bucket).
inline EdgeSet edges_from_buckets(const std::vector<MentionId>& ids, const KeySets& keys) {
  if (ids.size() != keys.size()) throw Error("edges_from_buckets: ids and key sets differ in length");
  EdgeSet out;
  for (const auto& b : buckets_of(keys))
    for (std::size_t x = 0; x < b.size(); ++x)
      for (std::size_t y = x + 1; y < b.size(); ++y) out.add(ids[b[x]], ids[b[y]]);
  return out;
}

inline Partition connected_components(const std::vector<MentionId>& ids, const EdgeSet& edges) {
  std::unordered_map<MentionId, std::size_t> at;
  for (std::size_t i = 0; i < ids.size(); ++i) at.emplace(ids[i], i);
  UnionFind<std::size_t> uf(ids.size());
  for (const auto& [a, b] : edges.edges) {
    auto ia = at.find(a), ib = at.find(b);
    if (ia == at.end() || ib == at.end())
      throw Error("connected_components: edge endpoint '" + (ia == at.end() ? a : b) + "' is not a mention");
    uf.unite(ia->second, ib->second);
  }
  std::vector<Partition::Cluster> clusters;
  for (const auto& g : uf.groups()) {
    Partition::Cluster c;
    for (std::size_t i : g) c.push_back(ids[i]);
    clusters.push_back(std::move(c));
  }
  return Partition::from_clusters(std::move(clusters));
}

// ---------------------------------------------------------------------------
// Linear bucket clustering

struct ClusterStats {
  std::size_t keys = 0;
  std::size_t buckets = 0;
  std::size_t largest_bucket = 0;
  std::uint64_t pair_mass = 0;  // sum of b(b-1)/2 over buckets
  std::size_t clusters = 0;
  std::size_t singletons = 0;
};

struct ClusterResult {
  Partition partition;
  ClusterStats stats;
  std::vector<std::pair<MentionId, AnnotatorId>> missing;
};

// Connected components over the implicit bucket graph. Each key links a
// mention to the first mention seen with that key; a bucket of b members thus
// contributes b-1 spanning unions, which yields the same components as its
// b(b-1)/2 explicit edges.
inline Partition components_from_keys(const std::vector<MentionId>& ids, const KeySets& keys,
                                      ClusterStats* stats = nullptr) {
  // Open addressing with linear probing: a flat table keeps probes cache
  // friendly at a few hundred thousand keys, where node-based maps stall.
  struct Bucket {
    std::uint64_t hash = 0;
    const std::string* key = nullptr;  // nullptr marks a free slot
    std::uint32_t first = 0;
    std::uint32_t size = 0;
  };
  std::size_t total_keys = 0;
  for (const auto& k : keys) total_keys += k.size();
  std::size_t capacity = 16;
  while (capacity < 2 * total_keys) capacity *= 2;
  std::vector<Bucket> table(capacity);
  const std::size_t mask = capacity - 1;
  const std::hash<std::string_view> hasher;
  std::size_t used = 0;

  UnionFind<std::uint32_t> uf(ids.size());
  for (std::uint32_t i = 0; i < keys.size(); ++i)
    for (const auto& k : keys[i]) {
      const std::uint64_t h = hasher(k);
      std::size_t at = h & mask;
      while (table[at].key && (table[at].hash != h || *table[at].key != k)) at = (at + 1) & mask;
      Bucket& b = table[at];
      if (!b.key) {
        b = Bucket{h, &k, i, 0};
        ++used;
      } else {
        uf.unite(b.first, i);
      }
      ++b.size;
    }
  std::vector<Partition::Cluster> clusters;
  for (const auto& g : uf.groups()) {
    Partition::Cluster c;
    c.reserve(g.size());
    for (auto i : g) c.push_back(ids[i]);
    clusters.push_back(std::move(c));
  }
  Partition p = Partition::from_clusters(std::move(clusters));
  if (stats) {
    stats->keys = total_keys;
    stats->buckets = used;
    stats->pair_mass = 0;
    stats->largest_bucket = 0;
    for (const auto& b : table) {
      if (!b.key) continue;
      stats->pair_mass += static_cast<std::uint64_t>(b.size) * (b.size - 1) / 2;
      stats->largest_bucket = std::max<std::size_t>(stats->largest_bucket, b.size);
    }
    stats->clusters = p.num_clusters();
    stats->singletons = 0;
    for (const auto& c : p.clusters()) stats->singletons += c.size() == 1;
  }
  return p;
}

inline ClusterResult cluster(const Corpus& corpus, const MethodSpec& spec, const Lexicons& lex,
                             const ClusterOptions& opts = {}) {
  KeyBuild kb = bucket_keys(corpus, spec, lex, opts);
  ClusterResult r;
  r.partition = components_from_keys(corpus.mention_ids(), kb.keys, &r.stats);
  r.missing = std::move(kb.missing);
  return r;
}

// ---------------------------------------------------------------------------
// Quadratic reference

inline constexpr std::size_t kOracleLimit = 20000;

namespace detail {

// Everything the pairwise predicate needs for one (mention, annotator).
struct OracleFeatures {
  bool present = false;
  std::set<std::string> rolesets;
  std::set<std::string> rolesets_vn;
  IdentifierSet eid_n, eid_lt, eid_n_vn, eid_lt_vn;
};

template <typename T>
bool intersects(const std::set<T>& a, const std::set<T>& b) {
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j)
      ++i;
    else if (*j < *i)
      ++j;
    else
      return true;
  }
  return false;
}

}  // namespace detail

// Evaluates the coreference predicate on every mention pair, then takes the
// transitive closure by graph search. Shares no code with the bucket path
// beyond identifier generation.
inline Partition pairwise_oracle(const Corpus& corpus, const MethodSpec& spec, const Lexicons& lex) {
  spec.validate();
  const auto& ms = corpus.mentions();
  const std::size_t n = ms.size();
  if (n > kOracleLimit)
    throw Error("pairwise_oracle: " + std::to_string(n) + " mentions exceeds the quadratic guard of " +
                std::to_string(kOracleLimit) + "; use cluster() instead");

  const auto annotators = spec.annotators.ids();
  std::vector<std::string> lemma(n);
  std::vector<std::vector<detail::OracleFeatures>> feat(annotators.size(), std::vector<detail::OracleFeatures>(n));
  for (std::size_t i = 0; i < n; ++i) {
    lemma[i] = text::normalize(ms[i].lemma);
    for (std::size_t a = 0; a < annotators.size(); ++a) {
      const XAmr* x = ms[i].annotation(annotators[a]);
      if (!x) continue;
      auto& f = feat[a][i];
      f.present = true;
      const EidConfig plain = spec.config_for(Base::EID_N);
      const EidConfig vn = spec.config_for(Base::EID_N_VN);
      for (auto& t : canonicalize_roleset(x->roleset, RolesetMode::verbatim, lex)) f.rolesets.insert(t);
      for (auto& t : canonicalize_roleset(x->roleset, RolesetMode::vn_class, lex)) f.rolesets_vn.insert(t);
      CorpusLinks links{corpus, annotators[a]};
      f.eid_n = eid_n(*x, links, plain, lex);
      f.eid_lt = eid_lt(*x, plain, lex);
      f.eid_n_vn = eid_n(*x, links, vn, lex);
      f.eid_lt_vn = eid_lt(*x, vn, lex);
    }
  }

  auto base_match = [&](Base b, std::size_t a, std::size_t i, std::size_t j) {
    if (b == Base::LEM) return lemma[i] == lemma[j];
    const auto& fi = feat[a][i];
    const auto& fj = feat[a][j];
    if (!fi.present || !fj.present) return false;
    switch (b) {
      case Base::PB: return detail::intersects(fi.rolesets, fj.rolesets);
      case Base::PB_VN: return detail::intersects(fi.rolesets_vn, fj.rolesets_vn);
      case Base::EID_N: return detail::intersects(fi.eid_n, fj.eid_n);
      case Base::EID_LT: return detail::intersects(fi.eid_lt, fj.eid_lt);
      case Base::EID_N_VN: return detail::intersects(fi.eid_n_vn, fj.eid_n_vn);
      case Base::EID_LT_VN: return detail::intersects(fi.eid_lt_vn, fj.eid_lt_vn);
      case Base::LEM: break;
    }
    return false;
  };
  auto method_match = [&](std::size_t a, std::size_t i, std::size_t j) {
    bool m1 = base_match(spec.base, a, i, j);
    switch (spec.combiner) {
      case Combiner::single: return m1;
      case Combiner::conj: return m1 && base_match(*spec.second, a, i, j);
      case Combiner::disj: return m1 || base_match(*spec.second, a, i, j);
    }
    return false;
  };
  auto coref = [&](std::size_t i, std::size_t j) {
    switch (spec.annotators.mode) {
      case Combiner::single: return method_match(0, i, j);
      case Combiner::conj: return method_match(0, i, j) && method_match(1, i, j);
      case Combiner::disj: return method_match(0, i, j) || method_match(1, i, j);
    }
    return false;
  };

  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (coref(i, j)) {
        adj[i].push_back(j);
        adj[j].push_back(i);
      }

  std::vector<bool> seen(n, false);
  std::vector<Partition::Cluster> clusters;
  for (std::size_t s = 0; s < n; ++s) {
    if (seen[s]) continue;
    Partition::Cluster c;
    std::vector<std::size_t> stack{s};
    seen[s] = true;
    while (!stack.empty()) {
      std::size_t u = stack.back();
      stack.pop_back();
      c.push_back(ms[u].mention_id);
      for (std::size_t v : adj[u])
        if (!seen[v]) {
          seen[v] = true;
          stack.push_back(v);
        }
    }
    clusters.push_back(std::move(c));
  }
  return Partition::from_clusters(std::move(clusters));
}

}  // namespace xamr
