#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <utility>
#include <vector>

#include "xamr/hungarian.hpp"
#include "xamr/partition.hpp"
#include "xamr/union_find.hpp"

namespace xamr {

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  static PRF make(double p, double r) { return {p, r, p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0}; }
};

struct ScoreReport {
  PRF muc;
  PRF b3;
  PRF ceaf_e;
  double conll_f1 = 0.0;
  double r_avg = 0.0;
  double p_avg = 0.0;
};

namespace detail {

inline double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

// Sparse contingency table: (gold cluster, pred cluster) -> shared mentions.
inline std::map<std::pair<std::size_t, std::size_t>, std::size_t> overlaps(const Partition& gold,
                                                                           const Partition& pred) {
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> out;
  for (std::size_t g = 0; g < gold.clusters().size(); ++g)
    for (const auto& m : gold.clusters()[g]) ++out[{g, *pred.cluster_of(m)}];
  return out;
}

// MUC recall of `key` against `response`.
inline double muc_recall(const Partition& key, const Partition& response) {
  double num = 0.0, den = 0.0;
  for (const auto& k : key.clusters()) {
    if (k.size() < 2) continue;
    std::vector<std::size_t> parts;
    for (const auto& m : k) parts.push_back(*response.cluster_of(m));
    std::sort(parts.begin(), parts.end());
    const auto distinct = static_cast<std::size_t>(std::unique(parts.begin(), parts.end()) - parts.begin());
    num += static_cast<double>(k.size() - distinct);
    den += static_cast<double>(k.size() - 1);
  }
  return ratio(num, den);
}

}  // namespace detail

// Link-based MUC.
inline PRF muc(const Partition& gold, const Partition& pred) {
  require_same_mentions(gold, pred);
  return PRF::make(detail::muc_recall(pred, gold), detail::muc_recall(gold, pred));
}

// Mention-averaged B-cubed.
inline PRF b_cubed(const Partition& gold, const Partition& pred) {
  require_same_mentions(gold, pred);
  const double n = static_cast<double>(gold.num_mentions());
  double r = 0.0, p = 0.0;
  for (const auto& [gp, c] : detail::overlaps(gold, pred)) {
    const double shared = static_cast<double>(c);
    r += shared * shared / static_cast<double>(gold.clusters()[gp.first].size());
    p += shared * shared / static_cast<double>(pred.clusters()[gp.second].size());
  }
  return PRF::make(detail::ratio(p, n), detail::ratio(r, n));
}

// Entity similarity phi4 = 2|K n R| / (|K| + |R|).
inline double phi4(std::size_t shared, std::size_t key_size, std::size_t response_size) {
  return 2.0 * static_cast<double>(shared) / static_cast<double>(key_size + response_size);
}

struct CeafAlignment {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (gold, pred), sorted
  double total = 0.0;
};

// Optimal one-to-one cluster alignment under phi4. Only overlapping clusters
// can score, so the bipartite overlap graph is split into connected components
// and each is solved independently.
inline CeafAlignment ceaf_alignment(const Partition& gold, const Partition& pred) {
  require_same_mentions(gold, pred);
  const std::size_t ng = gold.num_clusters(), np = pred.num_clusters();
  const auto ov = detail::overlaps(gold, pred);

  UnionFind<std::size_t> uf(ng + np);
  for (const auto& [gp, c] : ov) uf.unite(gp.first, ng + gp.second);
  std::map<std::size_t, std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> comps;
  for (std::size_t g = 0; g < ng; ++g) comps[uf.find(g)].first.push_back(g);
  for (std::size_t p = 0; p < np; ++p) comps[uf.find(ng + p)].second.push_back(p);

  CeafAlignment out;
  for (const auto& [root, members] : comps) {
    const auto& [gs, ps] = members;
    if (gs.empty() || ps.empty()) continue;
    std::vector<std::vector<double>> w(gs.size(), std::vector<double>(ps.size(), 0.0));
    for (std::size_t a = 0; a < gs.size(); ++a)
      for (std::size_t b = 0; b < ps.size(); ++b)
        if (auto it = ov.find({gs[a], ps[b]}); it != ov.end())
          w[a][b] = phi4(it->second, gold.clusters()[gs[a]].size(), pred.clusters()[ps[b]].size());
    const auto assign = max_weight_assignment(w);
    for (std::size_t a = 0; a < gs.size(); ++a)
      if (assign[a] >= 0 && w[a][static_cast<std::size_t>(assign[a])] > 0.0)
        out.pairs.emplace_back(gs[a], ps[static_cast<std::size_t>(assign[a])]);
  }
  std::sort(out.pairs.begin(), out.pairs.end());
  for (const auto& [g, p] : out.pairs) {
    std::size_t shared = ov.at({g, p});
    out.total += phi4(shared, gold.clusters()[g].size(), pred.clusters()[p].size());
  }
  return out;
}

inline PRF ceaf_e(const Partition& gold, const Partition& pred) {
  const auto a = ceaf_alignment(gold, pred);
  return PRF::make(detail::ratio(a.total, static_cast<double>(pred.num_clusters())),
                   detail::ratio(a.total, static_cast<double>(gold.num_clusters())));
}

inline ScoreReport score(const Partition& gold, const Partition& pred) {
  ScoreReport r;
  r.muc = muc(gold, pred);
  r.b3 = b_cubed(gold, pred);
  r.ceaf_e = ceaf_e(gold, pred);
  r.conll_f1 = (r.muc.f1 + r.b3.f1 + r.ceaf_e.f1) / 3.0;
  r.r_avg = (r.muc.recall + r.b3.recall) / 2.0;
  r.p_avg = (r.muc.precision + r.b3.precision) / 2.0;
  return r;
}

}  // namespace xamr
