#pragma once

#include <algorithm>
#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "xamr/error.hpp"
#include "xamr/text.hpp"

namespace xamr {

using MentionId = std::string;

// Hard clustering of mention ids. Always held in canonical form: members
// sorted, clusters ordered by their smallest member.
class Partition {
 public:
  using Cluster = std::vector<MentionId>;

  Partition() = default;

  static Partition from_clusters(std::vector<Cluster> clusters) {
    Partition p;
    for (auto& c : clusters) {
      if (c.empty()) continue;
      std::sort(c.begin(), c.end());
      p.clusters_.push_back(std::move(c));
    }
    std::sort(p.clusters_.begin(), p.clusters_.end(),
              [](const Cluster& a, const Cluster& b) { return a.front() < b.front(); });
    p.rebuild_index();
    return p;
  }

  // Group (mention, label) pairs by label.
  static Partition from_labels(const std::vector<std::pair<MentionId, std::string>>& labelled) {
    std::map<std::string, Cluster> groups;
    for (const auto& [id, label] : labelled) groups[label].push_back(id);
    std::vector<Cluster> clusters;
    clusters.reserve(groups.size());
    for (auto& [label, members] : groups) clusters.push_back(std::move(members));
    return from_clusters(std::move(clusters));
  }

  const std::vector<Cluster>& clusters() const { return clusters_; }
  std::size_t num_clusters() const { return clusters_.size(); }
  std::size_t num_mentions() const { return index_.size(); }
  bool empty() const { return clusters_.empty(); }
  bool contains(const MentionId& id) const { return index_.count(id) != 0; }

  std::optional<std::size_t> cluster_of(const MentionId& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::vector<MentionId> mention_ids() const {
    std::vector<MentionId> ids;
    ids.reserve(index_.size());
    for (const auto& c : clusters_) ids.insert(ids.end(), c.begin(), c.end());
    std::sort(ids.begin(), ids.end());
    return ids;
  }

  // Intersect every cluster with `keep`; clusters that become empty vanish.
  Partition restrict_to(const std::unordered_set<MentionId>& keep) const {
    std::vector<Cluster> out;
    for (const auto& c : clusters_) {
      Cluster r;
      for (const auto& m : c)
        if (keep.count(m)) r.push_back(m);
      if (!r.empty()) out.push_back(std::move(r));
    }
    return from_clusters(std::move(out));
  }

  // Add each id in `ids` that is not yet covered as its own singleton.
  Partition with_singletons(const std::vector<MentionId>& ids) const {
    std::vector<Cluster> out = clusters_;
    for (const auto& id : ids)
      if (!contains(id)) out.push_back({id});
    return from_clusters(std::move(out));
  }

  friend bool operator==(const Partition& a, const Partition& b) { return a.clusters_ == b.clusters_; }

 private:
  void rebuild_index() {
    index_.clear();
    std::size_t n = 0;
    for (const auto& c : clusters_) n += c.size();
    index_.reserve(n);
    for (std::size_t i = 0; i < clusters_.size(); ++i)
      for (const auto& m : clusters_[i])
        if (!index_.emplace(m, i).second) throw Error("partition: mention '" + m + "' appears in more than one cluster");
  }

  std::vector<Cluster> clusters_;
  std::unordered_map<MentionId, std::size_t> index_;
};

// Ids present in exactly one of the two partitions, sorted.
inline std::vector<MentionId> symmetric_difference(const Partition& a, const Partition& b) {
  std::vector<MentionId> ia = a.mention_ids();
  std::vector<MentionId> ib = b.mention_ids();
  std::vector<MentionId> out;
  std::set_symmetric_difference(ia.begin(), ia.end(), ib.begin(), ib.end(), std::back_inserter(out));
  return out;
}

inline void require_same_mentions(const Partition& gold, const Partition& pred) {
  auto diff = symmetric_difference(gold, pred);
  if (diff.empty()) return;
  std::string msg = "mention sets differ (symmetric difference: ";
  const std::size_t shown = std::min<std::size_t>(diff.size(), 20);
  for (std::size_t i = 0; i < shown; ++i) msg += (i ? "," : "") + diff[i];
  if (diff.size() > shown) msg += ",... " + std::to_string(diff.size()) + " total";
  throw CoverageError(msg + ")");
}

// One line per cluster: ordinal TAB comma-joined sorted members.
inline void write_partition(std::ostream& out, const Partition& p) {
  for (std::size_t i = 0; i < p.clusters().size(); ++i)
    out << i << '\t' << text::join(p.clusters()[i], ",") << '\n';
}

inline Partition read_partition(std::istream& in, const std::string& source = "<partition>") {
  std::vector<Partition::Cluster> clusters;
  std::unordered_map<MentionId, std::size_t> seen_on;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError(source, lineno, "members", "expected cluster_id TAB members");
    Partition::Cluster c;
    for (auto m : text::split(std::string_view(line).substr(tab + 1), ',')) {
      auto id = std::string(text::trim(m));
      if (id.empty()) continue;
      auto [it, fresh] = seen_on.emplace(id, lineno);
      if (!fresh)
        throw ParseError(source, lineno, "members",
                         "mention '" + id + "' already listed on line " + std::to_string(it->second));
      c.push_back(std::move(id));
    }
    clusters.push_back(std::move(c));
  }
  return Partition::from_clusters(std::move(clusters));
}

}  // namespace xamr
