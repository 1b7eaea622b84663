#pragma once

#include <cstddef>
#include <numeric>
#include <utility>
#include <vector>

namespace xamr {

// Disjoint sets over [0, n) with union by size and path halving.
template <typename Index = std::size_t>
class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n), size_(n, 1) { std::iota(parent_.begin(), parent_.end(), Index{0}); }

  Index find(Index x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  bool unite(Index a, Index b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    return true;
  }

  std::size_t size() const { return parent_.size(); }

  // Member lists of every set, each in ascending index order.
  std::vector<std::vector<Index>> groups() {
    std::vector<std::vector<Index>> by_root(parent_.size());
    for (Index i = 0; i < static_cast<Index>(parent_.size()); ++i) by_root[find(i)].push_back(i);
    std::vector<std::vector<Index>> out;
    for (auto& g : by_root)
      if (!g.empty()) out.push_back(std::move(g));
    return out;
  }

 private:
  std::vector<Index> parent_;
  std::vector<std::size_t> size_;
};

}  // namespace xamr
