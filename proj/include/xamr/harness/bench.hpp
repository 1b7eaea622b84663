#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <unordered_set>
#include <vector>

#include "xamr/cluster.hpp"
#include "xamr/corpus.hpp"
#include "xamr/error.hpp"
#include "xamr/lexicons.hpp"
#include "xamr/method_spec.hpp"
#include "xamr/report.hpp"

namespace xamr::harness {

inline constexpr std::size_t kDefaultExpandGuard = 5'000'000;

// Copy k of a source id; copy 0 is the source itself.
inline std::string copy_id(const std::string& id, std::size_t k) {
  return k == 0 ? id : id + "#" + std::to_string(k);
}

// Round-robin duplication up to exactly target_n mentions. Copy k renames
// mention and document ids with "#k" so link resolution stays inside a copy;
// annotations and gold labels are carried over unchanged. A resolved link
// points at the same copy of its target, or at the original when the last,
// partial copy does not contain it.
inline Corpus synth_expand(const Corpus& corpus, std::size_t target_n, std::size_t guard = kDefaultExpandGuard) {
  const std::size_t n = corpus.size();
  if (target_n < n) throw Error("synth_expand: target " + std::to_string(target_n) + " is below the corpus size " + std::to_string(n));
  if (target_n > guard)
    throw Error("synth_expand: target " + std::to_string(target_n) + " exceeds the guard of " + std::to_string(guard));
  if (target_n == n) return corpus;
  if (n == 0) throw Error("synth_expand: empty corpus");

  const std::size_t last_copy = (target_n - 1) / n;
  const std::size_t last_fill = target_n - last_copy * n;  // mentions in the last copy
  std::vector<Mention> out;
  out.reserve(target_n);
  for (std::size_t k = 0; k <= last_copy; ++k) {
    const std::size_t count = k == last_copy ? last_fill : n;
    for (std::size_t i = 0; i < count; ++i) {
      Mention m = corpus.mentions()[i];
      if (k > 0) {
        m.mention_id = copy_id(m.mention_id, k);
        m.doc_id = copy_id(m.doc_id, k);
        for (auto& [who, x] : m.annotations) {
          if (!x.arg1 || !x.arg1->linked_mention) continue;
          const auto idx = corpus.index_of(*x.arg1->linked_mention);
          // context targets and targets beyond a partial copy keep the original id
          if (idx && (k < last_copy || *idx < last_fill)) x.arg1->linked_mention = copy_id(*x.arg1->linked_mention, k);
        }
      }
      out.push_back(std::move(m));
    }
  }
  return Corpus(std::move(out), corpus.context());
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

// Ordinary least squares y = slope * x + intercept.
inline LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw Error("fit_line: need at least two points");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw Error("fit_line: all x values are equal");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return f;
}

inline double median(std::vector<double> v) {
  if (v.empty()) throw Error("median of an empty sample");
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : (v[h - 1] + v[h]) / 2.0;
}

struct BenchOptions {
  std::vector<std::size_t> sizes;
  MethodSpec method;
  int repeats = 3;
  unsigned threads = 1;
  std::size_t guard = kDefaultExpandGuard;
};

struct BenchResult {
  std::vector<std::size_t> sizes;
  std::vector<double> wall_times_s;
  std::vector<std::uint64_t> pair_mass;
  std::vector<std::size_t> clusters;
  LinearFit fit;
  unsigned threads = 1;
  std::string method;

  double time_at(std::size_t size) const {
    for (std::size_t i = 0; i < sizes.size(); ++i)
      if (sizes[i] == size) return wall_times_s[i];
    throw Error("bench: no measurement for size " + std::to_string(size));
  }
};

inline std::vector<std::size_t> size_range(std::size_t from, std::size_t to, std::size_t step) {
  if (step == 0 || from == 0 || to < from) throw Error("bench: invalid size range");
  std::vector<std::size_t> v;
  for (std::size_t s = from; s <= to; s += step) v.push_back(s);
  return v;
}

// Per size: expand (not timed), one warm-up run, then the median of
// `repeats` timed runs of key generation + bucketing + union-find.
inline BenchResult run_bench(const Corpus& base, const Lexicons& lex, const BenchOptions& o,
                             const std::function<void(std::size_t, double)>& progress = {}) {
  o.method.validate();
  if (o.sizes.empty()) throw Error("bench: no sizes given");
  if (o.repeats < 1) throw Error("bench: repeats must be at least 1");
  for (std::size_t i = 1; i < o.sizes.size(); ++i)
    if (o.sizes[i] <= o.sizes[i - 1]) throw Error("bench: sizes must be strictly increasing");
  for (std::size_t s : o.sizes)
    if (s > o.guard) throw Error("bench: size " + std::to_string(s) + " exceeds the guard of " + std::to_string(o.guard));

  BenchResult r;
  r.threads = o.threads;
  r.method = format_method_spec(o.method);
  const ClusterOptions copts{o.threads};
  // Rounds visit every size in turn, so a slow stretch of the machine spreads
  // over all sizes instead of skewing one of them.
  std::vector<std::vector<double>> samples(o.sizes.size());
  r.pair_mass.resize(o.sizes.size());
  r.clusters.resize(o.sizes.size());
  for (int k = 0; k < o.repeats; ++k) {
    for (std::size_t i = 0; i < o.sizes.size(); ++i) {
      const Corpus c = synth_expand(base, o.sizes[i], o.guard);
      ClusterResult warm = cluster(c, o.method, lex, copts);
      const auto t0 = std::chrono::steady_clock::now();
      ClusterResult res = cluster(c, o.method, lex, copts);
      const auto t1 = std::chrono::steady_clock::now();
      samples[i].push_back(std::chrono::duration<double>(t1 - t0).count());
      r.pair_mass[i] = warm.stats.pair_mass;
      r.clusters[i] = warm.stats.clusters;
    }
  }
  for (std::size_t i = 0; i < o.sizes.size(); ++i) {
    r.sizes.push_back(o.sizes[i]);
    r.wall_times_s.push_back(std::max(median(samples[i]), 1e-9));
    if (progress) progress(o.sizes[i], r.wall_times_s.back());
  }
  if (r.sizes.size() >= 2) {
    std::vector<double> x(r.sizes.begin(), r.sizes.end());
    r.fit = fit_line(x, r.wall_times_s);
  }
  return r;
}

inline void write_bench_csv(std::ostream& out, const BenchResult& r) {
  out << "size,wall_time_s,pair_mass,clusters,threads\n";
  for (std::size_t i = 0; i < r.sizes.size(); ++i)
    out << r.sizes[i] << ',' << fixed6(r.wall_times_s[i]) << ',' << r.pair_mass[i] << ',' << r.clusters[i] << ','
        << r.threads << '\n';
  out << "# method=" << r.method << " slope=" << r.fit.slope << " intercept=" << r.fit.intercept
      << " r_squared=" << fixed6(r.fit.r_squared) << '\n';
}

}  // namespace xamr::harness
