#pragma once

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "xamr/xamr.hpp"

namespace testsupport {

inline std::string data_path(const std::string& name) { return std::string(XAMR_TEST_DATA) + "/" + name; }
inline std::string golden_path(const std::string& name) { return std::string(XAMR_GOLDEN) + "/" + name; }

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Worked-example corpus with nested links resolved.
inline xamr::Corpus worked_corpus() {
  return xamr::resolve_nested_links(xamr::load_corpus(data_path("worked_example.jsonl"))).corpus;
}

inline xamr::Lexicons worked_lexicons(bool with_vn = true) {
  return xamr::load_lexicons(with_vn ? data_path("worked_vn.tsv") : "", data_path("worked_aliases.tsv"));
}

inline xamr::EventIdentifier tuple(xamr::EidKind kind, std::vector<std::string> tokens) {
  return xamr::EventIdentifier{kind, std::move(tokens)};
}

// Random partition of ids "x0".."x{n-1}" into at most k clusters.
inline xamr::Partition random_partition(std::mt19937_64& rng, std::size_t n, std::size_t k) {
  std::uniform_int_distribution<std::size_t> pick(0, std::max<std::size_t>(k, 1) - 1);
  std::vector<std::pair<xamr::MentionId, std::string>> labels;
  for (std::size_t i = 0; i < n; ++i) labels.emplace_back("x" + std::to_string(i), std::to_string(pick(rng)));
  return xamr::Partition::from_labels(labels);
}

inline xamr::Partition parse_clusters(const std::vector<std::vector<std::string>>& clusters) {
  return xamr::Partition::from_clusters(clusters);
}

// Every method named in the clustering section: bases alone, base and/or
// combinations, and annotator and/or combinations.
inline std::vector<std::string> method_matrix() {
  return {"lem@A1",
          "pb@A1",
          "pb@A2",
          "pb_vn@A1",
          "eidN@A1",
          "eidLT@A1",
          "eidN_vn@A1",
          "eidLT_vn@A1",
          "eidN&eidLT@A1",
          "eidN|eidLT@A1",
          "eidN_vn|eidLT_vn@A1",
          "eidN_vn&eidLT_vn@A1",
          "lem&eidN@A1",
          "pb|eidN@A1",
          "eidN@A1&A2",
          "eidN@A1|A2",
          "eidN_vn|eidLT_vn@A1|A2",
          "eidN|eidLT@A1&A2",
          "eidN@A1;depth=1",
          "eidN@A1;empty",
          "eidN@A1;nomulti",
          "eidN@A1;connect"};
}

}  // namespace testsupport
