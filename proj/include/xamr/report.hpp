#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "xamr/cluster.hpp"
#include "xamr/corpus.hpp"
#include "xamr/lexicons.hpp"
#include "xamr/method_spec.hpp"
#include "xamr/metrics.hpp"

namespace xamr {

// Value x in [0,1] shown x100 with one decimal, rounding half up.
inline std::string percent1(double x) {
  // nudge absorbs binary representation error at exact .x5 boundaries
  const double scaled = std::floor(x * 1000.0 + 0.5 + 1e-9) / 10.0;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", scaled);
  return buf;
}

inline std::string fixed6(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

struct LabelledMethod {
  std::string label;
  MethodSpec spec;
};

struct MatrixRow {
  std::string label;
  std::optional<ScoreReport> scores;
  std::string error;
};

inline std::vector<MatrixRow> score_matrix(const Corpus& corpus, const std::vector<LabelledMethod>& methods,
                                           const Lexicons& lex, const ClusterOptions& opts = {}) {
  std::vector<MatrixRow> rows;
  rows.reserve(methods.size());
  for (const auto& m : methods) {
    MatrixRow row{m.label, std::nullopt, {}};
    try {
      row.scores = score(corpus.gold(), cluster(corpus, m.spec, lex, opts).partition);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline constexpr const char* kScoreCsvHeader =
    "method,muc_p,muc_r,muc_f1,b3_p,b3_r,b3_f1,ceafe_p,ceafe_r,ceafe_f1,r_avg,p_avg,conll_f1";

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// Machine-readable rows; metric values are raw fractions. A failed row keeps
// its label and leaves the metric columns empty.
inline void write_score_csv(std::ostream& out, const std::vector<MatrixRow>& rows) {
  out << kScoreCsvHeader << '\n';
  for (const auto& r : rows) {
    out << csv_field(r.label);
    if (!r.scores) {
      out << std::string(12, ',') << '\n';
      continue;
    }
    const ScoreReport& s = *r.scores;
    for (double v : {s.muc.precision, s.muc.recall, s.muc.f1, s.b3.precision, s.b3.recall, s.b3.f1,
                     s.ceaf_e.precision, s.ceaf_e.recall, s.ceaf_e.f1, s.r_avg, s.p_avg, s.conll_f1})
      out << ',' << fixed6(v);
    out << '\n';
  }
}

// Aligned text table: Method | R_avg | P_avg | CoNLL, x100 one decimal.
inline void write_score_table(std::ostream& out, const std::vector<MatrixRow>& rows) {
  std::size_t width = std::string("Method").size();
  for (const auto& r : rows) width = std::max(width, r.label.size());
  auto pad = [&](const std::string& s) { return s + std::string(width - std::min(width, s.size()), ' '); };
  out << pad("Method") << "  R_avg  P_avg  CoNLL\n";
  for (const auto& r : rows) {
    out << pad(r.label);
    if (!r.scores) {
      out << "  error: " << r.error << '\n';
      continue;
    }
    for (double v : {r.scores->r_avg, r.scores->p_avg, r.scores->conll_f1}) {
      std::string s = percent1(v);
      out << "  " << std::string(5 - std::min<std::size_t>(5, s.size()), ' ') << s;
    }
    out << '\n';
  }
}

// Full single-run report used by the score command.
inline void write_score_report(std::ostream& out, const ScoreReport& s) {
  auto line = [&](const char* name, const PRF& p) {
    out << name << "  P=" << percent1(p.precision) << "  R=" << percent1(p.recall) << "  F1=" << percent1(p.f1)
        << '\n';
  };
  line("MUC    ", s.muc);
  line("B3     ", s.b3);
  line("CEAF_e ", s.ceaf_e);
  out << "R_avg=" << percent1(s.r_avg) << "  P_avg=" << percent1(s.p_avg) << "  CoNLL_F1=" << percent1(s.conll_f1)
      << '\n';
}

// Method list file: one method per line, either "label<TAB>expression" or a
// bare expression (the label is then the expression). '#' comments allowed.
inline std::vector<LabelledMethod> read_method_list(std::istream& in, const std::string& source = "<methods>") {
  std::vector<LabelledMethod> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto t = text::trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::string label, expr;
    if (auto tab = line.find('\t'); tab != std::string::npos) {
      label = std::string(text::trim(std::string_view(line).substr(0, tab)));
      expr = std::string(text::trim(std::string_view(line).substr(tab + 1)));
    } else {
      label = expr = std::string(t);
    }
    try {
      out.push_back({label, parse_method_spec(expr)});
    } catch (const Error& e) {
      throw ParseError(source, lineno, "method", e.what());
    }
  }
  return out;
}

inline std::vector<LabelledMethod> load_method_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open method list '" + path + "'");
  return read_method_list(in, path);
}

}  // namespace xamr
