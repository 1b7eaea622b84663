// xamr_ecr: command-line front end for identifier clustering, scoring,
// benchmarks, diagnostics and the LLM annotation pipeline.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "xamr/llm/http_transport.hpp"
#include "xamr/xamr.hpp"

namespace fs = std::filesystem;
using namespace xamr;

namespace {

// Bad flag combinations detected after parsing; exit status 2 like CLI11's own.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::string corpus, vn_map, alias_map, out, subset, split;
  std::uint64_t seed = 13;
  unsigned threads = 1;
};

struct MethodFlags {
  std::string method = "eidN";
  std::string and_base, or_base;
  std::string annotator = "A1";
  std::string annotators_and, annotators_or;
  int depth = EidConfig{}.max_depth;
  bool allow_empty = false, no_multi = false, connect = false;

  void add_to(CLI::App* app) {
    app->add_option("--method", method, "Base method (lem, pb, pb_vn, eidN, eidLT, eidN_vn, eidLT_vn) or a full expression");
    app->add_option("--and", and_base, "Second base, and-combined");
    app->add_option("--or", or_base, "Second base, or-combined");
    app->add_option("--annotator", annotator, "Annotator id");
    app->add_option("--annotators-and", annotators_and, "Two annotator ids 'X,Y' combined with and");
    app->add_option("--annotators-or", annotators_or, "Two annotator ids 'X,Y' combined with or");
    app->add_option("--depth", depth, "Maximum nesting depth for eidN");
    app->add_flag("--allow-empty", allow_empty, "Absent slots become an explicit empty token");
    app->add_flag("--no-multi", no_multi, "Do not expand '/' multi-values");
    app->add_flag("--connect", connect, "Include connecting rolesets in nested identifiers");
  }

  MethodSpec build() const {
    try {
      if (method.find_first_of("@;&|") != std::string::npos) {
        if (!and_base.empty() || !or_base.empty() || !annotators_and.empty() || !annotators_or.empty())
          throw Error("a full method expression cannot be mixed with combiner flags");
        return parse_method_spec(method);
      }
      if (!and_base.empty() && !or_base.empty()) throw Error("--and and --or are mutually exclusive");
      if (!annotators_and.empty() && !annotators_or.empty())
        throw Error("--annotators-and and --annotators-or are mutually exclusive");
      std::string expr = method;
      if (!and_base.empty()) expr += "&" + and_base;
      if (!or_base.empty()) expr += "|" + or_base;
      if (!annotators_and.empty() || !annotators_or.empty()) {
        const std::string& pair = annotators_and.empty() ? annotators_or : annotators_and;
        auto comma = pair.find(',');
        if (comma == std::string::npos) throw Error("annotator pair must be 'X,Y'");
        expr += "@" + pair.substr(0, comma) + (annotators_and.empty() ? "|" : "&") + pair.substr(comma + 1);
      } else {
        expr += "@" + annotator;
      }
      expr += ";depth=" + std::to_string(depth);
      if (allow_empty) expr += ";empty";
      if (no_multi) expr += ";nomulti";
      if (connect) expr += ";connect";
      return parse_method_spec(expr);
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
  }
};

std::string require(const std::string& v, const char* flag) {
  if (v.empty()) throw UsageError(std::string("missing required option ") + flag);
  return v;
}

Lexicons load_lex(const Globals& g) { return load_lexicons(g.vn_map, g.alias_map); }

// Load, resolve nested links over the whole file, then narrow to the
// requested split or id list.
Corpus load_scoped_corpus(const Globals& g) {
  Corpus c = load_corpus(require(g.corpus, "--corpus"));
  auto res = resolve_nested_links(c);
  if (res.report.issues.size())
    std::cerr << "warning: nested links: " << res.report.resolved << " resolved, "
              << res.report.count(LinkIssue::Kind::unresolved) << " unresolved, "
              << res.report.count(LinkIssue::Kind::ambiguous) << " ambiguous, "
              << res.report.count(LinkIssue::Kind::cycle) << " dropped (cycle)\n";
  c = std::move(res.corpus);
  if (!g.subset.empty() && !g.split.empty()) throw UsageError("--subset and --split are mutually exclusive");
  if (!g.subset.empty()) return subset(c, MentionSelector{read_id_list(g.subset)});
  if (!g.split.empty()) {
    auto s = parse_split(g.split);
    if (!s) throw UsageError("unknown split '" + g.split + "'");
    return subset(c, MentionSelector{*s});
  }
  return c;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write '" + path + "'");
  return f;
}

Partition load_partition(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open partition '" + path + "'");
  return read_partition(in, path);
}

// Extra mentions are an error; missing ones become singletons.
Partition cover(const Corpus& corpus, const Partition& pred) {
  std::unordered_set<MentionId> known;
  for (const auto& m : corpus.mentions()) known.insert(m.mention_id);
  std::vector<MentionId> extra;
  for (const auto& id : pred.mention_ids())
    if (!known.count(id)) extra.push_back(id);
  if (!extra.empty()) require_same_mentions(corpus.gold(), pred);
  std::vector<MentionId> absent;
  for (const auto& m : corpus.mentions())
    if (!pred.contains(m.mention_id)) absent.push_back(m.mention_id);
  if (absent.empty()) return pred;
  std::cerr << "warning: " << absent.size() << " mention(s) missing from the partition are scored as singletons\n";
  return pred.with_singletons(absent);
}

void report_missing(const std::vector<std::pair<MentionId, AnnotatorId>>& missing) {
  if (missing.empty()) return;
  std::cerr << "warning: " << missing.size() << " mention(s) lack a required annotation (first: " << missing[0].first
            << " by " << missing[0].second << "); they form no identifier\n";
}

int cmd_cluster(const Globals& g, const MethodFlags& mf) {
  const MethodSpec spec = mf.build();
  const Corpus c = load_scoped_corpus(g);
  const Lexicons lex = load_lex(g);
  auto r = cluster(c, spec, lex, ClusterOptions{g.threads});
  report_missing(r.missing);
  auto f = open_out(require(g.out, "--out"));
  write_partition(f, r.partition);
  std::cout << "method=" << format_method_spec(spec) << " mentions=" << c.size() << " clusters=" << r.stats.clusters
            << " singletons=" << r.stats.singletons << " keys=" << r.stats.keys << " buckets=" << r.stats.buckets
            << " pair_mass=" << r.stats.pair_mass << '\n';
  return 0;
}

int cmd_score(const Globals& g, const std::string& partition_path) {
  const Corpus c = load_scoped_corpus(g);
  const Partition pred = cover(c, load_partition(require(partition_path, "--partition")));
  const ScoreReport s = score(c.gold(), pred);
  write_score_report(std::cout, s);
  if (!g.out.empty()) {
    auto f = open_out(g.out);
    write_score_csv(f, {MatrixRow{partition_path, s, {}}});
  }
  return 0;
}

int cmd_matrix(const Globals& g, const std::string& methods_path) {
  const auto methods = load_method_list(require(methods_path, "--methods"));
  const Corpus c = load_scoped_corpus(g);
  const Lexicons lex = load_lex(g);
  const auto rows = score_matrix(c, methods, lex, ClusterOptions{g.threads});
  write_score_table(std::cout, rows);
  if (!g.out.empty()) {
    auto f = open_out(g.out);
    write_score_csv(f, rows);
  }
  for (const auto& r : rows)
    if (r.error.size()) std::cerr << "warning: row '" << r.label << "' failed: " << r.error << '\n';
  return 0;
}

std::vector<std::size_t> parse_sizes(const std::string& s) {
  try {
    if (auto colon = s.find(':'); colon != std::string::npos) {
      auto parts = text::split(s, ':');
      if (parts.size() != 3) throw UsageError("--sizes range must be FROM:TO:STEP");
      return harness::size_range(std::stoull(std::string(parts[0])), std::stoull(std::string(parts[1])),
                                 std::stoull(std::string(parts[2])));
    }
    std::vector<std::size_t> out;
    for (auto p : text::split(s, ',')) out.push_back(std::stoull(std::string(text::trim(p))));
    return out;
  } catch (const std::invalid_argument&) {
    throw UsageError("--sizes: not a number in '" + s + "'");
  } catch (const std::out_of_range&) {
    throw UsageError("--sizes: number out of range in '" + s + "'");
  }
}

int cmd_bench(const Globals& g, const MethodFlags& mf, const std::string& sizes, int repeats) {
  harness::BenchOptions o;
  o.method = mf.build();
  o.sizes = parse_sizes(sizes);
  o.repeats = repeats;
  o.threads = g.threads;
  Corpus base;
  Lexicons lex;
  if (g.corpus.empty()) {
    auto data = harness::make_synthetic({}, g.seed);
    base = std::move(data.corpus);
    lex = std::move(data.lexicons);
    std::cerr << "bench: synthetic dev-scale corpus, " << base.size() << " mentions, seed " << g.seed << '\n';
  } else {
    base = load_scoped_corpus(g);
    lex = load_lex(g);
  }
  auto r = harness::run_bench(base, lex, o, [](std::size_t n, double t) {
    std::cerr << "bench: " << n << " mentions " << fixed6(t) << " s\n";
  });
  write_bench_csv(std::cout, r);
  if (!g.out.empty()) {
    auto f = open_out(g.out);
    write_bench_csv(f, r);
  }
  return 0;
}

int cmd_diagnose(const Globals& g, const MethodFlags& mf, const std::string& partition_path,
                 const std::string& assignments_path) {
  const MethodSpec spec = mf.build();
  const Corpus c = load_scoped_corpus(g);
  const Lexicons lex = load_lex(g);
  Partition pred = partition_path.empty() ? cluster(c, spec, lex, ClusterOptions{g.threads}).partition
                                          : cover(c, load_partition(partition_path));
  auto r = harness::diagnose(c, pred, spec, lex);
  if (r.truncated) std::cerr << "warning: mismatch list truncated\n";
  if (g.out.empty()) {
    harness::write_diagnostics_tsv(std::cout, r);
  } else {
    auto f = open_out(g.out);
    harness::write_diagnostics_tsv(f, r);
  }
  if (!assignments_path.empty()) {
    auto f = open_out(assignments_path);
    harness::write_assignments_tsv(f, r);
  }
  return 0;
}

struct LlmFlags {
  std::string strategy = "G1";
  std::string templates;
  std::string replay, record;
  std::string endpoint, endpoint_path = "/v1/chat/completions", model, api_key_env = "OPENAI_API_KEY";
  std::string usage, failures, g1_replay;
  std::size_t width = 1;
  int retries = 2;

  llm::PromptTemplates load_templates() const {
    return templates.empty() ? llm::default_prompt_templates() : llm::load_prompt_templates(templates);
  }
};

llm::AnnotateOptions annotate_options(const Globals& g, const LlmFlags& lf) {
  llm::AnnotateOptions o;
  o.width = lf.width;
  o.retries = lf.retries;
  o.lexicons = load_lex(g);
  return o;
}

int cmd_prompts(const Globals& g, const LlmFlags& lf) {
  const auto strategy = llm::parse_strategy(lf.strategy);
  const Corpus c = load_scoped_corpus(g);
  const auto templates = lf.load_templates();
  const fs::path dir = require(g.out, "--out");
  fs::create_directories(dir);

  std::map<MentionId, llm::PromptBundle> prompts;
  std::vector<std::string> errors;
  if (strategy == llm::Strategy::G1) {
    for (const auto& m : c.mentions()) {
      try {
        prompts.emplace(m.mention_id, llm::build_g1_prompt(m, llm::document_text(c, m.doc_id), templates));
      } catch (const Error& e) {
        errors.push_back(e.what());
      }
    }
  } else {
    // G2 needs the G1 descriptions; take them from recorded G1 responses
    auto replay = llm::ReplayTransport::load(require(lf.g1_replay, "--g1-replay"));
    auto opts = annotate_options(g, lf);
    auto g1 = llm::annotate_corpus(c, replay, llm::Strategy::G1, templates, opts).g1;
    auto pool = llm::dedupe_pool(llm::build_pool(c, g1.responses), opts.dedupe_cfg, opts.lexicons);
    for (const auto& m : c.mentions()) {
      auto own = g1.responses.find(m.mention_id);
      try {
        prompts.emplace(m.mention_id,
                        llm::build_g2_prompt(m, pool.eligible(m.topic_id),
                                             own == g1.responses.end() ? std::string() : own->second.event_description,
                                             templates));
      } catch (const Error& e) {
        errors.push_back(e.what());
      }
    }
  }
  for (const auto& [id, p] : prompts) {
    auto f = open_out((dir / llm::prompt_file_name(id, strategy)).string());
    f << llm::render_prompt_file(p);
  }
  for (const auto& e : errors) std::cerr << "warning: " << e << '\n';
  std::cout << "prompts=" << prompts.size() << " failed=" << errors.size() << " dir=" << dir.string() << '\n';
  return 0;
}

int cmd_annotate(const Globals& g, const LlmFlags& lf) {
  const auto strategy = llm::parse_strategy(lf.strategy);
  if (lf.replay.empty() == lf.endpoint.empty()) throw UsageError("give exactly one of --replay or --endpoint");
  const Corpus c = load_scoped_corpus(g);
  const auto templates = lf.load_templates();

  std::unique_ptr<llm::Transport> base;
  if (!lf.replay.empty()) {
    base = std::make_unique<llm::ReplayTransport>(llm::ReplayTransport::load(lf.replay));
  } else {
    llm::HttpConfig hc;
    hc.base_url = lf.endpoint;
    hc.path = lf.endpoint_path;
    hc.model = require(lf.model, "--model");
    if (const char* key = std::getenv(lf.api_key_env.c_str())) hc.api_key = key;
    base = std::make_unique<llm::HttpChatTransport>(hc);
  }
  llm::RecordingTransport recorder(*base);
  llm::Transport& transport = lf.record.empty() ? *base : static_cast<llm::Transport&>(recorder);

  auto result = llm::annotate_corpus(c, transport, strategy, templates, annotate_options(g, lf));
  Corpus out = llm::annotation_set(c, result.g1, "G1");
  if (result.g2) out = llm::annotation_set(out, *result.g2, "G2");
  {
    auto f = open_out(require(g.out, "--out"));
    write_corpus_jsonl(f, out);
  }
  std::vector<llm::UsageRecord> usage = result.g1.usage;
  std::vector<llm::FailureEntry> failures = result.g1.failures;
  if (result.g2) {
    usage.insert(usage.end(), result.g2->usage.begin(), result.g2->usage.end());
    failures.insert(failures.end(), result.g2->failures.begin(), result.g2->failures.end());
  }
  if (!lf.usage.empty()) {
    auto f = open_out(lf.usage);
    llm::write_usage_log(f, usage);
  }
  if (!lf.failures.empty()) {
    auto f = open_out(lf.failures);
    llm::write_failures(f, failures);
  }
  if (!lf.record.empty()) {
    auto f = open_out(lf.record);
    recorder.write_jsonl(f);
  }
  std::cout << "strategy=" << lf.strategy << " annotated=" << result.final_run().responses.size()
            << " failed=" << result.final_run().failures.size() << " set_hash=" << llm::annotation_set_hash(out) << '\n';
  return 0;
}

void print_error(const std::string& command, const std::string& what) {
  nlohmann::ordered_json j;
  j["error"] = what;
  j["command"] = command;
  std::cerr << j.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Event identifier clustering and evaluation"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--corpus", g.corpus, "Mention JSONL file");
  app.add_option("--vn-map", g.vn_map, "Roleset to VerbNet class TSV");
  app.add_option("--alias-map", g.alias_map, "Surface to canonical entity TSV");
  app.add_option("--out", g.out, "Output path (file or directory, per command)");
  app.add_option("--seed", g.seed, "Seed for synthetic data");
  app.add_option("--threads", g.threads, "Worker threads for key generation")->check(CLI::Range(1u, 256u));
  app.add_option("--subset", g.subset, "File of mention ids to keep");
  app.add_option("--split", g.split, "Keep one split (train, dev, test, dev_small)");

  MethodFlags cluster_mf, bench_mf, diag_mf;
  auto* c_cluster = app.add_subcommand("cluster", "Cluster mentions and write a partition");
  cluster_mf.add_to(c_cluster);

  std::string partition_path;
  auto* c_score = app.add_subcommand("score", "Score a partition against the gold clusters");
  c_score->add_option("--partition", partition_path, "Partition dump")->required();

  std::string methods_path;
  auto* c_matrix = app.add_subcommand("matrix", "Score every method listed in a file");
  c_matrix->add_option("--methods", methods_path, "Method list file")->required();

  std::string sizes = "60000:200000:20000";
  int repeats = 3;
  auto* c_bench = app.add_subcommand("bench", "Time clustering on duplicated corpora");
  bench_mf.add_to(c_bench);
  c_bench->add_option("--sizes", sizes, "FROM:TO:STEP or a comma list");
  c_bench->add_option("--repeats", repeats, "Timed runs per size")->check(CLI::Range(1, 100));

  std::string diag_partition, assignments;
  auto* c_diag = app.add_subcommand("diagnose", "List mismatched pairs with error-category hints");
  diag_mf.add_to(c_diag);
  c_diag->add_option("--partition", diag_partition, "Partition dump (default: cluster with the method)");
  c_diag->add_option("--assignments", assignments, "Write per-mention gold/predicted clusters here");

  LlmFlags prompts_lf, annotate_lf;
  auto* c_prompts = app.add_subcommand("prompts", "Write G1/G2 prompt files");
  c_prompts->add_option("--strategy", prompts_lf.strategy, "G1 or G2");
  c_prompts->add_option("--templates", prompts_lf.templates, "Prompt template directory");
  c_prompts->add_option("--g1-replay", prompts_lf.g1_replay, "Recorded G1 responses (needed for G2)");

  auto* c_annotate = app.add_subcommand("annotate", "Annotate mentions through a replay or live transport");
  c_annotate->add_option("--strategy", annotate_lf.strategy, "G1 or G2");
  c_annotate->add_option("--templates", annotate_lf.templates, "Prompt template directory");
  c_annotate->add_option("--replay", annotate_lf.replay, "Recorded responses (JSONL)");
  c_annotate->add_option("--endpoint", annotate_lf.endpoint, "Chat-completions base URL");
  c_annotate->add_option("--endpoint-path", annotate_lf.endpoint_path, "Request path");
  c_annotate->add_option("--model", annotate_lf.model, "Model name");
  c_annotate->add_option("--api-key-env", annotate_lf.api_key_env, "Environment variable holding the API key");
  c_annotate->add_option("--record", annotate_lf.record, "Save replies as a replay fixture");
  c_annotate->add_option("--usage", annotate_lf.usage, "Usage log TSV");
  c_annotate->add_option("--failures", annotate_lf.failures, "Failure log TSV");
  c_annotate->add_option("--width", annotate_lf.width, "Concurrent calls")->check(CLI::Range(1, 64));
  c_annotate->add_option("--retries", annotate_lf.retries, "Retries per mention")->check(CLI::Range(0, 10));

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  std::string command = app.get_subcommands().front()->get_name();
  try {
    if (command == "cluster") return cmd_cluster(g, cluster_mf);
    if (command == "score") return cmd_score(g, partition_path);
    if (command == "matrix") return cmd_matrix(g, methods_path);
    if (command == "bench") return cmd_bench(g, bench_mf, sizes, repeats);
    if (command == "diagnose") return cmd_diagnose(g, diag_mf, diag_partition, assignments);
    if (command == "prompts") return cmd_prompts(g, prompts_lf);
    if (command == "annotate") return cmd_annotate(g, annotate_lf);
  } catch (const UsageError& e) {
    print_error(command, e.what());
    return 2;
  } catch (const std::exception& e) {
    print_error(command, e.what());
    return 1;
  }
  return 2;
}
