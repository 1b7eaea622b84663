#pragma once

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "xamr/corpus.hpp"
#include "xamr/eid.hpp"
#include "xamr/lexicons.hpp"
#include "xamr/llm/pool.hpp"
#include "xamr/llm/prompt.hpp"
#include "xamr/llm/response.hpp"
#include "xamr/llm/transport.hpp"

namespace xamr::llm {

struct AnnotateOptions {
  std::size_t width = 1;  // concurrent transport calls
  int retries = 2;        // extra attempts after the first
  EidConfig dedupe_cfg{};
  Lexicons lexicons{};
};

struct FailureEntry {
  MentionId mention_id;
  Strategy strategy = Strategy::G1;
  int attempts = 0;
  std::string error;
};

struct UsageRecord {
  MentionId mention_id;
  Strategy strategy = Strategy::G1;
  std::string request_hash;
  int attempts = 0;
  std::optional<Usage> usage;
};

struct AnnotationRun {
  Strategy strategy = Strategy::G1;
  std::map<MentionId, AnnotationResponse> responses;
  std::vector<FailureEntry> failures;  // corpus order
  std::vector<UsageRecord> usage;      // corpus order, one per attempted call
};

struct AnnotationResult {
  AnnotationRun g1;
  std::optional<AnnotationRun> g2;
  EventDescriptionPool pool;  // de-duplicated pool the G2 prompts were built from

  const AnnotationRun& final_run() const { return g2 ? *g2 : g1; }
};

namespace detail {

struct Slot {
  std::optional<PromptBundle> prompt;
  std::string build_error;
  std::optional<AnnotationResponse> response;
  std::string error;
  int attempts = 0;
  std::string hash;
  std::optional<Usage> usage;
};

inline void run_slot(Slot& s, Transport& transport, int retries) {
  if (!s.prompt) return;
  s.hash = request_hash(*s.prompt);
  for (int attempt = 0; attempt <= retries; ++attempt) {
    ++s.attempts;
    TransportReply reply;
    try {
      reply = transport.complete(*s.prompt, s.hash);
    } catch (const std::exception& e) {
      reply = {false, {}, e.what(), std::nullopt};
    }
    if (reply.usage) {
      if (!s.usage) s.usage = Usage{};
      s.usage->prompt_tokens += reply.usage->prompt_tokens;
      s.usage->completion_tokens += reply.usage->completion_tokens;
      s.usage->cost_usd += reply.usage->cost_usd;
    }
    if (!reply.ok) {
      s.error = reply.error;
      continue;
    }
    try {
      s.response = parse_response(reply.text);
      s.error.clear();
      return;
    } catch (const Error& e) {
      s.error = e.what();
    }
  }
}

inline AnnotationRun run_phase(const Corpus& corpus, Strategy strategy, std::vector<Slot>& slots,
                               Transport& transport, const AnnotateOptions& opts) {
  const std::size_t width = std::max<std::size_t>(1, std::min(opts.width, slots.size()));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < slots.size(); i = next++) run_slot(slots[i], transport, opts.retries);
  };
  if (width <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < width; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  AnnotationRun run;
  run.strategy = strategy;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const MentionId& id = corpus.mentions()[i].mention_id;
    Slot& s = slots[i];
    if (!s.prompt) {
      run.failures.push_back({id, strategy, 0, s.build_error});
      continue;
    }
    run.usage.push_back({id, strategy, s.hash, s.attempts, s.usage});
    if (s.response)
      run.responses.emplace(id, std::move(*s.response));
    else
      run.failures.push_back({id, strategy, s.attempts, s.error});
  }
  return run;
}

template <typename Build>
std::vector<Slot> build_slots(const Corpus& corpus, Build&& build) {
  std::vector<Slot> slots(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    try {
      slots[i].prompt = build(corpus.mentions()[i]);
    } catch (const Error& e) {
      slots[i].build_error = e.what();
    }
  }
  return slots;
}

}  // namespace detail

// G1 prompts every mention with its document. G2 first runs the G1 pass,
// builds and de-duplicates the description pool (a barrier between the two
// phases), then prompts every mention with its topic's complete descriptions.
// Per-mention failures are recorded and never stop the batch.
inline AnnotationResult annotate_corpus(const Corpus& corpus, Transport& transport, Strategy strategy,
                                        const PromptTemplates& templates, const AnnotateOptions& opts = {}) {
  std::map<std::string, std::string> documents;
  for (const auto& [doc, idx] : corpus.by_doc()) documents.emplace(doc, document_text(corpus, doc));

  AnnotationResult result;
  auto g1_slots = detail::build_slots(
      corpus, [&](const Mention& m) { return build_g1_prompt(m, documents.at(m.doc_id), templates); });
  result.g1 = detail::run_phase(corpus, Strategy::G1, g1_slots, transport, opts);
  if (strategy == Strategy::G1) return result;

  result.pool = dedupe_pool(build_pool(corpus, result.g1.responses), opts.dedupe_cfg, opts.lexicons);
  auto g2_slots = detail::build_slots(corpus, [&](const Mention& m) {
    auto own = result.g1.responses.find(m.mention_id);
    const std::string target = own == result.g1.responses.end() ? std::string() : own->second.event_description;
    return build_g2_prompt(m, result.pool.eligible(m.topic_id), target, templates);
  });
  result.g2 = detail::run_phase(corpus, Strategy::G2, g2_slots, transport, opts);
  return result;
}

// The corpus with each successfully parsed response stored under
// `annotator` (replacing any earlier annotation by that id).
inline Corpus annotation_set(const Corpus& corpus, const AnnotationRun& run, const AnnotatorId& annotator) {
  std::vector<Mention> out = corpus.mentions();
  for (auto& m : out) {
    auto it = run.responses.find(m.mention_id);
    if (it != run.responses.end()) m.annotations[annotator] = to_xamr(it->second);
  }
  return Corpus(std::move(out), corpus.context());
}

inline std::string annotation_set_hash(const Corpus& set) {
  std::ostringstream ss;
  write_corpus_jsonl(ss, set);
  return sha256_hex(ss.str());
}

inline void write_usage_log(std::ostream& out, const std::vector<UsageRecord>& usage) {
  out << "mention_id\tstrategy\trequest_hash\tattempts\tprompt_tokens\tcompletion_tokens\tcost_usd\n";
  for (const auto& u : usage) {
    out << u.mention_id << '\t' << to_string(u.strategy) << '\t' << u.request_hash << '\t' << u.attempts;
    if (u.usage) {
      char cost[32];
      std::snprintf(cost, sizeof cost, "%.6f", u.usage->cost_usd);
      out << '\t' << u.usage->prompt_tokens << '\t' << u.usage->completion_tokens << '\t' << cost << '\n';
    } else {
      out << "\t\t\t\n";
    }
  }
}

inline void write_failures(std::ostream& out, const std::vector<FailureEntry>& failures) {
  out << "mention_id\tstrategy\tattempts\terror\n";
  for (const auto& f : failures) {
    std::string err = f.error;
    std::replace(err.begin(), err.end(), '\t', ' ');
    std::replace(err.begin(), err.end(), '\n', ' ');
    out << f.mention_id << '\t' << to_string(f.strategy) << '\t' << f.attempts << '\t' << err << '\n';
  }
}

}  // namespace xamr::llm
