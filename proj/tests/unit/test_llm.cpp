#include <gtest/gtest.h>

#include <atomic>
#include <map>
#include <random>
#include <sstream>
#include <thread>

#include "support.hpp"
#include "xamr/llm/http_transport.hpp"

using namespace xamr;
using namespace xamr::llm;

namespace {

const PromptTemplates& templates() { return default_prompt_templates(); }

ReplayTransport worked_replay() { return ReplayTransport::load(testsupport::data_path("worked_replay.jsonl")); }

std::vector<std::string> recorded_texts() {
  std::vector<std::string> out;
  for (const char* f : {"worked_replay.jsonl", "extra_responses.jsonl"}) {
    std::istringstream in(testsupport::slurp(testsupport::data_path(f)));
    std::string line;
    while (std::getline(in, line))
      if (!line.empty()) out.push_back(nlohmann::json::parse(line).at("response_text").get<std::string>());
  }
  return out;
}

PromptBundle g1_for(const Corpus& c, const std::string& id) {
  const Mention& m = *c.find(id);
  return build_g1_prompt(m, document_text(c, m.doc_id), templates());
}

XAmr amr(std::string a0, std::string rs, std::string a1, std::string loc, std::string time) {
  XAmr x;
  x.roleset = std::move(rs);
  x.arg0 = ArgValue{std::move(a0)};
  x.arg1 = Arg1Value::make_entity(std::move(a1));
  x.arg_loc = ArgValue{std::move(loc)};
  x.arg_time = ArgValue{std::move(time)};
  return x;
}

PoolEntry entry(std::string id, XAmr x, bool complete = true) {
  return {std::move(id), "description of " + x.roleset, complete, std::move(x)};
}

std::vector<MentionId> ids_of(const EventDescriptionPool& p, const std::string& topic) {
  std::vector<MentionId> out;
  for (const auto& e : p.topics.at(topic)) out.push_back(e.mention_id);
  return out;
}

// Fails the first `failures` calls per request, then defers to `inner`.
class FlakyTransport : public Transport {
 public:
  FlakyTransport(Transport& inner, int failures, bool garbage) : inner_(inner), failures_(failures), garbage_(garbage) {}
  TransportReply complete(const PromptBundle& p, const std::string& hash) override {
    {
      std::lock_guard<std::mutex> lock(mu_);
      if (seen_[hash]++ < failures_) {
        if (garbage_) return {true, "I cannot comply.", {}, std::nullopt};
        throw std::runtime_error("connection reset");
      }
    }
    return inner_.complete(p, hash);
  }

 private:
  Transport& inner_;
  int failures_;
  bool garbage_;
  std::mutex mu_;
  std::map<std::string, int> seen_;
};

}  // namespace

// ---------------------------------------------------------------------------
// Prompts

TEST(Prompt, G1MatchesGoldenFile) {
  const Corpus c = testsupport::worked_corpus();
  EXPECT_EQ(render_prompt_file(g1_for(c, "m1")), testsupport::slurp(testsupport::golden_path("m1.G1.txt")));
}

TEST(Prompt, G2MatchesGoldenFiles) {
  const Corpus c = testsupport::worked_corpus();
  auto replay = worked_replay();
  auto g1 = annotate_corpus(c, replay, Strategy::G1, templates()).g1;
  auto pool = dedupe_pool(build_pool(c, g1.responses), EidConfig{}, Lexicons{});
  for (const char* id : {"m1", "m5"}) {
    const Mention& m = *c.find(id);
    auto p = build_g2_prompt(m, pool.eligible(m.topic_id), g1.responses.at(id).event_description, templates());
    EXPECT_EQ(render_prompt_file(p), testsupport::slurp(testsupport::golden_path(prompt_file_name(id, Strategy::G2))))
        << id;
  }
}

TEST(Prompt, MarksTriggerExactlyOnce) {
  const Corpus c = testsupport::worked_corpus();
  auto p = g1_for(c, "m1");
  EXPECT_EQ(text::count_occurrences(p.user_text, "<m> acquire </m>"), 1u);
  EXPECT_EQ(p.strategy, Strategy::G1);
  EXPECT_EQ(p.system_text, templates().instructions + "\n");
  // the document itself is left unmarked
  EXPECT_NE(p.user_text.find(c.find("m1")->sentence), std::string::npos);
}

TEST(Prompt, Deterministic) {
  const Corpus c = testsupport::worked_corpus();
  EXPECT_EQ(g1_for(c, "m4"), g1_for(c, "m4"));
  EXPECT_EQ(request_hash(g1_for(c, "m4")), request_hash(g1_for(c, "m4")));
  EXPECT_NE(request_hash(g1_for(c, "m4")), request_hash(g1_for(c, "m4s")));
}

TEST(Prompt, TriggerMustMatchSentence) {
  Mention m = *testsupport::worked_corpus().find("m1");
  m.trigger_text = "purchase";
  EXPECT_THROW(build_g1_prompt(m, "doc", templates()), Error);
  Mention marked = *testsupport::worked_corpus().find("m1");
  marked.sentence = "<m> x </m> " + marked.sentence;
  marked.trigger_start += 11;
  marked.trigger_end += 11;
  EXPECT_THROW(build_g1_prompt(marked, "doc", templates()), Error);
  // a marker smuggled in through the document context is caught as well
  EXPECT_THROW(build_g1_prompt(*testsupport::worked_corpus().find("m1"), "a <m> b </m> c", templates()), Error);
}

TEST(Prompt, G2ListsDescriptionsAndPutsTargetLast) {
  const Mention m = *testsupport::worked_corpus().find("m5");
  std::vector<ListedDescription> list{{"a", "first"}, {"b", "second"}, {"c", "third"}};
  auto p = build_g2_prompt(m, list, "my own", templates());
  EXPECT_NE(p.user_text.find("\n1. first\n2. second\n3. third\n"), std::string::npos);
  const std::string tail = "\n\nTarget Event Description:\nmy own\n";
  EXPECT_EQ(p.user_text.substr(p.user_text.size() - tail.size()), tail);
  EXPECT_LT(p.user_text.find(kBestMatchKey), p.user_text.find("Event Descriptions:\n1."));

  auto empty = build_g2_prompt(m, {}, "", templates());
  EXPECT_NE(empty.user_text.find("Event Descriptions:\n(empty list)\n"), std::string::npos);
  EXPECT_NE(empty.user_text.find("Target Event Description:\n(none)\n"), std::string::npos);
}

TEST(Prompt, FileNamesAndStrategies) {
  EXPECT_EQ(prompt_file_name("m1", Strategy::G2), "m1.G2.txt");
  EXPECT_EQ(parse_strategy("g1"), Strategy::G1);
  EXPECT_THROW(parse_strategy("G3"), Error);
  EXPECT_THROW(load_prompt_templates("/nonexistent"), Error);
}

// ---------------------------------------------------------------------------
// Responses

TEST(Response, ParsesCodeFencedPayload) {
  auto r = parse_response("```json\n{\"Roleset ID\": \"acquire.01\", \"ARG-0\": \"HP\", \"ARG-0 Coreference\": "
                          "\"/wiki/Hewlett-Packard\", \"ARG-1\": \"EYP\", \"ARG-1 Coreference\": \"/wiki/EYP\", "
                          "\"ARG-Location\": \"/wiki/Palo_Alto\", \"ARG-Time\": \"11-12-2007\", "
                          "\"Event Description\": \"HP buys EYP\", \"Is it a Nested Event?\": \"No\"}\n```");
  EXPECT_EQ(r.roleset, "acquire.01");
  EXPECT_EQ(r.arg0_coref, "/wiki/Hewlett-Packard");
  EXPECT_FALSE(r.time_flagged);
  EXPECT_TRUE(r.warnings.empty());
  EXPECT_EQ(r.extra.at("Is it a Nested Event?"), "No");
  EXPECT_TRUE(is_complete(r));
  XAmr x = to_xamr(r);
  EXPECT_EQ(x.arg0->surface, "/wiki/Hewlett-Packard");
  EXPECT_EQ(x.arg1->entity->surface, "/wiki/EYP");
  EXPECT_EQ(x.arg_loc->surface, "/wiki/Palo_Alto");
}

TEST(Response, MissingRolesetNamesTheKey) {
  const std::string raw = R"({"ARG-0": "HP"})";
  try {
    parse_response(raw);
    FAIL() << "no error";
  } catch (const ResponseParseError& e) {
    EXPECT_NE(std::string(e.what()).find("Roleset ID"), std::string::npos);
    EXPECT_EQ(e.raw(), raw);
  }
  EXPECT_THROW(parse_response("no json here"), ResponseParseError);
  EXPECT_THROW(parse_response("{\"Roleset ID\": \"a.01\""), ResponseParseError);
  EXPECT_THROW(parse_response(R"({"Roleset ID": "two words"})"), ResponseParseError);
}

TEST(Response, TimeFormatIsCheckedNotEnforced) {
  auto ok = parse_response(R"({"Roleset ID": "acquire.01", "ARG-Time": "11-12-2007"})");
  EXPECT_FALSE(ok.time_flagged);
  EXPECT_TRUE(valid_month_day_year("November-12-2007"));
  EXPECT_TRUE(valid_month_day_year("1-9-2007"));
  EXPECT_FALSE(valid_month_day_year("13-12-2007"));
  auto vague = parse_response(R"({"Roleset ID": "acquire.01", "ARG-Time": "last Tuesday"})");
  EXPECT_TRUE(vague.time_flagged);
  EXPECT_EQ(vague.arg_time, "last Tuesday");
  EXPECT_EQ(to_xamr(vague).arg_time->surface, "last Tuesday");
}

TEST(Response, NormalizesValues) {
  auto r = parse_response(R"({"roleset id": "purchase-01", "ARG-0": ["HP", "Compaq"], "ARG-1": "N/A",
                               "ARG-1 Roleset ID": "not a roleset!", "ARG-Location": "Houston"})");
  EXPECT_EQ(r.roleset, "purchase.01");
  EXPECT_EQ(r.arg0, "HP/Compaq");
  EXPECT_EQ(r.arg1, "");
  EXPECT_FALSE(r.arg1_roleset);
  EXPECT_EQ(r.warnings.size(), 2u);  // dropped ARG-1 roleset, location not a wiki path
  EXPECT_FALSE(to_xamr(r).arg1);
  EXPECT_FALSE(is_complete(r));
}

TEST(Response, NestedArg1BecomesEvent) {
  auto r = parse_response(R"({"Roleset ID": "say.01", "ARG-0": "Police", "ARG-1": "the suspect fled",
                               "ARG-1 Roleset ID": "flee-05"})");
  XAmr x = to_xamr(r);
  ASSERT_TRUE(x.is_nested());
  EXPECT_EQ(x.arg1->linked_roleset, std::optional<std::string>("flee.05"));
}

// Property: parse after render is the identity on all modeled fields.
TEST(ResponseProperty, RenderParseRoundTripOnRecordedResponses) {
  const auto texts = recorded_texts();
  ASSERT_EQ(texts.size(), 20u);
  for (const auto& raw : texts) {
    auto r = parse_response(raw);
    auto again = parse_response(render_response(r));
    EXPECT_TRUE(again.same_fields(r)) << raw;
    EXPECT_EQ(again.time_flagged, r.time_flagged);
  }
}

// ---------------------------------------------------------------------------
// Pool

TEST(Pool, DuplicateDescriptionsCollapseToEarliest) {
  EventDescriptionPool pool;
  pool.topics["t"] = {entry("a", amr("HP", "acquire.01", "EYP", "x", "1")),
                      entry("b", amr("Hewlett-Packard", "acquire.01", "EYP", "y", "2")),
                      entry("c", amr("Oracle", "buy.01", "Sun", "z", "3"))};
  Lexicons lex;
  lex.add_alias("hewlett-packard", "hp");
  EXPECT_EQ(ids_of(dedupe_pool(pool, EidConfig{}, lex), "t"), (std::vector<MentionId>{"a", "c"}));
  EXPECT_EQ(ids_of(dedupe_pool(pool, EidConfig{}, Lexicons{}), "t"), (std::vector<MentionId>{"a", "b", "c"}));
}

TEST(Pool, ChainsCollapseTransitively) {
  EventDescriptionPool pool;
  // a~b share the standard identifier, b~c share location and time
  pool.topics["t"] = {entry("a", amr("HP", "acquire.01", "EYP", "Palo Alto", "1")),
                      entry("b", amr("HP", "acquire.01", "EYP", "Houston", "2")),
                      entry("c", amr("HP", "acquire.01", "EDS", "Houston", "2")),
                      entry("d", amr("HP", "acquire.01", "EYP", "x", "y"), false)};
  auto out = dedupe_pool(pool, EidConfig{}, Lexicons{});
  EXPECT_EQ(ids_of(out, "t"), (std::vector<MentionId>{"a", "d"}));
  EXPECT_EQ(out.eligible("t").size(), 1u);
}

TEST(Pool, BuiltFromReplayedG1) {
  const Corpus c = testsupport::worked_corpus();
  auto replay = worked_replay();
  auto g1 = annotate_corpus(c, replay, Strategy::G1, templates()).g1;
  auto pool = build_pool(c, g1.responses);
  EXPECT_EQ(pool.size(), 7u);
  // m4s has no location
  EXPECT_EQ(pool.eligible("t1").size(), 6u);
  auto deduped = dedupe_pool(pool, EidConfig{}, Lexicons{});
  std::vector<MentionId> eligible;
  for (const auto& d : deduped.eligible("t1")) eligible.push_back(d.mention_id);
  EXPECT_EQ(eligible, (std::vector<MentionId>{"m1", "m3", "m4", "m5"}));
}

// Property: dedupe keeps exactly the earliest complete entry of every
// component of the pairwise "shares an identifier" graph, and is idempotent.
TEST(PoolProperty, MatchesPairwiseOracleAndIsIdempotent) {
  std::mt19937_64 rng(17);
  const char* people[] = {"HP", "Oracle", "IBM"};
  const char* things[] = {"EYP", "Sun"};
  const char* places[] = {"Houston", "Austin"};
  const char* rolesets[] = {"buy.01", "acquire.01"};
  for (int t = 0; t < 100; ++t) {
    EventDescriptionPool pool;
    auto& v = pool.topics["t"];
    const std::size_t n = 1 + rng() % 12;
    for (std::size_t i = 0; i < n; ++i) {
      XAmr x = amr(people[rng() % 3], rolesets[rng() % 2], things[rng() % 2], places[rng() % 2],
                   std::to_string(rng() % 3));
      if (rng() % 4 == 0) x.arg1 = Arg1Value::make_event("say.01");
      v.push_back(entry("e" + std::to_string(i), x, rng() % 5 != 0));
    }
    auto ids = [&](const XAmr& x) {
      auto s = eid_n(x, EidConfig{}, Lexicons{});
      auto lt = eid_lt(x, EidConfig{}, Lexicons{});
      s.insert(lt.begin(), lt.end());
      return s;
    };
    std::vector<int> comp(n, -1);
    std::vector<MentionId> expect;
    for (std::size_t s = 0; s < n; ++s) {
      if (!v[s].complete) {
        expect.push_back(v[s].mention_id);
        continue;
      }
      if (comp[s] >= 0) continue;
      expect.push_back(v[s].mention_id);
      std::vector<std::size_t> stack{s};
      comp[s] = static_cast<int>(s);
      while (!stack.empty()) {
        auto u = stack.back();
        stack.pop_back();
        const auto iu = ids(v[u].annotation);
        for (std::size_t w = 0; w < n; ++w) {
          if (comp[w] >= 0 || !v[w].complete) continue;
          const auto iw = ids(v[w].annotation);
          bool share = false;
          for (const auto& id : iu) share |= iw.count(id) > 0;
          if (share) {
            comp[w] = static_cast<int>(s);
            stack.push_back(w);
          }
        }
      }
    }
    auto once = dedupe_pool(pool, EidConfig{}, Lexicons{});
    EXPECT_EQ(ids_of(once, "t"), expect);
    EXPECT_EQ(dedupe_pool(once, EidConfig{}, Lexicons{}), once);
  }
}

// ---------------------------------------------------------------------------
// Transports and batch annotation

TEST(Replay, HashStableAcrossRuns) {
  const Corpus c = testsupport::worked_corpus();
  std::string first;
  for (std::size_t width : {1u, 4u, 1u}) {
    auto replay = worked_replay();
    AnnotateOptions opts;
    opts.width = width;
    auto res = annotate_corpus(c, replay, Strategy::G2, templates(), opts);
    ASSERT_TRUE(res.g2);
    EXPECT_TRUE(res.g1.failures.empty());
    EXPECT_TRUE(res.g2->failures.empty());
    EXPECT_EQ(res.g2->responses.size(), 7u);
    auto set = annotation_set(annotation_set(c, res.g1, "G1"), *res.g2, "G2");
    const auto h = annotation_set_hash(set);
    if (first.empty()) first = h;
    EXPECT_EQ(h, first);
    EXPECT_EQ(set.find("m1")->annotations.count("A1"), 1u);
  }
}

TEST(Replay, AnnotationSetScoresDownstream) {
  const Corpus c = testsupport::worked_corpus();
  auto replay = worked_replay();
  auto res = annotate_corpus(c, replay, Strategy::G2, templates());
  auto set = resolve_nested_links(annotation_set(c, *res.g2, "G2")).corpus;
  auto s = score(set.gold(), cluster(set, parse_method_spec("eidN@G2"), Lexicons{}).partition);
  EXPECT_GT(s.conll_f1, 0.0);
  EXPECT_LE(s.conll_f1, 1.0);
  EXPECT_EQ(res.g2->responses.at("m5").best_match, res.g1.responses.at("m4").event_description);
}

TEST(Replay, MissingFixtureIsAFailureEntry) {
  const Corpus c = testsupport::worked_corpus();
  auto full = worked_replay();
  ReplayTransport partial;
  for (const auto& m : c.mentions())
    if (m.mention_id != "m3") {
      auto h = request_hash(g1_for(c, m.mention_id));
      partial.add(h, full.complete({}, h).text);
    }
  AnnotateOptions opts;
  opts.retries = 1;
  auto res = annotate_corpus(c, partial, Strategy::G1, templates(), opts);
  ASSERT_EQ(res.g1.failures.size(), 1u);
  EXPECT_EQ(res.g1.failures[0].mention_id, "m3");
  EXPECT_EQ(res.g1.failures[0].attempts, 2);
  EXPECT_EQ(res.g1.responses.size(), 6u);
  std::ostringstream out;
  write_failures(out, res.g1.failures);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "mention_id\tstrategy\tattempts\terror");
  EXPECT_NE(out.str().find("m3\tG1\t2\tno recorded response"), std::string::npos);
}

TEST(Replay, RetriesCoverTransportAndParseFailures) {
  const Corpus c = testsupport::worked_corpus();
  for (bool garbage : {false, true}) {
    auto replay = worked_replay();
    FlakyTransport flaky(replay, 2, garbage);
    AnnotateOptions opts;
    opts.retries = 2;
    opts.width = 3;
    auto res = annotate_corpus(c, flaky, Strategy::G1, templates(), opts);
    EXPECT_TRUE(res.g1.failures.empty());
    for (const auto& u : res.g1.usage) EXPECT_EQ(u.attempts, 3);

    auto replay2 = worked_replay();
    FlakyTransport worse(replay2, 3, garbage);
    auto bad = annotate_corpus(c, worse, Strategy::G1, templates(), opts);
    EXPECT_EQ(bad.g1.failures.size(), 7u);
  }
}

TEST(Replay, UsageLog) {
  const Corpus c = testsupport::worked_corpus();
  auto replay = worked_replay();
  auto res = annotate_corpus(c, replay, Strategy::G1, templates());
  std::ostringstream out;
  write_usage_log(out, res.g1.usage);
  std::istringstream in(out.str());
  std::string header, line;
  std::getline(in, header);
  EXPECT_EQ(header, "mention_id\tstrategy\trequest_hash\tattempts\tprompt_tokens\tcompletion_tokens\tcost_usd");
  std::getline(in, line);
  EXPECT_EQ(line, "m1\tG1\t" + request_hash(g1_for(c, "m1")) + "\t1\t1412\t187\t0.000000");
  std::getline(in, line);
  EXPECT_EQ(line, "m2\tG1\t" + request_hash(g1_for(c, "m2")) + "\t1\t\t\t");
}

TEST(Replay, FixtureValidation) {
  std::istringstream conflict(R"({"request_hash": "a", "response_text": "x"})"
                              "\n"
                              R"({"request_hash": "a", "response_text": "y"})");
  EXPECT_THROW(ReplayTransport::from_jsonl(conflict), ParseError);
  std::istringstream missing(R"({"response_text": "x"})");
  EXPECT_THROW(ReplayTransport::from_jsonl(missing), ParseError);
  std::istringstream same(R"({"request_hash": "a", "response_text": "x"})"
                          "\n\n"
                          R"({"request_hash": "a", "response_text": "x"})");
  EXPECT_EQ(ReplayTransport::from_jsonl(same).size(), 1u);
}

TEST(Replay, RecordingRoundTrips) {
  const Corpus c = testsupport::worked_corpus();
  auto replay = worked_replay();
  RecordingTransport rec(replay);
  AnnotateOptions opts;
  opts.width = 4;
  auto res = annotate_corpus(c, rec, Strategy::G2, templates(), opts);
  std::ostringstream out;
  rec.write_jsonl(out);
  std::istringstream in(out.str());
  auto again = ReplayTransport::from_jsonl(in);
  EXPECT_EQ(again.size(), 14u);
  auto res2 = annotate_corpus(c, again, Strategy::G2, templates());
  EXPECT_EQ(annotation_set_hash(annotation_set(c, *res2.g2, "G2")), annotation_set_hash(annotation_set(c, *res.g2, "G2")));
}

TEST(Sha256, KnownVectors) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Http, TalksToChatCompletionsEndpoint) {
  httplib::Server svr;
  std::atomic<int> calls{0};
  std::string seen_auth, seen_body;
  svr.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    ++calls;
    seen_auth = req.get_header_value("Authorization");
    seen_body = req.body;
    nlohmann::json reply = {{"choices", {{{"message", {{"role", "assistant"}, {"content", "{\"Roleset ID\": \"a.01\"}"}}}}}},
                            {"usage", {{"prompt_tokens", 1000}, {"completion_tokens", 500}}}};
    res.set_content(reply.dump(), "application/json");
  });
  svr.Post("/broken", [](const httplib::Request&, httplib::Response& res) {
    res.status = 500;
    res.set_content("overloaded", "text/plain");
  });
  const int port = svr.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread th([&] { svr.listen_after_bind(); });
  svr.wait_until_ready();

  HttpConfig cfg;
  cfg.base_url = "http://127.0.0.1:" + std::to_string(port);
  cfg.model = "test-model";
  cfg.api_key = "secret";
  cfg.prompt_price = 0.01;
  cfg.completion_price = 0.03;
  HttpChatTransport http(cfg);
  PromptBundle p{"sys\n", "user text", Strategy::G1};
  auto r = http.complete(p, request_hash(p));
  EXPECT_TRUE(r.ok) << r.error;
  EXPECT_EQ(r.text, "{\"Roleset ID\": \"a.01\"}");
  ASSERT_TRUE(r.usage);
  EXPECT_NEAR(r.usage->cost_usd, 0.025, 1e-12);
  EXPECT_EQ(seen_auth, "Bearer secret");
  auto body = nlohmann::json::parse(seen_body);
  EXPECT_EQ(body["model"], "test-model");
  EXPECT_EQ(body["messages"][0]["content"], "sys\n");
  EXPECT_EQ(body["messages"][1]["role"], "user");

  cfg.path = "/broken";
  HttpChatTransport broken(cfg);
  auto b = broken.complete(p, "");
  EXPECT_FALSE(b.ok);
  EXPECT_NE(b.error.find("500"), std::string::npos);

  svr.stop();
  th.join();
  EXPECT_EQ(calls.load(), 1);
  EXPECT_THROW(HttpChatTransport(HttpConfig{}), Error);
}
