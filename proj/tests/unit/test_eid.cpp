#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace xamr;
using testsupport::tuple;

namespace {

const Mention& get(const Corpus& c, const std::string& id) { return *c.find(id); }

XAmr standard(std::string a0, std::string rs, std::string a1) {
  XAmr x;
  x.roleset = std::move(rs);
  x.arg0 = ArgValue{std::move(a0)};
  x.arg1 = Arg1Value::make_entity(std::move(a1));
  return x;
}

}  // namespace

TEST(Eid, StandardIdentifierOfM1) {
  const Corpus c = testsupport::worked_corpus();
  const Lexicons lex = testsupport::worked_lexicons(false);
  EidConfig cfg;
  IdentifierSet want{tuple(EidKind::eid0, {"HP", "acquire.01", "EYP"})};
  EXPECT_EQ(eid0(get(c, "m1"), "A1", cfg, lex), want);
  // m2 uses different surfaces for the same participants
  EXPECT_EQ(eid0(get(c, "m2"), "A1", cfg, lex), want);
  EXPECT_NE(eid0(get(c, "m3"), "A1", cfg, lex), want);
}

TEST(Eid, NestedIdentifiersOfM4AndM5) {
  const Corpus c = testsupport::worked_corpus();
  const Lexicons lex = testsupport::worked_lexicons(false);
  EidConfig cfg;
  cfg.max_depth = 2;
  IdentifierSet m4{tuple(EidKind::eidN, {"HP", "announce.01", "HP", "sign.02", "HP", "acquire.01", "EYP"}),
                   tuple(EidKind::eidN, {"HP", "announce.01", "HP", "acquire.01", "EYP"})};
  EXPECT_EQ(eid_n(c, get(c, "m4"), "A1", cfg, lex), m4);

  cfg.max_depth = 1;
  IdentifierSet m5{tuple(EidKind::eidN, {"HP", "state.01", "HP", "acquire.01", "EYP"})};
  EXPECT_EQ(eid_n(c, get(c, "m5"), "A1", cfg, lex), m5);
}

TEST(Eid, VerbNetClassesMakeM4AndM5Share) {
  const Corpus c = testsupport::worked_corpus();
  const Lexicons lex = testsupport::worked_lexicons(true);
  EidConfig cfg;
  cfg.roleset_mode = RolesetMode::vn_class;
  auto a = eid_n(c, get(c, "m4"), "A1", cfg, lex);
  auto b = eid_n(c, get(c, "m5"), "A1", cfg, lex);
  IdentifierSet shared;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::inserter(shared, shared.begin()));
  EXPECT_EQ(shared, (IdentifierSet{tuple(EidKind::eidN, {"HP", "say-37.7", "HP", "get-13.5.1", "EYP"})}));
}

TEST(Eid, DepthZeroChainFallsBackToTerminalRoleset) {
  const Corpus c = testsupport::worked_corpus();
  const Lexicons lex = testsupport::worked_lexicons(false);
  EidConfig cfg;
  cfg.max_depth = 0;
  // no hop allowed: the nested ARG-1 contributes its roleset
  EXPECT_EQ(eid_n(c, get(c, "m5"), "A1", cfg, lex),
            (IdentifierSet{tuple(EidKind::eid0, {"HP", "state.01", "acquire.01"})}));
}

TEST(Eid, UnresolvedLinkUsesLinkedRoleset) {
  XAmr x;
  x.roleset = "say.01";
  x.arg0 = ArgValue{"Police"};
  x.arg1 = Arg1Value::make_event("shoot.02");
  EXPECT_EQ(eid_n(x, EidConfig{}, Lexicons{}), (IdentifierSet{tuple(EidKind::eid0, {"police", "say.01", "shoot.02"})}));
}

TEST(Eid, ConnectingRolesetOnlyWithFlag) {
  const Corpus c = testsupport::worked_corpus();
  const Lexicons lex = testsupport::worked_lexicons(false);
  EidConfig cfg;
  cfg.include_connecting_roleset = true;
  auto ids = eid_n(c, get(c, "m4s"), "A1", cfg, lex);
  EXPECT_EQ(ids, (IdentifierSet{tuple(EidKind::eidN, {"HP", "sign.02", "agree.01", "HP", "acquire.01", "EYP"})}));
  cfg.include_connecting_roleset = false;
  EXPECT_EQ(eid_n(c, get(c, "m4s"), "A1", cfg, lex),
            (IdentifierSet{tuple(EidKind::eidN, {"HP", "sign.02", "HP", "acquire.01", "EYP"})}));
}

TEST(Eid, LocationTimeIdentifier) {
  const Corpus c = testsupport::worked_corpus();
  const Lexicons lex = testsupport::worked_lexicons(false);
  EidConfig cfg;
  EXPECT_EQ(eid_lt(get(c, "m1"), "A1", cfg, lex),
            (IdentifierSet{tuple(EidKind::eidLT, {"HP", "acquire.01", "palo alto", "11-12-2007"})}));
  // m3 has no location: strict policy yields nothing
  EXPECT_TRUE(eid_lt(get(c, "m3"), "A1", cfg, lex).empty());
  cfg.allow_empty_slots = true;
  EXPECT_EQ(eid_lt(get(c, "m3"), "A1", cfg, lex),
            (IdentifierSet{tuple(EidKind::eidLT, {"HP", "purchase.01", std::string(kEmptySlot), "05-13-2008"})}));
}

TEST(Eid, MultiValuesExpandToCartesianProduct) {
  Lexicons lex;
  lex.add_alias("it", "HP");
  auto ids = eid0(standard("Alice / Bob", "meet.03", "Carol/Dan"), EidConfig{}, lex);
  EXPECT_EQ(ids.size(), 4u);
  EXPECT_TRUE(ids.count(tuple(EidKind::eid0, {"bob", "meet.03", "carol"})));
  EidConfig whole;
  whole.multi_value_expansion = false;
  EXPECT_EQ(eid0(standard("Alice / Bob", "meet.03", "Carol"), whole, lex),
            (IdentifierSet{tuple(EidKind::eid0, {"alice / bob", "meet.03", "carol"})}));
  // alternatives that canonicalize alike collapse
  EXPECT_EQ(eid0(standard("it / HP", "buy.01", "x"), EidConfig{}, Lexicons{}).size(), 2u);
  EXPECT_EQ(canonicalize_argument(ArgValue{"it / hp / IT"}, lex), (std::vector<std::string>{"HP", "hp"}));
}

TEST(Eid, AliasKeysAreNormalized) {
  Lexicons lex;
  lex.add_alias("  Hewlett-PACKARD ", "HP");
  EXPECT_EQ(canonicalize_argument(ArgValue{"hewlett-packard"}, lex), std::vector<std::string>{"HP"});
}

TEST(Eid, WikiPathsAreOpaqueAliasKeys) {
  Lexicons lex;
  lex.add_alias("/wiki/Hewlett-Packard", "HP");
  EXPECT_EQ(canonicalize_argument(ArgValue{"/wiki/Hewlett-Packard"}, lex), std::vector<std::string>{"HP"});
  EXPECT_EQ(canonicalize_argument(ArgValue{"/wiki/Queens"}, lex), std::vector<std::string>{"/wiki/queens"});
}

TEST(Eid, UnmappedRolesetStaysItselfUnderVerbNet) {
  Lexicons lex;
  lex.vn_classes["buy.01"] = {"get-13.5.1", "obtain-13.5.2"};
  EXPECT_EQ(canonicalize_roleset("buy.01", RolesetMode::vn_class, lex),
            (std::vector<std::string>{"get-13.5.1", "obtain-13.5.2"}));
  EXPECT_EQ(canonicalize_roleset("tweet.01", RolesetMode::vn_class, lex), std::vector<std::string>{"tweet.01"});
  EXPECT_EQ(canonicalize_roleset("buy.01", RolesetMode::verbatim, lex), std::vector<std::string>{"buy.01"});
}

TEST(Eid, MissingAnnotationIsAnError) {
  const Corpus c = testsupport::worked_corpus();
  EXPECT_THROW(eid0(get(c, "m1"), "A9", EidConfig{}, Lexicons{}), MissingAnnotation);
}

TEST(Eid, DepthOutsideLimitsIsRejected) {
  EidConfig cfg;
  cfg.max_depth = kMaxDepthLimit + 1;
  EXPECT_THROW(cfg.validate(), Error);
  cfg.max_depth = -1;
  EXPECT_THROW(cfg.validate(), Error);
}

TEST(Eid, KeyRejectsSeparatorInToken) {
  EXPECT_THROW(identifier_key(tuple(EidKind::eid0, {"a\x1F" "b"})), Error);
  EXPECT_NE(identifier_key(tuple(EidKind::eid0, {"a", "b"})), identifier_key(tuple(EidKind::eid0, {"a b"})));
  EXPECT_NE(identifier_key(tuple(EidKind::eid0, {"x"})), identifier_key(tuple(EidKind::eidLT, {"x"})));
}

// Property: identifiers depend only on annotation content, not on ids,
// order or unrelated mentions.
TEST(EidProperty, IdentifiersIgnoreUnrelatedMentionsAndOrder) {
  auto data = harness::make_synthetic({.mentions = 150, .documents = 20, .topics = 3}, 7);
  const Corpus& c = data.corpus;
  std::vector<Mention> reversed(c.mentions().rbegin(), c.mentions().rend());
  const Corpus r = resolve_nested_links(Corpus(reversed)).corpus;
  EidConfig cfg;
  for (const auto& m : c.mentions()) {
    const XAmr* x = m.annotation("A1");
    if (!x || x->is_nested()) continue;  // link choice may depend on file order
    EXPECT_EQ(eid0(m, "A1", cfg, data.lexicons), eid0(*r.find(m.mention_id), "A1", cfg, data.lexicons));
  }
}

// Property: for N at or above the chain length, raising N never changes the set.
TEST(EidProperty, StableOnceDepthCoversTheChain) {
  auto data = harness::make_synthetic({.mentions = 200, .documents = 15, .topics = 2, .nested_rate = 0.6}, 11);
  for (const auto& m : data.corpus.mentions()) {
    if (!m.annotation("A1")) continue;
    EidConfig cfg;
    cfg.max_depth = kMaxDepthLimit;
    const auto full = eid_n(data.corpus, m, "A1", cfg, data.lexicons);
    // chain length: hops actually taken
    int hops = 0;
    const XAmr* x = m.annotation("A1");
    CorpusLinks follow{data.corpus, "A1"};
    while (hops < kMaxDepthLimit && x->is_nested() && (x = follow(*x->arg1))) ++hops;
    for (int n = hops; n <= kMaxDepthLimit; ++n) {
      cfg.max_depth = n;
      EXPECT_EQ(eid_n(data.corpus, m, "A1", cfg, data.lexicons), full) << m.mention_id << " N=" << n;
    }
  }
}

// Property: the empty-slot policy only adds identifiers.
TEST(EidProperty, EmptySlotsOnlyAdd) {
  auto data = harness::make_synthetic({.mentions = 200, .documents = 20, .topics = 3, .missing_slot_rate = 0.4}, 5);
  EidConfig strict, loose;
  loose.allow_empty_slots = true;
  for (const auto& m : data.corpus.mentions()) {
    if (!m.annotation("A1")) continue;
    auto s = eid_lt(m, "A1", strict, data.lexicons);
    auto l = eid_lt(m, "A1", loose, data.lexicons);
    EXPECT_TRUE(std::includes(l.begin(), l.end(), s.begin(), s.end()));
    EXPECT_FALSE(l.empty());
  }
}
