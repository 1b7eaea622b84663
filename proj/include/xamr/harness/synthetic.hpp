#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "xamr/corpus.hpp"
#include "xamr/lexicons.hpp"
#include "xamr/nested.hpp"

namespace xamr::harness {

// Random annotated corpora with the shape of the real data: topics of
// documents, gold events per topic, two noisy annotators, surface variants
// that the alias map may or may not cover, VerbNet classes over the roleset
// vocabulary, "/" multi-values, absent slots and nested ARG-1 chains.
struct SyntheticOptions {
  std::size_t mentions = 1245;
  std::size_t documents = 196;
  std::size_t topics = 8;
  std::size_t events_per_topic = 0;  // 0: about mentions / (2.5 * topics)
  std::size_t rolesets = 60;
  std::size_t entities_per_topic = 12;
  std::vector<AnnotatorId> annotators{"A1", "A2"};
  double nested_rate = 0.25;
  int max_nesting = 3;
  double dangling_link_rate = 0.05;
  double connecting_rate = 0.05;
  double multi_value_rate = 0.1;
  double missing_slot_rate = 0.1;
  double unmapped_variant_rate = 0.1;
  double roleset_noise = 0.1;
  double missing_annotation_rate = 0.02;
};

struct SyntheticData {
  Corpus corpus;  // nested links already resolved
  Lexicons lexicons;
};

namespace detail {

class Dice {
 public:
  explicit Dice(std::uint64_t seed) : rng_(seed) {}
  bool chance(double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < p; }
  std::size_t below(std::size_t n) { return n ? std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_) : 0; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace detail

inline SyntheticData make_synthetic(const SyntheticOptions& o, std::uint64_t seed) {
  if (o.mentions == 0 || o.documents == 0 || o.topics == 0) throw Error("synthetic corpus needs mentions, documents and topics");
  detail::Dice dice(seed);
  SyntheticData out;
  Lexicons& lex = out.lexicons;

  std::vector<std::string> rolesets;
  for (std::size_t r = 0; r < o.rolesets; ++r) rolesets.push_back("pred" + std::to_string(r) + ".0" + std::to_string(1 + r % 3));
  // classes of about three rolesets; every fifth roleset stays unmapped, some
  // get a second class
  std::vector<std::vector<std::size_t>> class_members;
  for (std::size_t r = 0; r < rolesets.size(); ++r) {
    if (r % 5 == 4) continue;
    const std::size_t cls = r / 3;
    lex.vn_classes[rolesets[r]].insert("vn-" + std::to_string(cls));
    if (class_members.size() <= cls) class_members.resize(cls + 1);
    class_members[cls].push_back(r);
    if (dice.chance(0.1)) lex.vn_classes[rolesets[r]].insert("vn-" + std::to_string(dice.below(rolesets.size() / 3 + 1)));
  }

  // entity surfaces: a canonical form and two variants; the first variant is
  // always aliased, the second only sometimes
  struct Entity {
    std::vector<std::string> surfaces;
  };
  std::vector<std::vector<Entity>> entities(o.topics);
  for (std::size_t t = 0; t < o.topics; ++t)
    for (std::size_t e = 0; e < o.entities_per_topic; ++e) {
      const std::string id = "ent" + std::to_string(t) + "_" + std::to_string(e);
      Entity ent{{"Entity " + std::to_string(t) + "-" + std::to_string(e), "E" + std::to_string(t) + "x" + std::to_string(e) + " Corp",
                  "the " + std::to_string(e) + "th party of " + std::to_string(t)}};
      lex.add_alias(ent.surfaces[0], id);
      lex.add_alias(ent.surfaces[1], id);
      if (!dice.chance(o.unmapped_variant_rate)) lex.add_alias(ent.surfaces[2], id);
      entities[t].push_back(std::move(ent));
    }
  const std::size_t places = 10;

  struct Event {
    std::size_t roleset, arg0, arg1, loc;
    std::string time;
  };
  const std::size_t per_topic = o.events_per_topic
                                    ? o.events_per_topic
                                    : std::max<std::size_t>(1, static_cast<std::size_t>(o.mentions / (2.5 * o.topics)));
  std::vector<std::vector<Event>> events(o.topics);
  for (std::size_t t = 0; t < o.topics; ++t)
    for (std::size_t e = 0; e < per_topic; ++e)
      events[t].push_back({dice.below(rolesets.size()), dice.below(o.entities_per_topic),
                           dice.below(o.entities_per_topic), dice.below(places),
                           std::to_string(1 + dice.below(12)) + "-" + std::to_string(1 + dice.below(28)) + "-20" +
                               std::to_string(10 + t % 10)});

  auto surface_of = [&](std::size_t topic, std::size_t ent) {
    const auto& s = entities[topic][ent].surfaces;
    std::string v = s[dice.below(s.size())];
    if (dice.chance(o.multi_value_rate)) v += " / " + entities[topic][dice.below(o.entities_per_topic)].surfaces[0];
    return v;
  };
  auto maybe = [&](std::string v) -> std::optional<ArgValue> {
    if (dice.chance(o.missing_slot_rate)) return std::nullopt;
    return ArgValue{std::move(v)};
  };

  std::vector<Mention> mentions;
  mentions.reserve(o.mentions);
  // per doc: mention indices so far; per (mention, annotator): nesting depth
  std::vector<std::vector<std::size_t>> in_doc(o.documents);
  std::vector<std::map<AnnotatorId, int>> depth(o.mentions);

  for (std::size_t i = 0; i < o.mentions; ++i) {
    const std::size_t doc = i < o.documents ? i : dice.below(o.documents);
    const std::size_t topic = doc % o.topics;
    const std::size_t ev = dice.below(events[topic].size());
    const Event& E = events[topic][ev];

    Mention m;
    m.mention_id = "m" + std::to_string(i);
    m.topic_id = "t" + std::to_string(topic);
    m.doc_id = "d" + std::to_string(doc);
    m.sentence_id = static_cast<long>(dice.below(12));
    const std::string& rs = rolesets[E.roleset];
    m.lemma = rs.substr(0, rs.find('.'));
    m.trigger_text = m.lemma;
    const std::string lead = "In part " + std::to_string(m.sentence_id) + " the ";
    m.sentence = lead + m.trigger_text + " happened.";
    m.trigger_start = lead.size();
    m.trigger_end = lead.size() + m.trigger_text.size();
    m.gold_cluster = "t" + std::to_string(topic) + "_ev" + std::to_string(ev);
    m.split = Split::dev;

    for (const auto& who : o.annotators) {
      if (dice.chance(o.missing_annotation_rate)) continue;
      XAmr x;
      std::size_t r = E.roleset;
      if (dice.chance(o.roleset_noise)) {
        const std::size_t cls = r / 3;
        if (r % 5 != 4 && cls < class_members.size() && !class_members[cls].empty() && dice.chance(0.7))
          r = class_members[cls][dice.below(class_members[cls].size())];
        else
          r = dice.below(rolesets.size());
      }
      x.roleset = rolesets[r];
      x.arg0 = maybe(surface_of(topic, E.arg0));

      int d = 0;
      const auto& earlier = in_doc[doc];
      if (!earlier.empty() && dice.chance(o.nested_rate)) {
        const std::size_t j = earlier[dice.below(earlier.size())];
        const XAmr* target = mentions[j].annotation(who);
        auto dj = depth[j].find(who);
        if (target && dj != depth[j].end() && dj->second < o.max_nesting) {
          std::optional<std::string> via;
          if (dice.chance(o.connecting_rate)) via = rolesets[dice.below(rolesets.size())];
          x.arg1 = Arg1Value::make_event(target->roleset, via);
          d = dj->second + 1;
        }
      }
      if (!x.arg1 && dice.chance(o.dangling_link_rate * o.nested_rate)) {
        x.arg1 = Arg1Value::make_event(rolesets[dice.below(rolesets.size())]);
      } else if (!x.arg1) {
        if (auto a1 = maybe(surface_of(topic, E.arg1))) x.arg1 = Arg1Value::make_entity(a1->surface);
      }
      x.arg_loc = maybe("Place " + std::to_string(E.loc));
      x.arg_time = maybe(E.time);
      m.annotations.emplace(who, std::move(x));
      depth[i][who] = d;
    }
    in_doc[doc].push_back(i);
    mentions.push_back(std::move(m));
  }

  out.corpus = resolve_nested_links(Corpus(std::move(mentions))).corpus;
  return out;
}

}  // namespace xamr::harness
