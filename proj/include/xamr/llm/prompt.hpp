#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "xamr/corpus.hpp"
#include "xamr/error.hpp"
#include "xamr/text.hpp"

namespace xamr::llm {

enum class Strategy { G1, G2 };

inline std::string_view to_string(Strategy s) { return s == Strategy::G1 ? "G1" : "G2"; }

inline Strategy parse_strategy(std::string_view s) {
  if (s == "G1" || s == "g1") return Strategy::G1;
  if (s == "G2" || s == "g2") return Strategy::G2;
  throw Error("unknown prompting strategy '" + std::string(s) + "' (expected G1 or G2)");
}

inline constexpr std::string_view kOpenMarker = "<m>";
inline constexpr std::string_view kCloseMarker = "</m>";
inline constexpr std::string_view kBestMatchKey = "Best Matching Event Description";

struct PromptBundle {
  std::string system_text;
  std::string user_text;
  Strategy strategy = Strategy::G1;

  friend bool operator==(const PromptBundle&, const PromptBundle&) = default;
};

// Text blocks loaded from the prompt data directory.
struct PromptTemplates {
  std::string instructions;
  std::string label_definitions;
  std::string best_match_definition;
};

namespace detail {

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open prompt template '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string s = ss.str();
  // templates are stored with a trailing newline; rendering adds its own
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

}  // namespace detail

inline PromptTemplates load_prompt_templates(const std::string& dir) {
  return {detail::read_text_file(dir + "/instructions.txt"), detail::read_text_file(dir + "/label_definitions.txt"),
          detail::read_text_file(dir + "/best_match_definition.txt")};
}

#ifdef XAMR_DATA_DIR
inline const PromptTemplates& default_prompt_templates() {
  static const PromptTemplates t = load_prompt_templates(std::string(XAMR_DATA_DIR) + "/prompts");
  return t;
}
#endif

// Sentence with the trigger wrapped as "<m> trigger </m>".
inline std::string mark_trigger(const Mention& m) {
  auto b = text::utf8_byte_offset(m.sentence, m.trigger_start);
  auto e = text::utf8_byte_offset(m.sentence, m.trigger_end);
  if (!b || !e || *b > *e || m.sentence.compare(*b, *e - *b, m.trigger_text) != 0)
    throw Error("mention '" + m.mention_id + "': trigger '" + m.trigger_text + "' not found in sentence");
  if (m.sentence.find(kOpenMarker) != std::string::npos || m.sentence.find(kCloseMarker) != std::string::npos)
    throw Error("mention '" + m.mention_id + "': sentence already contains a trigger marker");
  std::string out = m.sentence.substr(0, *b);
  out += kOpenMarker;
  out += ' ';
  out += m.trigger_text;
  out += ' ';
  out += kCloseMarker;
  out += m.sentence.substr(*e);
  return out;
}

// Document text rebuilt from the distinct sentences the corpus holds for the
// mention's document, in sentence order.
inline std::string document_text(const Corpus& corpus, const std::string& doc_id) {
  std::map<long, std::string> sentences;
  auto collect = [&](const Mention& m) {
    if (m.doc_id == doc_id) sentences.emplace(m.sentence_id, m.sentence);
  };
  for (const auto& m : corpus.mentions()) collect(m);
  for (const auto& m : corpus.context()) collect(m);
  std::string out;
  for (const auto& [id, s] : sentences) {
    if (!out.empty()) out += '\n';
    out += s;
  }
  return out;
}

// The template blocks may name the markers themselves; beyond those, the user
// text must hold exactly one marker pair, around the trigger.
inline void require_single_marker(const PromptBundle& p, const Mention& m, const std::string& fixed_text) {
  const std::string wrapped =
      std::string(kOpenMarker) + " " + m.trigger_text + " " + std::string(kCloseMarker);
  const bool ok = text::count_occurrences(p.user_text, kOpenMarker) == text::count_occurrences(fixed_text, kOpenMarker) + 1 &&
                  text::count_occurrences(p.user_text, kCloseMarker) ==
                      text::count_occurrences(fixed_text, kCloseMarker) + 1 &&
                  text::count_occurrences(p.user_text, wrapped) == 1;
  if (!ok) throw Error("mention '" + m.mention_id + "': prompt context already contains a trigger marker");
}

inline PromptBundle build_g1_prompt(const Mention& mention, const std::string& document,
                                    const PromptTemplates& t) {
  const std::string marked = mark_trigger(mention);
  PromptBundle p;
  p.strategy = Strategy::G1;
  p.system_text = t.instructions + "\n";
  std::string& u = p.user_text;
  u += t.label_definitions;
  u += "\n\nDocument:\n";
  u += document;
  u += "\n\nSentence:\n";
  u += marked;
  u += "\n\nReturn one JSON object with the keys defined above, in that order.\n";
  require_single_marker(p, mention, t.label_definitions);
  return p;
}

// Entry of the description list shown to G2.
struct ListedDescription {
  MentionId mention_id;
  std::string text;
};

inline PromptBundle build_g2_prompt(const Mention& mention, const std::vector<ListedDescription>& descriptions,
                                    const std::string& target_description, const PromptTemplates& t) {
  const std::string marked = mark_trigger(mention);
  PromptBundle p;
  p.strategy = Strategy::G2;
  p.system_text = t.instructions + "\n";
  std::string& u = p.user_text;
  u += t.best_match_definition;
  u += '\n';
  u += t.label_definitions;
  u += "\n\nReturn one JSON object. Its first key must be \"";
  u += kBestMatchKey;
  u += "\", followed by the keys defined above, in that order.\n\nEvent Descriptions:\n";
  if (descriptions.empty()) {
    u += "(empty list)\n";
  } else {
    for (std::size_t i = 0; i < descriptions.size(); ++i)
      u += std::to_string(i + 1) + ". " + descriptions[i].text + "\n";
  }
  u += "\nSentence:\n";
  u += marked;
  u += "\n\nTarget Event Description:\n";
  u += target_description.empty() ? std::string("(none)") : target_description;
  u += '\n';
  require_single_marker(p, mention, t.best_match_definition + t.label_definitions);
  return p;
}

// On-disk form used for prompt fixture files.
inline std::string render_prompt_file(const PromptBundle& p) {
  return "### system\n" + p.system_text + "### user\n" + p.user_text;
}

inline std::string prompt_file_name(const MentionId& id, Strategy s) {
  return id + "." + std::string(to_string(s)) + ".txt";
}

}  // namespace xamr::llm
