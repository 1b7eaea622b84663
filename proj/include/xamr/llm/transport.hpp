#pragma once

#include <openssl/evp.h>

#include <fstream>
#include <istream>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>

#include "json.hpp"
#include "xamr/error.hpp"
#include "xamr/llm/prompt.hpp"

namespace xamr::llm {

inline std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xF];
  }
  return out;
}

// Content key of a request: strategy, system text and user text, separated
// by NUL so no two distinct bundles share a preimage.
inline std::string request_hash(const PromptBundle& p) {
  std::string pre(to_string(p.strategy));
  pre += '\0';
  pre += p.system_text;
  pre += '\0';
  pre += p.user_text;
  return sha256_hex(pre);
}

struct Usage {
  long long prompt_tokens = 0;
  long long completion_tokens = 0;
  double cost_usd = 0.0;
};

struct TransportReply {
  bool ok = false;
  std::string text;
  std::string error;
  std::optional<Usage> usage;
};

// Request -> response text. Implementations must be safe to call from
// several threads at once.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual TransportReply complete(const PromptBundle& prompt, const std::string& hash) = 0;
};

namespace detail {

inline std::optional<Usage> usage_from_json(const nlohmann::json& j) {
  if (!j.is_object()) return std::nullopt;
  Usage u;
  u.prompt_tokens = j.value("prompt_tokens", 0LL);
  u.completion_tokens = j.value("completion_tokens", 0LL);
  u.cost_usd = j.value("cost_usd", 0.0);
  return u;
}

}  // namespace detail

// Recorded responses keyed by request hash (JSON lines of
// {"request_hash", "response_text"[, "usage"]}).
class ReplayTransport : public Transport {
 public:
  struct Record {
    std::string text;
    std::optional<Usage> usage;
  };

  ReplayTransport() = default;

  static ReplayTransport from_jsonl(std::istream& in, const std::string& source = "<replay>") {
    ReplayTransport t;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      auto j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.is_object()) throw ParseError(source, lineno, "record", "malformed JSON");
      auto h = j.find("request_hash");
      auto r = j.find("response_text");
      if (h == j.end() || !h->is_string() || h->get<std::string>().empty())
        throw ParseError(source, lineno, "request_hash", "missing or not a string");
      if (r == j.end() || !r->is_string()) throw ParseError(source, lineno, "response_text", "missing or not a string");
      Record rec{r->get<std::string>(), std::nullopt};
      if (auto u = j.find("usage"); u != j.end()) rec.usage = detail::usage_from_json(*u);
      auto [it, fresh] = t.records_.emplace(h->get<std::string>(), rec);
      if (!fresh && it->second.text != rec.text)
        throw ParseError(source, lineno, "request_hash", "conflicting responses for one request");
    }
    return t;
  }

  static ReplayTransport load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open replay fixture '" + path + "'");
    return from_jsonl(in, path);
  }

  void add(std::string hash, std::string text, std::optional<Usage> usage = std::nullopt) {
    records_[std::move(hash)] = {std::move(text), usage};
  }

  std::size_t size() const { return records_.size(); }

  TransportReply complete(const PromptBundle&, const std::string& hash) override {
    auto it = records_.find(hash);
    if (it == records_.end()) return {false, {}, "no recorded response for request " + hash, std::nullopt};
    return {true, it->second.text, {}, it->second.usage};
  }

 private:
  std::map<std::string, Record> records_;
};

// Wraps another transport and keeps every successful reply so a live run can
// be saved as a replay fixture.
class RecordingTransport : public Transport {
 public:
  explicit RecordingTransport(Transport& inner) : inner_(inner) {}

  TransportReply complete(const PromptBundle& prompt, const std::string& hash) override {
    TransportReply r = inner_.complete(prompt, hash);
    if (r.ok) {
      std::lock_guard<std::mutex> lock(mu_);
      records_[hash] = {r.text, r.usage};
    }
    return r;
  }

  // Sorted by hash, so the file does not depend on call order.
  void write_jsonl(std::ostream& out) const {
    std::lock_guard<std::mutex> lock(mu_);
    for (const auto& [hash, rec] : records_) {
      nlohmann::ordered_json j;
      j["request_hash"] = hash;
      j["response_text"] = rec.text;
      if (rec.usage)
        j["usage"] = {{"prompt_tokens", rec.usage->prompt_tokens},
                      {"completion_tokens", rec.usage->completion_tokens},
                      {"cost_usd", rec.usage->cost_usd}};
      out << j.dump() << '\n';
    }
  }

 private:
  Transport& inner_;
  mutable std::mutex mu_;
  std::map<std::string, ReplayTransport::Record> records_;
};

}  // namespace xamr::llm
