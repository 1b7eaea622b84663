#pragma once

#include <optional>
#include <string>

#include "httplib.h"
#include "json.hpp"
#include "xamr/llm/transport.hpp"

namespace xamr::llm {

// Chat-completions style endpoint (OpenAI-compatible request and reply shape).
struct HttpConfig {
  std::string base_url;  // scheme://host[:port]
  std::string path = "/v1/chat/completions";
  std::string model;
  std::string api_key;
  double temperature = 0.0;
  int timeout_s = 120;
  // USD per 1000 tokens, used to fill Usage::cost_usd
  double prompt_price = 0.0;
  double completion_price = 0.0;
};

class HttpChatTransport : public Transport {
 public:
  explicit HttpChatTransport(HttpConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.base_url.empty()) throw Error("HTTP transport needs a base URL");
    if (cfg_.model.empty()) throw Error("HTTP transport needs a model name");
  }

  static std::string request_body(const HttpConfig& cfg, const PromptBundle& p) {
    nlohmann::ordered_json body;
    body["model"] = cfg.model;
    body["temperature"] = cfg.temperature;
    body["messages"] = nlohmann::ordered_json::array(
        {{{"role", "system"}, {"content", p.system_text}}, {{"role", "user"}, {"content", p.user_text}}});
    return body.dump();
  }

  TransportReply complete(const PromptBundle& prompt, const std::string&) override {
    // a client per call keeps the transport safe to share between threads
    httplib::Client client(cfg_.base_url);
    client.set_connection_timeout(cfg_.timeout_s);
    client.set_read_timeout(cfg_.timeout_s);
    httplib::Headers headers;
    if (!cfg_.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg_.api_key);

    auto res = client.Post(cfg_.path, headers, request_body(cfg_, prompt), "application/json");
    if (!res) return {false, {}, "HTTP request failed: " + httplib::to_string(res.error()), std::nullopt};
    if (res->status != 200)
      return {false, {}, "HTTP status " + std::to_string(res->status) + ": " + res->body.substr(0, 200), std::nullopt};

    auto j = nlohmann::json::parse(res->body, nullptr, false);
    if (j.is_discarded()) return {false, {}, "reply body is not JSON", std::nullopt};
    std::optional<std::string> content;
    if (auto c = j.find("choices"); c != j.end() && c->is_array() && !c->empty() && (*c)[0].is_object()) {
      const auto msg = (*c)[0].value("message", nlohmann::json::object());
      if (auto t = msg.find("content"); t != msg.end() && t->is_string()) content = t->get<std::string>();
    }
    if (!content) return {false, {}, "reply has no choices[0].message.content", std::nullopt};

    TransportReply out{true, std::move(*content), {}, std::nullopt};
    if (auto u = j.find("usage"); u != j.end()) {
      out.usage = detail::usage_from_json(*u);
      if (out.usage)
        out.usage->cost_usd = (static_cast<double>(out.usage->prompt_tokens) * cfg_.prompt_price +
                               static_cast<double>(out.usage->completion_tokens) * cfg_.completion_price) /
                              1000.0;
    }
    return out;
  }

 private:
  HttpConfig cfg_;
};

}  // namespace xamr::llm
