#pragma once

#include <cctype>
#include <cstdlib>
#include <memory>
#include <string>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "rtlopt/errors.hpp"
#include "rtlopt/model_client.hpp"

namespace rtlopt {

namespace detail {

// Local-role endpoints must stay on-prem: loopback, RFC1918, or a bare LAN
// hostname. Dotted public names and public IPs are rejected.
inline bool is_private_host(const std::string& host)
{
  if (host == "localhost" || host == "::1" || host == "[::1]") return true;
  if (host.size() > 6 && host.compare(host.size() - 6, 6, ".local") == 0) return true;

  bool dotted_numeric = !host.empty();
  for (char c : host)
    if (!std::isdigit(static_cast<unsigned char>(c)) && c != '.') dotted_numeric = false;
  if (dotted_numeric) {
    int a = -1, b = -1;
    if (std::sscanf(host.c_str(), "%d.%d", &a, &b) >= 1) {
      if (a == 127 || a == 10) return true;
      if (a == 192 && b == 168) return true;
      if (a == 172 && b >= 16 && b <= 31) return true;
    }
    return false;
  }
  // single-label hostname: resolvable only on the local network
  return host.find('.') == std::string::npos;
}

struct ParsedUrl {
  std::string scheme;
  std::string host;
  int port = 80;
  std::string base; // scheme://host:port for httplib::Client
};

inline ParsedUrl parse_url(const std::string& url)
{
  ParsedUrl p;
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos)
    throw ConfigError("endpoint url must include a scheme: " + url);
  p.scheme = url.substr(0, scheme_end);
  std::string rest = url.substr(scheme_end + 3);
  auto slash = rest.find('/');
  std::string hostport = slash == std::string::npos ? rest : rest.substr(0, slash);
  auto colon = hostport.rfind(':');
  if (colon != std::string::npos && hostport.find(']') == std::string::npos) {
    p.host = hostport.substr(0, colon);
    p.port = std::atoi(hostport.c_str() + colon + 1);
  } else {
    p.host = hostport;
    p.port = p.scheme == "https" ? 443 : 80;
  }
  if (p.host.empty()) throw ConfigError("endpoint url has no host: " + url);
  p.base = p.scheme + "://" + p.host + ":" + std::to_string(p.port);
  return p;
}

} // namespace detail

struct HttpEndpointConfig {
  std::string url;              // e.g. http://127.0.0.1:11434
  std::string path = "/v1/chat/completions";
  std::string model;
  std::string api_key_env;      // env var holding the bearer token, if any
  GenerationParams params;
  bool allow_remote_local = false;
  int connect_timeout_s = 10;
  int read_timeout_s = 300;
};

// OpenAI-style chat completion client. Connection errors and 5xx responses
// are transient (retryable); 4xx responses are permanent.
class HttpEndpoint final : public ModelEndpoint {
public:
  HttpEndpoint(EndpointRole role, HttpEndpointConfig config)
      : role_(role), config_(std::move(config)), url_(detail::parse_url(config_.url))
  {
    if (role_ == EndpointRole::Local && !config_.allow_remote_local &&
        !detail::is_private_host(url_.host))
      throw ConfigError("local endpoint host is not loopback/LAN: " + url_.host);
  }

  EndpointRole role() const override { return role_; }
  std::string model_name() const override { return config_.model; }

  RawResult complete_once(const std::string& prompt) override
  {
    httplib::Client client(url_.base);
    client.set_connection_timeout(config_.connect_timeout_s, 0);
    client.set_read_timeout(config_.read_timeout_s, 0);

    httplib::Headers headers;
    if (!config_.api_key_env.empty()) {
      const char* key = std::getenv(config_.api_key_env.c_str());
      if (key && *key) headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    nlohmann::json body = {
        {"model", config_.model},
        {"messages", {{{"role", "user"}, {"content", prompt}}}},
        {"temperature", config_.params.temperature},
        {"max_tokens", config_.params.max_tokens},
    };
    if (config_.params.seed) body["seed"] = *config_.params.seed;

    auto res = client.Post(config_.path, headers, body.dump(), "application/json");

    RawResult out;
    if (!res) {
      out.transient = true;
      out.error = "connection failed: " + httplib::to_string(res.error());
      return out;
    }
    if (res->status >= 500) {
      out.transient = true;
      out.error = "server error " + std::to_string(res->status);
      return out;
    }
    if (res->status != 200) {
      out.error = "http status " + std::to_string(res->status) + ": " + res->body;
      return out;
    }

    nlohmann::json j = nlohmann::json::parse(res->body, nullptr, false);
    if (j.is_discarded()) {
      out.transient = true;
      out.error = "unparseable response body";
      return out;
    }
    try {
      out.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception&) {
      out.error = "response missing choices[0].message.content";
      return out;
    }
    if (j.contains("usage")) {
      out.prompt_tokens = j["usage"].value("prompt_tokens", 0);
      out.completion_tokens = j["usage"].value("completion_tokens", 0);
    }
    out.ok = true;
    return out;
  }

private:
  EndpointRole role_;
  HttpEndpointConfig config_;
  detail::ParsedUrl url_;
};

} // namespace rtlopt
