#pragma once

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "rtlopt/errors.hpp"
#include "rtlopt/hash.hpp"

namespace rtlopt {

enum class EndpointRole { Local, Cloud };

inline std::string to_string(EndpointRole r)
{
  return r == EndpointRole::Local ? "local" : "cloud";
}

struct GenerationParams {
  double temperature = 0.2;
  int max_tokens = 4096;
  std::optional<std::uint64_t> seed;
};

struct GenerationRecord {
  std::string prompt;
  std::string response;
  std::string model;
  std::string role;
  std::string prompt_hash;
  std::int64_t latency_ms = 0;
  int prompt_tokens = 0;
  int completion_tokens = 0;
  std::int64_t timestamp_ms = 0;
  int retries = 0;
  std::string audit_verdict_id; // the clearance that allowed a cloud call
};

inline void to_json(nlohmann::json& j, const GenerationRecord& r)
{
  j = {{"timestamp", r.timestamp_ms},
       {"model", r.model},
       {"role", r.role},
       {"prompt_hash", r.prompt_hash},
       {"prompt", r.prompt},
       {"response", r.response},
       {"latency_ms", r.latency_ms},
       {"prompt_tokens", r.prompt_tokens},
       {"completion_tokens", r.completion_tokens},
       {"retries", r.retries},
       {"audit_verdict_id", r.audit_verdict_id}};
}

inline void from_json(const nlohmann::json& j, GenerationRecord& r)
{
  r.timestamp_ms = j.value("timestamp", std::int64_t(0));
  r.model = j.value("model", std::string());
  r.role = j.value("role", std::string());
  r.prompt_hash = j.value("prompt_hash", std::string());
  r.prompt = j.value("prompt", std::string());
  r.response = j.value("response", std::string());
  r.latency_ms = j.value("latency_ms", std::int64_t(0));
  r.prompt_tokens = j.value("prompt_tokens", 0);
  r.completion_tokens = j.value("completion_tokens", 0);
  r.retries = j.value("retries", 0);
  r.audit_verdict_id = j.value("audit_verdict_id", std::string());
}

// Proof that a payload passed the leakage audit. Minted only from a Clear
// AuditVerdict; carries the payload hash so it cannot be reused for a
// different prompt.
struct AuditClearance {
  std::string verdict_id;
  std::string payload_hash;
};

class ModelEndpoint {
public:
  struct RawResult {
    bool ok = false;
    bool transient = false; // retryable failure
    std::string text;
    std::string error;
    int prompt_tokens = 0;
    int completion_tokens = 0;
  };

  virtual ~ModelEndpoint() = default;
  virtual EndpointRole role() const = 0;
  virtual std::string model_name() const = 0;
  virtual bool deterministic() const { return false; }
  virtual int max_in_flight() const { return 4; }
  virtual RawResult complete_once(const std::string& prompt) = 0;
};

struct GenerateOptions {
  int max_attempts = 3;
  std::int64_t backoff_ms = 500; // doubles per retry
};

namespace detail {

inline std::int64_t steady_ms()
{
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

inline std::int64_t wall_ms()
{
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

inline GenerationRecord run_generate(ModelEndpoint& endpoint, const std::string& prompt,
                                     const std::string& clearance_id,
                                     const GenerateOptions& opts)
{
  GenerationRecord rec;
  rec.prompt = prompt;
  rec.prompt_hash = hash_hex(prompt);
  rec.model = endpoint.model_name();
  rec.role = to_string(endpoint.role());
  rec.audit_verdict_id = clearance_id;
  rec.timestamp_ms = endpoint.deterministic() ? 0 : wall_ms();

  std::string last_error;
  for (int attempt = 0; attempt < opts.max_attempts; ++attempt) {
    if (attempt > 0 && opts.backoff_ms > 0)
      std::this_thread::sleep_for(
          std::chrono::milliseconds(opts.backoff_ms << (attempt - 1)));
    auto t0 = steady_ms();
    auto raw = endpoint.complete_once(prompt);
    auto t1 = steady_ms();
    if (raw.ok) {
      rec.response = raw.text;
      rec.prompt_tokens = raw.prompt_tokens;
      rec.completion_tokens = raw.completion_tokens;
      rec.latency_ms = endpoint.deterministic() ? 0 : (t1 - t0);
      rec.retries = attempt;
      return rec;
    }
    last_error = raw.error;
    if (!raw.transient) break;
  }
  throw EndpointUnreachable(endpoint.model_name() + ": " + last_error);
}

} // namespace detail

// The only paths that produce a model response. The cloud overload demands a
// clearance whose hash matches the prompt byte-for-byte; the plain overload
// refuses cloud endpoints outright, before any network I/O.
inline GenerationRecord generate(ModelEndpoint& endpoint, const std::string& prompt,
                                 const GenerateOptions& opts = {})
{
  if (endpoint.role() == EndpointRole::Cloud)
    throw AuditNotCleared("cloud prompt lacks an audit clearance");
  return detail::run_generate(endpoint, prompt, "", opts);
}

inline GenerationRecord generate(ModelEndpoint& endpoint, const std::string& prompt,
                                 const AuditClearance& clearance,
                                 const GenerateOptions& opts = {})
{
  if (clearance.verdict_id.empty())
    throw AuditNotCleared("clearance has no verdict id");
  if (clearance.payload_hash != hash_hex(prompt))
    throw AuditNotCleared("clearance was issued for a different payload");
  return detail::run_generate(endpoint, prompt, clearance.verdict_id, opts);
}

// --- scripted endpoint -------------------------------------------------------

// Deterministic endpoint for tests and dry runs. Responds via an explicit
// handler, or substring rules, or a fixed default. Can simulate transient
// failures for the retry path.
class ScriptedEndpoint final : public ModelEndpoint {
public:
  struct Rule {
    std::string contains;
    std::string response;
  };

  ScriptedEndpoint(EndpointRole role, std::string model_name)
      : role_(role), model_(std::move(model_name))
  {}

  static std::unique_ptr<ScriptedEndpoint> from_file(EndpointRole role,
                                                     const std::string& path)
  {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read script file: " + path);
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ConfigError("invalid JSON in script file: " + path);
    auto ep =
        std::make_unique<ScriptedEndpoint>(role, j.value("model", std::string("scripted")));
    for (const auto& r : j.value("rules", nlohmann::json::array()))
      ep->add_rule(r.at("contains").get<std::string>(), r.at("response").get<std::string>());
    ep->set_default_response(j.value("default_response", std::string()));
    ep->fail_first(j.value("fail_first", 0));
    return ep;
  }

  void set_handler(std::function<std::string(const std::string&)> handler)
  {
    handler_ = std::move(handler);
  }
  void add_rule(std::string contains, std::string response)
  {
    rules_.push_back({std::move(contains), std::move(response)});
  }
  void set_default_response(std::string response) { default_ = std::move(response); }
  void fail_first(int n) { fail_remaining_ = n; }

  int call_count() const
  {
    std::lock_guard<std::mutex> lock(mutex_);
    return calls_;
  }

  EndpointRole role() const override { return role_; }
  std::string model_name() const override { return model_; }
  bool deterministic() const override { return true; }

  RawResult complete_once(const std::string& prompt) override
  {
    std::lock_guard<std::mutex> lock(mutex_);
    ++calls_;
    if (fail_remaining_ > 0) {
      --fail_remaining_;
      return {false, true, "", "scripted transient failure", 0, 0};
    }
    RawResult r;
    r.ok = true;
    if (handler_) {
      r.text = handler_(prompt);
    } else {
      r.text = default_;
      for (const auto& rule : rules_) {
        if (prompt.find(rule.contains) != std::string::npos) {
          r.text = rule.response;
          break;
        }
      }
    }
    return r;
  }

private:
  EndpointRole role_;
  std::string model_;
  std::function<std::string(const std::string&)> handler_;
  std::vector<Rule> rules_;
  std::string default_;
  int fail_remaining_ = 0;
  int calls_ = 0;
  mutable std::mutex mutex_;
};

// --- generation log ----------------------------------------------------------

class GenerationLog {
public:
  explicit GenerationLog(std::string path = {}) : path_(std::move(path)) {}

  void record(const GenerationRecord& r)
  {
    std::lock_guard<std::mutex> lock(mutex_);
    entries_.push_back(r);
    if (!path_.empty()) {
      std::ofstream out(path_, std::ios::app);
      out << nlohmann::json(r).dump() << "\n";
    }
  }

  const std::vector<GenerationRecord>& entries() const { return entries_; }

  static std::vector<GenerationRecord> load(const std::string& path)
  {
    std::vector<GenerationRecord> out;
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      out.push_back(nlohmann::json::parse(line).get<GenerationRecord>());
    }
    return out;
  }

private:
  std::string path_;
  std::vector<GenerationRecord> entries_;
  std::mutex mutex_;
};

} // namespace rtlopt
