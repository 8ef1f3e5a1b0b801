#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rtlopt/errors.hpp"
#include "rtlopt/hash.hpp"
#include "rtlopt/leakage_guard.hpp"
#include "rtlopt/prompts.hpp"
#include "rtlopt/synthesis.hpp"

namespace rtlopt {

struct EndpointConfig {
  std::string url;
  std::string model;
  std::string api_key_env;
  double temperature = 0.2;
  std::string script; // path to a scripted response file; overrides url
};

inline EndpointConfig default_local_endpoint()
{
  EndpointConfig e;
  e.temperature = 0.7;
  return e;
}

struct RunConfig {
  // paths
  std::string proprietary_root;
  std::string draft_root;
  std::string targets;
  std::string out = "out";

  // pairing
  double threshold = 0.7;
  bool bucket_numeric_literals = true;

  // guard
  LeakagePolicy guard;

  // endpoints
  EndpointConfig local = default_local_endpoint();
  EndpointConfig cloud;
  bool allow_remote_local = false;

  // synthesis
  std::string backend = "mock";
  SynthesisConstraints constraints;
  int validate_timeout_s = 60;
  int measure_timeout_s = 600;
  std::string extern_command; // command template for the external backend
  std::string extern_area_regex;
  std::string extern_power_regex;
  std::string extern_delay_regex;
  double extern_area_scale = 1.0;  // to um^2
  double extern_power_scale = 1.0; // to uW
  double extern_delay_scale = 1.0; // to ps

  // experiment
  Attribute attribute = Attribute::Power;
  int k = 4;
  std::uint64_t seed = 1;
  std::vector<std::uint64_t> seeds = {1};
  std::vector<int> ks = {1, 2, 4, 8, 16, 32};
  int retries = 2;
  int workers = 1;
  bool verbatim_paper_prompts = false;

  prompts::PromptStyle prompt_style() const
  {
    return verbatim_paper_prompts ? prompts::PromptStyle::VerbatimPaper
                                  : prompts::PromptStyle::Corrected;
  }
};

inline void to_json(nlohmann::json& j, const EndpointConfig& e)
{
  j = {{"url", e.url},
       {"model", e.model},
       {"api_key_env", e.api_key_env},
       {"temperature", e.temperature},
       {"script", e.script}};
}

inline void from_json(const nlohmann::json& j, EndpointConfig& e)
{
  e.url = j.value("url", e.url);
  e.model = j.value("model", e.model);
  e.api_key_env = j.value("api_key_env", e.api_key_env);
  e.temperature = j.value("temperature", e.temperature);
  e.script = j.value("script", e.script);
}

inline void to_json(nlohmann::json& j, const RunConfig& c)
{
  j = {{"paths",
        {{"proprietary_root", c.proprietary_root},
         {"draft_root", c.draft_root},
         {"targets", c.targets},
         {"out", c.out}}},
       {"pairing",
        {{"threshold", c.threshold},
         {"bucket_numeric_literals", c.bucket_numeric_literals}}},
       {"guard",
        {{"ngram_size", c.guard.ngram_size},
         {"min_hits_to_flag", c.guard.min_hits_to_flag},
         {"identifier_overlap_threshold", c.guard.identifier_overlap_threshold},
         {"action", c.guard.action == GuardAction::Block ? "block" : "warn"}}},
       {"endpoints",
        {{"local", c.local},
         {"cloud", c.cloud},
         {"allow_remote_local", c.allow_remote_local}}},
       {"synthesis",
        {{"backend", c.backend},
         {"target_frequency_mhz", c.constraints.target_frequency_mhz},
         {"technology", c.constraints.technology},
         {"validate_timeout_s", c.validate_timeout_s},
         {"measure_timeout_s", c.measure_timeout_s},
         {"command", c.extern_command},
         {"area_regex", c.extern_area_regex},
         {"power_regex", c.extern_power_regex},
         {"delay_regex", c.extern_delay_regex},
         {"area_scale", c.extern_area_scale},
         {"power_scale", c.extern_power_scale},
         {"delay_scale", c.extern_delay_scale}}},
       {"experiment",
        {{"attribute", to_string(c.attribute)},
         {"k", c.k},
         {"seed", c.seed},
         {"seeds", c.seeds},
         {"ks", c.ks},
         {"retries", c.retries},
         {"workers", c.workers},
         {"verbatim_paper_prompts", c.verbatim_paper_prompts}}}};
}

inline void from_json(const nlohmann::json& j, RunConfig& c)
{
  if (j.contains("paths")) {
    const auto& p = j["paths"];
    c.proprietary_root = p.value("proprietary_root", c.proprietary_root);
    c.draft_root = p.value("draft_root", c.draft_root);
    c.targets = p.value("targets", c.targets);
    c.out = p.value("out", c.out);
  }
  if (j.contains("pairing")) {
    const auto& p = j["pairing"];
    c.threshold = p.value("threshold", c.threshold);
    c.bucket_numeric_literals =
        p.value("bucket_numeric_literals", c.bucket_numeric_literals);
  }
  if (j.contains("guard")) {
    const auto& g = j["guard"];
    c.guard.ngram_size = g.value("ngram_size", c.guard.ngram_size);
    c.guard.min_hits_to_flag = g.value("min_hits_to_flag", c.guard.min_hits_to_flag);
    c.guard.identifier_overlap_threshold =
        g.value("identifier_overlap_threshold", c.guard.identifier_overlap_threshold);
    std::string action = g.value("action", std::string("block"));
    if (action == "block") c.guard.action = GuardAction::Block;
    else if (action == "warn") c.guard.action = GuardAction::Warn;
    else throw ConfigError("guard.action must be block or warn, got: " + action);
  }
  if (j.contains("endpoints")) {
    const auto& e = j["endpoints"];
    if (e.contains("local")) e["local"].get_to(c.local);
    if (e.contains("cloud")) e["cloud"].get_to(c.cloud);
    c.allow_remote_local = e.value("allow_remote_local", c.allow_remote_local);
  }
  if (j.contains("synthesis")) {
    const auto& s = j["synthesis"];
    c.backend = s.value("backend", c.backend);
    c.constraints.target_frequency_mhz =
        s.value("target_frequency_mhz", c.constraints.target_frequency_mhz);
    c.constraints.technology = s.value("technology", c.constraints.technology);
    c.validate_timeout_s = s.value("validate_timeout_s", c.validate_timeout_s);
    c.measure_timeout_s = s.value("measure_timeout_s", c.measure_timeout_s);
    c.extern_command = s.value("command", c.extern_command);
    c.extern_area_regex = s.value("area_regex", c.extern_area_regex);
    c.extern_power_regex = s.value("power_regex", c.extern_power_regex);
    c.extern_delay_regex = s.value("delay_regex", c.extern_delay_regex);
    c.extern_area_scale = s.value("area_scale", c.extern_area_scale);
    c.extern_power_scale = s.value("power_scale", c.extern_power_scale);
    c.extern_delay_scale = s.value("delay_scale", c.extern_delay_scale);
  }
  if (j.contains("experiment")) {
    const auto& e = j["experiment"];
    if (e.contains("attribute"))
      c.attribute = attribute_from_string(e["attribute"].get<std::string>());
    c.k = e.value("k", c.k);
    c.seed = e.value("seed", c.seed);
    if (e.contains("seeds")) e["seeds"].get_to(c.seeds);
    if (e.contains("ks")) e["ks"].get_to(c.ks);
    c.retries = e.value("retries", c.retries);
    c.workers = e.value("workers", c.workers);
    c.verbatim_paper_prompts =
        e.value("verbatim_paper_prompts", c.verbatim_paper_prompts);
  }
}

inline RunConfig load_config(const std::string& path)
{
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path);
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigError("config file is not valid JSON: " + path);
  RunConfig c;
  try {
    j.get_to(c);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config file: ") + e.what());
  }
  return c;
}

// FNV-64 over the canonical (sorted-key) JSON form; stamped into run
// manifests and summaries so artifacts can be joined to the exact settings
// that produced them.
inline std::string config_fingerprint(const RunConfig& c)
{
  return hash_hex(nlohmann::json(c).dump());
}

namespace detail {

inline bool path_contains(const std::filesystem::path& base,
                          const std::filesystem::path& candidate)
{
  auto b = std::filesystem::weakly_canonical(base);
  auto c = std::filesystem::weakly_canonical(candidate);
  auto it = std::mismatch(b.begin(), b.end(), c.begin(), c.end());
  return it.first == b.end();
}

} // namespace detail

// The proprietary tree and the output tree must be disjoint: outputs may be
// shared or shipped, proprietary sources may not.
inline void validate_config(const RunConfig& c)
{
  if (c.guard.ngram_size < 4) throw ConfigError("guard.ngram_size must be >= 4");
  if (c.threshold < 0.0 || c.threshold > 1.0)
    throw ConfigError("pairing.threshold must be in [0,1]");
  if (c.guard.identifier_overlap_threshold < 0.0 ||
      c.guard.identifier_overlap_threshold > 1.0)
    throw ConfigError("guard.identifier_overlap_threshold must be in [0,1]");
  if (c.retries < 0) throw ConfigError("experiment.retries must be >= 0");
  if (c.k <= 0) throw ConfigError("experiment.k must be positive");
  if (!c.proprietary_root.empty() && !c.out.empty()) {
    if (detail::path_contains(c.proprietary_root, c.out) ||
        detail::path_contains(c.out, c.proprietary_root))
      throw ConfigError("output path overlaps the proprietary root: " + c.out);
  }
}

} // namespace rtlopt
