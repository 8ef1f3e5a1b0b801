#pragma once

#include <atomic>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "rtlopt/corpus.hpp"
#include "rtlopt/errors.hpp"
#include "rtlopt/hash.hpp"
#include "rtlopt/leakage_guard.hpp"
#include "rtlopt/model_client.hpp"
#include "rtlopt/principles.hpp"
#include "rtlopt/prompts.hpp"
#include "rtlopt/synthesis.hpp"
#include "rtlopt/verilog.hpp"

namespace rtlopt {

enum class OptVerdict {
  Improved,
  Regressed,
  Unchanged,
  SynthesisFailed,
  ExtractionFailed,
  AuditBlocked,
  EndpointUnreachable
};

inline std::string to_string(OptVerdict v)
{
  switch (v) {
    case OptVerdict::Improved: return "improved";
    case OptVerdict::Regressed: return "regressed";
    case OptVerdict::Unchanged: return "unchanged";
    case OptVerdict::SynthesisFailed: return "synthesis_failed";
    case OptVerdict::ExtractionFailed: return "extraction_failed";
    case OptVerdict::AuditBlocked: return "audit_blocked";
    case OptVerdict::EndpointUnreachable: return "endpoint_unreachable";
  }
  return "unknown";
}

inline OptVerdict opt_verdict_from_string(const std::string& s)
{
  if (s == "improved") return OptVerdict::Improved;
  if (s == "regressed") return OptVerdict::Regressed;
  if (s == "unchanged") return OptVerdict::Unchanged;
  if (s == "synthesis_failed") return OptVerdict::SynthesisFailed;
  if (s == "extraction_failed") return OptVerdict::ExtractionFailed;
  if (s == "audit_blocked") return OptVerdict::AuditBlocked;
  if (s == "endpoint_unreachable") return OptVerdict::EndpointUnreachable;
  throw ConfigError("unknown verdict: " + s);
}

inline bool is_success(OptVerdict v) { return v == OptVerdict::Improved; }

// Stable identity for a principle set: hash of its wire form.
inline std::string principle_set_id(const PrincipleSet& s)
{
  return hash_hex(nlohmann::json(s).dump());
}

struct OptimizationRecord {
  std::string target_id;
  std::string target_source;
  std::string category; // target's category label, for breakdowns
  Attribute attribute = Attribute::Power;
  std::string principle_set_id;
  std::string cloud_model;
  std::string prompt_hash; // of the final attempt's prompt
  std::string response;    // final attempt's raw response
  std::optional<std::string> extracted_source;
  PpaMetrics before;
  std::optional<PpaMetrics> after;
  OptVerdict verdict = OptVerdict::ExtractionFailed;
  OptVerdict first_attempt_verdict = OptVerdict::ExtractionFailed;
  std::optional<double> relative_delta;
  int attempts = 0;
  std::string audit_verdict_id; // clearance for the final cloud call, if any
  std::string diagnostic;       // tool detail for failure verdicts
};

inline void to_json(nlohmann::json& j, const OptimizationRecord& r)
{
  j = {{"target_id", r.target_id},
       {"target_source", r.target_source},
       {"category", r.category},
       {"attribute", to_string(r.attribute)},
       {"principle_set_id", r.principle_set_id},
       {"cloud_model", r.cloud_model},
       {"prompt_hash", r.prompt_hash},
       {"response", r.response},
       {"extracted_module", r.extracted_source ? nlohmann::json(*r.extracted_source)
                                               : nlohmann::json(nullptr)},
       {"before", r.before},
       {"after", r.after ? nlohmann::json(*r.after) : nlohmann::json(nullptr)},
       {"verdict", to_string(r.verdict)},
       {"first_attempt_verdict", to_string(r.first_attempt_verdict)},
       {"relative_delta",
        r.relative_delta ? nlohmann::json(*r.relative_delta) : nlohmann::json(nullptr)},
       {"attempts", r.attempts},
       {"audit_verdict_id", r.audit_verdict_id},
       {"diagnostic", r.diagnostic}};
}

inline void from_json(const nlohmann::json& j, OptimizationRecord& r)
{
  j.at("target_id").get_to(r.target_id);
  r.target_source = j.value("target_source", std::string());
  r.category = j.value("category", std::string());
  r.attribute = attribute_from_string(j.at("attribute").get<std::string>());
  r.principle_set_id = j.value("principle_set_id", std::string());
  r.cloud_model = j.value("cloud_model", std::string());
  r.prompt_hash = j.value("prompt_hash", std::string());
  r.response = j.value("response", std::string());
  if (j.contains("extracted_module") && !j["extracted_module"].is_null())
    r.extracted_source = j["extracted_module"].get<std::string>();
  j.at("before").get_to(r.before);
  if (j.contains("after") && !j["after"].is_null())
    r.after = j["after"].get<PpaMetrics>();
  r.verdict = opt_verdict_from_string(j.at("verdict").get<std::string>());
  r.first_attempt_verdict = opt_verdict_from_string(
      j.value("first_attempt_verdict", to_string(r.verdict)));
  if (j.contains("relative_delta") && !j["relative_delta"].is_null())
    r.relative_delta = j["relative_delta"].get<double>();
  r.attempts = j.value("attempts", 1);
  r.audit_verdict_id = j.value("audit_verdict_id", std::string());
  r.diagnostic = j.value("diagnostic", std::string());
}

inline void save_records_jsonl(const std::vector<OptimizationRecord>& records,
                               const std::string& path)
{
  std::ofstream out(path);
  if (!out) throw IngestError("cannot write record file: " + path);
  for (const auto& r : records) out << nlohmann::json(r).dump() << "\n";
}

inline std::vector<OptimizationRecord> load_records_jsonl(const std::string& path)
{
  std::ifstream in(path);
  if (!in) throw IngestError("cannot read record file: " + path);
  std::vector<OptimizationRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(nlohmann::json::parse(line).get<OptimizationRecord>());
  }
  return out;
}

struct OptimizeOptions {
  int retries = 2; // extra attempts after the first, on extraction/synthesis failure
  SynthesisConstraints constraints;
  GenerateOptions generate;
};

namespace detail {

// Pick the region whose module name matches the target; otherwise the first.
inline std::string pick_region(const std::vector<std::string>& regions,
                               const std::string& target_name)
{
  for (const auto& r : regions) {
    try {
      if (parse_module_info(r).name == target_name) return r;
    } catch (const NotAModule&) {
    }
  }
  return regions.front();
}

} // namespace detail

// Stage 2 for one target. Every cloud-bound prompt (including retry prompts)
// is audited first; a Flagged verdict terminates the record with AuditBlocked
// and no generate call. Failures map to verdicts; nothing escapes the record
// except precondition violations on the target itself.
inline OptimizationRecord optimize(const VerilogModule& target,
                                   const PrincipleSet& principles,
                                   ModelEndpoint& cloud, SynthesisBackend& backend,
                                   const LeakageGuard& guard, AuditLog& audit_log,
                                   const OptimizeOptions& options = {},
                                   GenerationLog* gen_log = nullptr)
{
  OptimizationRecord rec;
  rec.target_id = target.id.empty() ? content_id(target.source) : target.id;
  rec.target_source = target.source;
  rec.category = target.category.label;
  rec.attribute = principles.attribute;
  rec.principle_set_id = principle_set_id(principles);
  rec.cloud_model = cloud.model_name();

  // Preconditions: the target must validate and measure under this backend.
  if (!validation_ok(backend.validate(target)))
    throw MeasurementFailed("target does not validate: " + rec.target_id);
  rec.before = backend.measure(target, options.constraints);

  ModuleInfo target_info = parse_module_info(extract_module_region(target.source));

  std::string base_prompt =
      prompts::render_p2(target.source, principles.principles, rec.attribute);
  std::string diagnostic;

  int max_attempts = 1 + std::max(0, options.retries);
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    std::string prompt = base_prompt;
    if (!diagnostic.empty())
      prompt += "\n\nPrevious attempt failed: " + diagnostic +
                "\nProvide the complete corrected Verilog module.";

    rec.attempts = attempt + 1;
    rec.prompt_hash = hash_hex(prompt);
    rec.after.reset();
    rec.relative_delta.reset();
    rec.extracted_source.reset();

    AuditVerdict verdict = audit_log.record(guard.audit(prompt));
    if (!verdict.clear) {
      rec.verdict = OptVerdict::AuditBlocked;
      rec.audit_verdict_id = verdict.id;
      rec.diagnostic = "payload flagged by leakage audit";
      if (attempt == 0) rec.first_attempt_verdict = rec.verdict;
      return rec; // terminal: the same payload would flag again
    }

    GenerationRecord gen;
    try {
      gen = generate(cloud, prompt, AuditClearance{verdict.id, verdict.payload_hash},
                     options.generate);
    } catch (const EndpointUnreachable& e) {
      rec.verdict = OptVerdict::EndpointUnreachable;
      rec.audit_verdict_id = verdict.id;
      rec.diagnostic = e.what();
      if (attempt == 0) rec.first_attempt_verdict = rec.verdict;
      return rec;
    }
    if (gen_log) gen_log->record(gen);
    rec.response = gen.response;
    rec.audit_verdict_id = verdict.id;

    // Extract, rename, check the interface, validate, measure, compare.
    OptVerdict attempt_verdict;
    try {
      auto regions = extract_module_regions(gen.response);
      if (regions.empty()) throw NotAModule("no Verilog module found in response");
      std::string region = detail::pick_region(regions, target.name);
      ModuleInfo info = parse_module_info(region);
      if (info.name != target.name) {
        region = rename_module(region, target.name);
        info = parse_module_info(region);
      }
      if (!same_port_interface(target_info, info))
        throw NotAModule("port interface mismatch against target " + target.name);

      VerilogModule candidate;
      candidate.id = content_id(region);
      candidate.name = info.name;
      candidate.source = region;
      candidate.category = target.category;
      candidate.bit_width = target.bit_width;
      candidate.codebase = CodebaseKind::Target;
      rec.extracted_source = region;

      auto validation = backend.validate(candidate);
      if (!validation_ok(validation))
        throw MeasurementFailed(validation_detail(validation));

      PpaMetrics after = backend.measure(candidate, options.constraints);
      CompareResult cmp = compare(rec.before, after, rec.attribute);
      rec.after = after;
      rec.relative_delta = cmp.relative_delta;
      switch (cmp.outcome) {
        case CompareOutcome::Improved: attempt_verdict = OptVerdict::Improved; break;
        case CompareOutcome::Regressed: attempt_verdict = OptVerdict::Regressed; break;
        case CompareOutcome::Unchanged: attempt_verdict = OptVerdict::Unchanged; break;
        default: attempt_verdict = OptVerdict::SynthesisFailed; break;
      }
      rec.diagnostic.clear();
    } catch (const NotAModule& e) {
      attempt_verdict = OptVerdict::ExtractionFailed;
      rec.diagnostic = diagnostic = e.what();
    } catch (const MeasurementFailed& e) {
      attempt_verdict = OptVerdict::SynthesisFailed;
      rec.diagnostic = diagnostic = e.what();
    } catch (const BackendUnavailable& e) {
      attempt_verdict = OptVerdict::SynthesisFailed;
      rec.diagnostic = diagnostic = e.what();
    }

    rec.verdict = attempt_verdict;
    if (attempt == 0) rec.first_attempt_verdict = attempt_verdict;
    bool retryable = attempt_verdict == OptVerdict::ExtractionFailed ||
                     attempt_verdict == OptVerdict::SynthesisFailed;
    if (!retryable) return rec;
  }
  return rec;
}

// Drives many targets. Records come back in input order regardless of worker
// count; run with workers = 1 for bit-stable audit/verdict id assignment.
inline std::vector<OptimizationRecord> optimize_all(
    const std::vector<VerilogModule>& targets, const PrincipleSet& principles,
    ModelEndpoint& cloud, SynthesisBackend& backend, const LeakageGuard& guard,
    AuditLog& audit_log, const OptimizeOptions& options = {},
    GenerationLog* gen_log = nullptr, int workers = 1)
{
  std::vector<OptimizationRecord> records(targets.size());
  int limit = std::min({workers > 0 ? workers : 1, cloud.max_in_flight(),
                        backend.capabilities().max_parallelism,
                        static_cast<int>(targets.size() ? targets.size() : 1)});
  if (limit <= 1) {
    for (std::size_t i = 0; i < targets.size(); ++i)
      records[i] = optimize(targets[i], principles, cloud, backend, guard, audit_log,
                            options, gen_log);
    return records;
  }

  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(limit));
  for (int w = 0; w < limit; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= targets.size()) return;
        records[i] = optimize(targets[i], principles, cloud, backend, guard, audit_log,
                              options, gen_log);
      }
    });
  }
  for (auto& t : pool) t.join();
  return records;
}

} // namespace rtlopt
