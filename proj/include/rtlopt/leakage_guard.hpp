#pragma once

#include <chrono>
#include <cstdint>
#include <fstream>
#include <mutex>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "rtlopt/corpus.hpp"
#include "rtlopt/errors.hpp"
#include "rtlopt/hash.hpp"
#include "rtlopt/verilog.hpp"

namespace rtlopt {

enum class GuardAction { Block, Warn };

struct LeakagePolicy {
  std::size_t ngram_size = 8; // >= 4
  std::size_t min_hits_to_flag = 1;
  // Fraction of a payload's distinct identifiers allowed to be rare
  // proprietary identifiers before the payload is flagged.
  double identifier_overlap_threshold = 0.0;
  GuardAction action = GuardAction::Block;
};

enum class FindingKind { NgramMatch, RareIdentifier };

struct AuditFinding {
  FindingKind kind;
  std::string proprietary_module_id;
  std::string matched_span;
};

struct AuditVerdict {
  std::string id;
  std::string payload_hash;
  bool clear = true; // Clear <=> findings empty
  std::vector<AuditFinding> findings;
  std::int64_t timestamp_ms = 0;
};

inline void to_json(nlohmann::json& j, const AuditFinding& f)
{
  j = {{"kind", f.kind == FindingKind::NgramMatch ? "ngram_match" : "rare_identifier"},
       {"proprietary_module_id", f.proprietary_module_id},
       {"matched_span", f.matched_span}};
}

inline void to_json(nlohmann::json& j, const AuditVerdict& v)
{
  j = {{"verdict_id", v.id},
       {"timestamp", v.timestamp_ms},
       {"payload_hash", v.payload_hash},
       {"verdict", v.clear ? "clear" : "flagged"},
       {"findings", v.findings}};
}

inline void from_json(const nlohmann::json& j, AuditFinding& f)
{
  f.kind = j.at("kind").get<std::string>() == "ngram_match" ? FindingKind::NgramMatch
                                                            : FindingKind::RareIdentifier;
  j.at("proprietary_module_id").get_to(f.proprietary_module_id);
  j.at("matched_span").get_to(f.matched_span);
}

inline void from_json(const nlohmann::json& j, AuditVerdict& v)
{
  v.id = j.at("verdict_id").get<std::string>();
  v.timestamp_ms = j.value("timestamp", std::int64_t(0));
  j.at("payload_hash").get_to(v.payload_hash);
  v.clear = j.at("verdict").get<std::string>() == "clear";
  v.findings = j.value("findings", std::vector<AuditFinding>());
}

namespace detail {

inline std::uint64_t ngram_fingerprint(const std::vector<std::string>& toks,
                                       std::size_t start, std::size_t n)
{
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::size_t k = 0; k < n; ++k) {
    h = fnv1a64(toks[start + k], h);
    h = fnv1a64("\x1f", h);
  }
  return h;
}

inline std::string join_tokens(const std::vector<std::string>& toks, std::size_t start,
                               std::size_t n)
{
  std::string out;
  for (std::size_t k = 0; k < n; ++k) {
    if (k) out.push_back(' ');
    out += toks[start + k];
  }
  return out;
}

} // namespace detail

// Inspects cloud-bound payloads against the proprietary corpus. Two checks:
// hashed token n-gram fingerprints catch literal reuse, and identifiers that
// occur in exactly one proprietary module catch paraphrased reuse. The guard
// tokenizes payloads with literal bucketing off so constant rewriting cannot
// mask a copied expression.
class LeakageGuard {
public:
  LeakageGuard(const Codebase& proprietary, LeakagePolicy policy = {})
      : policy_(policy)
  {
    if (proprietary.modules.empty())
      throw InsufficientCorpus("leakage guard needs a non-empty proprietary codebase");
    if (policy_.ngram_size < 4) throw ConfigError("ngram_size must be >= 4");

    TokenizerOptions opts;
    opts.bucket_numeric_literals = false; // literal reuse must stay visible
    std::unordered_map<std::string, std::unordered_set<std::string>> ident_modules;
    for (const auto& m : proprietary.modules) {
      auto toks = tokenize_verilog(m.source, opts);
      std::vector<std::string> texts = token_texts(toks);
      if (texts.size() >= policy_.ngram_size) {
        for (std::size_t i = 0; i + policy_.ngram_size <= texts.size(); ++i) {
          std::uint64_t fp = detail::ngram_fingerprint(texts, i, policy_.ngram_size);
          fingerprints_.try_emplace(
              fp, Source{m.id, detail::join_tokens(texts, i, policy_.ngram_size)});
        }
      }
      for (const auto& t : toks)
        if (t.kind == TokenKind::Identifier) ident_modules[t.text].insert(m.id);
    }
    for (const auto& [ident, mods] : ident_modules)
      if (mods.size() == 1) rare_identifiers_.emplace(ident, *mods.begin());
  }

  const LeakagePolicy& policy() const { return policy_; }
  std::size_t fingerprint_count() const { return fingerprints_.size(); }
  std::size_t rare_identifier_count() const { return rare_identifiers_.size(); }
  bool is_rare_identifier(const std::string& ident) const
  {
    return rare_identifiers_.count(ident) > 0;
  }

  // Never throws; callers enforce the Block action from the verdict.
  AuditVerdict audit(const std::string& payload) const
  {
    AuditVerdict v;
    v.payload_hash = hash_hex(payload);

    TokenizerOptions opts;
    opts.bucket_numeric_literals = false;
    auto toks = tokenize_verilog(payload, opts);
    auto texts = token_texts(toks);

    std::vector<AuditFinding> ngram_hits;
    if (texts.size() >= policy_.ngram_size) {
      for (std::size_t i = 0; i + policy_.ngram_size <= texts.size(); ++i) {
        std::uint64_t fp = detail::ngram_fingerprint(texts, i, policy_.ngram_size);
        auto it = fingerprints_.find(fp);
        if (it != fingerprints_.end())
          ngram_hits.push_back(
              {FindingKind::NgramMatch, it->second.module_id, it->second.span});
      }
    }
    if (ngram_hits.size() >= policy_.min_hits_to_flag)
      v.findings.insert(v.findings.end(), ngram_hits.begin(), ngram_hits.end());

    std::set<std::string> payload_idents;
    for (const auto& t : toks)
      if (t.kind == TokenKind::Identifier) payload_idents.insert(t.text);
    std::vector<AuditFinding> rare_hits;
    for (const auto& ident : payload_idents) {
      auto it = rare_identifiers_.find(ident);
      if (it != rare_identifiers_.end())
        rare_hits.push_back({FindingKind::RareIdentifier, it->second, ident});
    }
    if (!payload_idents.empty()) {
      double fraction =
          static_cast<double>(rare_hits.size()) / static_cast<double>(payload_idents.size());
      if (fraction > policy_.identifier_overlap_threshold)
        v.findings.insert(v.findings.end(), rare_hits.begin(), rare_hits.end());
    }

    v.clear = v.findings.empty();
    return v;
  }

private:
  struct Source {
    std::string module_id;
    std::string span;
  };
  LeakagePolicy policy_;
  std::unordered_map<std::uint64_t, Source> fingerprints_;
  std::unordered_map<std::string, std::string> rare_identifiers_;
};

// Append-only JSONL audit trail. Verdict ids are sequence numbers so a fresh
// run over the same inputs writes the same bytes; in deterministic mode the
// timestamp field is pinned to zero.
class AuditLog {
public:
  explicit AuditLog(std::string path = {}, bool deterministic = false)
      : path_(std::move(path)), deterministic_(deterministic)
  {
    if (!path_.empty()) {
      std::ifstream in(path_);
      std::string line;
      while (std::getline(in, line))
        if (!line.empty()) ++sequence_;
    }
  }

  AuditVerdict record(AuditVerdict v)
  {
    std::lock_guard<std::mutex> lock(mutex_);
    v.id = "av-" + std::to_string(++sequence_);
    v.timestamp_ms = deterministic_ ? 0 : now_ms();
    entries_.push_back(v);
    if (!path_.empty()) {
      std::ofstream out(path_, std::ios::app);
      out << nlohmann::json(v).dump() << "\n";
    }
    return v;
  }

  const std::vector<AuditVerdict>& entries() const { return entries_; }

  static std::vector<AuditVerdict> load(const std::string& path)
  {
    std::vector<AuditVerdict> out;
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      out.push_back(nlohmann::json::parse(line).get<AuditVerdict>());
    }
    return out;
  }

private:
  static std::int64_t now_ms()
  {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
  }

  std::string path_;
  bool deterministic_;
  std::uint64_t sequence_ = 0;
  std::vector<AuditVerdict> entries_;
  std::mutex mutex_;
};

} // namespace rtlopt
