#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rtlopt/corpus.hpp"
#include "rtlopt/errors.hpp"
#include "rtlopt/optimizer.hpp"
#include "rtlopt/pairing.hpp"
#include "rtlopt/principles.hpp"

namespace rtlopt {

struct CategoryStats {
  int n = 0;
  int n_success = 0;
  double success_rate_pct = 0.0;
};

struct EvaluationSummary {
  Attribute attribute = Attribute::Power;
  int n_total = 0;
  int n_success = 0;
  double success_rate_pct = 0.0;
  double mean_ri_pct = 0.0;   // over successes only
  double median_ri_pct = 0.0; // over successes only
  double first_attempt_success_rate_pct = 0.0;
  std::map<std::string, CategoryStats> per_category;
  std::string config_fingerprint;
};

inline void to_json(nlohmann::json& j, const EvaluationSummary& s)
{
  nlohmann::json cats = nlohmann::json::object();
  for (const auto& [name, st] : s.per_category)
    cats[name] = {{"n", st.n},
                  {"n_success", st.n_success},
                  {"success_rate_pct", st.success_rate_pct}};
  j = {{"attribute", to_string(s.attribute)},
       {"n_total", s.n_total},
       {"n_success", s.n_success},
       {"success_rate_pct", s.success_rate_pct},
       {"mean_ri_pct", s.mean_ri_pct},
       {"median_ri_pct", s.median_ri_pct},
       {"first_attempt_success_rate_pct", s.first_attempt_success_rate_pct},
       {"per_category", cats},
       {"config_fingerprint", s.config_fingerprint}};
}

inline void from_json(const nlohmann::json& j, EvaluationSummary& s)
{
  s.attribute = attribute_from_string(j.at("attribute").get<std::string>());
  j.at("n_total").get_to(s.n_total);
  j.at("n_success").get_to(s.n_success);
  j.at("success_rate_pct").get_to(s.success_rate_pct);
  s.mean_ri_pct = j.value("mean_ri_pct", 0.0);
  s.median_ri_pct = j.value("median_ri_pct", 0.0);
  s.first_attempt_success_rate_pct = j.value("first_attempt_success_rate_pct", 0.0);
  s.per_category.clear();
  if (j.contains("per_category"))
    for (const auto& [name, st] : j["per_category"].items())
      s.per_category[name] = {st.value("n", 0), st.value("n_success", 0),
                              st.value("success_rate_pct", 0.0)};
  s.config_fingerprint = j.value("config_fingerprint", std::string());
}

namespace detail {

inline double median_of(std::vector<double> v)
{
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  std::size_t mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : (v[mid - 1] + v[mid]) / 2.0;
}

} // namespace detail

// SR counts Improved as success; every other verdict stays in the
// denominator. Relative improvement statistics are over successes only.
inline EvaluationSummary summarize(const std::vector<OptimizationRecord>& records,
                                   Attribute attribute,
                                   const std::string& config_fingerprint = {})
{
  if (records.empty()) throw ConfigError("summarize requires at least one record");
  EvaluationSummary s;
  s.attribute = attribute;
  s.config_fingerprint = config_fingerprint;

  std::vector<double> improvements;
  int first_attempt_successes = 0;
  for (const auto& r : records) {
    if (r.attribute != attribute)
      throw ConfigError("record attribute mismatch for target " + r.target_id);
    ++s.n_total;
    std::string cat = r.category.empty() ? "Other" : r.category;
    auto& cs = s.per_category[cat];
    ++cs.n;
    if (is_success(r.verdict)) {
      ++s.n_success;
      ++cs.n_success;
      improvements.push_back(100.0 * r.relative_delta.value_or(0.0));
    }
    if (is_success(r.first_attempt_verdict)) ++first_attempt_successes;
  }
  s.success_rate_pct = 100.0 * s.n_success / s.n_total;
  s.first_attempt_success_rate_pct = 100.0 * first_attempt_successes / s.n_total;
  if (!improvements.empty()) {
    double sum = 0.0;
    for (double v : improvements) sum += v;
    s.mean_ri_pct = sum / static_cast<double>(improvements.size());
    s.median_ri_pct = detail::median_of(improvements);
  }
  for (auto& [name, cs] : s.per_category)
    cs.success_rate_pct = cs.n ? 100.0 * cs.n_success / cs.n : 0.0;
  return s;
}

// --- K sweep -----------------------------------------------------------------

struct SweepCell {
  int k = 0;
  std::uint64_t seed = 0;
  EvaluationSummary summary;
};

inline void to_json(nlohmann::json& j, const SweepCell& c)
{
  j = {{"k", c.k}, {"seed", c.seed}, {"summary", c.summary}};
}

inline void from_json(const nlohmann::json& j, SweepCell& c)
{
  j.at("k").get_to(c.k);
  j.at("seed").get_to(c.seed);
  j.at("summary").get_to(c.summary);
}

struct SweepOptions {
  std::vector<int> ks = {1, 2, 4, 8, 16, 32};
  std::vector<std::uint64_t> seeds = {1};
  ExtractionOptions extraction;
  OptimizeOptions optimize;
  int workers = 1;
  std::string config_fingerprint;
};

// One full extract -> optimize -> summarize pass per (K, seed), all cells over
// the identical target set. InsufficientPairs propagates if the store cannot
// cover max K.
inline std::vector<SweepCell> sweep_k(const std::vector<ContrastivePair>& pairs,
                                      const Codebase& proprietary, const Codebase& draft,
                                      const std::vector<VerilogModule>& targets,
                                      Attribute attribute, ModelEndpoint& local,
                                      ModelEndpoint& cloud, SynthesisBackend& backend,
                                      const LeakageGuard& guard, AuditLog& audit_log,
                                      const SweepOptions& options = {},
                                      GenerationLog* gen_log = nullptr)
{
  if (targets.empty()) throw ConfigError("sweep requires at least one target");
  std::vector<SweepCell> cells;
  for (int k : options.ks) {
    for (auto seed : options.seeds) {
      auto sampled = sample_pairs(pairs, attribute, static_cast<std::size_t>(k), seed);
      PrincipleSet set =
          extract_principles(local, sampled, proprietary, draft, attribute, seed, guard,
                             audit_log, options.extraction, gen_log);
      auto records = optimize_all(targets, set, cloud, backend, guard, audit_log,
                                  options.optimize, gen_log, options.workers);
      SweepCell cell;
      cell.k = k;
      cell.seed = seed;
      cell.summary = summarize(records, attribute, options.config_fingerprint);
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

inline std::string sweep_csv(const std::vector<SweepCell>& cells)
{
  std::string out = "attribute,K,seed,n_total,n_success,sr_pct,mean_ri_pct,median_ri_pct\n";
  char buf[256];
  for (const auto& c : cells) {
    std::snprintf(buf, sizeof(buf), "%s,%d,%llu,%d,%d,%.4f,%.4f,%.4f\n",
                  to_string(c.summary.attribute).c_str(), c.k,
                  static_cast<unsigned long long>(c.seed), c.summary.n_total,
                  c.summary.n_success, c.summary.success_rate_pct, c.summary.mean_ri_pct,
                  c.summary.median_ri_pct);
    out += buf;
  }
  return out;
}

// Plot-ready aggregation: per-K mean and range of SR across seeds.
inline nlohmann::json sweep_plot_json(const std::vector<SweepCell>& cells,
                                      Attribute attribute)
{
  std::map<int, std::vector<const SweepCell*>> by_k;
  for (const auto& c : cells) by_k[c.k].push_back(&c);
  nlohmann::json series = nlohmann::json::array();
  for (const auto& [k, group] : by_k) {
    double mean_sr = 0.0, min_sr = 1e300, max_sr = -1e300;
    double mean_ri = 0.0;
    nlohmann::json per_seed = nlohmann::json::array();
    for (const auto* c : group) {
      double sr = c->summary.success_rate_pct;
      mean_sr += sr;
      mean_ri += c->summary.mean_ri_pct;
      min_sr = std::min(min_sr, sr);
      max_sr = std::max(max_sr, sr);
      per_seed.push_back({{"seed", c->seed},
                          {"sr_pct", sr},
                          {"mean_ri_pct", c->summary.mean_ri_pct}});
    }
    double n = static_cast<double>(group.size());
    series.push_back({{"k", k},
                      {"mean_sr_pct", mean_sr / n},
                      {"min_sr_pct", min_sr},
                      {"max_sr_pct", max_sr},
                      {"mean_ri_pct", mean_ri / n},
                      {"cells", per_seed}});
  }
  return {{"attribute", to_string(attribute)}, {"series", series}};
}

// --- dataset emission ----------------------------------------------------------

// Pair-store export format: one sample per line, implementation_a is the
// proprietary (winning) side.
struct DatasetSample {
  std::string instruction;
  std::string implementation_a;
  std::string implementation_b;
  PpaMetrics metrics_a;
  PpaMetrics metrics_b;
  std::string category;
  Attribute attribute = Attribute::Power;
};

inline void to_json(nlohmann::json& j, const DatasetSample& s)
{
  j = {{"instruction", s.instruction},
       {"implementation_a", s.implementation_a},
       {"implementation_b", s.implementation_b},
       {"metrics_a", s.metrics_a},
       {"metrics_b", s.metrics_b},
       {"category", s.category},
       {"attribute", to_string(s.attribute)}};
}

inline void from_json(const nlohmann::json& j, DatasetSample& s)
{
  j.at("instruction").get_to(s.instruction);
  j.at("implementation_a").get_to(s.implementation_a);
  j.at("implementation_b").get_to(s.implementation_b);
  j.at("metrics_a").get_to(s.metrics_a);
  j.at("metrics_b").get_to(s.metrics_b);
  j.at("category").get_to(s.category);
  s.attribute = attribute_from_string(j.at("attribute").get<std::string>());
}

inline std::string category_key(const DesignCategory& c)
{
  return c.subtype.empty() ? c.label : c.label + ":" + c.subtype;
}

// Emits validated pairs sorted by (category, proprietary_id, draft_id,
// attribute); re-emitting the same inputs writes the same bytes.
// Invariant-violating pairs are skipped and logged.
inline std::vector<DatasetSample> build_dataset(const std::vector<ContrastivePair>& pairs,
                                                const Codebase& proprietary,
                                                const Codebase& draft, double threshold,
                                                std::vector<std::string>* skip_log = nullptr)
{
  struct Row {
    std::string sort_key;
    DatasetSample sample;
  };
  std::vector<Row> rows;
  for (const auto& p : pairs) {
    if (auto why = validate_pair(p, proprietary, draft, threshold)) {
      if (skip_log) skip_log->push_back(pair_id(p) + ": " + *why);
      continue;
    }
    const VerilogModule* pm = proprietary.find(p.proprietary_id);
    const VerilogModule* dm = draft.find(p.draft_id);
    DatasetSample s;
    s.instruction = !pm->instruction.empty()   ? pm->instruction
                    : !dm->instruction.empty() ? dm->instruction
                                               : "Implement module " + pm->name + ".";
    s.implementation_a = pm->source;
    s.implementation_b = dm->source;
    s.metrics_a = p.metrics_p;
    s.metrics_b = p.metrics_d;
    s.category = category_key(pm->category);
    s.attribute = p.attribute;
    rows.push_back({s.category + "\x1f" + p.proprietary_id + "\x1f" + p.draft_id +
                        "\x1f" + to_string(p.attribute),
                    std::move(s)});
  }
  std::sort(rows.begin(), rows.end(),
            [](const Row& a, const Row& b) { return a.sort_key < b.sort_key; });
  std::vector<DatasetSample> out;
  out.reserve(rows.size());
  for (auto& r : rows) out.push_back(std::move(r.sample));
  return out;
}

inline void emit_dataset(const std::vector<DatasetSample>& samples,
                         const std::string& path)
{
  std::ofstream out(path);
  if (!out) throw IngestError("cannot write dataset: " + path);
  for (const auto& s : samples) out << nlohmann::json(s).dump() << "\n";
}

// --- report --------------------------------------------------------------------

namespace detail {

inline std::string pct(double v)
{
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

} // namespace detail

// Markdown report: headline table, per-category breakdown, K-sweep series,
// and a case-study appendix with the largest individual improvements.
inline std::string render_report(const std::vector<EvaluationSummary>& summaries,
                                 const std::vector<SweepCell>& sweep,
                                 const std::vector<OptimizationRecord>& records,
                                 int case_studies = 3)
{
  std::string md = "# Optimization Report\n\n## Headline Results\n\n";
  md += "| Attribute | N | Success Rate % | Mean RI % | Median RI % | First-attempt SR % |\n";
  md += "|---|---|---|---|---|---|\n";
  for (const auto& s : summaries) {
    md += "| " + to_string(s.attribute) + " | " + std::to_string(s.n_total) + " | " +
          detail::pct(s.success_rate_pct) + " | " + detail::pct(s.mean_ri_pct) + " | " +
          detail::pct(s.median_ri_pct) + " | " +
          detail::pct(s.first_attempt_success_rate_pct) + " |\n";
  }

  md += "\n## Per-Category Success Rate\n\n";
  md += "| Attribute | Category | N | Success Rate % |\n|---|---|---|---|\n";
  for (const auto& s : summaries) {
    std::vector<std::pair<std::string, CategoryStats>> cats(s.per_category.begin(),
                                                            s.per_category.end());
    std::sort(cats.begin(), cats.end(), [](const auto& a, const auto& b) {
      if (a.second.success_rate_pct != b.second.success_rate_pct)
        return a.second.success_rate_pct > b.second.success_rate_pct;
      return a.first < b.first;
    });
    for (const auto& [cat, cs] : cats)
      md += "| " + to_string(s.attribute) + " | " + cat + " | " + std::to_string(cs.n) +
            " | " + detail::pct(cs.success_rate_pct) + " |\n";
  }

  std::map<std::string, int> failure_modes;
  for (const auto& r : records)
    if (!is_success(r.verdict)) ++failure_modes[to_string(r.verdict)];
  if (!failure_modes.empty()) {
    md += "\n## Failure Modes\n\n| Verdict | Count |\n|---|---|\n";
    for (const auto& [verdict, count] : failure_modes)
      md += "| " + verdict + " | " + std::to_string(count) + " |\n";
  }

  if (!sweep.empty()) {
    md += "\n## K Sweep\n\n";
    md += "| K | Seed | N | Success Rate % | Mean RI % |\n|---|---|---|---|---|\n";
    for (const auto& c : sweep)
      md += "| " + std::to_string(c.k) + " | " + std::to_string(c.seed) + " | " +
            std::to_string(c.summary.n_total) + " | " +
            detail::pct(c.summary.success_rate_pct) + " | " +
            detail::pct(c.summary.mean_ri_pct) + " |\n";

    std::map<int, std::pair<double, std::pair<double, double>>> agg; // k -> (sum, (min,max))
    std::map<int, int> counts;
    for (const auto& c : sweep) {
      auto& a = agg.emplace(c.k, std::make_pair(0.0, std::make_pair(1e300, -1e300)))
                    .first->second;
      a.first += c.summary.success_rate_pct;
      a.second.first = std::min(a.second.first, c.summary.success_rate_pct);
      a.second.second = std::max(a.second.second, c.summary.success_rate_pct);
      counts[c.k]++;
    }
    if (!agg.empty() && counts.begin()->second > 1) {
      md += "\n| K | Mean SR % | Min SR % | Max SR % |\n|---|---|---|---|\n";
      for (const auto& [k, a] : agg)
        md += "| " + std::to_string(k) + " | " + detail::pct(a.first / counts[k]) +
              " | " + detail::pct(a.second.first) + " | " + detail::pct(a.second.second) +
              " |\n";
    }
  }

  std::vector<const OptimizationRecord*> improved;
  for (const auto& r : records)
    if (is_success(r.verdict) && r.relative_delta && r.extracted_source)
      improved.push_back(&r);
  std::sort(improved.begin(), improved.end(),
            [](const OptimizationRecord* a, const OptimizationRecord* b) {
              if (*a->relative_delta != *b->relative_delta)
                return *a->relative_delta > *b->relative_delta;
              return a->target_id < b->target_id;
            });
  if (!improved.empty()) {
    md += "\n## Case Studies\n";
    int shown = 0;
    for (const auto* r : improved) {
      if (shown++ >= case_studies) break;
      md += "\n### Target " + r->target_id + " (" + to_string(r->attribute) + ")\n\n";
      md += "Relative improvement: " + detail::pct(100.0 * *r->relative_delta) +
            "% (" + detail::pct(r->before.metric(r->attribute)) + " -> " +
            detail::pct(r->after->metric(r->attribute)) + ")\n\n";
      if (!r->target_source.empty())
        md += "Before:\n\n```verilog\n" + r->target_source + "\n```\n\n";
      md += "After:\n\n```verilog\n" + *r->extracted_source + "\n```\n";
    }
  }
  return md;
}

} // namespace rtlopt
