#pragma once

#include <algorithm>
#include <fstream>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "rtlopt/corpus.hpp"
#include "rtlopt/synthesis.hpp"
#include "rtlopt/tfidf.hpp"

namespace rtlopt {

// Oriented contrastive pair: the proprietary side is strictly better (lower
// raw metric) on the pair's attribute.
struct ContrastivePair {
  std::string proprietary_id;
  std::string draft_id;
  double similarity = 0.0;
  Attribute attribute = Attribute::Power;
  PpaMetrics metrics_p;
  PpaMetrics metrics_d;
  double margin = 0.0; // (metric_d - metric_p) / metric_d
};

inline void to_json(nlohmann::json& j, const ContrastivePair& p)
{
  j = {{"proprietary_id", p.proprietary_id},
       {"draft_id", p.draft_id},
       {"similarity", p.similarity},
       {"attribute", to_string(p.attribute)},
       {"metrics_p", p.metrics_p},
       {"metrics_d", p.metrics_d},
       {"margin", p.margin}};
}

inline void from_json(const nlohmann::json& j, ContrastivePair& p)
{
  j.at("proprietary_id").get_to(p.proprietary_id);
  j.at("draft_id").get_to(p.draft_id);
  j.at("similarity").get_to(p.similarity);
  p.attribute = attribute_from_string(j.at("attribute").get<std::string>());
  j.at("metrics_p").get_to(p.metrics_p);
  j.at("metrics_d").get_to(p.metrics_d);
  j.at("margin").get_to(p.margin);
}

struct PairingOptions {
  double threshold = 0.7;
  bool bucket_numeric_literals = true;
};

struct MiningLog {
  std::vector<std::string> excluded_modules; // "id: reason"
};

// Mining discipline, in full:
//   1. index the union of both codebases with tf-idf
//   2. candidates: same (category, bit_width), similarity >= threshold
//   3. measure every involved module once; backend failures exclude the
//      module and are logged
//   4. sort candidates by similarity descending; ties by draft id then
//      proprietary id ascending
//   5. greedy one-to-one matching down that order
//   6. each matched pair yields one ContrastivePair per attribute with a
//      strict proprietary win, power first
inline std::vector<ContrastivePair> mine_pairs(const Codebase& proprietary,
                                               const Codebase& draft,
                                               const PairingOptions& options,
                                               SynthesisBackend& backend,
                                               const SynthesisConstraints& constraints,
                                               MiningLog* log = nullptr)
{
  std::vector<const VerilogModule*> all;
  for (const auto& m : proprietary.modules) all.push_back(&m);
  for (const auto& m : draft.modules) all.push_back(&m);

  std::vector<std::vector<std::string>> docs;
  docs.reserve(all.size());
  for (const auto* m : all)
    docs.push_back(tokenize_for_similarity(m->source, options.bucket_numeric_literals));
  TfidfIndex index = TfidfIndex::build(docs);

  struct Candidate {
    std::size_t p_idx; // into `all`
    std::size_t d_idx;
    double similarity;
  };
  std::vector<Candidate> candidates;
  const std::size_t n_prop = proprietary.modules.size();
  for (std::size_t pi = 0; pi < n_prop; ++pi) {
    const auto& pm = proprietary.modules[pi];
    for (std::size_t di = 0; di < draft.modules.size(); ++di) {
      const auto& dm = draft.modules[di];
      if (!(pm.category == dm.category) || pm.bit_width != dm.bit_width) continue;
      double sim = index.similarity(pi, n_prop + di);
      if (sim >= options.threshold) candidates.push_back({pi, n_prop + di, sim});
    }
  }

  // measure involved modules once; exclusion happens before matching so the
  // greedy pass sees a stable candidate list
  std::unordered_map<std::string, PpaMetrics> metrics;
  std::unordered_set<std::string> failed;
  std::set<std::size_t> involved;
  for (const auto& c : candidates) {
    involved.insert(c.p_idx);
    involved.insert(c.d_idx);
  }
  for (std::size_t idx : involved) {
    const VerilogModule& m = *all[idx];
    if (metrics.count(m.id) || failed.count(m.id)) continue;
    try {
      auto v = backend.validate(m);
      if (!validation_ok(v)) {
        failed.insert(m.id);
        if (log) log->excluded_modules.push_back(m.id + ": " + validation_detail(v));
        continue;
      }
      metrics[m.id] = backend.measure(m, constraints);
    } catch (const std::exception& e) {
      failed.insert(m.id);
      if (log) log->excluded_modules.push_back(m.id + ": " + e.what());
    }
  }
  std::erase_if(candidates, [&](const Candidate& c) {
    return failed.count(all[c.p_idx]->id) || failed.count(all[c.d_idx]->id);
  });

  std::sort(candidates.begin(), candidates.end(), [&](const Candidate& a, const Candidate& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    if (all[a.d_idx]->id != all[b.d_idx]->id) return all[a.d_idx]->id < all[b.d_idx]->id;
    return all[a.p_idx]->id < all[b.p_idx]->id;
  });

  std::unordered_set<std::string> used;
  std::vector<ContrastivePair> pairs;
  for (const auto& c : candidates) {
    const VerilogModule& pm = *all[c.p_idx];
    const VerilogModule& dm = *all[c.d_idx];
    if (used.count(pm.id) || used.count(dm.id)) continue;
    used.insert(pm.id);
    used.insert(dm.id);
    const PpaMetrics& mp = metrics.at(pm.id);
    const PpaMetrics& md = metrics.at(dm.id);
    for (Attribute attr : {Attribute::Power, Attribute::CriticalPathDelay}) {
      double vp = mp.metric(attr);
      double vd = md.metric(attr);
      if (vp < vd) { // strict win required
        ContrastivePair pair;
        pair.proprietary_id = pm.id;
        pair.draft_id = dm.id;
        pair.similarity = c.similarity;
        pair.attribute = attr;
        pair.metrics_p = mp;
        pair.metrics_d = md;
        pair.margin = (vd - vp) / vd;
        pairs.push_back(std::move(pair));
      }
    }
  }
  return pairs;
}

inline std::string pair_id(const ContrastivePair& p)
{
  return p.proprietary_id + "+" + p.draft_id + "+" +
         (p.attribute == Attribute::Power ? "pwr" : "cpd");
}

inline void save_pairs_jsonl(const std::vector<ContrastivePair>& pairs,
                             const std::string& path)
{
  std::ofstream out(path);
  if (!out) throw IngestError("cannot write pair file: " + path);
  for (const auto& p : pairs) out << nlohmann::json(p).dump() << "\n";
}

inline std::vector<ContrastivePair> load_pairs_jsonl(const std::string& path)
{
  std::ifstream in(path);
  if (!in) throw IngestError("cannot read pair file: " + path);
  std::vector<ContrastivePair> pairs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    pairs.push_back(nlohmann::json::parse(line).get<ContrastivePair>());
  }
  return pairs;
}

// Validator pass over emitted pairs; reports the first violated invariant.
inline std::optional<std::string> validate_pair(const ContrastivePair& p,
                                                const Codebase& proprietary,
                                                const Codebase& draft, double threshold)
{
  if (p.similarity < threshold) return "similarity below threshold";
  const VerilogModule* pm = proprietary.find(p.proprietary_id);
  const VerilogModule* dm = draft.find(p.draft_id);
  if (!pm) return "unknown proprietary id";
  if (!dm) return "unknown draft id";
  if (!(pm->category == dm->category)) return "category mismatch";
  if (pm->bit_width != dm->bit_width) return "bit width mismatch";
  if (!(p.metrics_p.metric(p.attribute) < p.metrics_d.metric(p.attribute)))
    return "proprietary side does not win the attribute";
  return std::nullopt;
}

} // namespace rtlopt
