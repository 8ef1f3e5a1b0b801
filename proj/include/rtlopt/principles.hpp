#pragma once

#include <cctype>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rtlopt/corpus.hpp"
#include "rtlopt/errors.hpp"
#include "rtlopt/leakage_guard.hpp"
#include "rtlopt/model_client.hpp"
#include "rtlopt/pairing.hpp"
#include "rtlopt/prompts.hpp"
#include "rtlopt/rng.hpp"

namespace rtlopt {

// H = {h_1 ... h_M}: design principles distilled from K contrastive pairs by
// the local model. A set is usable only after the guard has certified that no
// principle carries proprietary text; audit_verdict_id names that certificate.
struct PrincipleSet {
  Attribute attribute = Attribute::Power;
  int k = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> principles;
  std::vector<std::string> source_pair_ids;
  std::string model;
  std::string audit_verdict_id;
  std::string raw_response; // kept in memory; not part of the wire schema
};

inline void to_json(nlohmann::json& j, const PrincipleSet& s)
{
  j = {{"attribute", to_string(s.attribute)},
       {"k", s.k},
       {"seed", s.seed},
       {"principles", s.principles},
       {"source_pair_ids", s.source_pair_ids},
       {"model", s.model},
       {"audit_verdict_id", s.audit_verdict_id}};
}

inline void from_json(const nlohmann::json& j, PrincipleSet& s)
{
  s.attribute = attribute_from_string(j.at("attribute").get<std::string>());
  j.at("k").get_to(s.k);
  j.at("seed").get_to(s.seed);
  j.at("principles").get_to(s.principles);
  j.at("source_pair_ids").get_to(s.source_pair_ids);
  j.at("model").get_to(s.model);
  s.audit_verdict_id = j.value("audit_verdict_id", std::string());
}

inline void save_principles(const PrincipleSet& s, const std::string& path)
{
  std::ofstream out(path);
  if (!out) throw IngestError("cannot write principle set: " + path);
  out << nlohmann::json(s).dump(2) << "\n";
}

inline PrincipleSet load_principles(const std::string& path)
{
  std::ifstream in(path);
  if (!in) throw IngestError("cannot read principle set: " + path);
  nlohmann::json j = nlohmann::json::parse(in);
  return j.get<PrincipleSet>();
}

// Uniform sample without replacement among the attribute's pairs, order given
// by the seeded shuffle.
inline std::vector<ContrastivePair> sample_pairs(const std::vector<ContrastivePair>& store,
                                                 Attribute attribute, std::size_t k,
                                                 std::uint64_t seed)
{
  std::vector<const ContrastivePair*> eligible;
  for (const auto& p : store)
    if (p.attribute == attribute) eligible.push_back(&p);
  if (k == 0 || k > eligible.size()) throw InsufficientPairs(eligible.size(), k);
  auto idx = sample_indices(eligible.size(), k, seed);
  std::vector<ContrastivePair> out;
  out.reserve(k);
  for (auto i : idx) out.push_back(*eligible[i]);
  return out;
}

inline prompts::ExampleBlock make_example_block(const ContrastivePair& pair,
                                                const Codebase& proprietary,
                                                const Codebase& draft)
{
  const VerilogModule* pm = proprietary.find(pair.proprietary_id);
  const VerilogModule* dm = draft.find(pair.draft_id);
  if (!pm || !dm)
    throw IngestError("pair references a module missing from the corpus: " +
                      pair_id(pair));
  prompts::ExampleBlock block;
  block.instruction = !pm->instruction.empty()   ? pm->instruction
                      : !dm->instruction.empty() ? dm->instruction
                                                 : "Implement module " + pm->name + ".";
  block.draft_source = dm->source;
  block.proprietary_source = pm->source;
  block.draft_metric = pair.metrics_d.metric(pair.attribute);
  block.proprietary_metric = pair.metrics_p.metric(pair.attribute);
  return block;
}

inline std::vector<prompts::ExampleBlock> make_example_blocks(
    const std::vector<ContrastivePair>& pairs, const Codebase& proprietary,
    const Codebase& draft)
{
  std::vector<prompts::ExampleBlock> blocks;
  blocks.reserve(pairs.size());
  for (const auto& p : pairs) blocks.push_back(make_example_block(p, proprietary, draft));
  return blocks;
}

namespace detail {

inline bool is_list_marker(const std::string& line, std::size_t& content_start)
{
  std::size_t i = 0;
  while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
  if (i >= line.size()) return false;
  char c = line[i];
  if (c == '-' || c == '*') {
    if (i + 1 < line.size() && line[i + 1] == c) return false; // rule or emphasis
    content_start = i + 1;
    return true;
  }
  if (std::isdigit(static_cast<unsigned char>(c))) {
    std::size_t j = i;
    while (j < line.size() && std::isdigit(static_cast<unsigned char>(line[j]))) ++j;
    if (j < line.size() && (line[j] == '.' || line[j] == ')') && j - i <= 3) {
      content_start = j + 1;
      return true;
    }
  }
  return false;
}

inline std::string trim(const std::string& s)
{
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

} // namespace detail

// Split a model response into principle items on numbered or bulleted list
// markers; preamble before the first marker is dropped. A response with no
// markers becomes a single principle.
inline std::vector<std::string> parse_principles(const std::string& response)
{
  std::vector<std::string> items;
  std::string current;
  bool in_item = false;

  std::size_t pos = 0;
  while (pos <= response.size()) {
    std::size_t eol = response.find('\n', pos);
    std::string line = response.substr(
        pos, eol == std::string::npos ? std::string::npos : eol - pos);
    std::size_t content_start = 0;
    if (detail::is_list_marker(line, content_start)) {
      if (in_item && !detail::trim(current).empty())
        items.push_back(detail::trim(current));
      current = line.substr(content_start);
      in_item = true;
    } else if (in_item) {
      std::string t = detail::trim(line);
      if (!t.empty()) current += " " + t;
    }
    if (eol == std::string::npos) break;
    pos = eol + 1;
  }
  if (in_item && !detail::trim(current).empty()) items.push_back(detail::trim(current));

  if (items.empty()) {
    std::string whole = detail::trim(response);
    if (!whole.empty()) items.push_back(whole);
  }
  return items;
}

// Actionability lint: a principle should be a usable instruction, not a
// fragment. Warns, never rejects.
inline std::vector<std::string> default_actionability_lexicon()
{
  return {"prefer", "avoid", "use", "reduce", "minimize", "instead", "rather"};
}

inline std::vector<std::string> lint_principles(
    const std::vector<std::string>& principles,
    const std::vector<std::string>& lexicon = default_actionability_lexicon())
{
  std::vector<std::string> warnings;
  for (std::size_t i = 0; i < principles.size(); ++i) {
    const std::string& p = principles[i];
    int words = 0;
    bool in_word = false;
    std::string lower;
    lower.reserve(p.size());
    for (char c : p) {
      bool w = !std::isspace(static_cast<unsigned char>(c));
      if (w && !in_word) ++words;
      in_word = w;
      lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    bool keyword = false;
    for (const auto& k : lexicon)
      if (lower.find(k) != std::string::npos) keyword = true;
    if (words < 4)
      warnings.push_back("principle " + std::to_string(i + 1) +
                         ": fewer than 4 words");
    else if (!keyword)
      warnings.push_back("principle " + std::to_string(i + 1) +
                         ": no imperative or comparative keyword");
  }
  return warnings;
}

struct ExtractionOptions {
  prompts::PromptStyle style = prompts::PromptStyle::Corrected;
  GenerateOptions generate;
};

// Stage 1. Renders P1 over the sampled pairs, queries the local model, parses
// the response, then certifies the parsed principles against the proprietary
// codebase. A flagged set is quarantined: the verdict is logged but the set is
// never returned.
inline PrincipleSet extract_principles(ModelEndpoint& local,
                                       const std::vector<ContrastivePair>& sampled,
                                       const Codebase& proprietary, const Codebase& draft,
                                       Attribute attribute, std::uint64_t seed,
                                       const LeakageGuard& guard, AuditLog& audit_log,
                                       const ExtractionOptions& options = {},
                                       GenerationLog* gen_log = nullptr)
{
  if (local.role() != EndpointRole::Local)
    throw ConfigError("principle extraction requires a Local endpoint");
  if (sampled.empty()) throw InsufficientPairs(0, 1);
  for (const auto& p : sampled)
    if (p.attribute != attribute)
      throw ConfigError("sampled pair attribute mismatch: " + pair_id(p));

  auto blocks = make_example_blocks(sampled, proprietary, draft);
  std::string prompt = prompts::render_p1(blocks, attribute, options.style);

  GenerationRecord rec = generate(local, prompt, options.generate);
  if (gen_log) gen_log->record(rec);
  if (detail::trim(rec.response).empty())
    throw EmptyResponse("local model returned an empty response");

  PrincipleSet set;
  set.attribute = attribute;
  set.k = static_cast<int>(sampled.size());
  set.seed = seed;
  set.principles = parse_principles(rec.response);
  for (const auto& p : sampled) set.source_pair_ids.push_back(pair_id(p));
  set.model = rec.model;
  set.raw_response = rec.response;

  AuditVerdict verdict =
      audit_log.record(guard.audit(prompts::join_principles(set.principles)));
  if (!verdict.clear) {
    std::vector<std::string> spans;
    for (const auto& f : verdict.findings) spans.push_back(f.matched_span);
    throw LeakageDetected("extracted principles contain proprietary content (verdict " +
                              verdict.id + ")",
                          std::move(spans));
  }
  set.audit_verdict_id = verdict.id;
  return set;
}

} // namespace rtlopt
