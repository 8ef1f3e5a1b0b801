#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rtlopt/errors.hpp"
#include "rtlopt/hash.hpp"
#include "rtlopt/verilog.hpp"

namespace rtlopt {

enum class CodebaseKind { Proprietary, Draft, Target };

inline std::string to_string(CodebaseKind k)
{
  switch (k) {
    case CodebaseKind::Proprietary: return "proprietary";
    case CodebaseKind::Draft: return "draft";
    case CodebaseKind::Target: return "target";
  }
  return "?";
}

struct DesignCategory {
  std::string label;   // "Multiplier", "Fifo", ..., "Other"
  std::string subtype; // non-empty iff label == "Other"

  bool operator==(const DesignCategory&) const = default;
};

struct VerilogModule {
  std::string id;   // content hash, whitespace-insensitive
  std::string name; // declared module name
  std::string source;
  std::string instruction; // optional functional description
  DesignCategory category;
  int bit_width = 0; // 0 = unknown
  CodebaseKind codebase = CodebaseKind::Target;
};

// --- classification -------------------------------------------------------

struct CategoryRule {
  std::string label;
  std::vector<std::string> keywords; // matched as word prefixes
};

// First matching rule wins; the order encodes disambiguation priority
// (e.g. "shift_add" is a shifter). The list is a config knob.
inline std::vector<CategoryRule> default_category_rules()
{
  return {
      {"Fifo", {"fifo"}},
      {"Multiplier", {"mult", "multiplier"}},
      {"Alu", {"alu"}},
      {"Counter", {"count", "cnt"}},
      {"ShiftRotate", {"shift", "rotat", "barrel"}},
      {"Adder", {"adder", "add", "sum", "subtract"}},
      {"Synchronization", {"sync", "synchron", "handshake", "metastab", "arbiter"}},
      {"Encoder", {"encod", "decod"}},
  };
}

namespace detail {

inline std::vector<std::string> haystack_words(const VerilogModule& m,
                                               const ModuleInfo& info)
{
  auto push_words = [](const std::string& text, std::vector<std::string>& out) {
    std::string cur;
    for (char c : text) {
      if (std::isalnum(static_cast<unsigned char>(c))) {
        cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
      } else if (!cur.empty()) {
        out.push_back(cur);
        cur.clear();
      }
    }
    if (!cur.empty()) out.push_back(cur);
  };
  std::vector<std::string> words;
  push_words(m.name, words);
  for (const auto& p : info.ports) push_words(p.name, words);
  push_words(m.instruction, words);
  return words;
}

} // namespace detail

// Deterministic keyword heuristic over module name, port names and the
// instruction text. Pure function of its inputs.
inline DesignCategory classify_category(const VerilogModule& m, const ModuleInfo& info,
                                        const std::vector<CategoryRule>& rules =
                                            default_category_rules())
{
  auto words = detail::haystack_words(m, info);
  for (const auto& rule : rules) {
    for (const auto& kw : rule.keywords) {
      for (const auto& w : words) {
        if (w.size() >= kw.size() && w.compare(0, kw.size(), kw) == 0)
          return {rule.label, ""};
      }
    }
  }
  return {"Other", m.name};
}

struct Classification {
  DesignCategory category;
  int bit_width = 0;
};

inline Classification classify(const VerilogModule& m,
                               const std::vector<CategoryRule>& rules =
                                   default_category_rules())
{
  ModuleInfo info = parse_module_info(m.source);
  return {classify_category(m, info, rules), infer_bit_width(info)};
}

// --- codebase & ingest -----------------------------------------------------

struct IngestRecord {
  std::string path;
  std::string id;     // empty on skip
  std::string status; // "ok" | "skipped"
  std::string reason; // empty on ok
};

struct Codebase {
  CodebaseKind kind = CodebaseKind::Target;
  std::string root;
  std::vector<VerilogModule> modules; // insertion order, ids unique
  std::vector<IngestRecord> manifest;

  const VerilogModule* find(const std::string& id) const
  {
    for (const auto& m : modules)
      if (m.id == id) return &m;
    return nullptr;
  }
};

namespace detail {

inline std::string read_file(const std::filesystem::path& p)
{
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IngestError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void add_module(Codebase& cb, std::string source, std::string instruction,
                       const std::string& display_path,
                       const std::vector<CategoryRule>& rules)
{
  std::string region;
  try {
    auto regions = extract_module_regions(source);
    if (regions.empty()) {
      cb.manifest.push_back({display_path, "", "skipped", "no module region"});
      return;
    }
    if (regions.size() > 1) {
      cb.manifest.push_back({display_path, "", "skipped", "multiple top-level modules"});
      return;
    }
    region = regions.front();
  } catch (const std::exception& e) {
    cb.manifest.push_back({display_path, "", "skipped", e.what()});
    return;
  }

  VerilogModule m;
  m.source = std::move(region);
  m.instruction = std::move(instruction);
  m.codebase = cb.kind;
  m.id = content_id(m.source);
  try {
    ModuleInfo info = parse_module_info(m.source);
    m.name = info.name;
    m.category = classify_category(m, info, rules);
    m.bit_width = infer_bit_width(info);
  } catch (const std::exception& e) {
    cb.manifest.push_back({display_path, "", "skipped", e.what()});
    return;
  }
  if (cb.find(m.id)) {
    cb.manifest.push_back({display_path, m.id, "skipped", "duplicate of " + m.id});
    return;
  }
  cb.manifest.push_back({display_path, m.id, "ok", ""});
  cb.modules.push_back(std::move(m));
}

} // namespace detail

// Ingests a directory tree of .v/.sv files, or a dataset JSONL file (one
// sample per line with implementation_a = proprietary side and
// implementation_b = draft side). Unparseable files become manifest skips.
inline Codebase ingest(const std::string& root, CodebaseKind kind,
                       const std::vector<CategoryRule>& rules = default_category_rules())
{
  namespace fs = std::filesystem;
  Codebase cb;
  cb.kind = kind;
  cb.root = root;

  fs::path rp(root);
  if (!fs::exists(rp)) throw IngestError("ingest root does not exist: " + root);

  if (fs::is_regular_file(rp) && (rp.extension() == ".v" || rp.extension() == ".sv")) {
    detail::add_module(cb, detail::read_file(rp), "", rp.filename().string(), rules);
    return cb;
  }

  if (fs::is_regular_file(rp) && rp.extension() == ".jsonl") {
    std::ifstream in(rp);
    if (!in) throw IngestError("cannot read " + root);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      std::string where = root + ":" + std::to_string(lineno);
      nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded()) {
        cb.manifest.push_back({where, "", "skipped", "invalid JSON"});
        continue;
      }
      const char* field = kind == CodebaseKind::Draft ? "implementation_b"
                                                      : "implementation_a";
      if (!j.contains(field) || !j[field].is_string()) {
        cb.manifest.push_back({where, "", "skipped", std::string("missing ") + field});
        continue;
      }
      std::string instruction = j.value("instruction", std::string());
      detail::add_module(cb, j[field].get<std::string>(), instruction, where, rules);
    }
    return cb;
  }

  if (!fs::is_directory(rp)) throw IngestError("ingest root is not a directory or .jsonl: " + root);

  // optional sidecar: maps file name -> instruction text
  std::map<std::string, std::string> instructions;
  fs::path side = rp / "instructions.json";
  if (fs::exists(side)) {
    nlohmann::json j = nlohmann::json::parse(detail::read_file(side), nullptr, false);
    if (!j.is_discarded() && j.is_object())
      for (auto& [k, v] : j.items())
        if (v.is_string()) instructions[k] = v.get<std::string>();
  }

  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(rp)) {
    if (!entry.is_regular_file()) continue;
    auto ext = entry.path().extension();
    if (ext == ".v" || ext == ".sv") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end()); // deterministic ingest order

  for (const auto& f : files) {
    std::string rel = fs::relative(f, rp).generic_string();
    std::string src;
    try {
      src = detail::read_file(f);
    } catch (const std::exception& e) {
      cb.manifest.push_back({rel, "", "skipped", e.what()});
      continue;
    }
    auto it = instructions.find(f.filename().string());
    detail::add_module(cb, std::move(src),
                       it == instructions.end() ? std::string() : it->second, rel, rules);
  }
  return cb;
}

// Writes one .v file per module plus an instructions sidecar. ingest(emit(cb))
// reproduces the same module ids.
inline void emit_codebase(const Codebase& cb, const std::string& dir)
{
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  nlohmann::json instructions = nlohmann::json::object();
  for (const auto& m : cb.modules) {
    std::string fname = m.name + "_" + m.id.substr(0, 8) + ".v";
    std::ofstream out(fs::path(dir) / fname, std::ios::binary);
    out << m.source;
    if (!m.instruction.empty()) instructions[fname] = m.instruction;
  }
  if (!instructions.empty()) {
    std::ofstream out(fs::path(dir) / "instructions.json");
    out << instructions.dump(2) << "\n";
  }
}

inline std::string manifest_text(const Codebase& cb)
{
  std::ostringstream ss;
  for (const auto& r : cb.manifest) {
    ss << r.path << "\t" << (r.id.empty() ? "-" : r.id) << "\t" << r.status;
    if (!r.reason.empty()) ss << "\t" << r.reason;
    ss << "\n";
  }
  return ss.str();
}

} // namespace rtlopt
