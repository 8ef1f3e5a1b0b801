// rtlopt: pipeline driver. Curates contrastive Verilog pairs, extracts design
// principles with a local model, and applies them to new modules through a
// cloud model behind a leakage audit. Every subcommand reads one config file
// (flags override) and writes artifacts under --out, stamped with the config
// fingerprint via per-subcommand manifests.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rtlopt/model_client_http.hpp"
#include "rtlopt/rtlopt.hpp"

namespace fs = std::filesystem;
using namespace rtlopt;

namespace {

struct CliState {
  RunConfig cfg;
  std::string fingerprint;
  bool scripted = false;
  bool dry_run = false;

  fs::path out() const { return fs::path(cfg.out); }

  fs::path prepare_out() const
  {
    fs::create_directories(cfg.out);
    return out();
  }
};

void write_manifest(const CliState& st, const std::string& subcommand,
                    std::vector<std::string> artifacts)
{
  fs::create_directories(st.out() / "manifests");
  std::sort(artifacts.begin(), artifacts.end());
  nlohmann::json j = {{"config_fingerprint", st.fingerprint},
                      {"subcommand", subcommand},
                      {"artifacts", artifacts}};
  std::ofstream out(st.out() / "manifests" / (subcommand + ".json"));
  out << j.dump(2) << "\n";
}

// Built-in deterministic endpoints for --scripted runs without a script file.
// The local endpoint answers with generic principles; the cloud endpoint
// echoes back the module it was asked to optimize.
std::string demo_local_response(const std::string&)
{
  return "1. Prefer registered outputs and shared arithmetic operators to reduce "
         "switching activity.\n"
         "2. Avoid deeply nested combinational logic; use balanced expression trees "
         "instead.\n"
         "3. Use enable-gated always blocks rather than free-running ones to minimize "
         "redundant toggling.\n"
         "4. Reduce intermediate signals that fan out widely so logic can be merged.\n";
}

std::string demo_cloud_response(const std::string& prompt)
{
  const std::string fence = "```verilog\n";
  auto b = prompt.find(fence);
  if (b == std::string::npos) return "No Verilog code was provided.";
  b += fence.size();
  auto e = prompt.find("\n```", b);
  std::string body = e == std::string::npos ? prompt.substr(b) : prompt.substr(b, e - b);
  return "Optimized version:\n\n```verilog\n" + body + "\n```\n";
}

std::unique_ptr<ModelEndpoint> make_endpoint(EndpointRole role, const EndpointConfig& ec,
                                             const CliState& st)
{
  if (!ec.script.empty()) return ScriptedEndpoint::from_file(role, ec.script);
  if (st.scripted) {
    std::string name = !ec.model.empty() ? ec.model
                       : role == EndpointRole::Local ? "scripted-local"
                                                     : "scripted-cloud";
    auto ep = std::make_unique<ScriptedEndpoint>(role, name);
    ep->set_handler(role == EndpointRole::Local ? demo_local_response
                                                : demo_cloud_response);
    return ep;
  }
  if (ec.url.empty())
    throw ConfigError(std::string(role == EndpointRole::Local ? "local" : "cloud") +
                      " endpoint has no url (or pass --scripted)");
  HttpEndpointConfig hc;
  hc.url = ec.url;
  hc.model = ec.model;
  hc.api_key_env = ec.api_key_env;
  hc.params.temperature = ec.temperature;
  hc.allow_remote_local = st.cfg.allow_remote_local;
  return std::make_unique<HttpEndpoint>(role, hc);
}

std::unique_ptr<SynthesisBackend> make_backend(const RunConfig& cfg)
{
  if (cfg.backend == "mock") return std::make_unique<MockBackend>();
  if (cfg.backend == "external") {
    ExternalBackendConfig ec;
    ec.command = cfg.extern_command;
    if (!cfg.extern_area_regex.empty()) ec.area_regex = cfg.extern_area_regex;
    if (!cfg.extern_power_regex.empty()) ec.power_regex = cfg.extern_power_regex;
    if (!cfg.extern_delay_regex.empty()) ec.delay_regex = cfg.extern_delay_regex;
    ec.area_scale = cfg.extern_area_scale;
    ec.power_scale = cfg.extern_power_scale;
    ec.delay_scale = cfg.extern_delay_scale;
    ec.validate_timeout_s = cfg.validate_timeout_s;
    ec.measure_timeout_s = cfg.measure_timeout_s;
    return std::make_unique<ExternalBackend>(ec);
  }
  throw ConfigError("unknown backend: " + cfg.backend + " (expected mock or external)");
}

bool deterministic_run(const CliState& st)
{
  return st.scripted || (!st.cfg.local.script.empty() && !st.cfg.cloud.script.empty());
}

nlohmann::json manifest_json(const Codebase& cb)
{
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : cb.manifest)
    arr.push_back({{"path", r.path},
                   {"id", r.id},
                   {"status", r.status},
                   {"reason", r.reason}});
  return arr;
}

void report_ingest(const Codebase& cb, const std::string& label)
{
  std::size_t skipped = 0;
  for (const auto& r : cb.manifest)
    if (r.status != "ok") ++skipped;
  std::cout << label << ": " << cb.modules.size() << " modules";
  if (skipped) std::cout << " (" << skipped << " skipped)";
  std::cout << "\n";
}

// --- subcommands ---------------------------------------------------------

int cmd_ingest(CliState& st)
{
  if (st.cfg.proprietary_root.empty() && st.cfg.draft_root.empty() &&
      st.cfg.targets.empty())
    throw ConfigError("ingest needs at least one of --proprietary/--draft/--targets");
  auto out = st.prepare_out();
  fs::create_directories(out / "ingest");
  std::vector<std::string> artifacts;

  auto one = [&](const std::string& root, CodebaseKind kind, const char* label) {
    if (root.empty()) return;
    Codebase cb = ingest(root, kind);
    std::string file = std::string("ingest/") + label + ".manifest.json";
    std::ofstream of(out / file);
    of << manifest_json(cb).dump(2) << "\n";
    artifacts.push_back(file);
    report_ingest(cb, label);
  };
  one(st.cfg.proprietary_root, CodebaseKind::Proprietary, "proprietary");
  one(st.cfg.draft_root, CodebaseKind::Draft, "draft");
  one(st.cfg.targets, CodebaseKind::Target, "targets");

  write_manifest(st, "ingest", std::move(artifacts));
  return 0;
}

int cmd_classify(CliState& st, const std::string& in_root)
{
  std::string root = !in_root.empty() ? in_root : st.cfg.targets;
  if (root.empty()) throw ConfigError("classify needs --in (or paths.targets)");
  Codebase cb = ingest(root, CodebaseKind::Target);
  auto out = st.prepare_out();

  std::string csv = "id,name,category,subtype,bit_width\n";
  for (const auto& m : cb.modules) {
    csv += m.id + "," + m.name + "," + m.category.label + "," + m.category.subtype +
           "," + std::to_string(m.bit_width) + "\n";
    std::cout << m.name << " -> " << m.category.label
              << (m.category.subtype.empty() ? "" : ":" + m.category.subtype)
              << " width=" << m.bit_width << "\n";
  }
  std::ofstream(out / "classify.csv") << csv;
  write_manifest(st, "classify", {"classify.csv"});
  return 0;
}

int cmd_mine_pairs(CliState& st)
{
  if (st.cfg.proprietary_root.empty() || st.cfg.draft_root.empty())
    throw ConfigError("mine-pairs needs --proprietary and --draft");
  Codebase prop = ingest(st.cfg.proprietary_root, CodebaseKind::Proprietary);
  Codebase draft = ingest(st.cfg.draft_root, CodebaseKind::Draft);
  report_ingest(prop, "proprietary");
  report_ingest(draft, "draft");

  auto backend = make_backend(st.cfg);
  PairingOptions options;
  options.threshold = st.cfg.threshold;
  options.bucket_numeric_literals = st.cfg.bucket_numeric_literals;
  MiningLog log;
  auto pairs = mine_pairs(prop, draft, options, *backend, st.cfg.constraints, &log);

  auto out = st.prepare_out();
  save_pairs_jsonl(pairs, (out / "pairs.jsonl").string());
  {
    std::ofstream lf(out / "mining_log.txt");
    for (const auto& line : log.excluded_modules) lf << line << "\n";
  }
  std::cout << "pairs: " << pairs.size() << " (threshold " << st.cfg.threshold << ")\n";
  if (pairs.empty()) std::cout << "warning: no pairs mined\n";
  write_manifest(st, "mine-pairs", {"pairs.jsonl", "mining_log.txt"});
  return 0;
}

int cmd_emit_dataset(CliState& st, const std::string& pairs_file)
{
  if (st.cfg.proprietary_root.empty() || st.cfg.draft_root.empty())
    throw ConfigError("emit-dataset needs --proprietary and --draft");
  std::string pf = !pairs_file.empty() ? pairs_file
                                       : (st.out() / "pairs.jsonl").string();
  auto pairs = load_pairs_jsonl(pf);
  Codebase prop = ingest(st.cfg.proprietary_root, CodebaseKind::Proprietary);
  Codebase draft = ingest(st.cfg.draft_root, CodebaseKind::Draft);

  std::vector<std::string> skips;
  auto samples = build_dataset(pairs, prop, draft, st.cfg.threshold, &skips);
  auto out = st.prepare_out();
  emit_dataset(samples, (out / "dataset.jsonl").string());
  {
    std::ofstream sf(out / "dataset_skips.txt");
    for (const auto& s : skips) sf << s << "\n";
  }
  std::cout << "dataset: " << samples.size() << " samples, " << skips.size()
            << " skipped\n";
  if (samples.empty()) std::cout << "warning: dataset is empty\n";
  write_manifest(st, "emit-dataset", {"dataset.jsonl", "dataset_skips.txt"});
  return 0;
}

int cmd_extract_principles(CliState& st, const std::string& pairs_file)
{
  if (st.cfg.proprietary_root.empty() || st.cfg.draft_root.empty())
    throw ConfigError("extract-principles needs --proprietary and --draft");
  std::string pf = !pairs_file.empty() ? pairs_file
                                       : (st.out() / "pairs.jsonl").string();
  auto pairs = load_pairs_jsonl(pf);
  Codebase prop = ingest(st.cfg.proprietary_root, CodebaseKind::Proprietary);
  Codebase draft = ingest(st.cfg.draft_root, CodebaseKind::Draft);

  LeakageGuard guard(prop, st.cfg.guard);
  auto out = st.prepare_out();
  AuditLog audit_log((out / "audit_log.jsonl").string(), deterministic_run(st));
  GenerationLog gen_log((out / "generation_log.jsonl").string());
  auto local = make_endpoint(EndpointRole::Local, st.cfg.local, st);

  auto sampled = sample_pairs(pairs, st.cfg.attribute,
                              static_cast<std::size_t>(st.cfg.k), st.cfg.seed);
  ExtractionOptions options;
  options.style = st.cfg.prompt_style();
  PrincipleSet set;
  try {
    set = extract_principles(*local, sampled, prop, draft, st.cfg.attribute,
                             st.cfg.seed, guard, audit_log, options, &gen_log);
  } catch (const LeakageDetected& e) {
    std::cerr << "error: " << e.what() << "\n";
    for (const auto& span : e.offending_spans)
      std::cerr << "  offending span: " << span << "\n";
    return 1;
  }

  save_principles(set, (out / "principles.json").string());
  std::cout << "principles: " << set.principles.size() << " (K=" << set.k
            << ", seed=" << set.seed << ", verdict " << set.audit_verdict_id << ")\n";
  for (const auto& w : lint_principles(set.principles))
    std::cout << "warning: " << w << "\n";
  write_manifest(st, "extract-principles",
                 {"principles.json", "audit_log.jsonl", "generation_log.jsonl"});
  return 0;
}

int cmd_audit(CliState& st, const std::string& payload_file, const std::string& replay_file)
{
  if (st.cfg.proprietary_root.empty())
    throw ConfigError("audit needs --proprietary");
  if (payload_file.empty() == replay_file.empty())
    throw ConfigError("audit needs exactly one of --file or --replay");

  Codebase prop = ingest(st.cfg.proprietary_root, CodebaseKind::Proprietary);
  LeakageGuard guard(prop, st.cfg.guard);
  auto out = st.prepare_out();

  if (!payload_file.empty()) {
    std::ifstream in(payload_file, std::ios::binary);
    if (!in) throw ConfigError("cannot read payload: " + payload_file);
    std::string payload((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
    AuditLog audit_log((out / "audit_log.jsonl").string(), deterministic_run(st));
    AuditVerdict v = audit_log.record(guard.audit(payload));
    std::cout << "verdict " << v.id << ": " << (v.clear ? "clear" : "flagged") << "\n";
    for (const auto& f : v.findings)
      std::cout << "  " << (f.kind == FindingKind::NgramMatch ? "ngram" : "rare-id")
                << " [" << f.proprietary_module_id << "] " << f.matched_span << "\n";
    write_manifest(st, "audit", {"audit_log.jsonl"});
    return v.clear ? 0 : 1;
  }

  // Replay: re-audit every logged prompt and verify the cloud-call join --
  // each cloud generation must reference a recorded Clear verdict whose
  // payload hash matches the prompt. Local prompts legitimately carry
  // proprietary text (they never leave the premises), so only cloud records
  // count as problems.
  auto gens = GenerationLog::load(replay_file);
  auto verdicts = AuditLog::load((out / "audit_log.jsonl").string());
  int problems = 0;
  for (std::size_t i = 0; i < gens.size(); ++i) {
    const auto& g = gens[i];
    AuditVerdict now = guard.audit(g.prompt);
    std::cout << "record " << i + 1 << " (" << g.role << "): "
              << (now.clear ? "clear" : "flagged");
    if (g.role == "cloud") {
      const AuditVerdict* logged = nullptr;
      for (const auto& v : verdicts)
        if (v.id == g.audit_verdict_id) logged = &v;
      if (!logged)
        std::cout << " JOIN-MISSING", ++problems;
      else if (!logged->clear)
        std::cout << " JOIN-NOT-CLEAR", ++problems;
      else if (logged->payload_hash != g.prompt_hash)
        std::cout << " JOIN-HASH-MISMATCH", ++problems;
      else
        std::cout << " join=" << logged->id;
      if (!now.clear) ++problems;
    }
    std::cout << "\n";
  }
  std::cout << (problems ? "replay: FAILED" : "replay: ok") << "\n";
  return problems ? 1 : 0;
}

int cmd_optimize(CliState& st, const std::string& principles_file,
                 const std::string& target_root)
{
  if (st.cfg.proprietary_root.empty())
    throw ConfigError("optimize needs --proprietary (guard corpus)");
  std::string targets_in = !target_root.empty() ? target_root : st.cfg.targets;
  if (targets_in.empty()) throw ConfigError("optimize needs --target");
  std::string pf = !principles_file.empty() ? principles_file
                                            : (st.out() / "principles.json").string();

  PrincipleSet set = load_principles(pf);
  Codebase prop = ingest(st.cfg.proprietary_root, CodebaseKind::Proprietary);
  Codebase targets = ingest(targets_in, CodebaseKind::Target);
  report_ingest(targets, "targets");

  LeakageGuard guard(prop, st.cfg.guard);
  auto backend = make_backend(st.cfg);
  auto out = st.prepare_out();
  AuditLog audit_log((out / "audit_log.jsonl").string(), deterministic_run(st));
  GenerationLog gen_log((out / "generation_log.jsonl").string());

  // Failure isolation: a target that does not validate is reported and
  // skipped rather than aborting the batch.
  std::vector<VerilogModule> runnable;
  for (const auto& m : targets.modules) {
    auto v = backend->validate(m);
    if (validation_ok(v)) runnable.push_back(m);
    else std::cout << "skipping " << m.name << ": " << validation_detail(v) << "\n";
  }

  if (st.dry_run) {
    for (const auto& m : runnable) {
      std::string prompt = prompts::render_p2(m.source, set.principles, set.attribute);
      AuditVerdict v = audit_log.record(guard.audit(prompt));
      std::cout << "--- target " << m.name << " verdict " << v.id << ": "
                << (v.clear ? "clear" : "flagged") << "\n"
                << prompt << "\n";
    }
    return 0;
  }

  auto cloud = make_endpoint(EndpointRole::Cloud, st.cfg.cloud, st);
  OptimizeOptions options;
  options.retries = st.cfg.retries;
  options.constraints = st.cfg.constraints;
  auto records = optimize_all(runnable, set, *cloud, *backend, guard, audit_log,
                              options, &gen_log, st.cfg.workers);
  save_records_jsonl(records, (out / "records.jsonl").string());

  int hard_failures = 0;
  for (const auto& r : records) {
    std::cout << r.target_id.substr(0, 8) << " " << r.category << " "
              << to_string(r.verdict);
    if (r.relative_delta)
      std::printf(" delta=%.4f%%", 100.0 * *r.relative_delta);
    std::cout << " attempts=" << r.attempts << "\n";
    if (r.verdict == OptVerdict::AuditBlocked ||
        r.verdict == OptVerdict::EndpointUnreachable)
      ++hard_failures;
  }
  write_manifest(st, "optimize",
                 {"records.jsonl", "audit_log.jsonl", "generation_log.jsonl"});
  return hard_failures ? 1 : 0;
}

int cmd_evaluate(CliState& st, const std::string& records_file)
{
  std::string rf = !records_file.empty() ? records_file
                                         : (st.out() / "records.jsonl").string();
  auto records = load_records_jsonl(rf);
  if (records.empty()) throw IngestError("no records to evaluate in " + rf);

  std::vector<Attribute> attrs;
  for (const auto& r : records)
    if (std::find(attrs.begin(), attrs.end(), r.attribute) == attrs.end())
      attrs.push_back(r.attribute);

  nlohmann::json out_json = nlohmann::json::array();
  for (auto attr : attrs) {
    std::vector<OptimizationRecord> subset;
    for (const auto& r : records)
      if (r.attribute == attr) subset.push_back(r);
    EvaluationSummary s = summarize(subset, attr, st.fingerprint);
    out_json.push_back(s);
    std::printf("%s: n=%d success=%d SR=%.2f%% meanRI=%.2f%% medianRI=%.2f%% "
                "firstSR=%.2f%%\n",
                to_string(attr).c_str(), s.n_total, s.n_success, s.success_rate_pct,
                s.mean_ri_pct, s.median_ri_pct, s.first_attempt_success_rate_pct);
  }
  auto out = st.prepare_out();
  std::ofstream(out / "summary.json") << out_json.dump(2) << "\n";
  write_manifest(st, "evaluate", {"summary.json"});
  return 0;
}

int cmd_sweep_k(CliState& st, const std::string& pairs_file, const std::string& target_root)
{
  if (st.cfg.proprietary_root.empty() || st.cfg.draft_root.empty())
    throw ConfigError("sweep-k needs --proprietary and --draft");
  std::string targets_in = !target_root.empty() ? target_root : st.cfg.targets;
  if (targets_in.empty()) throw ConfigError("sweep-k needs --target");
  std::string pf = !pairs_file.empty() ? pairs_file
                                       : (st.out() / "pairs.jsonl").string();

  auto pairs = load_pairs_jsonl(pf);
  Codebase prop = ingest(st.cfg.proprietary_root, CodebaseKind::Proprietary);
  Codebase draft = ingest(st.cfg.draft_root, CodebaseKind::Draft);
  Codebase targets = ingest(targets_in, CodebaseKind::Target);

  LeakageGuard guard(prop, st.cfg.guard);
  auto backend = make_backend(st.cfg);
  auto out = st.prepare_out();
  AuditLog audit_log((out / "audit_log.jsonl").string(), deterministic_run(st));
  GenerationLog gen_log((out / "generation_log.jsonl").string());
  auto local = make_endpoint(EndpointRole::Local, st.cfg.local, st);
  auto cloud = make_endpoint(EndpointRole::Cloud, st.cfg.cloud, st);

  SweepOptions options;
  options.ks = st.cfg.ks;
  options.seeds = st.cfg.seeds;
  options.extraction.style = st.cfg.prompt_style();
  options.optimize.retries = st.cfg.retries;
  options.optimize.constraints = st.cfg.constraints;
  options.workers = st.cfg.workers;
  options.config_fingerprint = st.fingerprint;

  auto cells = sweep_k(pairs, prop, draft, targets.modules, st.cfg.attribute, *local,
                       *cloud, *backend, guard, audit_log, options, &gen_log);

  std::string csv = sweep_csv(cells);
  std::ofstream(out / "sweep.csv") << csv;
  std::ofstream(out / "sweep.json")
      << sweep_plot_json(cells, st.cfg.attribute).dump(2) << "\n";
  std::ofstream(out / "sweep_cells.json") << nlohmann::json(cells).dump(2) << "\n";
  std::cout << csv;
  write_manifest(st, "sweep-k",
                 {"sweep.csv", "sweep.json", "sweep_cells.json", "audit_log.jsonl",
                  "generation_log.jsonl"});
  return 0;
}

int cmd_report(CliState& st, const std::string& records_file, const std::string& cells_file)
{
  std::string rf = !records_file.empty() ? records_file
                                         : (st.out() / "records.jsonl").string();
  auto records = load_records_jsonl(rf);
  if (records.empty()) throw IngestError("no records to report on in " + rf);

  std::vector<Attribute> attrs;
  for (const auto& r : records)
    if (std::find(attrs.begin(), attrs.end(), r.attribute) == attrs.end())
      attrs.push_back(r.attribute);
  std::vector<EvaluationSummary> summaries;
  for (auto attr : attrs) {
    std::vector<OptimizationRecord> subset;
    for (const auto& r : records)
      if (r.attribute == attr) subset.push_back(r);
    summaries.push_back(summarize(subset, attr, st.fingerprint));
  }

  std::vector<SweepCell> cells;
  std::string cf = !cells_file.empty() ? cells_file
                                       : (st.out() / "sweep_cells.json").string();
  if (fs::exists(cf)) {
    std::ifstream in(cf);
    nlohmann::json j = nlohmann::json::parse(in);
    cells = j.get<std::vector<SweepCell>>();
  }

  auto out = st.prepare_out();
  std::string md = render_report(summaries, cells, records);
  std::ofstream(out / "report.md") << md;
  std::cout << "report: " << (out / "report.md").string() << "\n";
  write_manifest(st, "report", {"report.md"});
  return 0;
}

int cmd_inspect(CliState& st, const std::string& pairs_file, int n)
{
  std::string pf = !pairs_file.empty() ? pairs_file
                                       : (st.out() / "pairs.jsonl").string();
  auto pairs = load_pairs_jsonl(pf);
  if (pairs.empty()) {
    std::cout << "no pairs to inspect\n";
    return 0;
  }
  Codebase prop, draft;
  if (!st.cfg.proprietary_root.empty())
    prop = ingest(st.cfg.proprietary_root, CodebaseKind::Proprietary);
  if (!st.cfg.draft_root.empty())
    draft = ingest(st.cfg.draft_root, CodebaseKind::Draft);

  std::size_t count = std::min<std::size_t>(static_cast<std::size_t>(n), pairs.size());
  auto idx = sample_indices(pairs.size(), count, st.cfg.seed);
  for (auto i : idx) {
    const auto& p = pairs[i];
    std::printf("pair %s sim=%.4f margin=%.4f %s\n", pair_id(p).c_str(), p.similarity,
                p.margin, to_string(p.attribute).c_str());
    std::printf("  proprietary %s: %.4f  draft %s: %.4f\n",
                p.proprietary_id.substr(0, 8).c_str(), p.metrics_p.metric(p.attribute),
                p.draft_id.substr(0, 8).c_str(), p.metrics_d.metric(p.attribute));
    const VerilogModule* pm = prop.find(p.proprietary_id);
    const VerilogModule* dm = draft.find(p.draft_id);
    if (pm) std::cout << "--- proprietary\n" << pm->source << "\n";
    if (dm) std::cout << "--- draft\n" << dm->source << "\n";
  }
  return 0;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Verilog PPA optimization pipeline (principle extraction + cloud "
               "application behind an IP leakage audit)"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_file;
  CliState st;

  // Flag values land in temporaries; only flags the user actually passed
  // override the config file.
  std::string f_prop, f_draft, f_targets, f_out, f_attr, f_backend;
  double f_threshold = 0.7;
  int f_k = 4, f_retries = 2, f_workers = 1;
  std::uint64_t f_seed = 1;
  std::vector<int> f_ks;
  std::vector<std::uint64_t> f_seeds;

  app.add_option("--config", config_file, "JSON config file");
  app.add_option("--proprietary", f_prop, "proprietary codebase root");
  app.add_option("--draft", f_draft, "draft codebase root");
  app.add_option("--targets,--target", f_targets, "target modules (file or dir)");
  app.add_option("--out", f_out, "output directory");
  app.add_option("--attribute", f_attr, "power | cpd");
  app.add_option("--threshold", f_threshold, "pairing similarity threshold");
  app.add_option("--k", f_k, "number of context pairs K");
  app.add_option("--seed", f_seed, "root RNG seed");
  app.add_option("--ks", f_ks, "sweep K values")->delimiter(',');
  app.add_option("--seeds", f_seeds, "sweep seeds")->delimiter(',');
  app.add_option("--retries", f_retries, "optimizer retries");
  app.add_option("--workers", f_workers, "parallel optimize workers");
  app.add_option("--backend", f_backend, "mock | external");
  app.add_flag("--scripted", st.scripted, "use scripted endpoints");
  app.add_flag("--dry-run", st.dry_run, "print audited prompts, no cloud calls");
  bool f_verbatim = false, f_allow_remote = false;
  app.add_flag("--verbatim-paper-prompts", f_verbatim,
               "render the published prompt text unmodified");
  app.add_flag("--allow-remote-local", f_allow_remote,
               "permit a non-LAN host for the local endpoint");

  std::string a_in, a_pairs, a_payload, a_replay, a_principles, a_records, a_cells;
  int a_inspect_n = 5;

  auto* sub_ingest = app.add_subcommand("ingest", "load codebases, write manifests");
  auto* sub_classify = app.add_subcommand("classify", "categorize modules");
  sub_classify->add_option("--in", a_in, "input root");
  auto* sub_mine = app.add_subcommand("mine-pairs", "mine contrastive pairs");
  auto* sub_dataset = app.add_subcommand("emit-dataset", "export pair dataset JSONL");
  sub_dataset->add_option("--pairs", a_pairs, "pair JSONL file");
  auto* sub_extract =
      app.add_subcommand("extract-principles", "stage 1: distill principles locally");
  sub_extract->add_option("--pairs", a_pairs, "pair JSONL file");
  auto* sub_audit = app.add_subcommand("audit", "run or replay the leakage audit");
  sub_audit->add_option("--file", a_payload, "payload file to audit");
  sub_audit->add_option("--replay", a_replay, "generation log to replay");
  auto* sub_optimize =
      app.add_subcommand("optimize", "stage 2: apply principles via cloud model");
  sub_optimize->add_option("--principles", a_principles, "principle set JSON");
  auto* sub_evaluate = app.add_subcommand("evaluate", "summarize optimization records");
  sub_evaluate->add_option("--records", a_records, "records JSONL");
  auto* sub_sweep = app.add_subcommand("sweep-k", "K ablation sweep");
  sub_sweep->add_option("--pairs", a_pairs, "pair JSONL file");
  auto* sub_report = app.add_subcommand("report", "render markdown report");
  sub_report->add_option("--records", a_records, "records JSONL");
  sub_report->add_option("--sweep-cells", a_cells, "sweep cells JSON");
  auto* sub_inspect = app.add_subcommand("inspect", "sample pairs for review");
  sub_inspect->add_option("--pairs", a_pairs, "pair JSONL file");
  sub_inspect->add_option("--n", a_inspect_n, "sample size");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (!config_file.empty()) st.cfg = load_config(config_file);
    if (app.count("--proprietary")) st.cfg.proprietary_root = f_prop;
    if (app.count("--draft")) st.cfg.draft_root = f_draft;
    if (app.count("--targets")) st.cfg.targets = f_targets;
    if (app.count("--out")) st.cfg.out = f_out;
    if (app.count("--attribute")) st.cfg.attribute = attribute_from_string(f_attr);
    if (app.count("--threshold")) st.cfg.threshold = f_threshold;
    if (app.count("--k")) st.cfg.k = f_k;
    if (app.count("--seed")) st.cfg.seed = f_seed;
    if (app.count("--ks")) st.cfg.ks = f_ks;
    if (app.count("--seeds")) st.cfg.seeds = f_seeds;
    if (app.count("--retries")) st.cfg.retries = f_retries;
    if (app.count("--workers")) st.cfg.workers = f_workers;
    if (app.count("--backend")) st.cfg.backend = f_backend;
    if (f_verbatim) st.cfg.verbatim_paper_prompts = true;
    if (f_allow_remote) st.cfg.allow_remote_local = true;
    validate_config(st.cfg);
    st.fingerprint = config_fingerprint(st.cfg);

    if (sub_ingest->parsed()) return cmd_ingest(st);
    if (sub_classify->parsed()) return cmd_classify(st, a_in);
    if (sub_mine->parsed()) return cmd_mine_pairs(st);
    if (sub_dataset->parsed()) return cmd_emit_dataset(st, a_pairs);
    if (sub_extract->parsed()) return cmd_extract_principles(st, a_pairs);
    if (sub_audit->parsed()) return cmd_audit(st, a_payload, a_replay);
    if (sub_optimize->parsed()) return cmd_optimize(st, a_principles, f_targets);
    if (sub_evaluate->parsed()) return cmd_evaluate(st, a_records);
    if (sub_sweep->parsed()) return cmd_sweep_k(st, a_pairs, f_targets);
    if (sub_report->parsed()) return cmd_report(st, a_records, a_cells);
    if (sub_inspect->parsed()) return cmd_inspect(st, a_pairs, a_inspect_n);
    throw ConfigError("no subcommand");
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
