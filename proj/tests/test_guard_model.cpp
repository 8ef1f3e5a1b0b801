#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>

#include "rtlopt/model_client_http.hpp"
#include "rtlopt/rtlopt.hpp"

#include "fixtures.hpp"

using namespace rtlopt;
using Catch::Approx;

// --- leakage guard ---------------------------------------------------------------

namespace {

std::vector<std::string> corpus_tokens(const char* source)
{
  TokenizerOptions opts;
  opts.bucket_numeric_literals = false;
  return token_texts(tokenize_verilog(source, opts));
}

std::string join_run(const std::vector<std::string>& toks, std::size_t start,
                     std::size_t n)
{
  std::string out;
  for (std::size_t k = 0; k < n; ++k) {
    if (k) out.push_back(' ');
    out += toks[start + k];
  }
  return out;
}

// Brute-force reference: does any n-token window of the payload appear
// verbatim as a window of some proprietary module's token stream?
bool naive_ngram_hit(const Codebase& corpus, const std::string& payload, std::size_t n)
{
  TokenizerOptions opts;
  opts.bucket_numeric_literals = false;
  auto ptoks = token_texts(tokenize_verilog(payload, opts));
  if (ptoks.size() < n) return false;
  for (const auto& m : corpus.modules) {
    auto mtoks = token_texts(tokenize_verilog(m.source, opts));
    if (mtoks.size() < n) continue;
    for (std::size_t i = 0; i + n <= ptoks.size(); ++i)
      for (std::size_t j = 0; j + n <= mtoks.size(); ++j) {
        bool eq = true;
        for (std::size_t k = 0; k < n && eq; ++k) eq = ptoks[i + k] == mtoks[j + k];
        if (eq) return true;
      }
  }
  return false;
}

} // namespace

TEST_CASE("guard indexes one fingerprint per token window")
{
  Codebase cb;
  cb.kind = CodebaseKind::Proprietary;
  cb.modules.push_back(
      testfix::make_module("tiny", "m", testfix::kTinyModule, "Other", 1, cb.kind));
  LeakageGuard guard(cb);
  CHECK(guard.fingerprint_count() == 13); // 20 tokens, 8-gram windows
  CHECK(guard.rare_identifier_count() == 4); // m, a, y, b
}

TEST_CASE("guard flags at the n-gram boundary, not below")
{
  Codebase corpus = testfix::guard_corpus();
  LeakageGuard guard(corpus);
  CHECK(guard.rare_identifier_count() == 0);

  auto toks = corpus_tokens(testfix::kGuardA1);
  REQUIRE(toks.size() >= 16);
  std::string filler_a = "alpha beta gamma delta epsilon zeta";
  std::string filler_b = "eta theta iota kappa lambda mu";

  std::string below = filler_a + " " + join_run(toks, 4, 7) + " " + filler_b;
  auto v7 = guard.audit(below);
  CHECK(v7.clear);
  CHECK(v7.findings.empty());
  CHECK_FALSE(naive_ngram_hit(corpus, below, 8));

  std::string at = filler_a + " " + join_run(toks, 4, 8) + " " + filler_b;
  auto v8 = guard.audit(at);
  CHECK_FALSE(v8.clear);
  REQUIRE_FALSE(v8.findings.empty());
  CHECK(v8.findings[0].kind == FindingKind::NgramMatch);
  CHECK(v8.findings[0].matched_span == join_run(toks, 4, 8));
  CHECK(naive_ngram_hit(corpus, at, 8));
  CHECK(v8.payload_hash == hash_hex(at));
}

TEST_CASE("guard agrees with the brute-force reference across window sizes")
{
  Codebase corpus = testfix::guard_corpus();
  LeakageGuard guard(corpus);
  auto a = corpus_tokens(testfix::kGuardA2);
  auto b = corpus_tokens(testfix::kGuardB1);
  std::vector<std::string> payloads = {
      "nothing from the corpus at all",
      join_run(a, 0, 8),
      join_run(a, 3, 12),
      join_run(b, 2, 7) + " unrelated " + join_run(b, 9, 7),
      join_run(b, 1, 9),
  };
  for (const auto& p : payloads) {
    bool expect = naive_ngram_hit(corpus, p, 8);
    CHECK(guard.audit(p).clear == !expect);
  }
}

TEST_CASE("guard honors min_hits_to_flag")
{
  Codebase corpus = testfix::guard_corpus();
  LeakagePolicy policy;
  policy.min_hits_to_flag = 2;
  LeakageGuard guard(corpus, policy);

  auto toks = corpus_tokens(testfix::kGuardA1);
  std::string one_hit = "alpha beta gamma " + join_run(toks, 4, 8) + " delta epsilon zeta";
  CHECK(guard.audit(one_hit).clear); // one window is below the threshold
  std::string two_hits = "alpha beta gamma " + join_run(toks, 4, 9) + " delta epsilon zeta";
  CHECK_FALSE(guard.audit(two_hits).clear);
}

TEST_CASE("guard flags identifiers unique to one proprietary module")
{
  Codebase cb;
  cb.kind = CodebaseKind::Proprietary;
  cb.modules.push_back(testfix::make_module(
      "ra", "ra",
      "module ra(input rx_unique, output ry_shared);\n"
      "  assign ry_shared = rx_unique;\nendmodule",
      "Other", 1, cb.kind));
  cb.modules.push_back(testfix::make_module(
      "rb", "rb",
      "module rb(input rz_other, output ry_shared);\n"
      "  assign ry_shared = rz_other;\nendmodule",
      "Other", 1, cb.kind));
  LeakageGuard guard(cb);

  CHECK(guard.is_rare_identifier("rx_unique"));
  CHECK(guard.is_rare_identifier("rz_other"));
  CHECK_FALSE(guard.is_rare_identifier("ry_shared"));
  CHECK_FALSE(guard.is_rare_identifier("absent"));

  auto v = guard.audit("route the rx_unique signal through a mux");
  CHECK_FALSE(v.clear);
  REQUIRE(v.findings.size() == 1);
  CHECK(v.findings[0].kind == FindingKind::RareIdentifier);
  CHECK(v.findings[0].matched_span == "rx_unique");
  CHECK(v.findings[0].proprietary_module_id == "ra");

  CHECK(guard.audit("route the ry_shared signal through a mux").clear);

  LeakagePolicy lenient;
  lenient.identifier_overlap_threshold = 0.5;
  LeakageGuard loose(cb, lenient);
  // 1 rare among 6 distinct identifiers stays under the 0.5 fraction
  CHECK(loose.audit("route the rx_unique signal through a mux").clear);
}

TEST_CASE("guard fingerprints keep literal text visible")
{
  Codebase cb;
  cb.kind = CodebaseKind::Proprietary;
  cb.modules.push_back(testfix::make_module(
      "c1", "mc",
      "module mc(input [7:0] ca, output [7:0] cy);\n"
      "  assign cy = ca ^ 8'hA5;\nendmodule",
      "Other", 8, cb.kind));
  cb.modules.push_back(testfix::make_module(
      "c2", "mc",
      "module mc(input [7:0] ca, output [7:0] cy);\n"
      "  assign cy = ca & 8'h3C;\nendmodule",
      "Other", 8, cb.kind));
  LeakageGuard guard(cb);
  CHECK(guard.rare_identifier_count() == 0);

  CHECK_FALSE(guard.audit("assign cy = ca ^ 8'hA5 ; endmodule").clear);
  CHECK(guard.audit("assign cy = ca ^ 8'hFF ; endmodule").clear);
}

TEST_CASE("guard construction validates policy and corpus")
{
  Codebase empty;
  empty.kind = CodebaseKind::Proprietary;
  CHECK_THROWS_AS(LeakageGuard(empty), InsufficientCorpus);

  LeakagePolicy bad;
  bad.ngram_size = 3;
  CHECK_THROWS_AS(LeakageGuard(testfix::guard_corpus(), bad), ConfigError);
}

TEST_CASE("audit log numbers verdicts and resumes across reopen")
{
  auto dir = testfix::make_temp_dir("auditlog");
  std::string path = (dir / "audit.jsonl").string();
  Codebase corpus = testfix::guard_corpus();
  LeakageGuard guard(corpus);

  AuditLog log(path, true);
  auto v1 = log.record(guard.audit("harmless text"));
  auto v2 = log.record(guard.audit(testfix::kGuardA1));
  CHECK(v1.id == "av-1");
  CHECK(v1.timestamp_ms == 0);
  CHECK(v1.clear);
  CHECK(v2.id == "av-2");
  CHECK_FALSE(v2.clear);
  CHECK(log.entries().size() == 2);

  AuditLog resumed(path, true);
  auto v3 = resumed.record(guard.audit("more harmless text"));
  CHECK(v3.id == "av-3");

  auto loaded = AuditLog::load(path);
  REQUIRE(loaded.size() == 3);
  CHECK(loaded[0].id == "av-1");
  CHECK(loaded[1].id == "av-2");
  CHECK_FALSE(loaded[1].clear);
  CHECK_FALSE(loaded[1].findings.empty());
  CHECK(loaded[1].findings[0].kind == FindingKind::NgramMatch);
  CHECK(loaded[2].id == "av-3");

  AuditLog wall("", false);
  CHECK(wall.record(guard.audit("x")).timestamp_ms > 0);
}

// --- model client ----------------------------------------------------------------

TEST_CASE("scripted endpoint dispatches rules before the default")
{
  ScriptedEndpoint ep(EndpointRole::Local, "scripted-test");
  ep.add_rule("adder", "use a carry-save structure");
  ep.add_rule("multiplier", "share partial products");
  ep.set_default_response("no rule matched");

  CHECK(ep.complete_once("optimize this adder").text == "use a carry-save structure");
  CHECK(ep.complete_once("a multiplier please").text == "share partial products");
  CHECK(ep.complete_once("something else").text == "no rule matched");
  CHECK(ep.call_count() == 3);
  CHECK(ep.deterministic());

  ep.set_handler([](const std::string& prompt) { return "len=" + std::to_string(prompt.size()); });
  CHECK(ep.complete_once("abcd").text == "len=4");
}

TEST_CASE("generate fills the record for a local endpoint")
{
  ScriptedEndpoint ep(EndpointRole::Local, "local-model");
  ep.set_default_response("fine");
  auto rec = generate(ep, "hello");
  CHECK(rec.response == "fine");
  CHECK(rec.model == "local-model");
  CHECK(rec.role == "local");
  CHECK(rec.prompt == "hello");
  CHECK(rec.prompt_hash == hash_hex("hello"));
  CHECK(rec.retries == 0);
  CHECK(rec.timestamp_ms == 0); // deterministic endpoint pins time
  CHECK(rec.latency_ms == 0);
  CHECK(rec.audit_verdict_id.empty());
}

TEST_CASE("cloud generation is impossible without a clearance")
{
  ScriptedEndpoint cloud(EndpointRole::Cloud, "cloud-model");
  cloud.set_default_response("should never be seen");

  CHECK_THROWS_AS(generate(cloud, "prompt"), AuditNotCleared);
  CHECK_THROWS_AS(generate(cloud, "prompt", AuditClearance{"", hash_hex("prompt")}),
                  AuditNotCleared);
  CHECK_THROWS_AS(generate(cloud, "prompt", AuditClearance{"av-1", hash_hex("other")}),
                  AuditNotCleared);
  CHECK(cloud.call_count() == 0); // refused before any network I/O

  auto rec = generate(cloud, "prompt", AuditClearance{"av-1", hash_hex("prompt")});
  CHECK(rec.response == "should never be seen");
  CHECK(rec.audit_verdict_id == "av-1");
  CHECK(rec.role == "cloud");
  CHECK(cloud.call_count() == 1);
}

TEST_CASE("generate retries transient failures with bounded attempts")
{
  ScriptedEndpoint ep(EndpointRole::Local, "flaky");
  ep.set_default_response("recovered");
  ep.fail_first(2);
  GenerateOptions opts;
  opts.backoff_ms = 1;
  auto rec = generate(ep, "p", opts);
  CHECK(rec.response == "recovered");
  CHECK(rec.retries == 2);
  CHECK(ep.call_count() == 3);

  ScriptedEndpoint dead(EndpointRole::Local, "dead");
  dead.set_default_response("unreachable");
  dead.fail_first(3);
  CHECK_THROWS_AS(generate(dead, "p", opts), EndpointUnreachable);
  CHECK(dead.call_count() == 3);
}

TEST_CASE("scripted endpoint loads from a json script file")
{
  auto dir = testfix::make_temp_dir("script");
  nlohmann::json script = {
      {"model", "canned"},
      {"rules", {{{"contains", "adder"}, {"response", "carry select"}}}},
      {"default_response", "fallback"},
  };
  testfix::write_file(dir / "script.json", script.dump());

  auto ep = ScriptedEndpoint::from_file(EndpointRole::Local, (dir / "script.json").string());
  CHECK(ep->model_name() == "canned");
  CHECK(generate(*ep, "an adder").response == "carry select");
  CHECK(generate(*ep, "a fifo").response == "fallback");

  CHECK_THROWS_AS(ScriptedEndpoint::from_file(EndpointRole::Local, (dir / "nope").string()),
                  ConfigError);
  testfix::write_file(dir / "bad.json", "{not json");
  CHECK_THROWS_AS(ScriptedEndpoint::from_file(EndpointRole::Local, (dir / "bad.json").string()),
                  ConfigError);
}

TEST_CASE("generation log appends and reloads records")
{
  auto dir = testfix::make_temp_dir("genlog");
  std::string path = (dir / "gen.jsonl").string();
  {
    GenerationLog log(path);
    ScriptedEndpoint ep(EndpointRole::Local, "m1");
    ep.set_default_response("r1");
    log.record(generate(ep, "p1"));
    GenerationRecord cloud_rec;
    cloud_rec.role = "cloud";
    cloud_rec.prompt = "p2";
    cloud_rec.prompt_hash = hash_hex("p2");
    cloud_rec.audit_verdict_id = "av-9";
    log.record(cloud_rec);
    CHECK(log.entries().size() == 2);
  }
  auto loaded = GenerationLog::load(path);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].model == "m1");
  CHECK(loaded[0].response == "r1");
  CHECK(loaded[1].role == "cloud");
  CHECK(loaded[1].audit_verdict_id == "av-9");
  CHECK(loaded[1].prompt_hash == hash_hex("p2"));
}

// --- http endpoint ----------------------------------------------------------------

namespace {

struct TestServer {
  httplib::Server server;
  std::thread thread;
  int port = 0;

  explicit TestServer(httplib::Server::Handler handler)
  {
    server.Post("/v1/chat/completions", std::move(handler));
    port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }

  ~TestServer()
  {
    server.stop();
    thread.join();
  }

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port); }
};

nlohmann::json chat_response(const std::string& content)
{
  return {{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}},
          {"usage", {{"prompt_tokens", 12}, {"completion_tokens", 7}}}};
}

} // namespace

TEST_CASE("http endpoint speaks the chat completion protocol")
{
  std::string seen_auth, seen_model, seen_prompt;
  TestServer srv([&](const httplib::Request& req, httplib::Response& res) {
    seen_auth = req.get_header_value("Authorization");
    auto body = nlohmann::json::parse(req.body);
    seen_model = body["model"];
    seen_prompt = body["messages"][0]["content"];
    res.set_content(chat_response("echo: " + seen_prompt).dump(), "application/json");
  });

  setenv("RTLOPT_TEST_KEY", "sekrit", 1);
  HttpEndpointConfig cfg;
  cfg.url = srv.url();
  cfg.model = "test-model";
  cfg.api_key_env = "RTLOPT_TEST_KEY";
  HttpEndpoint ep(EndpointRole::Local, cfg);

  auto rec = generate(ep, "ping");
  CHECK(rec.response == "echo: ping");
  CHECK(rec.prompt_tokens == 12);
  CHECK(rec.completion_tokens == 7);
  CHECK(seen_auth == "Bearer sekrit");
  CHECK(seen_model == "test-model");
  CHECK(seen_prompt == "ping");
}

TEST_CASE("http endpoint retries 5xx and gives up on 4xx")
{
  int hits = 0;
  TestServer srv([&](const httplib::Request&, httplib::Response& res) {
    if (++hits == 1) {
      res.status = 503;
      return;
    }
    res.set_content(chat_response("after retry").dump(), "application/json");
  });
  HttpEndpointConfig cfg;
  cfg.url = srv.url();
  cfg.model = "m";
  HttpEndpoint ep(EndpointRole::Local, cfg);
  GenerateOptions opts;
  opts.backoff_ms = 1;
  auto rec = generate(ep, "p", opts);
  CHECK(rec.response == "after retry");
  CHECK(rec.retries == 1);
  CHECK(hits == 2);

  int permanent_hits = 0;
  TestServer bad([&](const httplib::Request&, httplib::Response& res) {
    ++permanent_hits;
    res.status = 404;
    res.set_content("no such model", "text/plain");
  });
  HttpEndpointConfig bad_cfg;
  bad_cfg.url = bad.url();
  bad_cfg.model = "m";
  HttpEndpoint ep2(EndpointRole::Local, bad_cfg);
  CHECK_THROWS_AS(generate(ep2, "p", opts), EndpointUnreachable);
  CHECK(permanent_hits == 1); // 4xx is not retried
}

TEST_CASE("http endpoint surfaces malformed success bodies")
{
  TestServer srv([&](const httplib::Request&, httplib::Response& res) {
    res.set_content(nlohmann::json{{"choices", nlohmann::json::array()}}.dump(),
                    "application/json");
  });
  HttpEndpointConfig cfg;
  cfg.url = srv.url();
  cfg.model = "m";
  HttpEndpoint ep(EndpointRole::Local, cfg);
  GenerateOptions opts;
  opts.backoff_ms = 1;
  CHECK_THROWS_AS(generate(ep, "p", opts), EndpointUnreachable);
}

TEST_CASE("local role endpoints must stay on private hosts")
{
  HttpEndpointConfig remote;
  remote.url = "http://api.example.com";
  remote.model = "m";
  CHECK_THROWS_AS(HttpEndpoint(EndpointRole::Local, remote), ConfigError);
  CHECK_NOTHROW(HttpEndpoint(EndpointRole::Cloud, remote));
  remote.allow_remote_local = true;
  CHECK_NOTHROW(HttpEndpoint(EndpointRole::Local, remote));

  CHECK(detail::is_private_host("localhost"));
  CHECK(detail::is_private_host("127.0.0.1"));
  CHECK(detail::is_private_host("10.1.2.3"));
  CHECK(detail::is_private_host("192.168.0.5"));
  CHECK(detail::is_private_host("172.16.9.9"));
  CHECK(detail::is_private_host("gpubox"));
  CHECK(detail::is_private_host("gpubox.local"));
  CHECK_FALSE(detail::is_private_host("172.32.0.1"));
  CHECK_FALSE(detail::is_private_host("8.8.8.8"));
  CHECK_FALSE(detail::is_private_host("api.example.com"));
}

TEST_CASE("url parsing extracts host, port, and base")
{
  auto p = detail::parse_url("http://127.0.0.1:8080/v1/x");
  CHECK(p.host == "127.0.0.1");
  CHECK(p.port == 8080);
  CHECK(p.base == "http://127.0.0.1:8080");
  CHECK(detail::parse_url("https://example.com").port == 443);
  CHECK(detail::parse_url("http://example.com").port == 80);
  CHECK_THROWS_AS(detail::parse_url("example.com"), ConfigError);
  CHECK_THROWS_AS(detail::parse_url("http://"), ConfigError);
}

// --- prompts ----------------------------------------------------------------------

namespace {

prompts::ExampleBlock adder_block(double draft_metric, double prop_metric)
{
  prompts::ExampleBlock b;
  b.instruction = "Implement an 8-bit adder.";
  b.draft_source = testfix::kAdder8Draft;
  b.proprietary_source = testfix::kAdder8Prop;
  b.draft_metric = draft_metric;
  b.proprietary_metric = prop_metric;
  return b;
}

prompts::ExampleBlock mult_block(double draft_metric, double prop_metric)
{
  prompts::ExampleBlock b;
  b.instruction = "Implement a 4-bit multiplier.";
  b.draft_source = testfix::kMult4Draft;
  b.proprietary_source = testfix::kMult4Prop;
  b.draft_metric = draft_metric;
  b.proprietary_metric = prop_metric;
  return b;
}

} // namespace

TEST_CASE("extraction prompt for power matches the golden text")
{
  auto prompt = prompts::render_p1({adder_block(29.074, 23.125)}, Attribute::Power);
  CHECK(prompt == testfix::read_golden("p1_power.txt"));
  CHECK(prompt.find("1. Pattern Recognition:") != std::string::npos);
  CHECK(prompt.find("4. Optimization Strategies:") != std::string::npos);
}

TEST_CASE("verbatim delay prompt keeps the published body")
{
  auto prompt =
      prompts::render_p1({adder_block(390.0, 350.0), mult_block(2760.0, 2130.0)},
                         Attribute::CriticalPathDelay, prompts::PromptStyle::VerbatimPaper);
  CHECK(prompt == testfix::read_golden("p1_cpd_verbatim.txt"));
  CHECK(prompt.find("Power-Efficient vs Power-Inefficient") != std::string::npos);
}

TEST_CASE("corrected delay prompt speaks about delay throughout")
{
  auto prompt = prompts::render_p1({adder_block(390.0, 350.0)},
                                   Attribute::CriticalPathDelay);
  CHECK(prompt.find("Delay-Efficient vs Delay-Inefficient") != std::string::npos);
  CHECK(prompt.find("power") == std::string::npos);
  CHECK(prompt.find("critical path delay") != std::string::npos);
}

TEST_CASE("application prompt matches the golden text")
{
  std::vector<std::string> two = {
      "Use operand isolation to avoid unnecessary switching activity in idle datapaths.",
      "Share arithmetic resources across mutually exclusive execution paths."};
  auto p2 = prompts::render_p2(testfix::kMult4Draft, two, Attribute::Power);
  CHECK(p2 == testfix::read_golden("p2_power.txt"));
  CHECK(p2.find("Do not copy any code from other sources") != std::string::npos);

  std::vector<std::string> one = {
      "Balance logic depth across parallel branches so no single chain dominates the "
      "critical path."};
  auto p2d = prompts::render_p2(testfix::kMult4Draft, one, Attribute::CriticalPathDelay);
  CHECK(p2d == testfix::read_golden("p2_cpd.txt"));
  CHECK(p2d.find("low critical path delay") != std::string::npos);
}

TEST_CASE("principle joining is bare for one item, numbered for several")
{
  CHECK(prompts::join_principles({"only one"}) == "only one");
  CHECK(prompts::join_principles({"first", "second"}) == "1. first\n2. second");
  CHECK(prompts::target_phrase(Attribute::Power) == "low-power");
  CHECK(prompts::target_phrase(Attribute::CriticalPathDelay) == "low critical path delay");
}

TEST_CASE("prompt rendering rejects empty inputs")
{
  CHECK_THROWS_AS(prompts::render_p1({}, Attribute::Power), ConfigError);
  CHECK_THROWS_AS(prompts::render_p2("module m; endmodule", {}, Attribute::Power),
                  ConfigError);
}

// --- principles --------------------------------------------------------------------

namespace {

std::vector<ContrastivePair> stub_pairs(int n_power, int n_delay)
{
  std::vector<ContrastivePair> store;
  for (int i = 0; i < n_power + n_delay; ++i) {
    ContrastivePair p;
    p.proprietary_id = "p" + std::to_string(i);
    p.draft_id = "d" + std::to_string(i);
    p.similarity = 0.9;
    p.attribute = i < n_power ? Attribute::Power : Attribute::CriticalPathDelay;
    p.metrics_p.power_uw = 1.0;
    p.metrics_d.power_uw = 2.0;
    p.margin = 0.5;
    store.push_back(p);
  }
  return store;
}

} // namespace

TEST_CASE("pair sampling is seeded and attribute-scoped")
{
  auto store = stub_pairs(5, 2);
  auto s1 = sample_pairs(store, Attribute::Power, 3, 11);
  auto s2 = sample_pairs(store, Attribute::Power, 3, 11);
  auto s3 = sample_pairs(store, Attribute::Power, 3, 12);
  REQUIRE(s1.size() == 3);
  for (const auto& p : s1) CHECK(p.attribute == Attribute::Power);
  std::vector<std::string> ids1, ids2, ids3;
  for (const auto& p : s1) ids1.push_back(pair_id(p));
  for (const auto& p : s2) ids2.push_back(pair_id(p));
  for (const auto& p : s3) ids3.push_back(pair_id(p));
  CHECK(ids1 == ids2);
  CHECK(ids1 != ids3);

  CHECK_THROWS_AS(sample_pairs(store, Attribute::Power, 6, 1), InsufficientPairs);
  CHECK_THROWS_AS(sample_pairs(store, Attribute::Power, 0, 1), InsufficientPairs);
  CHECK_THROWS_AS(sample_pairs(store, Attribute::CriticalPathDelay, 3, 1),
                  InsufficientPairs);
  CHECK(sample_pairs(store, Attribute::CriticalPathDelay, 2, 1).size() == 2);
}

TEST_CASE("parse_principles splits on list markers")
{
  auto numbered = parse_principles("Here is my analysis.\n\n"
                                   "1. Use clock gating on idle blocks.\n"
                                   "2. Avoid redundant arithmetic,\n"
                                   "   sharing adders where possible.\n"
                                   "3) Prefer gray coding for counters.");
  REQUIRE(numbered.size() == 3);
  CHECK(numbered[0] == "Use clock gating on idle blocks.");
  CHECK(numbered[1] == "Avoid redundant arithmetic, sharing adders where possible.");
  CHECK(numbered[2] == "Prefer gray coding for counters.");

  auto bulleted = parse_principles("- first point\n* second point\n");
  REQUIRE(bulleted.size() == 2);
  CHECK(bulleted[0] == "first point");
  CHECK(bulleted[1] == "second point");

  auto bare = parse_principles("  Just one paragraph of advice.  ");
  REQUIRE(bare.size() == 1);
  CHECK(bare[0] == "Just one paragraph of advice.");

  CHECK(parse_principles("").empty());
  CHECK(parse_principles("   \n  \n").empty());

  // "--" rules and long numbers are not list markers
  auto tricky = parse_principles("1234. not a marker\n-- also not\n1. real item");
  REQUIRE(tricky.size() == 1);
  CHECK(tricky[0] == "real item");
}

TEST_CASE("principle lint flags fragments and passive wording")
{
  auto warnings = lint_principles({"Too short", "This sentence has no verbs of note",
                                   "Prefer one-hot encoding for sparse state machines."});
  REQUIRE(warnings.size() == 2);
  CHECK(warnings[0].find("principle 1") != std::string::npos);
  CHECK(warnings[0].find("fewer than 4 words") != std::string::npos);
  CHECK(warnings[1].find("principle 2") != std::string::npos);
  CHECK(lint_principles({"Avoid deep logic nesting."}).empty());
}

TEST_CASE("principle sets round-trip through json files")
{
  PrincipleSet s;
  s.attribute = Attribute::CriticalPathDelay;
  s.k = 4;
  s.seed = 99;
  s.principles = {"Balance tree depth.", "Use carry-select stages."};
  s.source_pair_ids = {"a+b+cpd", "c+d+cpd"};
  s.model = "local-x";
  s.audit_verdict_id = "av-7";
  s.raw_response = "not serialized";

  auto dir = testfix::make_temp_dir("pset");
  save_principles(s, (dir / "p.json").string());
  auto back = load_principles((dir / "p.json").string());
  CHECK(back.attribute == s.attribute);
  CHECK(back.k == s.k);
  CHECK(back.seed == s.seed);
  CHECK(back.principles == s.principles);
  CHECK(back.source_pair_ids == s.source_pair_ids);
  CHECK(back.model == s.model);
  CHECK(back.audit_verdict_id == s.audit_verdict_id);
  CHECK(back.raw_response.empty());
}

namespace {

struct ExtractionRig {
  Codebase prop = testfix::guard_corpus();
  Codebase draft;
  ContrastivePair pair;
  LeakageGuard guard;
  AuditLog audit_log;

  ExtractionRig() : guard(prop), audit_log("", true)
  {
    draft.kind = CodebaseKind::Draft;
    draft.modules.push_back(testfix::make_module(
        "dd1", "gma_draft",
        "module gma_draft(input [3:0] da, input [3:0] db, output [3:0] dy);\n"
        "  assign dy = (da & db) | (da & db);\nendmodule",
        "Other", 4, draft.kind));
    pair.proprietary_id = "ga1";
    pair.draft_id = "dd1";
    pair.similarity = 0.8;
    pair.attribute = Attribute::Power;
    pair.metrics_p.power_uw = 5.0;
    pair.metrics_d.power_uw = 9.0;
    pair.margin = (9.0 - 5.0) / 9.0;
  }
};

} // namespace

TEST_CASE("extract_principles parses, audits, and stamps the verdict")
{
  ExtractionRig rig;
  ScriptedEndpoint local(EndpointRole::Local, "local-test");
  local.set_default_response(
      "Key lessons:\n"
      "1. Prefer shared operators over duplicated logic to reduce switching.\n"
      "2. Avoid recomputing subexpressions; reuse intermediate wires.");
  GenerationLog gen_log;

  auto set = extract_principles(local, {rig.pair}, rig.prop, rig.draft, Attribute::Power,
                                7, rig.guard, rig.audit_log, {}, &gen_log);
  REQUIRE(set.principles.size() == 2);
  CHECK(set.principles[0] ==
        "Prefer shared operators over duplicated logic to reduce switching.");
  CHECK(set.attribute == Attribute::Power);
  CHECK(set.k == 1);
  CHECK(set.seed == 7);
  CHECK(set.source_pair_ids == std::vector<std::string>{"ga1+dd1+pwr"});
  CHECK(set.model == "local-test");
  CHECK(set.audit_verdict_id == "av-1");
  CHECK(lint_principles(set.principles).empty());

  REQUIRE(rig.audit_log.entries().size() == 1);
  CHECK(rig.audit_log.entries()[0].clear);
  REQUIRE(gen_log.entries().size() == 1);
  CHECK(gen_log.entries()[0].role == "local");
  CHECK(gen_log.entries()[0].prompt.find("LEARNING CONTEXT") != std::string::npos);
  // P1 carries the proprietary source; it is local-only by construction.
  CHECK(gen_log.entries()[0].prompt.find("assign gtmp = gin1 & gin2") != std::string::npos);
}

TEST_CASE("extract_principles quarantines leaked principle text")
{
  ExtractionRig rig;
  ScriptedEndpoint local(EndpointRole::Local, "local-test");
  local.set_default_response(
      "1. Always write assign gtmp = gin1 & gin2; assign gout = gtmp | gin1; as is.");

  bool thrown = false;
  try {
    extract_principles(local, {rig.pair}, rig.prop, rig.draft, Attribute::Power, 7,
                       rig.guard, rig.audit_log);
  } catch (const LeakageDetected& e) {
    thrown = true;
    CHECK_FALSE(e.offending_spans.empty());
    CHECK(std::string(e.what()).find("av-1") != std::string::npos);
  }
  CHECK(thrown);
  REQUIRE(rig.audit_log.entries().size() == 1); // quarantine is still logged
  CHECK_FALSE(rig.audit_log.entries()[0].clear);
}

TEST_CASE("extract_principles validates role, pairs, and response")
{
  ExtractionRig rig;
  ScriptedEndpoint cloud(EndpointRole::Cloud, "cloud");
  cloud.set_default_response("x");
  CHECK_THROWS_AS(extract_principles(cloud, {rig.pair}, rig.prop, rig.draft,
                                     Attribute::Power, 7, rig.guard, rig.audit_log),
                  ConfigError);

  ScriptedEndpoint local(EndpointRole::Local, "local");
  local.set_default_response("   \n");
  CHECK_THROWS_AS(extract_principles(local, {rig.pair}, rig.prop, rig.draft,
                                     Attribute::Power, 7, rig.guard, rig.audit_log),
                  EmptyResponse);

  CHECK_THROWS_AS(extract_principles(local, {}, rig.prop, rig.draft, Attribute::Power, 7,
                                     rig.guard, rig.audit_log),
                  InsufficientPairs);

  local.set_default_response("1. Use smaller adders.");
  CHECK_THROWS_AS(extract_principles(local, {rig.pair}, rig.prop, rig.draft,
                                     Attribute::CriticalPathDelay, 7, rig.guard,
                                     rig.audit_log),
                  ConfigError);
}
