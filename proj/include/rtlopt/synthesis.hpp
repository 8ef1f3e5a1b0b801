#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <variant>

#include <nlohmann/json.hpp>

#include "rtlopt/corpus.hpp"
#include "rtlopt/errors.hpp"
#include "rtlopt/hash.hpp"
#include "rtlopt/verilog.hpp"

namespace rtlopt {

enum class Attribute { Power, CriticalPathDelay };

inline std::string to_string(Attribute a)
{
  return a == Attribute::Power ? "power" : "critical_path_delay";
}

inline Attribute attribute_from_string(const std::string& s)
{
  if (s == "power") return Attribute::Power;
  if (s == "critical_path_delay" || s == "cpd" || s == "delay")
    return Attribute::CriticalPathDelay;
  throw ConfigError("unknown attribute: " + s);
}

struct SynthesisConstraints {
  double target_frequency_mhz = 100.0;
  std::string technology = "28nm";
  std::map<std::string, std::string> extra; // passed through to adapters

  bool operator==(const SynthesisConstraints&) const = default;
};

// Internal units are fixed: um^2 / uW / ps. Adapters convert on ingest.
struct PpaMetrics {
  double area_um2 = 0.0;
  double power_uw = 0.0;
  double delay_ps = 0.0;
  std::string backend_id;
  SynthesisConstraints constraints;

  double fmax_ghz() const { return 1000.0 / delay_ps; }

  double metric(Attribute a) const
  {
    return a == Attribute::Power ? power_uw : delay_ps;
  }
};

inline void to_json(nlohmann::json& j, const SynthesisConstraints& c)
{
  j = {{"target_frequency_mhz", c.target_frequency_mhz}, {"technology", c.technology}};
  if (!c.extra.empty()) j["extra"] = c.extra;
}

inline void from_json(const nlohmann::json& j, SynthesisConstraints& c)
{
  c.target_frequency_mhz = j.value("target_frequency_mhz", 100.0);
  c.technology = j.value("technology", std::string("28nm"));
  if (j.contains("extra"))
    c.extra = j["extra"].get<std::map<std::string, std::string>>();
}

inline void to_json(nlohmann::json& j, const PpaMetrics& m)
{
  j = {{"area_um2", m.area_um2},
       {"power_uw", m.power_uw},
       {"delay_ps", m.delay_ps},
       {"fmax_ghz", m.fmax_ghz()},
       {"backend_id", m.backend_id},
       {"constraints", m.constraints}};
}

inline void from_json(const nlohmann::json& j, PpaMetrics& m)
{
  j.at("area_um2").get_to(m.area_um2);
  j.at("power_uw").get_to(m.power_uw);
  j.at("delay_ps").get_to(m.delay_ps);
  m.backend_id = j.value("backend_id", std::string());
  if (j.contains("constraints")) j["constraints"].get_to(m.constraints);
}

// --- validation ------------------------------------------------------------

struct ValidationOk {};
struct SyntaxError { std::string detail; };
struct Unsynthesizable { std::string detail; };
using ValidationResult = std::variant<ValidationOk, SyntaxError, Unsynthesizable>;

inline bool validation_ok(const ValidationResult& r)
{
  return std::holds_alternative<ValidationOk>(r);
}

inline std::string validation_detail(const ValidationResult& r)
{
  if (auto* s = std::get_if<SyntaxError>(&r)) return "syntax error: " + s->detail;
  if (auto* u = std::get_if<Unsynthesizable>(&r)) return "unsynthesizable: " + u->detail;
  return "ok";
}

// --- backend interface -------------------------------------------------------

struct BackendCapabilities {
  bool validates_syntax = false;
  bool reports_area = false;
  bool reports_power = false;
  bool reports_delay = false;
  bool checks_equivalence = false;
  int max_parallelism = 1;
};

class SynthesisBackend {
public:
  virtual ~SynthesisBackend() = default;
  virtual std::string id() const = 0;
  virtual BackendCapabilities capabilities() const = 0;
  virtual ValidationResult validate(const VerilogModule& module) = 0;
  virtual PpaMetrics measure(const VerilogModule& module,
                             const SynthesisConstraints& constraints) = 0;

  // Reserved for adapters that can prove functional equivalence; nullopt
  // means the backend cannot answer.
  virtual std::optional<bool> check_equivalence(const VerilogModule&,
                                                const VerilogModule&)
  {
    return std::nullopt;
  }
};

// --- comparison --------------------------------------------------------------

enum class CompareOutcome { Improved, Regressed, Unchanged };

struct CompareResult {
  CompareOutcome outcome;
  double relative_delta; // (before - after) / before
};

inline CompareResult compare(const PpaMetrics& before, const PpaMetrics& after,
                             Attribute attribute)
{
  if (before.backend_id != after.backend_id)
    throw IncomparableMetrics("backend mismatch: " + before.backend_id + " vs " +
                              after.backend_id);
  if (!(before.constraints == after.constraints))
    throw IncomparableMetrics("constraints mismatch");
  double b = before.metric(attribute);
  double a = after.metric(attribute);
  CompareResult r;
  r.relative_delta = (b - a) / b;
  if (a < b) r.outcome = CompareOutcome::Improved;
  else if (a > b) r.outcome = CompareOutcome::Regressed;
  else r.outcome = CompareOutcome::Unchanged;
  return r;
}

// --- mock backend ------------------------------------------------------------

// Two reference barrel-shifter designs with curated metrics, also used as
// test fixtures across the suite. One pipelines the shift in stages, the
// other shifts in a single expression.
inline constexpr const char* kFixtureBarrelShifterStaged = R"(module barrel_shifter_16bit (
    input [15:0] data,
    input [3:0] shift_amount,
    output reg [15:0] out
);

reg [15:0] stage1_out;
reg [15:0] stage2_out;

always @(*) begin
    stage1_out = (shift_amount[3]) ? data << 8 : data;
end

always @(*) begin
    stage2_out = (shift_amount[2]) ? stage1_out << 4 : stage1_out;
end

always @(*) begin
    out = (shift_amount[1]) ? stage2_out << 2 : stage2_out;
end

endmodule
)";

inline constexpr const char* kFixtureBarrelShifterDirect = R"(module barrel_shifter_16bit (
    input [15:0] data,
    input [3:0] shift_amount,
    output reg [15:0] out
);

    always @(*) begin
        if (shift_amount >= 0) begin
            out = data << shift_amount;
        end else begin
            out = data >> -shift_amount;
        end
    end

endmodule
)";

// Deterministic cost-model backend for tests and desk-scale runs. Metrics
// come from a fixture table keyed by module id; unknown modules fall back to
// a fixed formula over token counts:
//
//   ops    = number of operator-class tokens
//   always = number of `always` keywords
//   depth  = maximum parenthesis nesting depth
//
//   area_um2  =   8.0 + 1.5*ops + 6.0*always + 2.0*depth
//   power_uw  =   5.0 + 0.8*ops + 3.5*always + 1.2*depth
//   delay_ps  = 100.0 + 5.0*ops + 10.0*always + 30.0*depth
//
// Pure function of the module source; constraints are recorded as provenance
// but do not perturb the numbers.
class MockBackend final : public SynthesisBackend {
public:
  MockBackend()
  {
    add_fixture(kFixtureBarrelShifterStaged, 34.902, 23.125, 350.0);
    add_fixture(kFixtureBarrelShifterDirect, 44.856, 29.074, 390.0);
  }

  void add_fixture(const std::string& source, double area_um2, double power_uw,
                   double delay_ps)
  {
    fixtures_[content_id(source)] = {area_um2, power_uw, delay_ps};
  }

  std::string id() const override { return "mock"; }

  BackendCapabilities capabilities() const override
  {
    BackendCapabilities c;
    c.validates_syntax = true;
    c.reports_area = true;
    c.reports_power = true;
    c.reports_delay = true;
    c.max_parallelism = 64;
    return c;
  }

  ValidationResult validate(const VerilogModule& module) override
  {
    std::vector<std::string> regions;
    try {
      regions = extract_module_regions(module.source);
    } catch (const std::exception& e) {
      return SyntaxError{e.what()};
    }
    if (regions.empty()) return SyntaxError{"no module...endmodule region"};
    if (regions.size() > 1) return SyntaxError{"multiple module regions"};

    TokenizerOptions opts;
    opts.bucket_numeric_literals = false;
    auto toks = tokenize_verilog(regions.front(), opts);

    long begins = 0, ends = 0;
    long paren = 0;
    for (std::size_t i = 0; i < toks.size(); ++i) {
      const Token& t = toks[i];
      if (t.kind == TokenKind::Keyword && t.text == "begin") ++begins;
      if (t.kind == TokenKind::Keyword && t.text == "end") ++ends;
      if (t.kind == TokenKind::Punct && t.text == "(") ++paren;
      if (t.kind == TokenKind::Punct && t.text == ")") --paren;
      if (paren < 0) return SyntaxError{"unbalanced parentheses"};
      // simulation-only constructs do not synthesize
      if (t.kind == TokenKind::Operator && t.text == "#" && i + 1 < toks.size() &&
          toks[i + 1].kind == TokenKind::Number)
        return Unsynthesizable{"delay control"};
      if (t.kind == TokenKind::Operator && t.text == "$" && i + 1 < toks.size() &&
          toks[i + 1].kind == TokenKind::Identifier)
        return Unsynthesizable{"system task $" + toks[i + 1].text};
      if (t.kind == TokenKind::Keyword && t.text == "initial")
        return Unsynthesizable{"initial block"};
    }
    if (begins != ends) return SyntaxError{"begin/end mismatch"};
    if (paren != 0) return SyntaxError{"unbalanced parentheses"};
    try {
      parse_module_info(regions.front());
    } catch (const std::exception& e) {
      return SyntaxError{e.what()};
    }
    return ValidationOk{};
  }

  PpaMetrics measure(const VerilogModule& module,
                     const SynthesisConstraints& constraints) override
  {
    PpaMetrics m;
    m.backend_id = id();
    m.constraints = constraints;

    auto it = fixtures_.find(content_id(module.source));
    if (it == fixtures_.end() && !module.id.empty()) it = fixtures_.find(module.id);
    if (it != fixtures_.end()) {
      m.area_um2 = it->second.area;
      m.power_uw = it->second.power;
      m.delay_ps = it->second.delay;
      return m;
    }

    std::string region = extract_module_region(module.source);
    TokenizerOptions opts;
    opts.bucket_numeric_literals = false;
    auto toks = tokenize_verilog(region, opts);
    double ops = 0, always = 0;
    long depth = 0, max_depth = 0;
    for (const Token& t : toks) {
      if (t.kind == TokenKind::Operator) ++ops;
      if (t.kind == TokenKind::Keyword && t.text == "always") ++always;
      if (t.kind == TokenKind::Punct && t.text == "(") {
        ++depth;
        max_depth = std::max(max_depth, depth);
      }
      if (t.kind == TokenKind::Punct && t.text == ")") --depth;
    }
    double d = static_cast<double>(max_depth);
    m.area_um2 = 8.0 + 1.5 * ops + 6.0 * always + 2.0 * d;
    m.power_uw = 5.0 + 0.8 * ops + 3.5 * always + 1.2 * d;
    m.delay_ps = 100.0 + 5.0 * ops + 10.0 * always + 30.0 * d;
    return m;
  }

private:
  struct Fixture { double area, power, delay; };
  std::unordered_map<std::string, Fixture> fixtures_;
};

} // namespace rtlopt
