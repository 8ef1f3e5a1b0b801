#pragma once

#include <filesystem>
#include <fstream>
#include <regex>
#include <string>

#include <nlohmann/json.hpp>

#include "rtlopt/errors.hpp"
#include "rtlopt/hash.hpp"
#include "rtlopt/process.hpp"
#include "rtlopt/prompts.hpp"
#include "rtlopt/synthesis.hpp"

namespace rtlopt {

// Adapter settings for driving an external synthesis flow. The command is a
// shell template with {source_file}, {constraints_file} and {report_dir}
// placeholders; metrics are pulled from the tool output with one regex per
// metric (capture group 1 holds the number) and scaled into um^2 / uW / ps.
struct ExternalBackendConfig {
  std::string command;
  std::string area_regex = R"(area[^0-9]*([0-9.eE+-]+))";
  std::string power_regex = R"(power[^0-9]*([0-9.eE+-]+))";
  std::string delay_regex = R"(delay[^0-9]*([0-9.eE+-]+))";
  double area_scale = 1.0;
  double power_scale = 1.0;
  double delay_scale = 1.0;
  int validate_timeout_s = 60;
  int measure_timeout_s = 600;
  std::string work_dir; // defaults to a temp dir
};

class ExternalBackend final : public SynthesisBackend {
public:
  explicit ExternalBackend(ExternalBackendConfig config) : config_(std::move(config))
  {
    if (config_.command.empty())
      throw ConfigError("external backend requires a command template");
    if (config_.work_dir.empty())
      config_.work_dir =
          (std::filesystem::temp_directory_path() / "rtlopt-extern").string();
    std::filesystem::create_directories(config_.work_dir);
  }

  std::string id() const override { return "external"; }

  BackendCapabilities capabilities() const override
  {
    BackendCapabilities c;
    c.validates_syntax = true;
    c.reports_area = true;
    c.reports_power = true;
    c.reports_delay = true;
    c.max_parallelism = 1;
    return c;
  }

  ValidationResult validate(const VerilogModule& module) override
  {
    auto run = invoke(module, {}, config_.validate_timeout_s);
    if (run.timed_out || run.spawn_failed)
      throw BackendUnavailable(run.timed_out ? "validate timed out"
                                             : "cannot spawn tool");
    if (run.exit_code == 0) return ValidationOk{};
    // Tools conventionally distinguish parse errors from mapping failures by
    // printing "syntax"; anything else is treated as unsynthesizable.
    if (run.output.find("syntax") != std::string::npos ||
        run.output.find("Syntax") != std::string::npos)
      return SyntaxError{first_line(run.output)};
    return Unsynthesizable{first_line(run.output)};
  }

  PpaMetrics measure(const VerilogModule& module,
                     const SynthesisConstraints& constraints) override
  {
    auto run = invoke(module, constraints, config_.measure_timeout_s);
    if (run.timed_out || run.spawn_failed)
      throw BackendUnavailable(run.timed_out ? "measure timed out"
                                             : "cannot spawn tool");
    if (run.exit_code != 0)
      throw MeasurementFailed("tool exited " + std::to_string(run.exit_code) + ": " +
                              first_line(run.output));

    PpaMetrics m;
    m.backend_id = id();
    m.constraints = constraints;
    m.area_um2 = extract(run.output, config_.area_regex, "area") * config_.area_scale;
    m.power_uw = extract(run.output, config_.power_regex, "power") * config_.power_scale;
    m.delay_ps = extract(run.output, config_.delay_regex, "delay") * config_.delay_scale;
    return m;
  }

private:
  ProcessResult invoke(const VerilogModule& module, const SynthesisConstraints& constraints,
                       int timeout_s)
  {
    namespace fs = std::filesystem;
    std::string stem = module.id.empty() ? content_id(module.source) : module.id;
    fs::path dir = fs::path(config_.work_dir) / stem.substr(0, 16);
    fs::create_directories(dir);

    fs::path src = dir / "design.v";
    {
      std::ofstream out(src);
      out << module.source;
    }
    fs::path cst = dir / "constraints.json";
    {
      std::ofstream out(cst);
      out << nlohmann::json(constraints).dump(2) << "\n";
    }
    fs::path rpt = dir / "reports";
    fs::create_directories(rpt);

    std::string cmd = config_.command;
    cmd = prompts::replace_all(cmd, "{source_file}", src.string());
    cmd = prompts::replace_all(cmd, "{constraints_file}", cst.string());
    cmd = prompts::replace_all(cmd, "{report_dir}", rpt.string());
    return run_shell(cmd, timeout_s);
  }

  static double extract(const std::string& output, const std::string& pattern,
                        const char* what)
  {
    std::regex re(pattern, std::regex::icase);
    std::smatch m;
    if (!std::regex_search(output, m, re) || m.size() < 2)
      throw MeasurementFailed(std::string("report missing ") + what);
    try {
      return std::stod(m[1].str());
    } catch (const std::exception&) {
      throw MeasurementFailed(std::string("unparseable ") + what + ": " + m[1].str());
    }
  }

  static std::string first_line(const std::string& s)
  {
    auto nl = s.find('\n');
    return nl == std::string::npos ? s : s.substr(0, nl);
  }

  ExternalBackendConfig config_;
};

} // namespace rtlopt
