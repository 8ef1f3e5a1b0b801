#pragma once

// Shared fixture corpora and filesystem/process helpers for the test suite.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "rtlopt/corpus.hpp"
#include "rtlopt/process.hpp"

namespace testfix {

inline std::filesystem::path make_temp_dir(const std::string& tag)
{
  static int counter = 0;
  auto dir = std::filesystem::temp_directory_path() /
             ("rtlopt-" + tag + "-" + std::to_string(::getpid()) + "-" +
              std::to_string(++counter));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_file(const std::filesystem::path& p, const std::string& content)
{
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << content;
}

inline std::string read_file(const std::filesystem::path& p)
{
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Goldens are stored with one trailing newline; rendered strings carry none.
inline std::string read_golden(const std::string& name)
{
  std::string text = read_file(std::filesystem::path(RTLOPT_GOLDEN_DIR) / name);
  if (!text.empty() && text.back() == '\n') text.pop_back();
  return text;
}

inline std::string shell_quote(const std::string& s)
{
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += "'\\''";
    else out.push_back(c);
  }
  out += "'";
  return out;
}

inline rtlopt::ProcessResult run_cli(const std::vector<std::string>& args,
                                     int timeout_s = 120)
{
  std::vector<std::string> argv = {RTLOPT_CLI_PATH};
  argv.insert(argv.end(), args.begin(), args.end());
  return rtlopt::run_process(argv, timeout_s);
}

// Runs the CLI with cwd set to `dir`, so relative --out/--proprietary paths
// resolve inside the sandbox.
inline rtlopt::ProcessResult run_cli_in(const std::filesystem::path& dir,
                                        const std::vector<std::string>& args,
                                        int timeout_s = 120)
{
  std::string cmd = "cd " + shell_quote(dir.string()) + " && " +
                    shell_quote(RTLOPT_CLI_PATH);
  for (const auto& a : args) cmd += " " + shell_quote(a);
  return rtlopt::run_shell(cmd, timeout_s);
}

inline rtlopt::VerilogModule make_module(std::string id, std::string name,
                                         std::string source, std::string category,
                                         int bit_width, rtlopt::CodebaseKind kind)
{
  rtlopt::VerilogModule m;
  m.id = std::move(id);
  m.name = std::move(name);
  m.source = std::move(source);
  m.category = {std::move(category), ""};
  m.bit_width = bit_width;
  m.codebase = kind;
  return m;
}

// --- small reference modules ------------------------------------------------

// Exactly 20 tokens, so an 8-gram guard indexes 13 fingerprints.
inline const char* kTinyModule =
    "module m ( input a , output y ) ; wire b ; assign y = ~ a ; endmodule";

inline const char* kAdder8Draft =
    "module adder8(input [7:0] a, input [7:0] b, output [8:0] y);\n"
    "  assign y = {1'b0, a} + {1'b0, b};\n"
    "endmodule";

inline const char* kAdder8Prop =
    "module adder8(input [7:0] a, input [7:0] b, output [8:0] y);\n"
    "  assign y = a + b;\n"
    "endmodule";

inline const char* kMult4Draft =
    "module mult4(input [3:0] a, input [3:0] b, output [7:0] p);\n"
    "  assign p = a * b;\n"
    "endmodule";

inline const char* kMult4Prop =
    "module mult4(input [3:0] a, input [3:0] b, output [7:0] p);\n"
    "  wire [7:0] pp0 = b[0] ? {4'b0, a} : 8'b0;\n"
    "  wire [7:0] pp1 = b[1] ? {3'b0, a, 1'b0} : 8'b0;\n"
    "  wire [7:0] pp2 = b[2] ? {2'b0, a, 2'b0} : 8'b0;\n"
    "  wire [7:0] pp3 = b[3] ? {1'b0, a, 3'b0} : 8'b0;\n"
    "  assign p = (pp0 + pp1) + (pp2 + pp3);\n"
    "endmodule";

// --- guard corpus -------------------------------------------------------------
//
// Every identifier appears in at least two modules, so the rare-identifier
// rule stays silent and guard behavior is a pure function of n-gram overlap.

inline const char* kGuardA1 =
    "module gma(input [3:0] gin1, input [3:0] gin2, output [3:0] gout);\n"
    "  wire [3:0] gtmp;\n"
    "  assign gtmp = gin1 & gin2;\n"
    "  assign gout = gtmp | gin1;\n"
    "endmodule\n";

inline const char* kGuardA2 =
    "module gma(input [3:0] gin1, input [3:0] gin2, output [3:0] gout);\n"
    "  wire [3:0] gtmp;\n"
    "  assign gtmp = gin1 | gin2;\n"
    "  assign gout = gtmp ^ gin2;\n"
    "endmodule\n";

inline const char* kGuardB1 =
    "module gmb(input [7:0] gx1, input [7:0] gx2, output [7:0] gy);\n"
    "  wire [7:0] gz;\n"
    "  assign gz = gx1 + gx2;\n"
    "  assign gy = gz & gx1;\n"
    "endmodule\n";

inline const char* kGuardB2 =
    "module gmb(input [7:0] gx1, input [7:0] gx2, output [7:0] gy);\n"
    "  wire [7:0] gz;\n"
    "  assign gz = gx1 - gx2;\n"
    "  assign gy = gz | gx2;\n"
    "endmodule\n";

inline rtlopt::Codebase guard_corpus()
{
  rtlopt::Codebase cb;
  cb.kind = rtlopt::CodebaseKind::Proprietary;
  cb.modules.push_back(
      make_module("ga1", "gma", kGuardA1, "Other", 4, cb.kind));
  cb.modules.push_back(
      make_module("ga2", "gma", kGuardA2, "Other", 4, cb.kind));
  cb.modules.push_back(
      make_module("gb1", "gmb", kGuardB1, "Other", 8, cb.kind));
  cb.modules.push_back(
      make_module("gb2", "gmb", kGuardB2, "Other", 8, cb.kind));
  return cb;
}

// --- on-disk corpus for CLI runs ----------------------------------------------
//
// Proprietary identifiers (in1/in2/out1) are shared across both modules and
// disjoint from the targets, so P2 prompts audit clear while any verbatim
// proprietary excerpt still flags.

inline const char* kCliPropFast =
    "module add8_fast(input [7:0] in1, input [7:0] in2, output [7:0] out1);\n"
    "  assign out1 = in1 + in2;\n"
    "endmodule\n";

inline const char* kCliPropLean =
    "module add8_lean(input [7:0] in1, input [7:0] in2, output [7:0] out1);\n"
    "  assign out1 = (in1 + in2) & {8{1'b1}};\n"
    "endmodule\n";

// Strictly loses to both proprietary adders on power and delay.
inline const char* kCliDraftRough =
    "module add8_rough(input [7:0] in1, input [7:0] in2, output [7:0] out1);\n"
    "  assign out1 = ((in1 + in2) + 8'b00000000);\n"
    "endmodule\n";

inline const char* kCliTargetMix =
    "module mix4(input [3:0] a, input [3:0] b, output [3:0] y);\n"
    "  assign y = (a & b) | (a ^ b);\n"
    "endmodule\n";

inline const char* kCliTargetGate =
    "module gate2(input a, input b, output y);\n"
    "  assign y = a & b;\n"
    "endmodule\n";

inline void write_cli_corpus(const std::filesystem::path& root)
{
  write_file(root / "prop" / "add8_fast.v", kCliPropFast);
  write_file(root / "prop" / "add8_lean.v", kCliPropLean);
  write_file(root / "draft" / "add8_rough.v", kCliDraftRough);
  write_file(root / "targets" / "mix4.v", kCliTargetMix);
  write_file(root / "targets" / "gate2.v", kCliTargetGate);
}

} // namespace testfix
