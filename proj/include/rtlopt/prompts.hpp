#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include "rtlopt/corpus.hpp"
#include "rtlopt/errors.hpp"
#include "rtlopt/synthesis.hpp"

namespace rtlopt::prompts {

// Prompt templates are plain text with literal {placeholder} slots filled by
// find/replace. Soft line wraps in the source material are flowed into single
// paragraph lines.

// The published low-CPD extraction prompt reuses the low-power body under a
// high-performance header. Corrected is the default; Verbatim reproduces the
// published text exactly for comparison runs.
enum class PromptStyle { Corrected, VerbatimPaper };

inline const char* kP1PowerTemplate =
    R"(You are an expert in Verilog design specializing in low-power optimization.

I will show you multiple pairs of Verilog implementations where one achieves significantly lower power consumption than the other. Your task is to analyze these examples and extract general design principles for low-power Verilog coding.

LEARNING CONTEXT - Power-Efficient vs Power-Inefficient Examples:

{context_examples}

Based on these examples, provide general, high-level lessons or best practices for writing low-power Verilog code. Focus on:

1. Pattern Recognition: What coding patterns consistently lead to better power efficiency?

2. Design Principles: What general principles can be applied across different designs?

3. Common Pitfalls: What practices should be avoided for power optimization?

4. Optimization Strategies: What strategies work well for reducing power consumption?

Provide actionable, generalizable design principles that could be applied to the current design task. Do not reference specific code details from the examples, but instead extract the underlying principles that make implementations more power-efficient.)";

inline const char* kP1DelayTemplateVerbatim =
    R"(You are an expert in Verilog design specializing in high-performance optimization.

I will show you multiple pairs of Verilog implementations where one achieves significantly lower critical path delay than the other. Your task is to analyze these examples and extract general design principles for high-performance Verilog coding.

LEARNING CONTEXT - Power-Efficient vs Power-Inefficient Examples:

{context_examples}

Based on these examples, provide general, high-level lessons or best practices for writing low-power Verilog code. Focus on:

1. Pattern Recognition: What coding patterns consistently lead to better power efficiency?

2. Design Principles: What general principles can be applied across different designs?

3. Common Pitfalls: What practices should be avoided for power optimization?

4. Optimization Strategies: What strategies work well for reducing power consumption?

Provide actionable, generalizable design principles that could be applied to the current design task. Do not reference specific code details from the examples, but instead extract the underlying principles that make implementations more power-efficient.)";

inline const char* kP1DelayTemplateCorrected =
    R"(You are an expert in Verilog design specializing in high-performance optimization.

I will show you multiple pairs of Verilog implementations where one achieves significantly lower critical path delay than the other. Your task is to analyze these examples and extract general design principles for high-performance Verilog coding.

LEARNING CONTEXT - Delay-Efficient vs Delay-Inefficient Examples:

{context_examples}

Based on these examples, provide general, high-level lessons or best practices for writing low critical path delay Verilog code. Focus on:

1. Pattern Recognition: What coding patterns consistently lead to lower critical path delay?

2. Design Principles: What general principles can be applied across different designs?

3. Common Pitfalls: What practices should be avoided for delay optimization?

4. Optimization Strategies: What strategies work well for reducing critical path delay?

Provide actionable, generalizable design principles that could be applied to the current design task. Do not reference specific code details from the examples, but instead extract the underlying principles that make implementations achieve lower critical path delay.)";

inline const char* kP2Template =
    R"(Here is a general lesson for writing {target} Verilog:

{design principle}

Please optimize the following Verilog code for {target}, following the above lesson. Do not copy any code from other sources, only improve the given code.

Verilog code:

```verilog
{verilog to optimize}
```)";

inline std::string target_phrase(Attribute attr)
{
  return attr == Attribute::Power ? "low-power" : "low critical path delay";
}

inline std::string replace_all(std::string text, const std::string& slot,
                               const std::string& value)
{
  std::size_t pos = 0;
  while ((pos = text.find(slot, pos)) != std::string::npos) {
    text.replace(pos, slot.size(), value);
    pos += value.size();
  }
  return text;
}

// One contrastive example as shown to the extraction model: draft first,
// proprietary second, with explicit labels and the attribute's metric value.
struct ExampleBlock {
  std::string instruction;
  std::string draft_source;
  std::string proprietary_source;
  double draft_metric = 0.0;
  double proprietary_metric = 0.0;
};

namespace detail {

inline std::string format_metric(Attribute attr, double value)
{
  char buf[64];
  const char* label = attr == Attribute::Power ? "power" : "critical path delay";
  const char* unit = attr == Attribute::Power ? "uW" : "ps";
  std::snprintf(buf, sizeof(buf), "%s: %.4f %s", label, value, unit);
  return buf;
}

inline std::string render_block(const ExampleBlock& block, Attribute attr, int index)
{
  std::string out;
  out += "Example " + std::to_string(index) + ":\n";
  out += "Instruction: " + block.instruction + "\n\n";
  out += "Inefficient implementation (" + format_metric(attr, block.draft_metric) +
         "):\n```verilog\n" + block.draft_source + "\n```\n\n";
  out += "Efficient implementation (" + format_metric(attr, block.proprietary_metric) +
         "):\n```verilog\n" + block.proprietary_source + "\n```";
  return out;
}

} // namespace detail

inline std::string render_context_examples(const std::vector<ExampleBlock>& blocks,
                                           Attribute attr)
{
  std::string out;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (i) out += "\n\n";
    out += detail::render_block(blocks[i], attr, static_cast<int>(i) + 1);
  }
  return out;
}

inline std::string render_p1(const std::vector<ExampleBlock>& blocks, Attribute attr,
                             PromptStyle style = PromptStyle::Corrected)
{
  if (blocks.empty()) throw ConfigError("render_p1 requires at least one example");
  const char* tmpl = attr == Attribute::Power ? kP1PowerTemplate
                     : style == PromptStyle::VerbatimPaper ? kP1DelayTemplateVerbatim
                                                           : kP1DelayTemplateCorrected;
  return replace_all(tmpl, "{context_examples}", render_context_examples(blocks, attr));
}

inline std::string join_principles(const std::vector<std::string>& principles)
{
  if (principles.size() == 1) return principles.front();
  std::string out;
  for (std::size_t i = 0; i < principles.size(); ++i) {
    if (i) out += "\n";
    out += std::to_string(i + 1) + ". " + principles[i];
  }
  return out;
}

inline std::string render_p2(const std::string& target_source,
                             const std::vector<std::string>& principles, Attribute attr)
{
  if (principles.empty()) throw ConfigError("render_p2 requires at least one principle");
  std::string text = kP2Template;
  text = replace_all(text, "{target}", target_phrase(attr));
  text = replace_all(text, "{design principle}", join_principles(principles));
  text = replace_all(text, "{verilog to optimize}", target_source);
  return text;
}

} // namespace rtlopt::prompts
