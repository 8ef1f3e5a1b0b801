#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_set>
#include <vector>

#include "rtlopt/errors.hpp"

namespace rtlopt {

// Token-level Verilog handling: enough structure to find module boundaries,
// port declarations and identifier usage. No elaboration, no preprocessing.
// Real parsing happens inside the synthesis backend.

enum class TokenKind { Identifier, Keyword, Number, Operator, Punct, String };

struct Token {
  TokenKind kind;
  std::string text;

  bool operator==(const Token&) const = default;
};

inline const std::unordered_set<std::string>& verilog_keywords()
{
  static const std::unordered_set<std::string> kw = {
      "always", "and", "assign", "automatic", "begin", "buf", "bufif0", "bufif1",
      "case", "casex", "casez", "cell", "cmos", "config", "deassign", "default",
      "defparam", "design", "disable", "edge", "else", "end", "endcase",
      "endconfig", "endfunction", "endgenerate", "endmodule", "endprimitive",
      "endspecify", "endtable", "endtask", "event", "for", "force", "forever",
      "fork", "function", "generate", "genvar", "if", "ifnone", "incdir",
      "include", "initial", "inout", "input", "instance", "integer", "join",
      "large", "liblist", "library", "localparam", "logic", "macromodule",
      "medium", "module", "nand", "negedge", "nmos", "nor", "noshowcancelled",
      "not", "notif0", "notif1", "or", "output", "parameter", "pmos", "posedge",
      "primitive", "pull0", "pull1", "pulldown", "pullup", "pulsestyle_onevent",
      "pulsestyle_ondetect", "rcmos", "real", "realtime", "reg", "release",
      "repeat", "rnmos", "rpmos", "rtran", "rtranif0", "rtranif1", "scalared",
      "showcancelled", "signed", "small", "specify", "specparam", "strong0",
      "strong1", "supply0", "supply1", "table", "task", "time", "tran",
      "tranif0", "tranif1", "tri", "tri0", "tri1", "triand", "trior", "trireg",
      "unsigned", "use", "vectored", "wait", "wand", "weak0", "weak1", "while",
      "wire", "wor", "xnor", "xor"};
  return kw;
}

inline bool is_ident_start(char c)
{
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

inline bool is_ident_char(char c)
{
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

struct TokenizerOptions {
  // Replace numeric literals with a width-class bucket so similarity reflects
  // structure rather than constant values. Must stay off in leakage-guard
  // mode, where literal reuse is exactly what we look for.
  bool bucket_numeric_literals = true;
};

namespace detail {

inline bool is_base_char(char c)
{
  switch (c) {
    case 'b': case 'B': case 'o': case 'O': case 'd': case 'D': case 'h': case 'H':
      return true;
    default:
      return false;
  }
}

inline bool is_value_char(char c)
{
  return std::isxdigit(static_cast<unsigned char>(c)) || c == '_' || c == 'x' ||
         c == 'X' || c == 'z' || c == 'Z' || c == '?';
}

// Longest-match operator table; multi-character first.
inline const std::vector<std::string>& operator_table()
{
  static const std::vector<std::string> ops = {
      "<<<", ">>>", "===", "!==", "<->", "**",  "<<", ">>", "<=", ">=", "==",
      "!=",  "&&",  "||",  "~&", "~|", "~^", "^~", "->", "=>", "+:", "-:",
      "::",  "+",   "-",   "*",  "/",  "%",  "&",  "|",  "^",  "~",  "!",
      "<",   ">",   "=",   "?",  "@",  "#",  "`",  "\\", "'"};
  return ops;
}

} // namespace detail

inline std::vector<Token> tokenize_verilog(std::string_view source,
                                           const TokenizerOptions& opts = {})
{
  std::vector<Token> out;
  const std::size_t n = source.size();
  std::size_t i = 0;
  while (i < n) {
    char c = source[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v') {
      ++i;
      continue;
    }
    // comments
    if (c == '/' && i + 1 < n && source[i + 1] == '/') {
      while (i < n && source[i] != '\n') ++i;
      continue;
    }
    if (c == '/' && i + 1 < n && source[i + 1] == '*') {
      std::size_t end = source.find("*/", i + 2);
      i = (end == std::string_view::npos) ? n : end + 2;
      continue;
    }
    // strings
    if (c == '"') {
      std::size_t j = i + 1;
      while (j < n && source[j] != '"') {
        if (source[j] == '\\' && j + 1 < n) ++j;
        ++j;
      }
      if (j < n) ++j;
      out.push_back({TokenKind::String, std::string(source.substr(i, j - i))});
      i = j;
      continue;
    }
    // identifiers / keywords
    if (is_ident_start(c)) {
      std::size_t j = i + 1;
      while (j < n && is_ident_char(source[j])) ++j;
      std::string text(source.substr(i, j - i));
      // sized literal with whitespace-free form handled below; a bare size
      // followed by 'base is caught in the digit branch
      TokenKind kind = verilog_keywords().count(text) ? TokenKind::Keyword
                                                      : TokenKind::Identifier;
      out.push_back({kind, std::move(text)});
      i = j;
      continue;
    }
    // numbers: [size]'base value | decimal | real
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '\'' && i + 1 < n && detail::is_base_char(source[i + 1]))) {
      std::size_t j = i;
      std::string size_digits;
      while (j < n && (std::isdigit(static_cast<unsigned char>(source[j])) || source[j] == '_')) {
        if (source[j] != '_') size_digits.push_back(source[j]);
        ++j;
      }
      std::size_t after_size = j;
      while (after_size < n && (source[after_size] == ' ' || source[after_size] == '\t'))
        ++after_size;
      bool based = after_size + 1 < n && source[after_size] == '\'' &&
                   (detail::is_base_char(source[after_size + 1]) ||
                    ((source[after_size + 1] == 's' || source[after_size + 1] == 'S') &&
                     after_size + 2 < n && detail::is_base_char(source[after_size + 2])));
      if (based) {
        j = after_size + 1;
        if (source[j] == 's' || source[j] == 'S') ++j;
        ++j; // base char
        while (j < n && detail::is_value_char(source[j])) ++j;
        std::string text(source.substr(i, j - i));
        if (opts.bucket_numeric_literals) {
          text = size_digits.empty() ? std::string("<num>") : "<num" + size_digits + ">";
        }
        out.push_back({TokenKind::Number, std::move(text)});
        i = j;
        continue;
      }
      // plain decimal or real
      j = i;
      while (j < n && (std::isdigit(static_cast<unsigned char>(source[j])) || source[j] == '_')) ++j;
      if (j < n && source[j] == '.' && j + 1 < n &&
          std::isdigit(static_cast<unsigned char>(source[j + 1]))) {
        ++j;
        while (j < n && std::isdigit(static_cast<unsigned char>(source[j]))) ++j;
      }
      if (j < n && (source[j] == 'e' || source[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < n && (source[k] == '+' || source[k] == '-')) ++k;
        if (k < n && std::isdigit(static_cast<unsigned char>(source[k]))) {
          j = k;
          while (j < n && std::isdigit(static_cast<unsigned char>(source[j]))) ++j;
        }
      }
      std::string text(source.substr(i, j - i));
      if (opts.bucket_numeric_literals) text = "<num>";
      out.push_back({TokenKind::Number, std::move(text)});
      i = j;
      continue;
    }
    // punctuation
    if (c == '(' || c == ')' || c == '[' || c == ']' || c == '{' || c == '}' ||
        c == ';' || c == ',' || c == '.' || c == ':') {
      if (c == ':' && i + 1 < n && source[i + 1] == ':') {
        out.push_back({TokenKind::Operator, "::"});
        i += 2;
        continue;
      }
      out.push_back({TokenKind::Punct, std::string(1, c)});
      ++i;
      continue;
    }
    // operators, longest match first
    bool matched = false;
    for (const auto& op : detail::operator_table()) {
      if (source.substr(i, op.size()) == std::string_view(op)) {
        out.push_back({TokenKind::Operator, op});
        i += op.size();
        matched = true;
        break;
      }
    }
    if (!matched) {
      out.push_back({TokenKind::Operator, std::string(1, c)});
      ++i;
    }
  }
  return out;
}

inline std::vector<std::string> token_texts(const std::vector<Token>& tokens)
{
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(t.text);
  return out;
}

// --- module region extraction ------------------------------------------

namespace detail {

inline bool word_boundary_before(std::string_view text, std::size_t pos)
{
  return pos == 0 || !is_ident_char(text[pos - 1]);
}

inline bool word_boundary_after(std::string_view text, std::size_t end)
{
  return end >= text.size() || !is_ident_char(text[end]);
}

// A `module` keyword only opens a region when followed by an identifier and
// then one of ( ; #, which rules out the word appearing in prose.
inline bool looks_like_module_header(std::string_view text, std::size_t kw_end)
{
  std::size_t i = kw_end;
  while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  if (i >= text.size() || !is_ident_start(text[i])) return false;
  while (i < text.size() && is_ident_char(text[i])) ++i;
  while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  return i < text.size() && (text[i] == '(' || text[i] == ';' || text[i] == '#');
}

} // namespace detail

// All `module ... endmodule` spans in the text, verbatim. Comments and code
// fences around a span do not disturb it.
inline std::vector<std::string> extract_module_regions(std::string_view text)
{
  std::vector<std::string> regions;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t start = text.find("module", pos);
    if (start == std::string_view::npos) break;
    std::size_t kw_end = start + 6;
    if (!detail::word_boundary_before(text, start) ||
        !detail::word_boundary_after(text, kw_end) ||
        !detail::looks_like_module_header(text, kw_end)) {
      pos = kw_end;
      continue;
    }
    std::size_t search = kw_end;
    std::size_t end = std::string_view::npos;
    while (search < text.size()) {
      std::size_t cand = text.find("endmodule", search);
      if (cand == std::string_view::npos) break;
      if (detail::word_boundary_before(text, cand) &&
          detail::word_boundary_after(text, cand + 9)) {
        end = cand + 9;
        break;
      }
      search = cand + 9;
    }
    if (end == std::string_view::npos) break;
    regions.emplace_back(text.substr(start, end - start));
    pos = end;
  }
  return regions;
}

// First span only; the common case for single-module sources and for pulling
// code out of a model response.
inline std::string extract_module_region(std::string_view text)
{
  auto regions = extract_module_regions(text);
  if (regions.empty()) throw NotAModule("no module...endmodule region found");
  return regions.front();
}

// --- port parsing --------------------------------------------------------

enum class PortDir { Input, Output, Inout, Unknown };

struct Port {
  std::string name;
  PortDir dir = PortDir::Unknown;
  // 1 for scalar ports, |msb-lsb|+1 for constant ranges, 0 when the range is
  // not a pair of integer literals (parameterised widths).
  int width = 1;
  std::string range_text; // normalized "[msb:lsb]" or empty

  bool operator==(const Port&) const = default;
};

struct ModuleInfo {
  std::string name;
  std::vector<Port> ports;
};

namespace detail {

inline std::optional<long> token_as_int(const Token& t)
{
  if (t.kind != TokenKind::Number) return std::nullopt;
  // bucketed tokens never reach here; port parsing tokenizes without bucketing
  std::string digits;
  for (char c : t.text) {
    if (std::isdigit(static_cast<unsigned char>(c))) digits.push_back(c);
    else if (c == '_') continue;
    else return std::nullopt;
  }
  if (digits.empty()) return std::nullopt;
  try {
    return std::stol(digits);
  } catch (...) {
    return std::nullopt;
  }
}

// Parses "[ a : b ]" starting at tokens[i] == "[". Returns index past "]".
inline std::size_t parse_range(const std::vector<Token>& toks, std::size_t i, int& width,
                               std::string& range_text)
{
  std::size_t j = i + 1;
  int bracket_depth = 1;
  std::vector<Token> inner;
  while (j < toks.size() && bracket_depth > 0) {
    if (toks[j].kind == TokenKind::Punct && toks[j].text == "[") ++bracket_depth;
    if (toks[j].kind == TokenKind::Punct && toks[j].text == "]") {
      --bracket_depth;
      if (bracket_depth == 0) break;
    }
    inner.push_back(toks[j]);
    ++j;
  }
  range_text = "[";
  for (std::size_t k = 0; k < inner.size(); ++k) {
    if (k) range_text += " ";
    range_text += inner[k].text;
  }
  range_text += "]";
  width = 0;
  if (inner.size() == 3 && inner[1].kind == TokenKind::Punct && inner[1].text == ":") {
    auto msb = token_as_int(inner[0]);
    auto lsb = token_as_int(inner[2]);
    if (msb && lsb) width = static_cast<int>(std::abs(*msb - *lsb)) + 1;
  }
  return j < toks.size() ? j + 1 : j;
}

} // namespace detail

// Extracts the module name and port list from the first module region.
// Handles ANSI headers and non-ANSI bodies with input/output declarations.
inline ModuleInfo parse_module_info(std::string_view source)
{
  std::string region = extract_module_region(source);
  TokenizerOptions opts;
  opts.bucket_numeric_literals = false;
  auto toks = tokenize_verilog(region, opts);

  ModuleInfo info;
  std::size_t i = 0;
  while (i < toks.size() && !(toks[i].kind == TokenKind::Keyword && toks[i].text == "module"))
    ++i;
  ++i;
  if (i < toks.size() && toks[i].kind == TokenKind::Identifier) {
    info.name = toks[i].text;
    ++i;
  } else {
    throw NotAModule("module keyword without a name");
  }
  // skip parameter list  #( ... )
  if (i < toks.size() && toks[i].kind == TokenKind::Operator && toks[i].text == "#") {
    ++i;
    if (i < toks.size() && toks[i].text == "(") {
      int depth = 0;
      while (i < toks.size()) {
        if (toks[i].text == "(") ++depth;
        if (toks[i].text == ")") {
          --depth;
          if (depth == 0) { ++i; break; }
        }
        ++i;
      }
    }
  }

  std::vector<Port> header_ports;
  bool ansi_styles_seen = false;
  if (i < toks.size() && toks[i].kind == TokenKind::Punct && toks[i].text == "(") {
    // split the header port list on top-level commas
    std::size_t j = i + 1;
    int depth = 1;
    std::vector<std::vector<Token>> groups(1);
    while (j < toks.size() && depth > 0) {
      const Token& t = toks[j];
      if (t.text == "(" ) ++depth;
      else if (t.text == ")") {
        --depth;
        if (depth == 0) break;
      }
      if (depth == 1 && t.kind == TokenKind::Punct && t.text == ",") {
        groups.emplace_back();
      } else {
        groups.back().push_back(t);
      }
      ++j;
    }
    i = j;
    PortDir current = PortDir::Unknown;
    int current_width = 1;
    std::string current_range;
    for (auto& g : groups) {
      if (g.empty()) continue;
      std::string name;
      bool saw_dir_or_range = false;
      for (std::size_t k = 0; k < g.size(); ++k) {
        const Token& t = g[k];
        if (t.kind == TokenKind::Keyword) {
          if (t.text == "input") { current = PortDir::Input; current_width = 1; current_range.clear(); saw_dir_or_range = true; }
          else if (t.text == "output") { current = PortDir::Output; current_width = 1; current_range.clear(); saw_dir_or_range = true; }
          else if (t.text == "inout") { current = PortDir::Inout; current_width = 1; current_range.clear(); saw_dir_or_range = true; }
          continue;
        }
        if (t.kind == TokenKind::Punct && t.text == "[") {
          std::vector<Token> sub(g.begin() + static_cast<long>(k), g.end());
          int w = 0;
          std::string rt;
          std::size_t consumed = detail::parse_range(sub, 0, w, rt);
          current_width = w;
          current_range = rt;
          saw_dir_or_range = true;
          k += consumed - 1;
          continue;
        }
        if (t.kind == TokenKind::Identifier) name = t.text; // last identifier wins
      }
      if (name.empty()) continue;
      if (saw_dir_or_range) ansi_styles_seen = true;
      header_ports.push_back({name, current, current_width, current_range});
    }
  }

  // Non-ANSI: directions declared in the body. Also catches header ports that
  // carried no decoration at all.
  if (!ansi_styles_seen && !header_ports.empty()) {
    for (std::size_t k = 0; k < toks.size(); ++k) {
      const Token& t = toks[k];
      if (t.kind != TokenKind::Keyword ||
          (t.text != "input" && t.text != "output" && t.text != "inout"))
        continue;
      PortDir dir = t.text == "input" ? PortDir::Input
                    : t.text == "output" ? PortDir::Output : PortDir::Inout;
      int width = 1;
      std::string range_text;
      std::size_t j = k + 1;
      // optional net type / signedness, then optional range, then names
      while (j < toks.size() && toks[j].kind == TokenKind::Keyword) ++j;
      if (j < toks.size() && toks[j].kind == TokenKind::Punct && toks[j].text == "[") {
        j = detail::parse_range(toks, j, width, range_text);
      }
      while (j < toks.size() && !(toks[j].kind == TokenKind::Punct && toks[j].text == ";")) {
        if (toks[j].kind == TokenKind::Identifier) {
          for (auto& p : header_ports) {
            if (p.name == toks[j].text) {
              p.dir = dir;
              p.width = width;
              p.range_text = range_text;
            }
          }
        }
        ++j;
      }
      k = j;
    }
  }

  info.ports = std::move(header_ports);
  return info;
}

// Widest constant port range; 0 means unknown (no ranged ports).
inline int infer_bit_width(const ModuleInfo& info)
{
  int best = 0;
  for (const auto& p : info.ports)
    if (!p.range_text.empty() && p.width > best) best = p.width;
  return best;
}

// Port-interface equality: same (name, direction, width) sets. The stand-in
// for functional equivalence of an optimized module against its original.
inline bool same_port_interface(const ModuleInfo& a, const ModuleInfo& b)
{
  if (a.ports.size() != b.ports.size()) return false;
  auto key = [](const Port& p) {
    return std::tuple<std::string, int, int>(p.name, static_cast<int>(p.dir), p.width);
  };
  std::vector<std::tuple<std::string, int, int>> ka, kb;
  for (const auto& p : a.ports) ka.push_back(key(p));
  for (const auto& p : b.ports) kb.push_back(key(p));
  std::sort(ka.begin(), ka.end());
  std::sort(kb.begin(), kb.end());
  return ka == kb;
}

// Rewrites the declared module name in-place within the region text.
inline std::string rename_module(std::string_view region, const std::string& new_name)
{
  std::size_t pos = 0;
  while (pos < region.size()) {
    std::size_t start = region.find("module", pos);
    if (start == std::string_view::npos) break;
    std::size_t kw_end = start + 6;
    if (detail::word_boundary_before(region, start) &&
        detail::word_boundary_after(region, kw_end) &&
        detail::looks_like_module_header(region, kw_end)) {
      std::size_t i = kw_end;
      while (i < region.size() && std::isspace(static_cast<unsigned char>(region[i]))) ++i;
      std::size_t name_start = i;
      while (i < region.size() && is_ident_char(region[i])) ++i;
      std::string out(region);
      out.replace(name_start, i - name_start, new_name);
      return out;
    }
    pos = kw_end;
  }
  return std::string(region);
}

} // namespace rtlopt
