#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace rtlopt {

// 64-bit FNV-1a. Used for module ids, payload hashes and config
// fingerprints; these are identity keys, not security boundaries.
inline std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ull)
{
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string to_hex(std::uint64_t v)
{
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

inline std::string hash_hex(std::string_view data)
{
  return to_hex(fnv1a64(data));
}

// Collapses every whitespace run to a single space and trims the ends,
// so formatting-only edits do not change a module's identity.
inline std::string normalize_whitespace(std::string_view text)
{
  std::string out;
  out.reserve(text.size());
  bool in_ws = true;
  for (char c : text) {
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v') {
      in_ws = true;
      continue;
    }
    if (in_ws && !out.empty()) out.push_back(' ');
    in_ws = false;
    out.push_back(c);
  }
  return out;
}

inline std::string content_id(std::string_view source)
{
  return hash_hex(normalize_whitespace(source));
}

} // namespace rtlopt
