#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace rtlopt {

// splitmix64. Standard-library distributions are not bit-identical across
// implementations; experiment reproducibility requires that the same seed
// yields the same sample on every host, so all randomness goes through this.
class SplitMix64 {
public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next()
  {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, bound). Lemire's multiply-shift rejection method.
  std::uint64_t next_below(std::uint64_t bound)
  {
    if (bound == 0) throw std::invalid_argument("next_below: bound must be positive");
    std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      std::uint64_t r = next();
      if (r >= threshold) return r % bound;
    }
  }

private:
  std::uint64_t state_;
};

// Seeded Fisher-Yates; the first k slots of the shuffle are the sample.
inline std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k, std::uint64_t seed)
{
  if (k > n) throw std::invalid_argument("sample_indices: k exceeds population");
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  SplitMix64 rng(seed);
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i + static_cast<std::size_t>(rng.next_below(n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  return idx;
}

} // namespace rtlopt
