#pragma once
// Deterministic, platform-independent randomness.
//
// Everything that draws random numbers in this project goes through
// CounterRng, a counter-based splitmix64 generator. Streams are keyed by
// (seed, tag words), so the value sequence of one consumer never depends
// on how many draws another consumer made.

#include <cstdint>
#include <limits>
#include <string_view>
#include <utility>
#include <vector>

namespace fedkgc {

// FNV-1a, 64-bit. Also the hash behind the hashed tokenizer and weight
// checksums, so it must stay byte-stable across platforms.
constexpr std::uint64_t kFnvOffset = 14695981039346656037ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

constexpr std::uint64_t fnv1a64(std::string_view bytes,
                                std::uint64_t h = kFnvOffset) {
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= kFnvPrime;
  }
  return h;
}

constexpr std::uint64_t fnv1a64_u64(std::uint64_t v, std::uint64_t h) {
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (8 * i)) & 0xffu;
    h *= kFnvPrime;
  }
  return h;
}

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Counter-based splitmix64 stream: output i is mix64(key + i * gamma).
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  std::uint64_t next() {
    counter_ += 0x9e3779b97f4a7c15ull;
    return mix64(key_ + counter_);
  }

  // Uniform in [0, 1).
  double next_double() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  double next_double(double lo, double hi) {
    return lo + next_double() * (hi - lo);
  }

  // Unbiased uniform in [0, n). Rejection sampling on the top block.
  std::uint64_t next_below(std::uint64_t n) {
    std::uint64_t rem = std::numeric_limits<std::uint64_t>::max() % n + 1;
    if (rem == n) rem = 0;  // n divides 2^64
    std::uint64_t x = next();
    while (rem != 0 && x >= 0ull - rem) x = next();
    return x % n;
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Stream key from a seed plus tag words. String tags keep independent
// consumers (weight init per parameter, shuffles per round/client, ...)
// on non-overlapping streams.
inline std::uint64_t derive_key(std::uint64_t seed, std::string_view tag) {
  return mix64(fnv1a64(tag, fnv1a64_u64(seed, kFnvOffset)));
}

inline std::uint64_t derive_key(std::uint64_t seed, std::string_view tag,
                                std::uint64_t a, std::uint64_t b = 0) {
  std::uint64_t h = fnv1a64_u64(seed, kFnvOffset);
  h = fnv1a64(tag, h);
  h = fnv1a64_u64(a, h);
  h = fnv1a64_u64(b, h);
  return mix64(h);
}

// Fisher-Yates with the unbiased bounded draw above; std::shuffle is
// implementation-defined and would break cross-platform reproducibility.
template <typename T>
void deterministic_shuffle(std::vector<T>& v, CounterRng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.next_below(i));
    using std::swap;
    swap(v[i - 1], v[j]);
  }
}

}  // namespace fedkgc
