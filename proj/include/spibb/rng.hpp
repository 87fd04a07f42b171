#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace spibb {

/// One splitmix64 step: advances `state` and returns the mixed output.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Stateless mix of a single 64-bit value.
inline std::uint64_t mix64(std::uint64_t x) {
  std::uint64_t s = x;
  return splitmix64(s);
}

inline std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Derives a child seed from a master seed and a sequence of tags by
/// chaining splitmix64. The same (master, tags) always yields the same
/// child, so any phase of a run can be reproduced in isolation.
inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> tags) {
  std::uint64_t h = mix64(master);
  for (std::uint64_t t : tags) h = mix64(h ^ t);
  return h;
}

/// Deterministic random source. All sampling in the library goes through
/// this class rather than the std distribution objects, whose algorithms
/// are implementation-defined; output is therefore stable across builds.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t raw() { return gen_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n).
  int uniform_int(int n) {
    int v = static_cast<int>(uniform() * n);
    return v >= n ? n - 1 : v;
  }

  /// Samples an index from an explicit probability row by inverse-CDF scan.
  /// Entries <= 0 are never returned; a tiny floating-point shortfall in a
  /// row that sums to ~1 falls back to the last positive entry.
  int categorical(const std::vector<double>& probs) {
    double u = uniform();
    double acc = 0.0;
    int last = -1;
    for (int i = 0; i < static_cast<int>(probs.size()); ++i) {
      if (probs[i] <= 0.0) continue;
      last = i;
      acc += probs[i];
      if (u < acc) return i;
    }
    return last;
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace spibb
