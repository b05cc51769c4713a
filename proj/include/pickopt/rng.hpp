#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace pickopt {

// splitmix64 finalizer; used for seed derivation and hash mixing.
inline uint64_t mix64(uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Seed derivation rules. Every pipeline stage derives its own seed from the
// master seed and a stage tag, and per-item substreams derive from the stage
// seed and the item index. Both rules are pure so independent runs (and
// independent implementations) can reproduce any substream directly:
//   derive_seed(seed, tag)   = mix64(seed ^ fnv1a64(tag))
//   derive_seed(seed, index) = mix64(seed ^ (0x9e3779b97f4a7c15 * (index + 1)))
inline uint64_t derive_seed(uint64_t seed, std::string_view tag) {
  return mix64(seed ^ fnv1a64(tag));
}

inline uint64_t derive_seed(uint64_t seed, uint64_t index) {
  return mix64(seed ^ (0x9e3779b97f4a7c15ULL * (index + 1)));
}

// Deterministic random stream with explicit draw accounting.
//
// The generator is splitmix64, advanced once per raw output. Gaussians use
// the Box-Muller transform without caching, so every gaussian() consumes
// exactly two raw outputs and the draw counters are exact. Draw counts are
// part of the reproducibility contract (callers assert them in tests).
class RngStream {
 public:
  explicit RngStream(uint64_t seed) : state_(seed) {}

  uint64_t next_raw() {
    ++raw_count_;
    state_ += 0x9e3779b97f4a7c15ULL;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double uniform() {
    ++uniform_count_;
    return static_cast<double>(next_raw() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [lo, hi] inclusive. Modulo bias is negligible for the
  // small ranges used here (< 2^32).
  int64_t uniform_int(int64_t lo, int64_t hi) {
    ++uniform_count_;
    const uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
    return lo + static_cast<int64_t>(next_raw() % span);
  }

  // Standard normal via Box-Muller; exactly two raw outputs per call.
  double gaussian() {
    ++gaussian_count_;
    const double u1 =
        (static_cast<double>(next_raw() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
    const double u2 = static_cast<double>(next_raw() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  double gaussian(double mean, double stddev) {
    return mean + stddev * gaussian();
  }

  uint64_t raw_count() const { return raw_count_; }
  uint64_t uniform_count() const { return uniform_count_; }
  uint64_t gaussian_count() const { return gaussian_count_; }

 private:
  uint64_t state_;
  uint64_t raw_count_ = 0;
  uint64_t uniform_count_ = 0;
  uint64_t gaussian_count_ = 0;
};

}  // namespace pickopt
