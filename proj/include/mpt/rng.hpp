#ifndef MPT_RNG_HPP
#define MPT_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace mpt {

// Counter-based pseudo-random generator. Draw i of stream (seed, stream) is a
// pure integer hash of (seed, stream, i), so sequences are reproducible on any
// platform and independent streams can be derived without shared state.
class CounterRng {
 public:
  CounterRng(uint64_t seed, uint64_t stream)
      : key_(mix64(seed ^ mix64(stream + 0x9E3779B97F4A7C15ull))) {}

  uint64_t next_u64() {
    return mix64(key_ + 0x9E3779B97F4A7C15ull * ++counter_);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * next_double();
  }

  // Standard normal via Box-Muller; consumes two draws per pair.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = next_double();
    double u2 = next_double();
    // Avoid log(0).
    double r = std::sqrt(-2.0 * std::log1p(-u1));
    double t = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return r * std::cos(t);
  }

  // Uniform integer in [0, n), rejection-sampled to remove modulo bias.
  uint64_t below(uint64_t n) {
    if (n <= 1) return 0;
    uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (size_t i = items.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  static uint64_t mix64(uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
  }

 private:
  uint64_t key_;
  uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Stream ids used across the toolkit so subsystems never collide.
namespace rng_stream {
constexpr uint64_t kWeights = 0x100;     // + prunable layer ordinal
constexpr uint64_t kScores = 0x10000;    // + prunable layer ordinal
constexpr uint64_t kShuffle = 0x20000;   // + epoch
constexpr uint64_t kSynthProto = 0x30000;
constexpr uint64_t kSynthNoise = 0x40000;
constexpr uint64_t kRandomMask = 0x50000;
constexpr uint64_t kBench = 0x60000;
}  // namespace rng_stream

}  // namespace mpt

#endif  // MPT_RNG_HPP
