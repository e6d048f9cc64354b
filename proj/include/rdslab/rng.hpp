#ifndef RDSLAB_RNG_HPP
#define RDSLAB_RNG_HPP

#include <cstdint>
#include <string_view>

namespace rdslab {

// splitmix64: a seedable 64-bit generator with a closed-form jump structure.
// Substreams are derived by hashing (seed, a, b) through the output mixer, so
// the draw sequence for a given (seed, step, particle) triple is independent
// of evaluation order. The algorithm identifier is recorded in every report
// sidecar; any implementation of splitmix64 reproduces the streams.
class RngStream {
 public:
  static constexpr std::string_view kAlgorithm = "splitmix64";

  explicit RngStream(std::uint64_t seed) : state_(seed) {}

  // Stream keyed by (seed, a, b); b typically indexes a particle, a a step.
  static RngStream substream(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    std::uint64_t key = mix(mix(mix(seed) ^ (a + kGamma)) ^ (b + kGamma));
    return RngStream(key);
  }

  std::uint64_t next_u64() {
    state_ += kGamma;
    return mix(state_);
  }

  // Uniform in [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace rdslab

#endif
