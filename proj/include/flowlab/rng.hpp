#pragma once

#include <cstdint>
#include <string_view>

#include "flowlab/vec3.hpp"

namespace flowlab {

// Counter-based generator: draw k of a stream is a pure function of
// (seed, stream, k), so index ranges can be partitioned across threads and
// serial/parallel runs agree bitwise.  Mixing is the SplitMix64 finalizer.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream) : key_(derive(seed, stream)) {}

  // stream id from a short tag, e.g. "mc.measure"
  static std::uint64_t stream_of(std::string_view tag) {
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a
    for (char c : tag) {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ull;
    }
    return h;
  }

  // k-th draw of this stream, uniform on [0,1)
  double uniform(std::uint64_t k) const {
    return static_cast<double>(mix(key_ + (k + 1) * kGamma) >> 11) * 0x1.0p-53;
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
    return mix(mix(seed + kGamma) ^ stream);
  }

  std::uint64_t key_;
};

}  // namespace flowlab
