#pragma once

// Counter-based generator: word i of a stream is a pure function of
// (key, i), so draws can be produced in any order or partition and
// still agree bit for bit.

#include <cstdint>

#include "mpiso/dyadic.hpp"

namespace mpiso {

class CounterRng {
public:
  explicit CounterRng(std::uint64_t seed) : key_(mix(seed ^ 0x6a09e667f3bcc909ULL)) {}

  std::uint64_t seed_key() const { return key_; }

  /// 64 random bits at position `counter`.
  std::uint64_t at(std::uint64_t counter) const { return mix(key_ + mix(counter + 0x9e3779b97f4a7c15ULL)); }

  /// Independent child stream.
  CounterRng split(std::uint64_t stream) const { return CounterRng(key_, stream); }

  /// A `bits`-bit UnitScalar for draw `index`, assembled from
  /// ceil(bits/64) consecutive words.
  UnitScalar unit_scalar(std::uint64_t index, unsigned bits) const;

  /// Uniform double in [0,1) with 53 bits for draw `index`.
  double unit_double(std::uint64_t index) const {
    return static_cast<double>(at(index) >> 11) * 0x1.0p-53;
  }

private:
  CounterRng(std::uint64_t parent, std::uint64_t stream) : key_(mix(parent ^ mix(stream + 0xbb67ae8584caa73bULL))) {}

  // SplitMix64 finalizer.
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
};

}  // namespace mpiso
