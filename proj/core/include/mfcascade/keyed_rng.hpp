#pragma once

#include <cstdint>

namespace mfc {

/// SplitMix64 finalizer. A bijection on 64-bit words with full avalanche.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Combines two keys into one; order matters.
constexpr std::uint64_t derive_key(std::uint64_t a, std::uint64_t b) noexcept {
  return mix64(mix64(a) ^ (b + 0x632be59bd9b4e019ULL + (a << 6) + (a >> 2)));
}

/// Counter-based stream: the k-th output is a pure function of (key, k).
///
/// Every node of a cascade tree owns one stream keyed by (seed, depth,
/// index), so any node can be regenerated in isolation and the subtree
/// below a word is literally the same random object as the copy mu^w.
/// Normals are produced by Box-Muller rather than std::normal_distribution
/// so that results are bit-identical across standard libraries.
class KeyedStream {
 public:
  explicit KeyedStream(std::uint64_t key) noexcept : key_(key) {}

  static KeyedStream for_node(std::uint64_t seed, int depth, std::uint64_t index) noexcept {
    return KeyedStream(derive_key(derive_key(seed, static_cast<std::uint64_t>(depth) + 1), index));
  }

  std::uint64_t key() const noexcept { return key_; }

  std::uint64_t next_u64() noexcept { return mix64(key_ ^ mix64(counter_++)); }

  /// Uniform on [0,1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on (0,1].
  double uniform_open() noexcept { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

  double normal() noexcept;

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace mfc
