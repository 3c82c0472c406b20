#pragma once

#include <array>
#include <cstdint>

namespace tacpose {

/// Philox4x32-10 counter-based generator (Salmon et al., "Parallel random
/// numbers: as easy as 1, 2, 3", SC'11).
///
/// The 64-bit seed is the key. The 128-bit counter is split into a 64-bit
/// stream id (high words) and a 64-bit block index (low words), so any
/// (seed, stream) pair names an independent, reproducible sequence. Each
/// block yields four 32-bit words consumed in order.
///
/// Derived draws are defined bit-for-bit so that other implementations can
/// reproduce them:
///   - next_u64  = (hi << 32) | lo from two consecutive words (hi first)
///   - uniform   = (next_u64 >> 11) * 2^-53, in [0, 1)
///   - below(n)  = (next_u64 * n) >> 64 (multiply-shift, no rejection)
///   - normal    = Box-Muller cosine branch: sqrt(-2 ln(1 - u1)) cos(2 pi u2)
class Philox {
 public:
  explicit Philox(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint32_t next_u32();
  std::uint64_t next_u64();
  double uniform();
  double uniform(double lo, double hi);
  std::uint64_t below(std::uint64_t n);
  double normal();

  /// Raw block function, exposed for known-answer tests.
  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> counter,
                                            std::array<std::uint32_t, 2> key);

 private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> counter_;
  std::array<std::uint32_t, 4> buffer_{};
  int next_word_ = 4;
};

/// Mixes several integers into a single seed (SplitMix64 finalizer chain).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

}  // namespace tacpose
