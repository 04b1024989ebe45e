#pragma once

#include <array>
#include <cstdint>

namespace mtjrng {

/// Philox4x32-10 block function (Salmon et al., SC'11).  Maps a 128-bit
/// counter and a 64-bit key to 128 random bits.
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key);

/// Substream labels.  A trial's randomness is addressed by
/// (seed, trial, substream, block), so trials never share draws and can be
/// evaluated in any order.
enum class Substream : std::uint32_t {
  kInitialState = 0,
  kWrite = 1,
  kGap = 2,
  kReadReset = 3,
  kBernoulli = 4,
  kGeneric = 5,
};

/// Counter-based generator bound to one (seed, trial, substream) triple.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t trial,
             Substream stream = Substream::kGeneric);

  std::uint32_t next_u32();
  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform();
  /// Standard normal (Box-Muller, pairs cached).
  double normal();

  /// Number of 128-bit blocks consumed so far.
  std::uint64_t blocks_used() const { return block_; }

 private:
  void refill();

  PhiloxKey key_{};
  std::uint32_t trial_lo_ = 0;
  std::uint32_t trial_hi_ = 0;
  std::uint32_t stream_ = 0;
  std::uint64_t block_ = 0;
  PhiloxCounter buffer_{};
  int index_ = 4;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace mtjrng
