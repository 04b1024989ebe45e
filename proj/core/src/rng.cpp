#include "mtjrng/rng.hpp"

#include <cmath>
#include <numbers>

namespace mtjrng {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace

PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kPhiloxW0;
      key[1] += kPhiloxW1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
    mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t trial,
                       Substream stream)
    : key_{static_cast<std::uint32_t>(seed),
           static_cast<std::uint32_t>(seed >> 32)},
      trial_lo_(static_cast<std::uint32_t>(trial)),
      trial_hi_(static_cast<std::uint32_t>(trial >> 32)),
      stream_(static_cast<std::uint32_t>(stream)) {}

void CounterRng::refill() {
  // The substream and the low 24 bits of the block index share one word;
  // 2^24 blocks (6.7e7 draws) per substream is far above any single trial.
  const PhiloxCounter ctr{trial_lo_, trial_hi_,
                          static_cast<std::uint32_t>(block_ >> 24),
                          (stream_ << 24) ^ static_cast<std::uint32_t>(block_ & 0xFFFFFFu)};
  buffer_ = philox4x32_10(ctr, key_);
  ++block_;
  index_ = 0;
}

std::uint32_t CounterRng::next_u32() {
  if (index_ == 4) refill();
  return buffer_[index_++];
}

std::uint64_t CounterRng::next_u64() {
  const std::uint64_t hi = next_u32();
  return (hi << 32) | next_u32();
}

double CounterRng::uniform() {
  // (k + 0.5) / 2^53 keeps both endpoints out.
  const std::uint64_t k = next_u64() >> 11;
  return (static_cast<double>(k) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  const double r = std::sqrt(-2.0 * std::log(uniform()));
  const double phi = 2.0 * std::numbers::pi * uniform();
  spare_normal_ = r * std::sin(phi);
  has_spare_ = true;
  return r * std::cos(phi);
}

}  // namespace mtjrng
