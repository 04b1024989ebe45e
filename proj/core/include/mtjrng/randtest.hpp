#pragma once

// Statistical checks on a bit sequence: frequency (monobit), runs, block
// frequency and serial autocorrelation.  Bits are 0/1 bytes.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mtjrng/trng.hpp"

namespace mtjrng {

struct TestResult {
  std::string name;
  double statistic = 0.0;
  double p_value = 0.0;
  bool applicable = true;
  bool pass = false;  // filled in against alpha by the suite
};

/// S = |ones - zeros| / sqrt(n), p = erfc(S / sqrt 2).  Requires n >= 100.
TestResult monobit_test(std::span<const std::uint8_t> bits);

/// Number of runs V; p = erfc(|V - 2 n pi (1 - pi)| / (2 sqrt(2n) pi (1 - pi))).
/// Not applicable (p = 0) when |pi - 1/2| >= 2 / sqrt(n).
TestResult runs_test(std::span<const std::uint8_t> bits);

/// chi^2 = 4 M sum (pi_i - 1/2)^2 over floor(n / M) blocks,
/// p = Q(N / 2, chi^2 / 2).  Requires n >= M.
TestResult block_frequency_test(std::span<const std::uint8_t> bits,
                                std::size_t block = 128);

/// Sample autocorrelation at `lag`, in [-1, 1].  A constant sequence has
/// correlation 1.
double serial_autocorrelation(std::span<const std::uint8_t> bits,
                              std::size_t lag = 1);

/// z = rho sqrt(n), p = erfc(|z| / sqrt 2).
TestResult autocorrelation_test(std::span<const std::uint8_t> bits,
                                std::size_t lag = 1);

struct RandTestReport {
  std::size_t n_bits = 0;
  double alpha = 0.01;
  std::vector<TestResult> tests;
  bool verdict = false;  // AND of every pass
};

/// Runs all four tests; pass means applicable and p >= alpha. The block test
/// is not applicable to streams shorter than one block.
RandTestReport run_randomness_suite(std::span<const std::uint8_t> bits,
                                    double alpha = 0.01,
                                    std::size_t block = 128,
                                    std::size_t lag = 1);
inline RandTestReport run_randomness_suite(const BitStream& bits,
                                           double alpha = 0.01) {
  const auto unpacked = bits.unpacked();
  return run_randomness_suite(unpacked, alpha);
}

}  // namespace mtjrng
