#include "mtjrng/randtest.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>

#include "mtjrng/error.hpp"

namespace mtjrng {

namespace {

std::size_t count_ones(std::span<const std::uint8_t> bits) {
  std::size_t ones = 0;
  for (auto b : bits) ones += (b != 0);
  return ones;
}

}  // namespace

TestResult monobit_test(std::span<const std::uint8_t> bits) {
  const std::size_t n = bits.size();
  if (n < 100) throw ContractError("monobit test needs at least 100 bits");
  const double ones = static_cast<double>(count_ones(bits));
  const double s = std::abs(2.0 * ones - static_cast<double>(n)) /
                   std::sqrt(static_cast<double>(n));
  return {"monobit", s, std::erfc(s / std::sqrt(2.0))};
}

TestResult runs_test(std::span<const std::uint8_t> bits) {
  const std::size_t n = bits.size();
  if (n < 2) throw ContractError("runs test needs at least 2 bits");
  const double nn = static_cast<double>(n);
  const double pi = static_cast<double>(count_ones(bits)) / nn;
  TestResult r{"runs", 0.0, 0.0};
  if (std::abs(pi - 0.5) >= 2.0 / std::sqrt(nn)) {
    r.applicable = false;
    return r;
  }
  std::size_t runs = 1;
  for (std::size_t i = 1; i < n; ++i) runs += ((bits[i] != 0) != (bits[i - 1] != 0));
  const double v = static_cast<double>(runs);
  const double q = pi * (1.0 - pi);
  r.statistic = v;
  r.p_value =
      std::erfc(std::abs(v - 2.0 * nn * q) / (2.0 * std::sqrt(2.0 * nn) * q));
  return r;
}

TestResult block_frequency_test(std::span<const std::uint8_t> bits,
                                std::size_t block) {
  if (block == 0) throw ContractError("block length must be > 0");
  const std::size_t blocks = bits.size() / block;
  if (blocks == 0) {
    throw ContractError("block frequency test needs at least one full block");
  }
  double chi2 = 0.0;
  for (std::size_t b = 0; b < blocks; ++b) {
    const double pi =
        static_cast<double>(count_ones(bits.subspan(b * block, block))) /
        static_cast<double>(block);
    chi2 += (pi - 0.5) * (pi - 0.5);
  }
  chi2 *= 4.0 * static_cast<double>(block);
  const double p =
      boost::math::gamma_q(0.5 * static_cast<double>(blocks), 0.5 * chi2);
  return {"block_frequency", chi2, p};
}

double serial_autocorrelation(std::span<const std::uint8_t> bits,
                              std::size_t lag) {
  const std::size_t n = bits.size();
  if (lag == 0 || lag >= n) {
    throw ContractError("autocorrelation lag must lie in [1, n)");
  }
  const double mean =
      static_cast<double>(count_ones(bits)) / static_cast<double>(n);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = (bits[i] != 0) - mean;
    den += d * d;
    if (i + lag < n) num += d * ((bits[i + lag] != 0) - mean);
  }
  if (den == 0.0) return 1.0;
  return std::clamp(num / den, -1.0, 1.0);
}

TestResult autocorrelation_test(std::span<const std::uint8_t> bits,
                                std::size_t lag) {
  const double rho = serial_autocorrelation(bits, lag);
  const double z = rho * std::sqrt(static_cast<double>(bits.size()));
  return {"autocorrelation_lag" + std::to_string(lag), rho,
          std::erfc(std::abs(z) / std::sqrt(2.0))};
}

RandTestReport run_randomness_suite(std::span<const std::uint8_t> bits,
                                    double alpha, std::size_t block,
                                    std::size_t lag) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ConfigError("alpha must lie in (0, 1)");
  }
  RandTestReport rep;
  rep.n_bits = bits.size();
  rep.alpha = alpha;
  TestResult blocks{"block_frequency", 0.0, 0.0, false};
  if (block > 0 && bits.size() >= block) {
    blocks = block_frequency_test(bits, block);
  }
  rep.tests = {monobit_test(bits), runs_test(bits), blocks,
               autocorrelation_test(bits, lag)};
  rep.verdict = true;
  for (auto& t : rep.tests) {
    t.p_value = std::clamp(t.p_value, 0.0, 1.0);
    t.pass = t.applicable && t.p_value >= alpha;
    rep.verdict = rep.verdict && t.pass;
  }
  return rep;
}

}  // namespace mtjrng
