#pragma once

// One TRNG period = stochastic write, then a joined read & reset that latches
// the bit.  Two interchangeable models: the full circuit (write cell + read
// bridge, coupled to the macrospin) and a fast Bernoulli model driven by the
// Neel-Brown switching probability.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "mtjrng/circuit.hpp"
#include "mtjrng/netlist.hpp"

namespace mtjrng {

enum class Mode { kCircuit, kFast };
Mode parse_mode(std::string_view s);
std::string_view to_string(Mode m);

enum class MtjState { kP, kAP };

struct PeriodTiming {
  double t_write = 27.5e-9;        // s
  double t_gap = 0.5e-9;           // s
  double t_readreset = 20e-9;      // s
  double write_current = 0.0;      // A, AP -> P (>= 0)
  double reset_current = -380e-6;  // A, P -> AP (< 0)

  double period() const { return t_write + t_gap + t_readreset; }
  double throughput() const { return 1.0 / period(); }

  /// Durations positive, write/reset signs, and the reset sufficiency rule:
  /// |I_r| >= 1.5 Ic0(P->AP) and t_readreset >= 10 precessional_delay(I_r).
  /// Throws ConfigError listing every violation.
  void validate(const MagnetParams& magnet, double temperature) const;
};

/// Inverting comparator with hysteresis feeding a DFF whose data pin is tied
/// high: a rising comparator edge latches 1.
struct ComparatorConfig {
  double hysteresis = 5e-3;  // V, total band width
};

struct Detection {
  int bit = 0;
  std::optional<double> t_flip;
};

/// Comparator output goes high once V_m - V_ref < -h/2 and low once it is
/// > +h/2; inside the band it holds.  The first resolved level only
/// initialises the output.  A later low -> high transition (V_m falling
/// through V_ref, i.e. P -> AP) latches bit 1 at that sample's time.
Detection detect_bit_from_trace(std::span<const double> time,
                                std::span<const double> v_m,
                                std::span<const double> v_ref,
                                const ComparatorConfig& cfg = {});

/// Everything that defines the simulated cell apart from timing.
struct ModelConfig {
  MagnetParams magnet{};
  double temperature = 300.0;  // K
  Vec3 h_ext{};                // A/m
  double sde_dt = 1e-12;       // s
  double dt_circuit = 10e-12;  // s
  double edge = 20e-12;        // s, rail rise/fall time
  ComparatorConfig comparator{};
  Netlist write_netlist;
  Netlist read_netlist;
};

/// Loads the shipped write and read netlists from `dir`.
ModelConfig default_model(const std::string& data_dir);

struct PeriodResult {
  int bit = 0;
  MtjState state_after_write = MtjState::kAP;
  MtjState state_after_period = MtjState::kAP;
  std::optional<double> t_flip_read;  // s from the start of read & reset
  std::optional<Waveform> read_trace;  // circuit mode, on request
};

/// Packed bit sequence, MSB first within each byte.
class BitStream {
 public:
  BitStream() = default;
  static BitStream from_bytes(std::vector<std::uint8_t> bytes, std::size_t n);

  void push_back(bool bit);
  bool operator[](std::size_t i) const {
    return (bytes_[i / 8] >> (7 - i % 8)) & 1u;
  }
  std::size_t size() const { return n_; }
  std::size_t ones() const { return ones_; }
  const std::vector<std::uint8_t>& bytes() const { return bytes_; }
  std::vector<std::uint8_t> unpacked() const;

  friend bool operator==(const BitStream&, const BitStream&) = default;

 private:
  std::vector<std::uint8_t> bytes_;
  std::size_t n_ = 0;
  std::size_t ones_ = 0;
};

struct StreamReport {
  BitStream bits;
  double throughput = 0.0;  // bits/s
  double period = 0.0;      // s
  std::size_t reset_failures = 0;        // periods not ending in AP
  std::size_t comparator_mismatches = 0; // bit != (state_after_write == P)
};

/// Rail settings that realise the requested currents in the circuit.
struct CircuitDrive {
  double v_write = 0.0;  // VWP, V
  double v_read = 0.0;   // VRD, V
  double r_ref = 0.0;    // RREF, ohm
  double v_m_p = 0.0;    // DC bridge levels with the rails on
  double v_m_ap = 0.0;
  double v_ref = 0.0;
};

class TrngEngine {
 public:
  /// Validates the timing (ConfigError) and, in circuit mode, maps the
  /// currents onto rail voltages and balances the reference branch.
  TrngEngine(ModelConfig model, PeriodTiming timing, Mode mode);

  PeriodResult run_period(std::uint64_t seed, std::uint64_t trial,
                          bool keep_trace = false) const;

  /// Periods 0..n-1 (trial index = bit position).  Errors are rethrown with
  /// the lowest failing bit index.
  StreamReport run_stream(std::size_t n_bits, std::uint64_t seed,
                          unsigned threads = 0) const;

  const PeriodTiming& timing() const { return timing_; }
  const ModelConfig& model() const { return model_; }
  Mode mode() const { return mode_; }
  const CircuitDrive& drive() const { return drive_; }

  /// Fast-mode switching probability of one write.
  double write_probability() const;

 private:
  PeriodResult run_fast(std::uint64_t seed, std::uint64_t trial) const;
  PeriodResult run_circuit(std::uint64_t seed, std::uint64_t trial,
                           bool keep_trace) const;

  ModelConfig model_;
  PeriodTiming timing_;
  Mode mode_;
  CircuitDrive drive_;
  std::optional<Circuit> write_circuit_;
  std::optional<Circuit> read_circuit_;
};

PeriodResult run_period(const ModelConfig& model, const PeriodTiming& timing,
                        Mode mode, std::uint64_t seed, std::uint64_t trial);
StreamReport run_stream(std::size_t n_bits, const ModelConfig& model,
                        const PeriodTiming& timing, Mode mode,
                        std::uint64_t seed, unsigned threads = 0);

}  // namespace mtjrng
