#pragma once

// Macrospin free-layer dynamics: stochastic LLG with Slonczewski spin-transfer
// torque, plus the closed-form switching laws of the compact MTJ model.

#include <cstdint>
#include <optional>
#include <vector>

#include "mtjrng/rng.hpp"
#include "mtjrng/vec3.hpp"

namespace mtjrng {

/// Unit vector of the free layer.  m_z = +1 is P (parallel to the pinned
/// layer along +z), m_z = -1 is AP.
class Magnetization {
 public:
  Magnetization() = default;
  /// Normalizes `v`; throws DomainError for a zero or non-finite vector.
  explicit Magnetization(const Vec3& v);

  static Magnetization parallel() { return Magnetization(Vec3{0, 0, 1}); }
  static Magnetization antiparallel() { return Magnetization(Vec3{0, 0, -1}); }
  /// Tilted by `theta` (rad) away from the P (+z) or AP (-z) axis, in the
  /// x-z plane.
  static Magnetization tilted_from(bool from_parallel, double theta);

  const Vec3& vec() const { return v_; }
  double mz() const { return v_.z; }
  bool is_parallel() const { return v_.z > 0.0; }

  friend bool operator==(const Magnetization&, const Magnetization&) = default;

 private:
  struct Unchecked {};
  Magnetization(const Vec3& v, Unchecked) : v_(v) {}
  friend class LlgStepper;

  Vec3 v_{0.0, 0.0, -1.0};
};

enum class Direction { kApToP, kPToAp };

struct MagnetParams {
  double ms = 8.0e5;          // A/m
  double volume = 1.884955592153876e-24;  // m^3, 40 nm x 1.5 nm disk
  double hk = 174861.23849807226;  // A/m, delta(300 K) = 40
  double alpha = 0.01;
  double gamma = 1.76085963023e11;  // rad / (s T)
  double eta = 0.6;
  Vec3 demag{0.0, 0.0, 0.0};  // (Nx, Ny, Nz), sum 1 or all zero
  double tau0 = 1.0e-9;       // s
  double chi_asym = 0.15;
  double beta = 0.0;          // field-like torque ratio
  double eps_smooth = 1.0e-3;

  /// Throws ConfigError listing every violated invariant.
  void validate() const;
};

/// Anisotropy field that yields thermal stability `delta` at `temperature`
/// for the given Ms and volume.
double anisotropy_field_for_delta(double delta, double temperature, double ms,
                                  double volume);

struct DriveConditions {
  double current = 0.0;  // A, positive drives AP -> P
  Vec3 h_ext{};          // A/m
  double temperature = 300.0;  // K
};

struct SdeConfig {
  double dt = 1.0e-12;  // s
  std::uint64_t seed = 0;
  bool renormalize = true;
  double switch_threshold = 0.0;
  /// Record every n-th step in simulate_pulse trajectories.
  int sample_every = 1;
};

/// Delta(T) = mu0 Ms Hk V / (2 kB T).
double thermal_stability(const MagnetParams& p, double temperature);

/// H_eff = Hk m_z z - Ms (Nx mx, Ny my, Nz mz) + H_ext, in A/m.
Vec3 effective_field(const Magnetization& m, const MagnetParams& p,
                     const DriveConditions& d);

/// Ic0 = 4 e alpha kB T Delta / (hbar eta), times (1 + chi_asym) for AP -> P.
double critical_current(const MagnetParams& p, double temperature,
                        Direction dir);

/// Precessional switching time tau0 Delta / (|I|/Ic0 - 1 + eps).
/// Throws DomainError unless |I| > Ic0.
double precessional_delay(double current, const MagnetParams& p,
                          double temperature, Direction dir);

/// Switching probability 1 - exp(-t / tau) of a rectangular pulse.
/// Below Ic0, tau = tau0 exp(Delta (1 - |I|/Ic0)); at and above Ic0, tau is
/// the faster of barrier-free activation (tau0) and precessional_delay.
/// Current of the wrong sign for `dir` yields 0.
///
/// `h_axial` (A/m along +z) tilts the barrier: with h the field component
/// favouring the target state in units of Hk, Delta -> Delta (1 - h)^2 and
/// Ic0 -> Ic0 (1 - h).  The default of zero gives the plain law.
double neel_brown_probability(double current, double duration,
                              const MagnetParams& p, double temperature,
                              Direction dir, double h_axial = 0.0);

/// Heun (Stratonovich) integrator for one macrospin at fixed parameters,
/// temperature and external field.  The drive current may change from step
/// to step.
class LlgStepper {
 public:
  LlgStepper(const MagnetParams& p, double temperature, const Vec3& h_ext,
             const SdeConfig& cfg);

  /// Advances `m` by one step under `current`; draws the thermal field from
  /// `rng`.  Throws DivergenceError on a non-finite state.
  Magnetization step(const Magnetization& m, double current, CounterRng& rng);

  std::uint64_t steps_taken() const { return steps_; }
  double dt() const { return dt_; }

 private:
  Vec3 rhs(const Vec3& m, const Vec3& h_th, double aj) const;

  MagnetParams p_;
  Vec3 h_ext_;
  double dt_;
  bool renormalize_;
  double gamma_eff_;     // gamma / (1 + alpha^2)
  double stt_per_amp_;   // damping-like torque rate per ampere, 1/(s A)
  double sigma_th_;      // thermal field std dev per component, A/m
  std::uint64_t steps_ = 0;
};

/// One integrator step; convenience wrapper over LlgStepper.
Magnetization heun_step(const Magnetization& m, const MagnetParams& p,
                        const DriveConditions& d, const SdeConfig& cfg,
                        CounterRng& rng);

struct PulseResult {
  std::vector<double> time;
  std::vector<Magnetization> trajectory;
  bool switched = false;
  std::optional<double> t_cross;
  Magnetization final_state;
};

/// Consecutive steps m_z must stay across the threshold to count as a
/// switch.
inline constexpr int kSustainSteps = 50;

/// Tracks the sustained threshold crossing rule.  Arms once m_z is seen on
/// the source side, so a state already in the target hemisphere never
/// counts as a switch.
class SwitchDetector {
 public:
  /// `toward_parallel` selects the target hemisphere.
  SwitchDetector(bool toward_parallel, double threshold)
      : toward_parallel_(toward_parallel), threshold_(threshold) {}

  void observe(double mz, double t);
  bool switched() const { return switched_; }
  std::optional<double> t_cross() const { return t_cross_; }

 private:
  bool toward_parallel_;
  double threshold_;
  bool armed_ = false;
  bool switched_ = false;
  int run_ = 0;
  double run_start_ = 0.0;
  std::optional<double> t_cross_;
};

/// Integrates ceil(t_pulse / dt) steps at constant drive.
PulseResult simulate_pulse(const Magnetization& m0, const MagnetParams& p,
                           const DriveConditions& d, double t_pulse,
                           const SdeConfig& cfg, std::uint64_t trial = 0);

/// Draws a state from the Boltzmann distribution restricted to the P or AP
/// hemisphere (uniaxial energy, no drive).
Magnetization sample_thermal_state(bool parallel, double delta,
                                   CounterRng& rng);

/// Initial polar tilt (rad) for zero-temperature runs.  A macrospin started
/// this far from the pole escapes in tau0 Delta / (x - 1) under the
/// linearised LLG, so T = 0 transients follow precessional_delay.
/// Delta is taken at `reference_temperature`.
double deterministic_tilt(const MagnetParams& p,
                          double reference_temperature = 300.0);

}  // namespace mtjrng
