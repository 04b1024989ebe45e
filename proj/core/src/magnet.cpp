#include "mtjrng/magnet.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mtjrng/constants.hpp"
#include "mtjrng/error.hpp"

namespace mtjrng {

using namespace phys;

Magnetization::Magnetization(const Vec3& v) {
  const double n = norm(v);
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw DomainError("magnetization vector must be finite and non-zero");
  }
  v_ = v * (1.0 / n);
}

Magnetization Magnetization::tilted_from(bool from_parallel, double theta) {
  const double s = std::sin(theta);
  const double c = std::cos(theta);
  return Magnetization(Vec3{s, 0.0, from_parallel ? c : -c});
}

void MagnetParams::validate() const {
  std::string errs;
  auto need = [&](bool ok, const char* what) {
    if (!ok) errs += std::string(errs.empty() ? "" : "; ") + what;
  };
  need(ms > 0.0, "Ms must be > 0");
  need(volume > 0.0, "V_free must be > 0");
  need(hk > 0.0, "H_k must be > 0");
  need(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
  need(gamma > 0.0, "gamma must be > 0");
  need(eta > 0.0 && eta < 1.0, "eta must lie in (0, 1)");
  need(tau0 > 0.0, "tau0 must be > 0");
  need(chi_asym >= 0.0, "chi_asym must be >= 0");
  need(eps_smooth > 0.0, "eps_smooth must be > 0");
  const double nsum = demag.x + demag.y + demag.z;
  need(demag.x >= 0.0 && demag.y >= 0.0 && demag.z >= 0.0 &&
           (nsum == 0.0 || std::abs(nsum - 1.0) < 1e-9),
       "demag factors must be non-negative and sum to 1 (or all zero)");
  if (!errs.empty()) throw ConfigError("invalid magnet parameters: " + errs);
}

double anisotropy_field_for_delta(double delta, double temperature, double ms,
                                  double volume) {
  return 2.0 * kBoltzmann * temperature * delta / (kMu0 * ms * volume);
}

double thermal_stability(const MagnetParams& p, double temperature) {
  if (!(temperature > 0.0)) {
    throw DomainError("thermal stability needs T > 0");
  }
  return kMu0 * p.ms * p.hk * p.volume / (2.0 * kBoltzmann * temperature);
}

Vec3 effective_field(const Magnetization& m, const MagnetParams& p,
                     const DriveConditions& d) {
  const Vec3& v = m.vec();
  return Vec3{-p.ms * p.demag.x * v.x, -p.ms * p.demag.y * v.y,
              p.hk * v.z - p.ms * p.demag.z * v.z} +
         d.h_ext;
}

double critical_current(const MagnetParams& p, double temperature,
                        Direction dir) {
  // kB T Delta(T) is temperature independent: mu0 Ms Hk V / 2.
  const double barrier = 0.5 * kMu0 * p.ms * p.hk * p.volume;
  const double ic0 =
      4.0 * kElementaryCharge * p.alpha * barrier / (kHbar * p.eta);
  (void)temperature;
  return dir == Direction::kApToP ? ic0 * (1.0 + p.chi_asym) : ic0;
}

double precessional_delay(double current, const MagnetParams& p,
                          double temperature, Direction dir) {
  const double ic = critical_current(p, temperature, dir);
  const double x = std::abs(current) / ic;
  if (!(x > 1.0)) {
    throw DomainError("precessional_delay requires |I| > Ic0 (|I|/Ic0 = " +
                      std::to_string(x) + ")");
  }
  return p.tau0 * thermal_stability(p, temperature) / (x - 1.0 + p.eps_smooth);
}

double neel_brown_probability(double current, double duration,
                              const MagnetParams& p, double temperature,
                              Direction dir, double h_axial) {
  if (duration < 0.0) throw DomainError("pulse duration must be >= 0");
  if (duration == 0.0) return 0.0;
  const bool wrong_sign = dir == Direction::kApToP ? current < 0.0
                                                   : current > 0.0;
  if (wrong_sign) return 0.0;
  const double h =
      (dir == Direction::kApToP ? h_axial : -h_axial) / p.hk;
  if (h >= 1.0) return 1.0;
  const double delta =
      thermal_stability(p, temperature) * (1.0 - h) * (1.0 - h);
  const double ic = critical_current(p, temperature, dir) * (1.0 - h);
  const double x = std::abs(current) / ic;
  double tau;
  if (x <= 1.0) {
    tau = p.tau0 * std::exp(delta * (1.0 - x));
  } else {
    tau = std::min(p.tau0, p.tau0 * delta / (x - 1.0 + p.eps_smooth));
  }
  return std::clamp(-std::expm1(-duration / tau), 0.0, 1.0);
}

LlgStepper::LlgStepper(const MagnetParams& p, double temperature,
                       const Vec3& h_ext, const SdeConfig& cfg)
    : p_(p), h_ext_(h_ext), dt_(cfg.dt), renormalize_(cfg.renormalize) {
  if (!(cfg.dt > 0.0)) throw ConfigError("SDE time step must be > 0");
  if (temperature < 0.0) throw ConfigError("temperature must be >= 0");
  const double a2 = 1.0 + p.alpha * p.alpha;
  gamma_eff_ = p.gamma / a2;
  stt_per_amp_ =
      p.gamma * kHbar * p.eta / (2.0 * kElementaryCharge * p.ms * p.volume * a2);
  sigma_th_ = std::sqrt(2.0 * p.alpha * kBoltzmann * temperature /
                        (p.gamma * kMu0 * kMu0 * p.ms * p.volume * cfg.dt));
}

Vec3 LlgStepper::rhs(const Vec3& m, const Vec3& h_th, double aj) const {
  const Vec3 h{h_ext_.x + h_th.x - p_.ms * p_.demag.x * m.x,
               h_ext_.y + h_th.y - p_.ms * p_.demag.y * m.y,
               h_ext_.z + h_th.z + (p_.hk - p_.ms * p_.demag.z) * m.z};
  const Vec3 b = h * kMu0;
  const Vec3 mxb = cross(m, b);
  const Vec3 mxmxb = cross(m, mxb);
  // Pinned layer along +z: m x z = (my, -mx, 0), m x (m x z) = mz m - z.
  const Vec3 mxp{m.y, -m.x, 0.0};
  const Vec3 mxmxp{m.z * m.x, m.z * m.y, m.z * m.z - 1.0};
  return (mxb + mxmxb * p_.alpha) * (-gamma_eff_) -
         (mxmxp + mxp * p_.beta) * aj;
}

Magnetization LlgStepper::step(const Magnetization& m, double current,
                               CounterRng& rng) {
  Vec3 h_th{};
  if (sigma_th_ > 0.0) {
    h_th = Vec3{rng.normal(), rng.normal(), rng.normal()} * sigma_th_;
  }
  // Positive current favours P; the AP -> P efficiency is reduced by the
  // junction asymmetry.
  const double eff = current > 0.0 ? 1.0 / (1.0 + p_.chi_asym) : 1.0;
  const double aj = stt_per_amp_ * eff * current;

  const Vec3& m0 = m.vec();
  const Vec3 f0 = rhs(m0, h_th, aj);
  const Vec3 mp = m0 + f0 * dt_;
  const Vec3 f1 = rhs(mp, h_th, aj);
  Vec3 next = m0 + (f0 + f1) * (0.5 * dt_);
  ++steps_;
  const double n = norm(next);
  if (!std::isfinite(n) || n == 0.0) {
    throw DivergenceError("LLG integrator diverged at step " +
                          std::to_string(steps_) + " (dt = " +
                          std::to_string(dt_) + " s)");
  }
  if (renormalize_) next *= 1.0 / n;
  return Magnetization(next, Magnetization::Unchecked{});
}

Magnetization heun_step(const Magnetization& m, const MagnetParams& p,
                        const DriveConditions& d, const SdeConfig& cfg,
                        CounterRng& rng) {
  LlgStepper stepper(p, d.temperature, d.h_ext, cfg);
  return stepper.step(m, d.current, rng);
}

void SwitchDetector::observe(double mz, double t) {
  if (switched_) return;
  const bool across = toward_parallel_ ? mz > threshold_ : mz < threshold_;
  if (!across) {
    armed_ = true;
    run_ = 0;
    return;
  }
  if (!armed_) return;
  if (run_ == 0) run_start_ = t;
  if (++run_ >= kSustainSteps) {
    switched_ = true;
    t_cross_ = run_start_;
  }
}

PulseResult simulate_pulse(const Magnetization& m0, const MagnetParams& p,
                           const DriveConditions& d, double t_pulse,
                           const SdeConfig& cfg, std::uint64_t trial) {
  if (!(t_pulse > 0.0)) throw ContractError("t_pulse must be > 0");
  const auto n_steps =
      static_cast<std::uint64_t>(std::ceil(t_pulse / cfg.dt - 1e-9));
  const int every = std::max(1, cfg.sample_every);

  bool toward_parallel;
  if (d.current > 0.0) {
    toward_parallel = true;
  } else if (d.current < 0.0) {
    toward_parallel = false;
  } else {
    toward_parallel = !m0.is_parallel();
  }

  LlgStepper stepper(p, d.temperature, d.h_ext, cfg);
  CounterRng rng(cfg.seed, trial, Substream::kWrite);
  SwitchDetector detector(toward_parallel, cfg.switch_threshold);

  PulseResult out;
  out.time.reserve(n_steps / every + 2);
  out.trajectory.reserve(n_steps / every + 2);
  out.time.push_back(0.0);
  out.trajectory.push_back(m0);
  detector.observe(m0.mz(), 0.0);

  Magnetization m = m0;
  for (std::uint64_t k = 1; k <= n_steps; ++k) {
    m = stepper.step(m, d.current, rng);
    const double t = static_cast<double>(k) * cfg.dt;
    detector.observe(m.mz(), t);
    if (k % every == 0 || k == n_steps) {
      out.time.push_back(t);
      out.trajectory.push_back(m);
    }
  }
  out.switched = detector.switched();
  out.t_cross = detector.t_cross();
  out.final_state = m;
  return out;
}

Magnetization sample_thermal_state(bool parallel, double delta,
                                   CounterRng& rng) {
  // Density of u = 1 - |m_z| on [0, 1]: exp(-delta u (2 - u)).  Envelope
  // exp(-delta u), acceptance exp(-delta u (1 - u)).
  double u;
  if (delta <= 0.0) {
    u = rng.uniform();
  } else {
    const double span = -std::expm1(-delta);
    for (;;) {
      u = -std::log1p(-rng.uniform() * span) / delta;
      if (rng.uniform() <= std::exp(-delta * u * (1.0 - u))) break;
    }
  }
  u = std::clamp(u, 0.0, 1.0);
  const double cos_t = 1.0 - u;
  const double sin_t = std::sqrt(std::max(0.0, 1.0 - cos_t * cos_t));
  const double phi = 2.0 * kPi * rng.uniform();
  return Magnetization(Vec3{sin_t * std::cos(phi), sin_t * std::sin(phi),
                            parallel ? cos_t : -cos_t});
}

double deterministic_tilt(const MagnetParams& p,
                          double reference_temperature) {
  // Small-angle growth rate per unit overdrive (x - 1).
  const double rate =
      p.alpha * p.gamma * kMu0 * p.hk / (1.0 + p.alpha * p.alpha);
  return 0.5 * kPi *
         std::exp(-p.tau0 * thermal_stability(p, reference_temperature) * rate);
}

}  // namespace mtjrng
