#include "mtjrng/calibrate.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "mtjrng/parallel.hpp"

namespace mtjrng {

ProbabilityEstimate wilson_estimate(std::size_t successes, std::size_t n,
                                    double z) {
  if (n == 0) throw ContractError("probability estimate needs n >= 1");
  if (successes > n) throw ContractError("successes exceed trials");
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double centre = (p + z2 / (2.0 * nn)) / denom;
  const double half =
      z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  ProbabilityEstimate e;
  e.p_hat = p;
  e.n_trials = n;
  e.successes = successes;
  e.ci_low = std::clamp(centre - half, 0.0, p);
  e.ci_high = std::clamp(centre + half, p, 1.0);
  return e;
}

ModelConfig apply_perturbation(const ModelConfig& model,
                               const Perturbation& perturb) {
  std::string errs;
  auto need = [&](bool ok, const char* what) {
    if (!ok) errs += std::string(errs.empty() ? "" : "; ") + what;
  };
  need(std::isfinite(perturb.delta_t), "delta_T must be finite");
  need(is_finite(perturb.h_ext), "H_ext must be finite");
  need(perturb.tmr_drift > 0.0, "tmr_drift must be > 0");
  need(perturb.ic_drift > 0.0, "ic_drift must be > 0");
  if (!errs.empty()) throw ConfigError("invalid perturbation: " + errs);

  ModelConfig m = model;
  m.temperature += perturb.delta_t;
  if (!(m.temperature > 0.0)) {
    throw ConfigError(fmt::format(
        "perturbed temperature {:.4g} K is not positive", m.temperature));
  }
  m.h_ext += perturb.h_ext;
  // Ic0 is inversely proportional to the spin-polarisation efficiency.
  m.magnet.eta /= perturb.ic_drift;
  m.magnet.validate();
  for (Netlist* nl : {&m.write_netlist, &m.read_netlist}) {
    const MtjElement* j = nl->mtj();
    if (!j) continue;
    Card& card = nl->cards.at(j->card);
    const double tmr0 = card.get("tmr0").value_or(MtjParams{}.tmr0);
    card.set("tmr0", tmr0 * perturb.tmr_drift);
  }
  return m;
}

namespace {

class Search {
 public:
  Search(const BatchSampler& sampler, const CalibrationOptions& opts)
      : sampler_(sampler), opts_(opts) {}

  ProbabilityEstimate sample(double a, std::size_t n) {
    if (trials_ + n > opts_.budget) {
      throw CalibrationError(
          fmt::format("trial budget of {} exhausted after {} trials",
                      opts_.budget, trials_),
          best_);
    }
    const std::size_t k = sampler_(a, next_trial_, n);
    next_trial_ += n;
    trials_ += n;
    return wilson_estimate(k, n);
  }

  /// Returns true when `a` passes validation.
  bool validate(double a, int iterations) {
    const ProbabilityEstimate e = sample(a, opts_.validation_batch);
    CalibrationResult r{a, e, iterations, trials_};
    if (!best_ ||
        std::abs(e.p_hat - 0.5) < std::abs(best_->p_final.p_hat - 0.5)) {
      best_ = r;
    }
    last_ = r;
    return e.contains(0.5) && std::abs(e.p_hat - 0.5) <= opts_.tol;
  }

  CalibrationResult result() const {
    CalibrationResult r = *last_;
    r.trials_total = trials_;
    return r;
  }

 private:
  const BatchSampler& sampler_;
  const CalibrationOptions& opts_;
  std::uint64_t next_trial_ = 0;
  std::size_t trials_ = 0;
  std::optional<CalibrationResult> best_;
  std::optional<CalibrationResult> last_;
};

}  // namespace

CalibrationResult calibrate_sampler(
    const BatchSampler& sampler, const CalibrationOptions& opts,
    std::optional<std::pair<double, double>> warm_start) {
  if (!opts.bracket_high || !opts.bisect_width) {
    throw ContractError("calibration needs an upper bracket and a width");
  }
  if (!(opts.tol > 0.0) || opts.rm_batch == 0 || opts.rm_block == 0 ||
      opts.bisect_batch == 0 || opts.validation_batch == 0) {
    throw ConfigError("calibration tolerance and batch sizes must be > 0");
  }
  double lo = opts.bracket_low;
  double hi = *opts.bracket_high;
  if (!(hi > lo)) throw ConfigError("calibration bracket is empty");

  Search s(sampler, opts);
  double a;
  double c0;
  int k = 0;
  if (warm_start) {
    a = std::clamp(warm_start->first, lo, hi);
    c0 = warm_start->second;
    if (s.validate(a, k)) return s.result();
  } else {
    const ProbabilityEstimate p_lo = s.sample(lo, opts.bisect_batch);
    const ProbabilityEstimate p_hi = s.sample(hi, opts.bisect_batch);
    if (!(p_lo.p_hat < 0.5 && p_hi.p_hat > 0.5)) {
      throw CalibrationError(
          fmt::format("calibration infeasible: p({:.4g} A) = {:.4f}, "
                      "p({:.4g} A) = {:.4f} do not bracket 0.5",
                      lo, p_lo.p_hat, hi, p_hi.p_hat),
          std::nullopt);
    }
    while (hi - lo >= *opts.bisect_width) {
      const double mid = 0.5 * (lo + hi);
      (s.sample(mid, opts.bisect_batch).p_hat < 0.5 ? lo : hi) = mid;
    }
    a = 0.5 * (lo + hi);
    c0 = hi - lo;
    lo = opts.bracket_low;
    hi = *opts.bracket_high;
  }

  for (;;) {
    for (std::size_t j = 0; j < opts.rm_block; ++j) {
      ++k;
      const double mean = s.sample(a, opts.rm_batch).p_hat;
      a = std::clamp(a - (c0 / k) * (mean - 0.5), lo, hi);
    }
    if (s.validate(a, k)) return s.result();
  }
}

CalibrationKnob parse_knob(std::string_view s) {
  if (s == "amplitude") return CalibrationKnob::kAmplitude;
  if (s == "duration") return CalibrationKnob::kDuration;
  throw ConfigError(fmt::format("unknown calibration knob '{}'", s));
}

std::string_view to_string(CalibrationKnob k) {
  return k == CalibrationKnob::kAmplitude ? "amplitude" : "duration";
}

ProbabilityEstimate estimate_p(const ModelConfig& model, PeriodTiming timing,
                               Mode mode, double amplitude,
                               std::size_t n_trials, std::uint64_t seed,
                               std::uint64_t first_trial, unsigned threads) {
  if (n_trials < 1) throw ContractError("estimate_p needs n_trials >= 1");
  timing.write_current = amplitude;
  const TrngEngine engine(model, timing, mode);
  std::vector<std::uint8_t> bits(n_trials);
  parallel_for(
      n_trials,
      [&](std::size_t i) {
        bits[i] = static_cast<std::uint8_t>(
            engine.run_period(seed, first_trial + i).bit);
      },
      threads);
  std::size_t ones = 0;
  for (auto b : bits) ones += b;
  return wilson_estimate(ones, n_trials);
}

namespace {

BatchSampler model_sampler(const ModelConfig& model,
                           const PeriodTiming& timing, Mode mode,
                           std::uint64_t seed, const CalibrationOptions& opts) {
  const unsigned threads = opts.threads;
  if (opts.knob == CalibrationKnob::kDuration) {
    return [&model, timing, mode, seed, threads](
               double t, std::uint64_t first, std::size_t n) {
      PeriodTiming moved = timing;
      moved.t_write = t;
      return estimate_p(model, moved, mode, moved.write_current, n, seed,
                        first, threads)
          .successes;
    };
  }
  return [&model, timing, mode, seed, threads](
             double a, std::uint64_t first, std::size_t n) {
    return estimate_p(model, timing, mode, a, n, seed, first, threads)
        .successes;
  };
}

CalibrationOptions with_defaults(CalibrationOptions opts,
                                 const ModelConfig& model,
                                 const PeriodTiming& timing) {
  if (opts.knob == CalibrationKnob::kDuration) {
    if (!(timing.write_current > 0.0)) {
      throw ConfigError("duration calibration needs a positive write current");
    }
    opts.bracket_low = std::max(opts.bracket_low, 1e-12);
    if (!opts.bracket_high) opts.bracket_high = 4.0 * timing.t_write;
    if (!opts.bisect_width) opts.bisect_width = 0.1 * timing.t_write;
    return opts;
  }
  const double ic = critical_current(model.magnet, model.temperature,
                                     Direction::kApToP);
  if (!opts.bracket_high) opts.bracket_high = 4.0 * ic;
  if (!opts.bisect_width) opts.bisect_width = 0.1 * ic;
  return opts;
}

}  // namespace

CalibrationResult calibrate(const ModelConfig& model,
                            const PeriodTiming& timing, Mode mode,
                            std::uint64_t seed, CalibrationOptions opts) {
  opts = with_defaults(opts, model, timing);
  return calibrate_sampler(model_sampler(model, timing, mode, seed, opts),
                           opts);
}

CalibrationResult recalibrate(const ModelConfig& model,
                              const PeriodTiming& timing, Mode mode,
                              const Perturbation& perturb,
                              const CalibrationResult& prior,
                              std::uint64_t seed, CalibrationOptions opts) {
  if (!(prior.amplitude >= 0.0) || prior.p_final.n_trials == 0) {
    throw ContractError("recalibrate needs a valid prior calibration");
  }
  const ModelConfig perturbed = apply_perturbation(model, perturb);
  opts = with_defaults(opts, perturbed, timing);
  return calibrate_sampler(model_sampler(perturbed, timing, mode, seed, opts),
                           opts, std::pair{prior.amplitude, *opts.bisect_width});
}

}  // namespace mtjrng
