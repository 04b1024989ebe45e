#pragma once

// Write-amplitude calibration to a 50 % switching probability: bracket
// check, coarse bisection, then Robbins-Monro with Wilson-interval
// validation.  The search runs against any Bernoulli batch sampler, so it can
// be driven by the TRNG models or by a synthetic oracle.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>

#include "mtjrng/error.hpp"
#include "mtjrng/trng.hpp"

namespace mtjrng {

struct ProbabilityEstimate {
  double p_hat = 0.0;
  std::size_t n_trials = 0;
  std::size_t successes = 0;
  double ci_low = 0.0;
  double ci_high = 1.0;

  bool contains(double p) const { return ci_low <= p && p <= ci_high; }
};

/// Wilson score interval; z = 1.96 gives 95 %.
ProbabilityEstimate wilson_estimate(std::size_t successes, std::size_t n,
                                    double z = 1.959963984540054);

struct Perturbation {
  double delta_t = 0.0;    // K, added to the temperature
  Vec3 h_ext{};            // A/m, added to the applied field
  double tmr_drift = 1.0;  // factor on TMR0
  double ic_drift = 1.0;   // factor on Ic0 (applied through the STT efficiency)
};

/// Model with the perturbation applied; throws ConfigError if the result
/// leaves the parameter domain (T <= 0, TMR0 <= 0, efficiency >= 1, ...).
ModelConfig apply_perturbation(const ModelConfig& model,
                               const Perturbation& perturb);

/// Which write parameter calibration moves.
enum class CalibrationKnob { kAmplitude, kDuration };
CalibrationKnob parse_knob(std::string_view s);
std::string_view to_string(CalibrationKnob k);

struct CalibrationResult {
  double amplitude = 0.0;  // tuned value: write current (A) or t_write (s)
  ProbabilityEstimate p_final;
  int iterations = 0;      // Robbins-Monro steps
  std::size_t trials_total = 0;
};

/// Calibration did not reach its target; carries the best validated point
/// (if any).
class CalibrationError : public SolverError {
 public:
  CalibrationError(const std::string& what,
                   std::optional<CalibrationResult> best)
      : SolverError(what), best_(std::move(best)) {}
  const std::optional<CalibrationResult>& best() const { return best_; }

 private:
  std::optional<CalibrationResult> best_;
};

struct CalibrationOptions {
  CalibrationKnob knob = CalibrationKnob::kAmplitude;
  double tol = 0.01;
  double bracket_low = 0.0;                // A
  /// Defaults: 4 Ic0(AP->P) and 0.1 Ic0(AP->P) for the amplitude knob,
  /// 4 t_write and 0.1 t_write for the duration knob.
  std::optional<double> bracket_high;
  std::optional<double> bisect_width;
  std::size_t bisect_batch = 2000;
  std::size_t rm_batch = 200;
  std::size_t rm_block = 50;               // steps between validations
  std::size_t validation_batch = 20000;
  std::size_t budget = 200000;
  unsigned threads = 0;
};

/// successes among `n` trials at `amplitude`, using trial indices
/// [first_trial, first_trial + n).
using BatchSampler = std::function<std::size_t(
    double amplitude, std::uint64_t first_trial, std::size_t n)>;

/// Core search.  Without `warm_start`: bracket check at both ends, bisection
/// until the bracket is narrower than `bisect_width`, then Robbins-Monro
///   a_{k+1} = a_k - (c0 / k) (mean_k - 0.5),  c0 = final bracket width,
/// validating every `rm_block` steps with a fresh batch.  With `warm_start`
/// (a, c0) the search validates at `a` first, then iterates from it.
/// Success: the validation interval contains 0.5 and |p_hat - 0.5| <= tol.
CalibrationResult calibrate_sampler(
    const BatchSampler& sampler, const CalibrationOptions& opts,
    std::optional<std::pair<double, double>> warm_start = std::nullopt);

/// Probability estimate of `n_trials` TRNG periods at `amplitude`.
ProbabilityEstimate estimate_p(const ModelConfig& model, PeriodTiming timing,
                               Mode mode, double amplitude,
                               std::size_t n_trials, std::uint64_t seed,
                               std::uint64_t first_trial = 0,
                               unsigned threads = 0);

CalibrationResult calibrate(const ModelConfig& model,
                            const PeriodTiming& timing, Mode mode,
                            std::uint64_t seed, CalibrationOptions opts = {});

/// Applies `perturb` and warm-starts from `prior.amplitude` with
/// c0 = 0.1 Ic0(AP->P) of the perturbed model.
CalibrationResult recalibrate(const ModelConfig& model,
                              const PeriodTiming& timing, Mode mode,
                              const Perturbation& perturb,
                              const CalibrationResult& prior,
                              std::uint64_t seed,
                              CalibrationOptions opts = {});

}  // namespace mtjrng
