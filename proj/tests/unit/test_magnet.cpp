#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "mtjrng/calibrate.hpp"
#include "mtjrng/error.hpp"
#include "mtjrng/magnet.hpp"
#include "mtjrng/parallel.hpp"

using namespace mtjrng;

namespace {

// Constants spelled out independently of the library's table.
constexpr double kE = 1.602176634e-19;
constexpr double kKb = 1.380649e-23;
constexpr double kHbarRef = 1.054571817e-34;
constexpr double kMu0Ref = 1.25663706212e-6;

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(EffectiveField, UniaxialOnly) {
  const MagnetParams p;
  const Vec3 h = effective_field(Magnetization::parallel(), p, {});
  EXPECT_EQ(h, (Vec3{0, 0, p.hk}));
}

TEST(EffectiveField, AllSourcesZero) {
  MagnetParams p;
  p.hk = 0.0;
  const Vec3 h = effective_field(Magnetization(Vec3{0.3, -0.4, 0.2}), p, {});
  EXPECT_EQ(h, (Vec3{0, 0, 0}));
}

TEST(EffectiveField, DemagAlongX) {
  MagnetParams p;
  p.demag = {1.0, 0.0, 0.0};
  const Vec3 h = effective_field(Magnetization(Vec3{1, 0, 0}), p, {});
  EXPECT_DOUBLE_EQ(h.x, -p.ms);
  EXPECT_DOUBLE_EQ(h.y, 0.0);
  EXPECT_DOUBLE_EQ(h.z, 0.0);
}

TEST(ThermalStability, MatchesClosedForm) {
  const MagnetParams p;
  const double expected = kMu0Ref * p.ms * p.hk * p.volume / (2 * kKb * 300.0);
  EXPECT_LT(rel(thermal_stability(p, 300.0), expected), 1e-12);
  EXPECT_NEAR(thermal_stability(p, 300.0), 40.0, 1e-9);
}

TEST(HeunStep, NoTorqueLeavesStateUnchanged) {
  const MagnetParams p;
  const Magnetization m(Vec3{1, 0, 0});  // m_z = 0 => zero uniaxial field
  SdeConfig cfg;
  CounterRng rng(1, 0);
  const DriveConditions d{0.0, {}, 0.0};
  EXPECT_EQ(heun_step(m, p, d, cfg, rng), m);
}

TEST(HeunStep, UndampedPrecessionConservesMz) {
  MagnetParams p;
  p.alpha = 0.0;
  SdeConfig cfg;
  cfg.dt = 1e-13;
  CounterRng rng(1, 0);
  const DriveConditions d{0.0, {}, 0.0};
  const Magnetization m0 = Magnetization::tilted_from(true, 0.3);
  const Magnetization m1 = heun_step(m0, p, d, cfg, rng);
  EXPECT_NEAR(norm(m1.vec()), 1.0, 1e-12);
  const double omega_dt = p.gamma * kMu0Ref * p.hk * cfg.dt;
  EXPECT_LT(std::abs(m1.mz() - m0.mz()), omega_dt * omega_dt);
  EXPECT_NE(m1.vec().y, m0.vec().y);
}

TEST(HeunStep, LarmorFrequency) {
  MagnetParams p;
  p.alpha = 0.0;
  p.hk = 1e-6;
  const double h = 1.0e5;
  const double omega = p.gamma * kMu0Ref * h;
  const double period = 2 * std::numbers::pi / omega;
  SdeConfig cfg;
  cfg.dt = period / 1000.0;
  LlgStepper stepper(p, 0.0, Vec3{0, 0, h}, cfg);
  CounterRng rng(1, 0);
  Magnetization m = Magnetization::tilted_from(true, 0.5);
  double angle = 0.0;
  double prev = std::atan2(m.vec().y, m.vec().x);
  const int steps = 20000;
  for (int i = 0; i < steps; ++i) {
    m = stepper.step(m, 0.0, rng);
    const double now = std::atan2(m.vec().y, m.vec().x);
    angle += std::remainder(now - prev, 2 * std::numbers::pi);
    prev = now;
  }
  const double measured = std::abs(angle) / (steps * cfg.dt);
  EXPECT_LT(rel(measured, omega), 1e-3);
}

TEST(HeunStep, UnitNormOverMillionSteps) {
  const MagnetParams p;
  SdeConfig cfg;
  LlgStepper stepper(p, 300.0, Vec3{100, -50, 200}, cfg);
  CounterRng rng(2, 0);
  Magnetization m = Magnetization::antiparallel();
  double worst = 0.0;
  for (int i = 0; i < 1'000'000; ++i) {
    m = stepper.step(m, i % 2000 < 1000 ? 40e-6 : -40e-6, rng);
    worst = std::max(worst, std::abs(norm(m.vec()) - 1.0));
  }
  EXPECT_LE(worst, 1e-9);
}

TEST(HeunStep, BoltzmannEquilibrium) {
  MagnetParams p;
  p.alpha = 0.5;
  p.hk = anisotropy_field_for_delta(2.0, 300.0, p.ms, p.volume);
  SdeConfig cfg;
  cfg.dt = 5e-12;
  LlgStepper stepper(p, 300.0, {}, cfg);
  CounterRng rng(7, 0);
  Magnetization m = Magnetization::parallel();
  const int stride = 400;
  for (int i = 0; i < 10 * stride; ++i) m = stepper.step(m, 0.0, rng);
  const int samples = 100000;
  double acc = 0.0;
  for (int k = 0; k < samples; ++k) {
    for (int i = 0; i < stride; ++i) m = stepper.step(m, 0.0, rng);
    acc += m.mz() * m.mz();
  }
  using boost::math::quadrature::gauss_kronrod;
  const double num = gauss_kronrod<double, 31>::integrate(
      [](double u) { return u * u * std::exp(2.0 * u * u); }, 0.0, 1.0);
  const double den = gauss_kronrod<double, 31>::integrate(
      [](double u) { return std::exp(2.0 * u * u); }, 0.0, 1.0);
  EXPECT_LT(rel(acc / samples, num / den), 0.02);
}

TEST(ThermalSampler, HemisphereMoments) {
  CounterRng rng(3, 0);
  double acc = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const Magnetization m = sample_thermal_state(false, 2.0, rng);
    ASSERT_LE(m.mz(), 0.0);
    acc += m.mz() * m.mz();
  }
  using boost::math::quadrature::gauss_kronrod;
  const double num = gauss_kronrod<double, 31>::integrate(
      [](double u) { return u * u * std::exp(2.0 * u * u); }, 0.0, 1.0);
  const double den = gauss_kronrod<double, 31>::integrate(
      [](double u) { return std::exp(2.0 * u * u); }, 0.0, 1.0);
  EXPECT_LT(rel(acc / n, num / den), 0.01);
}

TEST(CriticalCurrent, ClosedFormOracle) {
  const MagnetParams p;  // alpha 0.01, Delta(300 K) 40, eta 0.6
  const double expected = 4 * kE * 0.01 * kKb * 300.0 * 40.0 / (kHbarRef * 0.6);
  EXPECT_LT(rel(critical_current(p, 300.0, Direction::kPToAp), expected), 1e-9);
  EXPECT_LT(rel(critical_current(p, 300.0, Direction::kApToP),
                expected * (1 + p.chi_asym)),
            1e-9);
}

TEST(CriticalCurrent, Asymmetry) {
  MagnetParams p;
  p.chi_asym = 0.0;
  EXPECT_EQ(critical_current(p, 300.0, Direction::kApToP),
            critical_current(p, 300.0, Direction::kPToAp));
  p.chi_asym = 0.2;
  EXPECT_NEAR(critical_current(p, 300.0, Direction::kApToP) /
                  critical_current(p, 300.0, Direction::kPToAp),
              1.2, 1e-15);
}

TEST(PrecessionalDelay, TwiceCritical) {
  const MagnetParams p;
  const double ic = critical_current(p, 300.0, Direction::kApToP);
  EXPECT_LT(rel(precessional_delay(2 * ic, p, 300.0, Direction::kApToP),
                p.tau0 * 40.0 / (1.0 + p.eps_smooth)),
            1e-9);
}

TEST(PrecessionalDelay, MonotoneDecreasingAndDomain) {
  const MagnetParams p;
  const double ic = critical_current(p, 300.0, Direction::kPToAp);
  double prev = INFINITY;
  for (double x : {1.01, 1.5, 2.0, 5.0, 50.0, 5000.0}) {
    const double t = precessional_delay(-x * ic, p, 300.0, Direction::kPToAp);
    EXPECT_LT(t, prev);
    prev = t;
  }
  EXPECT_LT(prev, 1e-11);
  EXPECT_THROW(precessional_delay(ic, p, 300.0, Direction::kPToAp),
               DomainError);
  EXPECT_THROW(precessional_delay(0.5 * ic, p, 300.0, Direction::kPToAp),
               DomainError);
}

TEST(NeelBrown, ZeroDuration) {
  const MagnetParams p;
  EXPECT_EQ(neel_brown_probability(15e-6, 0.0, p, 300.0, Direction::kApToP),
            0.0);
}

TEST(NeelBrown, AtCriticalCurrent) {
  const MagnetParams p;
  const double ic = critical_current(p, 300.0, Direction::kApToP);
  const double t = 2e-9;
  EXPECT_LT(rel(neel_brown_probability(ic, t, p, 300.0, Direction::kApToP),
                -std::expm1(-t / p.tau0)),
            1e-12);
}

TEST(NeelBrown, ZeroCurrentClosedForm) {
  const MagnetParams p;
  const double expected = -std::expm1(-10.0 * std::exp(-40.0));
  const double got = neel_brown_probability(0.0, 10e-9, p, 300.0,
                                            Direction::kApToP);
  EXPECT_LT(rel(got, expected), 1e-9);
  EXPECT_NEAR(got, 4.25e-17, 0.01e-17);
}

TEST(NeelBrown, WrongSignIsZero) {
  const MagnetParams p;
  EXPECT_EQ(neel_brown_probability(-30e-6, 10e-9, p, 300.0, Direction::kApToP),
            0.0);
  EXPECT_EQ(neel_brown_probability(30e-6, 10e-9, p, 300.0, Direction::kPToAp),
            0.0);
}

TEST(NeelBrown, MonotoneInCurrentAndDuration) {
  const MagnetParams p;
  const double ic = critical_current(p, 300.0, Direction::kApToP);
  for (double t : {1e-9, 5e-9, 27.5e-9}) {
    double prev = 0.0;
    for (int k = 0; k <= 400; ++k) {
      const double pr =
          neel_brown_probability(k * 0.01 * ic, t, p, 300.0, Direction::kApToP);
      ASSERT_GE(pr, prev);
      ASSERT_LE(pr, 1.0);
      prev = pr;
    }
  }
  for (double x : {0.5, 0.9, 1.0, 1.5, 3.0}) {
    double prev = 0.0;
    for (int k = 0; k <= 100; ++k) {
      const double pr = neel_brown_probability(x * ic, k * 0.5e-9, p, 300.0,
                                               Direction::kApToP);
      ASSERT_GE(pr, prev);
      prev = pr;
    }
  }
}

TEST(NeelBrown, ContinuousAcrossCritical) {
  const MagnetParams p;
  for (auto dir : {Direction::kApToP, Direction::kPToAp}) {
    const double sign = dir == Direction::kApToP ? 1.0 : -1.0;
    const double ic = critical_current(p, 300.0, dir);
    const double below = neel_brown_probability(sign * ic * (1 - 1e-12), 3e-9,
                                                p, 300.0, dir);
    const double above = neel_brown_probability(sign * ic * (1 + 1e-12), 3e-9,
                                                p, 300.0, dir);
    EXPECT_LT(std::abs(above - below), 1e-6);
  }
}

TEST(NeelBrown, AxialFieldFavouringTargetRaisesProbability) {
  const MagnetParams p;
  const double i = 0.9 * critical_current(p, 300.0, Direction::kApToP);
  const double base = neel_brown_probability(i, 20e-9, p, 300.0,
                                             Direction::kApToP);
  EXPECT_GT(neel_brown_probability(i, 20e-9, p, 300.0, Direction::kApToP,
                                   +1000.0),
            base);
  EXPECT_LT(neel_brown_probability(i, 20e-9, p, 300.0, Direction::kApToP,
                                   -1000.0),
            base);
}

TEST(SimulatePulse, NoDriveNoSwitch) {
  const MagnetParams p;
  SdeConfig cfg;
  const auto r = simulate_pulse(Magnetization::antiparallel(), p,
                                {0.0, {}, 0.0}, 1e-9, cfg);
  EXPECT_FALSE(r.switched);
  EXPECT_FALSE(r.t_cross);
  for (const auto& m : r.trajectory) ASSERT_EQ(m, Magnetization::antiparallel());
}

TEST(SimulatePulse, OvercriticalSwitchesDeterministically) {
  const MagnetParams p;
  const double ic = critical_current(p, 300.0, Direction::kApToP);
  SdeConfig cfg;
  const auto m0 = Magnetization::tilted_from(false, 5.0 * std::numbers::pi / 180);
  const auto r = simulate_pulse(m0, p, {3 * ic, {}, 0.0}, 20e-9, cfg);
  ASSERT_TRUE(r.switched);
  ASSERT_TRUE(r.t_cross);
  EXPECT_GT(*r.t_cross, 0.0);
  EXPECT_GT(r.final_state.mz(), 0.9);
}

TEST(SimulatePulse, ZeroTemperatureIsSeedIndependent) {
  const MagnetParams p;
  const auto m0 = Magnetization::tilted_from(false, 0.1);
  const DriveConditions d{25e-6, {}, 0.0};
  SdeConfig a, b;
  a.seed = 1;
  b.seed = 99;
  const auto ra = simulate_pulse(m0, p, d, 3e-9, a);
  const auto rb = simulate_pulse(m0, p, d, 3e-9, b);
  EXPECT_EQ(ra.trajectory, rb.trajectory);
  EXPECT_EQ(ra.final_state, rb.final_state);
}

namespace {

ProbabilityEstimate mc_fraction(double current, double t_pulse, int n) {
  const MagnetParams p;
  const double delta = thermal_stability(p, 300.0);
  std::vector<char> hit(n);
  parallel_for(n, [&](std::size_t k) {
    CounterRng init(21, k, Substream::kInitialState);
    const Magnetization m0 = sample_thermal_state(false, delta, init);
    SdeConfig cfg;
    cfg.seed = 21;
    cfg.sample_every = 1 << 30;
    hit[k] = simulate_pulse(m0, p, {current, {}, 300.0}, t_pulse, cfg, k)
                 .switched;
  });
  std::size_t k = 0;
  for (char h : hit) k += h;
  return wilson_estimate(k, n);
}

void expect_ci_ordered(const std::vector<ProbabilityEstimate>& est) {
  for (std::size_t i = 0; i < est.size(); ++i) {
    for (std::size_t j = i + 1; j < est.size(); ++j) {
      EXPECT_GE(est[j].ci_high, est[i].ci_low)
          << "points " << i << " and " << j << " invert";
    }
  }
}

}  // namespace

TEST(SimulatePulse, SwitchingFractionMonotoneInCurrent) {
  const double ic = critical_current(MagnetParams{}, 300.0, Direction::kApToP);
  std::vector<ProbabilityEstimate> est;
  for (double x : {4.0, 6.0, 8.0, 10.0}) {
    est.push_back(mc_fraction(x * ic, 1e-9, 2000));
  }
  expect_ci_ordered(est);
  EXPECT_GT(est.back().p_hat, est.front().p_hat);
}

TEST(SimulatePulse, SwitchingFractionMonotoneInDuration) {
  const double ic = critical_current(MagnetParams{}, 300.0, Direction::kApToP);
  std::vector<ProbabilityEstimate> est;
  for (double t : {1e-9, 1.5e-9, 2e-9, 3e-9}) {
    est.push_back(mc_fraction(4.0 * ic, t, 2000));
  }
  expect_ci_ordered(est);
  EXPECT_GT(est.back().p_hat, est.front().p_hat);
}
