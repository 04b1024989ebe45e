// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "mtjrng/calibrate.hpp"
#include "mtjrng/circuit.hpp"
#include "mtjrng/magnet.hpp"
#include "mtjrng/parallel.hpp"
#include "mtjrng/randtest.hpp"
#include "mtjrng/scenario.hpp"
#include "mtjrng/sweep.hpp"
#include "mtjrng/trng.hpp"

using namespace mtjrng;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

const fs::path kData = MTJRNG_TEST_DATA_DIR;

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void check(bool ok, std::string what) {
    pass = pass && ok;
    notes.push_back((ok ? "" : "!! ") + std::move(what));
  }
  void info(std::string what) { notes.push_back("(info) " + std::move(what)); }
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Shared across criteria so the expensive runs happen once.
struct Shared {
  Scenario scenario;
  std::optional<CalibrationResult> calibration;
  std::optional<ProbabilityEstimate> fresh_fast;
  std::optional<StreamReport> circuit_stream;
  double circuit_seconds = 0.0;
};

constexpr std::size_t kCircuitPeriods = 10'000;
constexpr std::size_t kAgreementPeriods = 5'000;

// 1. Deterministic write delays of the shipped cell.
Outcome delay_targets(Shared& s) {
  Outcome o;
  const auto t0 = Clock::now();
  const WriteDelays d = measure_write_delays(s.scenario.model);
  const double elapsed = seconds_since(t0);
  o.check(std::abs(d.ap_to_p - 3.5e-9) <= 0.2 * 3.5e-9,
          fmt::format("AP->P {:.3f} ns in [2.8, 4.2]", d.ap_to_p * 1e9));
  o.check(std::abs(d.p_to_ap - 3.0e-9) <= 0.2 * 3.0e-9,
          fmt::format("P->AP {:.3f} ns in [2.4, 3.6]", d.p_to_ap * 1e9));
  o.check(d.ap_to_p > d.p_to_ap, "AP->P slower than P->AP");
  o.check(elapsed < 10.0, fmt::format("runtime {:.2f} s < 10 s", elapsed));
  return o;
}

// 2. Fast-mode calibration, then an independent 1e5-trial estimate.
Outcome probability_target(Shared& s) {
  Outcome o;
  const auto t0 = Clock::now();
  CalibrationOptions opts = s.scenario.calibration;
  opts.budget = std::min<std::size_t>(opts.budget, 200'000);
  try {
    s.calibration = calibrate(s.scenario.model, s.scenario.timing, Mode::kFast,
                              s.scenario.seed, opts);
  } catch (const CalibrationError& e) {
    o.check(false, fmt::format("calibration failed: {}", e.what()));
    return o;
  }
  const double amp = s.calibration->amplitude;
  s.fresh_fast = estimate_p(s.scenario.model, s.scenario.timing, Mode::kFast,
                            amp, 100'000, s.scenario.seed + 1000);
  const double elapsed = seconds_since(t0);
  o.info(fmt::format("amplitude {:.4f} uA after {} trials", amp * 1e6,
                     s.calibration->trials_total));
  o.check(s.calibration->trials_total <= 200'000,
          fmt::format("trials {} <= 200000", s.calibration->trials_total));
  o.check(s.fresh_fast->p_hat >= 0.49 && s.fresh_fast->p_hat <= 0.51,
          fmt::format("fresh p_hat {:.4f} in [0.49, 0.51]", s.fresh_fast->p_hat));
  o.check(elapsed < 60.0, fmt::format("runtime {:.2f} s < 60 s", elapsed));
  return o;
}

const StreamReport* circuit_stream(Shared& s) {
  if (s.circuit_stream) return &*s.circuit_stream;
  if (!s.calibration) return nullptr;
  PeriodTiming timing = s.scenario.timing;
  timing.write_current = s.calibration->amplitude;
  const TrngEngine engine(s.scenario.model, timing, Mode::kCircuit);
  const auto t0 = Clock::now();
  s.circuit_stream = engine.run_stream(kCircuitPeriods, s.scenario.seed);
  s.circuit_seconds = seconds_since(t0);
  return &*s.circuit_stream;
}

// 3. Circuit-mode and fast-mode write probabilities agree.
Outcome circuit_fast_agreement(Shared& s) {
  Outcome o;
  const StreamReport* rep = circuit_stream(s);
  if (!rep || !s.fresh_fast) {
    o.check(false, "no calibrated amplitude");
    return o;
  }
  std::size_t ones = 0;
  for (std::size_t i = 0; i < kAgreementPeriods; ++i) ones += rep->bits[i];
  const double p_circuit = static_cast<double>(ones) / kAgreementPeriods;
  const double gap = std::abs(p_circuit - s.fresh_fast->p_hat);
  o.check(gap <= 0.03, fmt::format("|{:.4f} - {:.4f}| = {:.4f} <= 0.03",
                                   p_circuit, s.fresh_fast->p_hat, gap));
  // The shared run covers 1e4 periods, so its time bounds the 5000-period cost.
  o.check(s.circuit_seconds < 900.0,
          fmt::format("runtime {:.1f} s for {} periods < 900 s",
                      s.circuit_seconds, kCircuitPeriods));
  return o;
}

// 4. Every circuit period resets to AP and yields one bit.
Outcome reset_guarantee(Shared& s) {
  Outcome o;
  const StreamReport* rep = circuit_stream(s);
  if (!rep) {
    o.check(false, "no calibrated amplitude");
    return o;
  }
  o.check(rep->bits.size() == kCircuitPeriods,
          fmt::format("{} bits from {} periods", rep->bits.size(), kCircuitPeriods));
  o.check(rep->reset_failures == 0,
          fmt::format("{} periods not ending in AP", rep->reset_failures));
  o.info(fmt::format("comparator agrees with the written state in {:.2f} % of periods",
                     100.0 * (1.0 - static_cast<double>(rep->comparator_mismatches) /
                                        kCircuitPeriods)));
  return o;
}

// 5. Statistical quality of fast and circuit streams.
Outcome randomness(Shared& s) {
  Outcome o;
  if (!s.calibration) {
    o.check(false, "no calibrated amplitude");
    return o;
  }
  PeriodTiming timing = s.scenario.timing;
  timing.write_current = s.calibration->amplitude;
  const StreamReport fast =
      run_stream(1'000'000, s.scenario.model, timing, Mode::kFast, s.scenario.seed);
  const auto bits = fast.bits.unpacked();
  const RandTestReport rep = run_randomness_suite(bits, 0.01, 128, 1);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& t = rep.tests[i];
    o.check(t.pass, fmt::format("fast {} p = {:.4f}", t.name, t.p_value));
  }
  const double rho = serial_autocorrelation(bits, 1);
  o.check(std::abs(rho) <= 0.005, fmt::format("fast |rho1| = {:.5f} <= 0.005",
                                              std::abs(rho)));
  if (const StreamReport* c = circuit_stream(s)) {
    const TestResult mono = monobit_test(c->bits.unpacked());
    o.check(mono.p_value >= 0.01,
            fmt::format("circuit monobit p = {:.4f} over {} bits", mono.p_value,
                        c->bits.size()));
  }
  return o;
}

double relative(double a, double b) { return std::abs(a - b) / std::abs(b); }

double boltzmann_mz2(double delta) {
  // <u^2> under exp(delta u^2) on [0, 1], by composite Simpson.
  const int n = 20000;
  double num = 0.0, den = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double u = static_cast<double>(i) / n;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    const double f = std::exp(delta * u * u);
    num += w * u * u * f;
    den += w * f;
  }
  return num / den;
}

ProbabilityEstimate switching_fraction(double current, double t_pulse, int n) {
  const MagnetParams p;
  const double delta = thermal_stability(p, 300.0);
  std::vector<char> hit(n);
  parallel_for(n, [&](std::size_t k) {
    CounterRng init(31, k, Substream::kInitialState);
    const Magnetization m0 = sample_thermal_state(false, delta, init);
    SdeConfig cfg;
    cfg.seed = 31;
    cfg.sample_every = 1 << 30;
    hit[k] = simulate_pulse(m0, p, {current, {}, 300.0}, t_pulse, cfg, k).switched;
  });
  std::size_t k = 0;
  for (char h : hit) k += h;
  return wilson_estimate(k, n);
}

bool ci_ordered(const std::vector<ProbabilityEstimate>& est) {
  for (std::size_t i = 0; i < est.size(); ++i) {
    for (std::size_t j = i + 1; j < est.size(); ++j) {
      if (est[j].ci_high < est[i].ci_low) return false;
    }
  }
  return est.back().p_hat > est.front().p_hat;
}

// 6. Integrator and switching physics.
Outcome physics_properties(Shared&) {
  Outcome o;
  {
    LlgStepper stepper(MagnetParams{}, 300.0, Vec3{100, -50, 200}, SdeConfig{});
    CounterRng rng(2, 0);
    Magnetization m = Magnetization::antiparallel();
    double worst = 0.0;
    for (int i = 0; i < 1'000'000; ++i) {
      m = stepper.step(m, i % 2000 < 1000 ? 40e-6 : -40e-6, rng);
      worst = std::max(worst, std::abs(norm(m.vec()) - 1.0));
    }
    o.check(worst <= 1e-9, fmt::format("norm drift {:.2e} over 1e6 steps", worst));
  }
  {
    MagnetParams p;
    p.alpha = 0.0;
    p.hk = 1e-6;
    const double h = 1.0e5;
    const double omega = p.gamma * 4e-7 * std::numbers::pi * h;
    SdeConfig cfg;
    cfg.dt = 2 * std::numbers::pi / omega / 1000.0;
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
    const double err = relative(std::abs(angle) / (steps * cfg.dt), omega);
    o.check(err <= 1e-3, fmt::format("Larmor error {:.2e}", err));
  }
  {
    MagnetParams p;
    p.alpha = 0.5;
    p.hk = anisotropy_field_for_delta(2.0, 300.0, p.ms, p.volume);
    SdeConfig cfg;
    cfg.dt = 5e-12;
    LlgStepper stepper(p, 300.0, {}, cfg);
    CounterRng rng(11, 0);
    Magnetization m = Magnetization::parallel();
    const int stride = 400;
    for (int i = 0; i < 10 * stride; ++i) m = stepper.step(m, 0.0, rng);
    double acc = 0.0;
    const int samples = 100'000;
    for (int k = 0; k < samples; ++k) {
      for (int i = 0; i < stride; ++i) m = stepper.step(m, 0.0, rng);
      acc += m.mz() * m.mz();
    }
    const double err = relative(acc / samples, boltzmann_mz2(2.0));
    o.check(err <= 0.02, fmt::format("Boltzmann <mz^2> error {:.4f}", err));
  }
  {
    const double ic = critical_current(MagnetParams{}, 300.0, Direction::kApToP);
    std::vector<ProbabilityEstimate> by_current, by_time;
    for (double x : {4.0, 6.0, 8.0, 10.0}) {
      by_current.push_back(switching_fraction(x * ic, 1e-9, 2000));
    }
    for (double t : {1e-9, 1.5e-9, 2e-9, 3e-9}) {
      by_time.push_back(switching_fraction(4.0 * ic, t, 2000));
    }
    const auto show = [](const std::vector<ProbabilityEstimate>& v) {
      std::string out;
      for (const auto& e : v) out += fmt::format(" {:.3f}", e.p_hat);
      return out;
    };
    o.check(ci_ordered(by_current), "MC fraction vs current:" + show(by_current));
    o.check(ci_ordered(by_time), "MC fraction vs duration:" + show(by_time));
  }
  return o;
}

Netlist load(const std::string& name) {
  std::ifstream in(kData / name);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_netlist(ss.str());
}

// 7. Circuit solver properties.
Outcome solver_properties(Shared& s) {
  Outcome o;
  {
    const Circuit c(load("fixtures/divider.net"), MagnetParams{});
    const OperatingPoint op = c.dc_operating_point(Magnetization::antiparallel());
    o.check(std::abs(op.v(c, "mid") - 0.5) <= 1e-12,
            fmt::format("divider error {:.1e} V", std::abs(op.v(c, "mid") - 0.5)));
  }
  {
    TransientOptions opts;
    opts.temperature = 0.0;
    const auto r = transient(load("fixtures/rc.net"), Magnetization::antiparallel(), opts);
    const auto& v = r.wave.probe("out");
    double worst = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double exact = std::exp(-r.wave.time[i] / 1e-9);
      worst = std::max(worst, std::abs(v[i] - exact) / exact);
    }
    o.check(worst <= 1e-3, fmt::format("RC worst relative error {:.2e}", worst));
  }
  int iterations = 0;
  double kcl = 0.0;
  for (const char* name : {"write.net", "read.net", "fixtures/divider.net",
                           "fixtures/rc.net"}) {
    const Netlist nl = load(name);
    for (bool from_p : {false, true}) {
      TransientOptions opts;
      opts.sde.seed = s.scenario.seed;
      const auto r = transient(nl, Magnetization::tilted_from(from_p, 0.05), opts,
                               s.scenario.model.magnet);
      iterations = std::max(iterations, r.stats.max_newton_iterations);
      kcl = std::max(kcl, r.stats.max_kcl_residual);
    }
  }
  o.check(iterations <= 20, fmt::format("Newton iterations {} <= 20", iterations));
  o.check(kcl <= 1e-12, fmt::format("KCL residual {:.1e} A", kcl));
  return o;
}

// 8. Geometry sweep trends.
Outcome sweep_trends(Shared& s) {
  Outcome o;
  const std::vector<double> lg{14e-9, 16e-9, 18e-9, 20e-9, 24e-9};
  const std::vector<double> tfin{6e-9, 8e-9, 10e-9, 12e-9};
  const SweepResult a = sweep(s.scenario.model, SweepParam::kLg, lg);
  const SweepResult b = sweep(s.scenario.model, SweepParam::kTfin, tfin);
  bool solved = true;
  for (const auto* r : {&a, &b}) {
    for (const auto& row : r->rows) solved = solved && row.delays.has_value();
  }
  o.check(solved, "every sweep point solved");
  if (!solved) return o;
  bool lg_delay = true, lg_ratio = true, tfin_delay = true;
  for (std::size_t i = 1; i < a.rows.size(); ++i) {
    const auto& lo = *a.rows[i - 1].delays;
    const auto& hi = *a.rows[i].delays;
    lg_delay = lg_delay && hi.ap_to_p >= lo.ap_to_p && hi.p_to_ap >= lo.p_to_ap;
    lg_ratio = lg_ratio && a.rows[i].figures.ratio > a.rows[i - 1].figures.ratio;
  }
  for (std::size_t i = 1; i < b.rows.size(); ++i) {
    const auto& lo = *b.rows[i - 1].delays;
    const auto& hi = *b.rows[i].delays;
    tfin_delay = tfin_delay && hi.ap_to_p <= lo.ap_to_p && hi.p_to_ap <= lo.p_to_ap;
  }
  const auto delays = [](const SweepResult& r) {
    std::string out;
    for (const auto& row : r.rows) out += fmt::format(" {:.3f}", row.delays->ap_to_p * 1e9);
    return out;
  };
  o.check(lg_delay, "delay non-decreasing in Lg (AP->P ns):" + delays(a));
  o.check(tfin_delay, "delay non-increasing in Tfin (AP->P ns):" + delays(b));
  o.check(lg_ratio, "Ion/Ioff increasing in Lg");
  return o;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 9. CLI outputs are byte-identical across runs and thread counts.
Outcome determinism(Shared&) {
  Outcome o;
  const fs::path dir = fs::temp_directory_path() / "mtjrng_acceptance";
  fs::create_directories(dir);
  const std::string write_net = (kData / "write.net").string();
  struct Command {
    std::string name;
    std::string args;  // {out} and {dir} are substituted
    std::vector<std::string> outputs;
  };
  const std::vector<Command> commands{
      {"trng fast", "trng --bits 4096 --mode fast --seed 5 --out {out}.bin",
       {".bin", ".bin.summary.txt"}},
      {"trng circuit", "trng --bits 8 --mode circuit --seed 5 --out {out}.bin",
       {".bin", ".bin.summary.txt"}},
      {"calibrate", "calibrate --seed 5 --out {out}.json", {".json"}},
      {"sweep", "sweep --param tfin --values 6,8,10,12 --out {out}.csv", {".csv"}},
      {"simulate", "simulate --netlist " + write_net + " --seed 5 --out {out}.csv",
       {".csv"}},
      {"randtest", "randtest --in {dir}/trng_fast_t1.bin --out {out}.json", {".json"}},
  };
  for (const auto& cmd : commands) {
    std::string tag = cmd.name;
    std::replace(tag.begin(), tag.end(), ' ', '_');
    std::vector<std::string> outputs;
    bool ran = true;
    for (const char* threads : {"1", "4", "4"}) {
      const std::string stem =
          (dir / fmt::format("{}_t{}", tag, threads)).string() +
          (outputs.size() == 2 * cmd.outputs.size() ? "_again" : "");
      std::string args = cmd.args;
      for (auto pos = args.find("{out}"); pos != std::string::npos;
           pos = args.find("{out}")) {
        args.replace(pos, 5, stem);
      }
      for (auto pos = args.find("{dir}"); pos != std::string::npos;
           pos = args.find("{dir}")) {
        args.replace(pos, 5, dir.string());
      }
      const std::string line = fmt::format("MTJRNG_THREADS={} {} {} >/dev/null 2>&1",
                                           threads, MTJRNG_CLI_PATH, args);
      const int status = std::system(line.c_str());
      ran = ran && WIFEXITED(status) && WEXITSTATUS(status) == 0;
      for (const auto& suffix : cmd.outputs) outputs.push_back(slurp(stem + suffix));
    }
    bool same = ran;
    const std::size_t k = cmd.outputs.size();
    for (std::size_t i = 0; i < k; ++i) {
      same = same && !outputs[i].empty() && outputs[i] == outputs[k + i] &&
             outputs[i] == outputs[2 * k + i];
    }
    o.check(same, cmd.name + " identical over threads 1, 4, 4");
  }
  return o;
}

// 10. Throughput is the reciprocal of the period.
Outcome throughput_report(Shared& s) {
  Outcome o;
  PeriodTiming timing = s.scenario.timing;
  timing.write_current = 15e-6;
  const auto reported = [&](const PeriodTiming& t) {
    return run_stream(64, s.scenario.model, t, Mode::kFast, 1).throughput;
  };
  const double base = reported(timing);
  const double expected = 1.0 / (27.5e-9 + 0.5e-9 + 20e-9);
  o.check(relative(base, expected) <= 1e-12,
          fmt::format("default {:.4f} bits/s = 1/48 ns", base));
  PeriodTiming wider = timing;
  wider.t_gap = 1.5e-9;
  const double changed = reported(wider);
  const double expected_wider = 1.0 / (27.5e-9 + 1.5e-9 + 20e-9);
  o.check(relative(changed, expected_wider) <= 1e-12,
          fmt::format("t_gap 1.5 ns gives {:.4f} bits/s = 1/49 ns", changed));
  o.check(relative(1.0 / changed - 1.0 / base, 1e-9) <= 1e-9,
          "reciprocal difference equals the t_gap change");
  return o;
}

}  // namespace

int main() {
  Shared shared;
  try {
    shared.scenario = load_scenario(kData / "default_scenario.json");
  } catch (const std::exception& e) {
    fmt::print("cannot load the default scenario: {}\n", e.what());
    return 2;
  }
  const std::vector<std::pair<std::string, std::function<Outcome(Shared&)>>>
      criteria{
          {"delay targets", delay_targets},
          {"probability target", probability_target},
          {"circuit/fast agreement", circuit_fast_agreement},
          {"reset guarantee", reset_guarantee},
          {"randomness", randomness},
          {"physics properties", physics_properties},
          {"solver properties", solver_properties},
          {"sweep trends", sweep_trends},
          {"determinism", determinism},
          {"throughput report", throughput_report},
      };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[i].second(shared);
    } catch (const std::exception& e) {
      o.check(false, fmt::format("threw: {}", e.what()));
    }
    const double elapsed = seconds_since(t0);
    std::string detail;
    for (const auto& n : o.notes) detail += (detail.empty() ? "" : "; ") + n;
    fmt::print("criterion {:>2} {} {} ({:.1f} s): {}\n", i + 1,
               o.pass ? "PASS" : "FAIL", criteria[i].first, elapsed, detail);
    std::fflush(stdout);
    failures += !o.pass;
  }
  fmt::print("{} of {} criteria passed\n", criteria.size() - failures,
             criteria.size());
  return failures == 0 ? 0 : 1;
}
