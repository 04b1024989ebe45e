// mtjrng: command-line front end.
//
// Exit codes: 0 success, 1 usage, 2 configuration or parse error,
// 3 solver / convergence / calibration failure, 4 randomness suite failure.

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mtjrng/calibrate.hpp"
#include "mtjrng/error.hpp"
#include "mtjrng/io.hpp"
#include "mtjrng/randtest.hpp"
#include "mtjrng/scenario.hpp"
#include "mtjrng/sweep.hpp"
#include "mtjrng/trng.hpp"

namespace fs = std::filesystem;
using namespace mtjrng;

namespace {

enum Exit : int {
  kOk = 0,
  kUsage = 1,
  kConfig = 2,
  kSolver = 3,
  kRandomness = 4,
};

fs::path default_scenario() {
  return default_data_dir() / "default_scenario.json";
}

Netlist read_netlist_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open netlist '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_netlist(ss.str());
  } catch (const ParseError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

int cmd_simulate(const fs::path& netlist_path, const fs::path& scenario_path,
                 const fs::path& out, const std::string& state,
                 std::optional<std::uint64_t> seed) {
  const Scenario sc = load_scenario(scenario_path);
  const Netlist nl = read_netlist_file(netlist_path);
  const bool parallel = state == "p";
  const MagnetParams& mag = sc.model.magnet;

  TransientOptions opts;
  opts.sde.dt = sc.model.sde_dt;
  opts.sde.seed = seed.value_or(sc.seed);
  opts.temperature = sc.model.temperature;
  opts.h_ext = sc.model.h_ext;

  Magnetization m0 = Magnetization::tilted_from(parallel, 0.0);
  if (nl.mtj()) {
    if (sc.model.temperature > 0.0) {
      CounterRng rng(opts.sde.seed, 0, Substream::kInitialState);
      m0 = sample_thermal_state(
          parallel, thermal_stability(mag, sc.model.temperature), rng);
    } else {
      m0 = Magnetization::tilted_from(parallel, deterministic_tilt(mag));
    }
  }
  const TransientResult r = transient(nl, m0, opts, mag);
  auto f = open_output(out);
  write_waveform_csv(f, r.wave);
  std::cout << fmt::format(
      "{} samples, switched = {}, source energy = {:.6g} J, max Newton "
      "iterations = {}\n",
      r.wave.size(), r.switched, r.source_energy,
      r.stats.max_newton_iterations);
  return kOk;
}

int cmd_sweep(const std::string& param, const std::vector<double>& values_nm,
              const fs::path& scenario_path, const fs::path& out) {
  const Scenario sc = load_scenario(scenario_path);
  std::vector<double> values;
  for (double v : values_nm) values.push_back(v * 1e-9);
  const SweepResult r = sweep(sc.model, parse_sweep_param(param), values);
  auto f = open_output(out);
  write_sweep_csv(f, r);
  std::size_t failed = 0;
  for (const auto& row : r.rows) {
    if (!row.error.empty()) {
      ++failed;
      std::cerr << fmt::format("{} = {} nm: {}\n", param, row.value * 1e9,
                               row.error);
    }
  }
  return failed ? kSolver : kOk;
}

int cmd_trng(std::size_t n_bits, const std::string& mode_name,
             std::optional<std::uint64_t> seed_opt,
             const fs::path& scenario_path, const fs::path& out) {
  const Scenario sc = load_scenario(scenario_path);
  const Mode mode = mode_name.empty() ? sc.mode : parse_mode(mode_name);
  const std::uint64_t seed = seed_opt.value_or(sc.seed);
  PeriodTiming timing = sc.timing;
  if (!sc.write_current_given) {
    CalibrationOptions opts = sc.calibration;
    opts.knob = CalibrationKnob::kAmplitude;
    const CalibrationResult cal =
        calibrate(sc.model, timing, Mode::kFast, seed, opts);
    timing.write_current = cal.amplitude;
    std::cout << fmt::format(
        "calibrated write current {:.6g} A (p = {:.4f}, {} trials)\n",
        cal.amplitude, cal.p_final.p_hat, cal.trials_total);
  }
  const TrngEngine engine(sc.model, timing, mode);
  const StreamReport rep = engine.run_stream(n_bits, seed);
  save_bits(out, rep.bits);
  const std::string summary =
      stream_summary(rep, mode, seed, timing.write_current);
  save_text(fs::path(out.string() + ".summary.txt"), summary);
  std::cout << summary;
  return kOk;
}

int cmd_calibrate(const fs::path& scenario_path,
                  const std::optional<fs::path>& perturb_path,
                  std::optional<std::uint64_t> seed_opt, const fs::path& out) {
  const Scenario sc = load_scenario(scenario_path);
  const std::uint64_t seed = seed_opt.value_or(sc.seed);
  const Mode mode = sc.calibration_mode;
  const CalibrationOptions opts = sc.calibration;
  std::optional<Perturbation> perturb;
  if (perturb_path) perturb = load_perturbation(*perturb_path);

  nlohmann::json report;
  const bool duration = opts.knob == CalibrationKnob::kDuration;
  // The tuned value is a duration for the duration knob, not a current.
  const auto result_json = [duration](const CalibrationResult& r) {
    nlohmann::json j = to_json(r);
    if (duration) {
      j.erase("amplitude_A");
      j["t_write_s"] = r.amplitude;
    }
    return j;
  };
  report["mode"] = std::string(to_string(mode));
  report["knob"] = std::string(to_string(opts.knob));
  report["seed"] = seed;
  report["tol"] = opts.tol;
  report["timing"] = {{"t_write_s", sc.timing.t_write},
                      {"t_gap_s", sc.timing.t_gap},
                      {"t_readreset_s", sc.timing.t_readreset},
                      {"reset_current_A", sc.timing.reset_current}};
  report["perturbation"] = nullptr;
  try {
    CalibrationResult r = calibrate(sc.model, sc.timing, mode, seed, opts);
    if (perturb) {
      report["prior"] = result_json(r);
      report["perturbation"] = to_json(*perturb);
      r = recalibrate(sc.model, sc.timing, mode, *perturb, r, seed, opts);
    }
    report.update(result_json(r));
    report["p_hat"] = r.p_final.p_hat;
    report["ci"] = {r.p_final.ci_low, r.p_final.ci_high};
    report["status"] = "ok";
    save_json(out, report);
    std::cout << fmt::format("{} {:.6g} {}, p_hat {:.4f} [{:.4f}, {:.4f}], "
                             "{} trials\n",
                             duration ? "t_write" : "amplitude", r.amplitude,
                             duration ? "s" : "A", r.p_final.p_hat, r.p_final.ci_low,
                             r.p_final.ci_high, r.trials_total);
    return kOk;
  } catch (const CalibrationError& e) {
    report["status"] = "failed";
    report["error"] = e.what();
    if (e.best()) report["best_so_far"] = result_json(*e.best());
    save_json(out, report);
    throw;
  }
}

int cmd_randtest(const fs::path& in, double alpha,
                 std::optional<std::size_t> n_bits, const fs::path& out) {
  const BitStream bits = load_bits(in, n_bits);
  const RandTestReport rep = run_randomness_suite(bits, alpha);
  save_json(out, to_json(rep));
  for (const auto& t : rep.tests) {
    std::cout << fmt::format("{:<22} stat {:>14.6g}  p {:>10.4g}  {}\n", t.name,
                             t.statistic, t.p_value,
                             !t.applicable ? "not applicable"
                             : t.pass      ? "pass"
                                           : "FAIL");
  }
  std::cout << "verdict: " << (rep.verdict ? "pass" : "fail") << '\n';
  return rep.verdict ? kOk : kRandomness;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MTJ true random number generator simulator"};
  app.require_subcommand(1);

  fs::path scenario = default_scenario();
  fs::path out;
  std::optional<std::uint64_t> seed;

  auto* sim = app.add_subcommand("simulate", "run one transient, write CSV");
  fs::path netlist;
  std::string state = "ap";
  sim->add_option("--netlist", netlist, "netlist file")->required();
  sim->add_option("--scenario", scenario, "scenario JSON");
  sim->add_option("--out", out, "waveform CSV")->required();
  sim->add_option("--state", state, "initial MTJ state")
      ->check(CLI::IsMember({"ap", "p"}));
  sim->add_option("--seed", seed, "random seed");

  auto* sw = app.add_subcommand("sweep", "write delay / FinFET geometry sweep");
  std::string param;
  std::vector<double> values;
  sw->add_option("--param", param, "lg or tfin")
      ->required()
      ->check(CLI::IsMember({"lg", "tfin"}));
  sw->add_option("--values", values, "values in nm")
      ->required()
      ->delimiter(',');
  sw->add_option("--scenario", scenario, "scenario JSON");
  sw->add_option("--out", out, "table CSV")->required();

  auto* tr = app.add_subcommand("trng", "generate a bitstream");
  std::size_t n_bits = 0;
  std::string mode;
  tr->add_option("--bits", n_bits, "number of bits")
      ->required()
      ->check(CLI::PositiveNumber);
  tr->add_option("--mode", mode, "circuit or fast")
      ->check(CLI::IsMember({"circuit", "fast"}));
  tr->add_option("--seed", seed, "random seed");
  tr->add_option("--scenario", scenario, "scenario JSON");
  tr->add_option("--out", out, "packed bit file")->required();

  auto* cal = app.add_subcommand("calibrate", "tune write amplitude or duration to p = 0.5");
  std::optional<fs::path> perturb;
  cal->add_option("--scenario", scenario, "scenario JSON");
  cal->add_option("--perturb", perturb, "perturbation JSON");
  cal->add_option("--seed", seed, "random seed");
  cal->add_option("--out", out, "report JSON")->required();

  auto* rt = app.add_subcommand("randtest", "statistical tests on a bit file");
  fs::path in;
  double alpha = 0.01;
  std::optional<std::size_t> nbits;
  rt->add_option("--in", in, "packed bit file")->required();
  rt->add_option("--alpha", alpha, "significance level")
      ->check(CLI::Range(0.0, 1.0));
  rt->add_option("--nbits", nbits, "number of bits to read");
  rt->add_option("--out", out, "report JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*sim) return cmd_simulate(netlist, scenario, out, state, seed);
    if (*sw) return cmd_sweep(param, values, scenario, out);
    if (*tr) return cmd_trng(n_bits, mode, seed, scenario, out);
    if (*cal) return cmd_calibrate(scenario, perturb, seed, out);
    if (*rt) return cmd_randtest(in, alpha, nbits, out);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfig;
  } catch (const DomainError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfig;
  } catch (const ContractError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfig;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kSolver;
  }
  return kUsage;
}
