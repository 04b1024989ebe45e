#include "mtjrng/trng.hpp"

#include <boost/math/tools/roots.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <bit>
#include <functional>
#include <cmath>
#include <exception>
#include <fstream>
#include <sstream>

#include "mtjrng/error.hpp"
#include "mtjrng/parallel.hpp"

namespace mtjrng {

Mode parse_mode(std::string_view s) {
  if (s == "circuit") return Mode::kCircuit;
  if (s == "fast") return Mode::kFast;
  throw ConfigError("unknown mode '" + std::string(s) +
                    "' (expected circuit or fast)");
}

std::string_view to_string(Mode m) {
  return m == Mode::kCircuit ? "circuit" : "fast";
}

void PeriodTiming::validate(const MagnetParams& magnet,
                            double temperature) const {
  std::vector<std::string> errs;
  if (!(t_write > 0.0)) errs.emplace_back("t_write must be > 0");
  if (!(t_gap > 0.0)) errs.emplace_back("t_gap must be > 0");
  if (!(t_readreset > 0.0)) errs.emplace_back("t_readreset must be > 0");
  if (!(write_current >= 0.0)) {
    errs.emplace_back("write current must be >= 0 (drives AP -> P)");
  }
  if (!(reset_current < 0.0)) {
    errs.emplace_back("reset current must be < 0 (drives P -> AP)");
  } else {
    const double ic = critical_current(magnet, temperature, Direction::kPToAp);
    if (std::abs(reset_current) < 1.5 * ic) {
      errs.push_back(fmt::format(
          "|reset current| = {:.4g} A is below 1.5 Ic0(P->AP) = {:.4g} A",
          std::abs(reset_current), 1.5 * ic));
    } else if (temperature > 0.0 && t_readreset > 0.0) {
      const double delay = precessional_delay(reset_current, magnet,
                                              temperature, Direction::kPToAp);
      if (t_readreset < 10.0 * delay) {
        errs.push_back(fmt::format(
            "t_readreset = {:.4g} s is shorter than 10x the reset delay "
            "({:.4g} s)",
            t_readreset, 10.0 * delay));
      }
    }
  }
  if (!errs.empty()) {
    std::string msg = "invalid period timing: " + errs.front();
    for (std::size_t i = 1; i < errs.size(); ++i) msg += "; " + errs[i];
    throw ConfigError(msg);
  }
}

Detection detect_bit_from_trace(std::span<const double> time,
                                std::span<const double> v_m,
                                std::span<const double> v_ref,
                                const ComparatorConfig& cfg) {
  if (time.size() != v_m.size() || v_m.size() != v_ref.size()) {
    throw ContractError(fmt::format(
        "comparator traces differ in length (time {}, v_m {}, v_ref {})",
        time.size(), v_m.size(), v_ref.size()));
  }
  const double half = 0.5 * cfg.hysteresis;
  enum class Level { kUnknown, kLow, kHigh } out = Level::kUnknown;
  for (std::size_t i = 0; i < v_m.size(); ++i) {
    const double d = v_m[i] - v_ref[i];
    if (d < -half) {
      if (out == Level::kLow) return {1, time[i]};
      out = Level::kHigh;
    } else if (d > half) {
      out = Level::kLow;
    }
  }
  return {0, std::nullopt};
}

ModelConfig default_model(const std::string& data_dir) {
  auto load = [&](const std::string& name) {
    const std::string path = data_dir + "/" + name;
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open netlist '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_netlist(ss.str());
  };
  ModelConfig m;
  m.write_netlist = load("write.net");
  m.read_netlist = load("read.net");
  return m;
}

BitStream BitStream::from_bytes(std::vector<std::uint8_t> bytes,
                                std::size_t n) {
  if (bytes.size() * 8 < n) {
    throw ContractError("bit count exceeds the supplied bytes");
  }
  bytes.resize((n + 7) / 8);
  if (n % 8) bytes.back() &= static_cast<std::uint8_t>(0xFF << (8 - n % 8));
  BitStream b;
  b.bytes_ = std::move(bytes);
  b.n_ = n;
  for (auto byte : b.bytes_) b.ones_ += static_cast<std::size_t>(std::popcount(byte));
  return b;
}

void BitStream::push_back(bool bit) {
  if (n_ % 8 == 0) bytes_.push_back(0);
  if (bit) {
    bytes_.back() |= static_cast<std::uint8_t>(0x80u >> (n_ % 8));
    ++ones_;
  }
  ++n_;
}

std::vector<std::uint8_t> BitStream::unpacked() const {
  std::vector<std::uint8_t> out(n_);
  for (std::size_t i = 0; i < n_; ++i) out[i] = (*this)[i];
  return out;
}

namespace {

MtjState state_of(const Magnetization& m) {
  return m.mz() > 0.0 ? MtjState::kP : MtjState::kAP;
}

/// Root of a monotone f on [lo, hi]; hi grows geometrically until the sign
/// changes.
double solve_monotone(const std::function<double(double)>& f, double lo,
                      double hi, double hi_limit, const char* what) {
  double f_lo = f(lo);
  double f_hi = f(hi);
  while (f_lo * f_hi > 0.0 && hi < hi_limit) {
    lo = hi;
    f_lo = f_hi;
    hi = std::min(hi * 2.0, hi_limit);
    f_hi = f(hi);
  }
  if (f_lo * f_hi > 0.0) {
    throw ConfigError(fmt::format("{} is out of reach of the circuit", what));
  }
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  auto r = boost::math::tools::bisect(
      f, lo, hi, boost::math::tools::eps_tolerance<double>(45));
  return 0.5 * (r.first + r.second);
}

void set_dc(Netlist& nl, std::string_view name, double v) {
  nl.device<VoltageSource>(name).wave = v;
}

}  // namespace

TrngEngine::TrngEngine(ModelConfig model, PeriodTiming timing, Mode mode)
    : model_(std::move(model)), timing_(timing), mode_(mode) {
  model_.magnet.validate();
  timing_.validate(model_.magnet, model_.temperature);
  if (mode_ == Mode::kFast) return;

  const MagnetParams& mag = model_.magnet;
  const auto ap = Magnetization::antiparallel();
  const auto p = Magnetization::parallel();

  // Write rail: VWP giving I_w with the word line high and the MTJ in AP.
  Netlist wn = model_.write_netlist;
  const double vdd = wn.device<VoltageSource>("vdd").value(0.0);
  set_dc(wn, "vwn", 0.0);
  if (timing_.write_current > 0.0) {
    Netlist probe = wn;
    set_dc(probe, "vwl", vdd);
    auto f = [&](double v) {
      set_dc(probe, "vwp", v);
      return dc_operating_point(probe, ap, mag).mtj_current -
             timing_.write_current;
    };
    drive_.v_write = solve_monotone(f, 0.0, 1.0, 16.0, "write current");
  }
  set_dc(wn, "vwp", drive_.v_write);
  wn.device<VoltageSource>("vwl").wave =
      PulseSpec{0.0, vdd, 0.0, model_.edge, model_.edge,
                timing_.t_write - model_.edge, 0.0};
  write_circuit_.emplace(std::move(wn), mag);

  // Read rail: VRD giving I_r through the MTJ in P.
  Netlist rn = model_.read_netlist;
  {
    Netlist probe = rn;
    auto f = [&](double v) {
      set_dc(probe, "vrd", v);
      return timing_.reset_current -
             dc_operating_point(probe, p, mag).mtj_current;
    };
    drive_.v_read = solve_monotone(f, 0.0, 1.0, 16.0, "reset current");
    set_dc(probe, "vrd", drive_.v_read);
    const Circuit c(probe, mag);
    drive_.v_m_p = c.dc_operating_point(p).v(c, "vm");
    drive_.v_m_ap = c.dc_operating_point(ap).v(c, "vm");
    const double target = 0.5 * (drive_.v_m_p + drive_.v_m_ap);
    auto g = [&](double r) {
      probe.device<Resistor>("rref").ohms = r;
      const Circuit cc(probe, mag);
      return cc.dc_operating_point(p).v(cc, "vref") - target;
    };
    drive_.r_ref = solve_monotone(g, 1.0, 1e3, 1e7, "bridge balance");
    drive_.v_ref = target;
  }
  rn.device<Resistor>("rref").ohms = drive_.r_ref;
  rn.device<VoltageSource>("vrd").wave =
      PulseSpec{0.0, drive_.v_read, 0.0, model_.edge, model_.edge,
                timing_.t_readreset, 0.0};
  read_circuit_.emplace(std::move(rn), mag);
}

double TrngEngine::write_probability() const {
  return neel_brown_probability(timing_.write_current, timing_.t_write,
                                model_.magnet, model_.temperature,
                                Direction::kApToP, model_.h_ext.z);
}

PeriodResult TrngEngine::run_period(std::uint64_t seed, std::uint64_t trial,
                                    bool keep_trace) const {
  return mode_ == Mode::kFast ? run_fast(seed, trial)
                              : run_circuit(seed, trial, keep_trace);
}

PeriodResult TrngEngine::run_fast(std::uint64_t seed,
                                  std::uint64_t trial) const {
  CounterRng rng(seed, trial, Substream::kBernoulli);
  const bool switched = rng.uniform() < write_probability();
  PeriodResult r;
  r.state_after_write = switched ? MtjState::kP : MtjState::kAP;
  r.bit = switched ? 1 : 0;
  r.state_after_period = MtjState::kAP;
  return r;
}

PeriodResult TrngEngine::run_circuit(std::uint64_t seed, std::uint64_t trial,
                                     bool keep_trace) const {
  const MagnetParams& mag = model_.magnet;
  Magnetization m0 = Magnetization::antiparallel();
  if (model_.temperature > 0.0) {
    CounterRng init(seed, trial, Substream::kInitialState);
    m0 = sample_thermal_state(
        false, thermal_stability(mag, model_.temperature), init);
  } else {
    m0 = Magnetization::tilted_from(false, deterministic_tilt(mag));
  }

  TransientOptions opts;
  opts.sde.dt = model_.sde_dt;
  opts.sde.seed = seed;
  opts.temperature = model_.temperature;
  opts.h_ext = model_.h_ext;
  opts.trial = trial;
  opts.dt_circuit = model_.dt_circuit;

  // Write sub-cycle; the gap (word line low, no drive) is simulated with it.
  opts.stream = Substream::kWrite;
  opts.t_stop = timing_.t_write + timing_.t_gap;
  opts.record_every = 1 << 30;
  const TransientResult w = write_circuit_->transient(m0, opts);

  // Read & reset sub-cycle.
  opts.stream = Substream::kReadReset;
  opts.t_stop = timing_.t_readreset;
  opts.record_every = 1;
  TransientResult rr = read_circuit_->transient(w.final_state, opts);
  const Detection det = detect_bit_from_trace(
      rr.wave.time, rr.wave.probe("vm"), rr.wave.probe("vref"),
      model_.comparator);

  PeriodResult r;
  r.bit = det.bit;
  r.t_flip_read = det.t_flip;
  r.state_after_write = state_of(w.final_state);
  r.state_after_period = state_of(rr.final_state);
  if (keep_trace) r.read_trace = std::move(rr.wave);
  return r;
}

namespace {

[[noreturn]] void rethrow_at_bit(const std::exception_ptr& e, std::size_t i) {
  const auto msg = [&](const std::exception& ex) {
    return fmt::format("bit {}: {}", i, ex.what());
  };
  try {
    std::rethrow_exception(e);
  } catch (const TopologyError& ex) {
    throw TopologyError(ex.node(), msg(ex));
  } catch (const DivergenceError& ex) {
    throw DivergenceError(msg(ex));
  } catch (const SolverError& ex) {
    throw SolverError(msg(ex));
  } catch (const ConfigError& ex) {
    throw ConfigError(msg(ex));
  } catch (const DomainError& ex) {
    throw DomainError(msg(ex));
  } catch (const ContractError& ex) {
    throw ContractError(msg(ex));
  } catch (const std::exception& ex) {
    throw Error(msg(ex));
  }
}

}  // namespace

StreamReport TrngEngine::run_stream(std::size_t n_bits, std::uint64_t seed,
                                    unsigned threads) const {
  if (n_bits < 1) throw ContractError("n_bits must be >= 1");
  std::vector<PeriodResult> results(n_bits);
  std::vector<std::exception_ptr> errors(n_bits);
  parallel_for(
      n_bits,
      [&](std::size_t i) {
        try {
          results[i] = run_period(seed, i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      },
      threads);
  for (std::size_t i = 0; i < n_bits; ++i) {
    if (errors[i]) rethrow_at_bit(errors[i], i);
  }

  StreamReport rep;
  rep.period = timing_.period();
  rep.throughput = timing_.throughput();
  for (const auto& r : results) {
    rep.bits.push_back(r.bit == 1);
    if (r.state_after_period != MtjState::kAP) ++rep.reset_failures;
    if ((r.bit == 1) != (r.state_after_write == MtjState::kP)) {
      ++rep.comparator_mismatches;
    }
  }
  return rep;
}

PeriodResult run_period(const ModelConfig& model, const PeriodTiming& timing,
                        Mode mode, std::uint64_t seed, std::uint64_t trial) {
  return TrngEngine(model, timing, mode).run_period(seed, trial);
}

StreamReport run_stream(std::size_t n_bits, const ModelConfig& model,
                        const PeriodTiming& timing, Mode mode,
                        std::uint64_t seed, unsigned threads) {
  return TrngEngine(model, timing, mode).run_stream(n_bits, seed, threads);
}

}  // namespace mtjrng
