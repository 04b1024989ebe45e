#include "mtjrng/sweep.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <set>

#include "mtjrng/error.hpp"
#include "mtjrng/parallel.hpp"

namespace mtjrng {

SweepParam parse_sweep_param(std::string_view s) {
  if (s == "lg") return SweepParam::kLg;
  if (s == "tfin") return SweepParam::kTfin;
  throw ConfigError("unknown sweep parameter '" + std::string(s) +
                    "' (expected lg or tfin)");
}

std::string_view to_string(SweepParam p) {
  return p == SweepParam::kLg ? "lg" : "tfin";
}

namespace {

struct Transition {
  double delay;
  double energy;
  int iterations;
  double kcl;
};

Transition run_transition(const Netlist& nl, const ModelConfig& model,
                          bool from_parallel, double edge_time) {
  const double t_ref = model.temperature > 0.0 ? model.temperature : 300.0;
  const auto m0 = Magnetization::tilted_from(
      from_parallel, deterministic_tilt(model.magnet, t_ref));
  TransientOptions opts;
  opts.temperature = 0.0;
  opts.h_ext = model.h_ext;
  opts.sde.dt = model.sde_dt;
  opts.dt_circuit = model.dt_circuit;
  opts.record_every = 1 << 30;
  const TransientResult r = Circuit(nl, model.magnet).transient(m0, opts);
  if (!r.switched || !r.t_cross) {
    throw SolverError(fmt::format("{} write did not complete within {:.4g} s",
                                  from_parallel ? "P->AP" : "AP->P",
                                  nl.tran.t_stop));
  }
  return {*r.t_cross - edge_time, r.source_energy,
          r.stats.max_newton_iterations, r.stats.max_kcl_residual};
}

}  // namespace

WriteDelays measure_write_delays(const ModelConfig& model) {
  const Netlist& base = model.write_netlist;
  const auto& wl = base.device<VoltageSource>("vwl");
  const auto* pulse = std::get_if<PulseSpec>(&wl.wave);
  if (!pulse) throw ConfigError("word line VWL must be a PULSE source");
  const double edge_time = pulse->delay + 0.5 * pulse->rise;

  Netlist up = base;
  up.device<VoltageSource>("vwn").wave = 0.0;
  const Transition a = run_transition(up, model, false, edge_time);

  Netlist down = base;
  down.device<VoltageSource>("vwp").wave = 0.0;
  PulseSpec inv = *pulse;
  std::swap(inv.v0, inv.v1);
  down.device<VoltageSource>("vwl").wave = inv;
  const Transition b = run_transition(down, model, true, edge_time);

  return {a.delay,
          b.delay,
          a.energy,
          b.energy,
          std::max(a.iterations, b.iterations),
          std::max(a.kcl, b.kcl)};
}

ModelConfig with_geometry(const ModelConfig& model, SweepParam param,
                          double value) {
  if (!(value > 0.0)) throw ConfigError("sweep values must be > 0");
  ModelConfig m = model;
  std::set<std::string> cards;
  for (const auto& d : m.write_netlist.devices) {
    if (const auto* f = std::get_if<FinFetElement>(&d)) cards.insert(f->card);
  }
  for (const auto& name : cards) {
    m.write_netlist.cards.at(name).set(
        param == SweepParam::kLg ? "lg" : "tfin", value);
  }
  return m;
}

SweepResult sweep(const ModelConfig& model, SweepParam param,
                  std::span<const double> values, unsigned threads) {
  if (values.size() < 3) throw ConfigError("a sweep needs at least 3 values");
  if (!std::is_sorted(values.begin(), values.end())) {
    throw ConfigError("sweep values must be sorted ascending");
  }
  SweepResult out;
  out.param = param;
  out.rows.resize(values.size());
  parallel_for(
      values.size(),
      [&](std::size_t i) {
        SweepRow& row = out.rows[i];
        row.value = values[i];
        try {
          const ModelConfig m = with_geometry(model, param, values[i]);
          const Netlist& nl = m.write_netlist;
          const double vdd = nl.device<VoltageSource>("vdd").value(0.0);
          row.figures = finfet_figures(
              nl.finfet_params(nl.device<FinFetElement>(kFiguresDevice)), vdd);
          row.delays = measure_write_delays(m);
        } catch (const std::exception& e) {
          row.error = e.what();
        }
      },
      threads);
  return out;
}

}  // namespace mtjrng
