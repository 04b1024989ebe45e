#include "mtjrng/circuit.hpp"

#include <Eigen/Dense>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "mtjrng/error.hpp"

namespace mtjrng {

struct Circuit::Workspace {
  explicit Workspace(int n) : jac(n, n), rhs(n), dx(n), lu(n) {}
  Eigen::MatrixXd jac;
  Eigen::VectorXd rhs;  // residual F(x)
  Eigen::VectorXd dx;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;
  int iterations = 0;
  double kcl = 0.0;
};

struct Circuit::CapHistory {
  std::vector<double> v_prev;   // v_k across each capacitor
  std::vector<double> v_prev2;  // v_{k-1}
  double h = 0.0;
  bool bdf2 = false;
};

namespace {

/// Voltage of node `n` (ground = 0) in the unknown vector.
inline double nv(const std::vector<double>& x, int n) {
  return n == 0 ? 0.0 : x[n - 1];
}

}  // namespace

Circuit::Circuit(Netlist netlist, const MagnetParams& magnet,
                 NewtonOptions opts)
    : nl_(std::move(netlist)), opts_(opts), magnet_(magnet) {
  n_nodes_ = static_cast<int>(nl_.nodes.size()) - 1;
  for (const auto& d : nl_.devices) {
    if (const auto* r = std::get_if<Resistor>(&d)) {
      resistors_.push_back({r->a, r->b, 1.0 / r->ohms});
    } else if (const auto* c = std::get_if<Capacitor>(&d)) {
      capacitors_.push_back({c->a, c->b, c->farads});
    } else if (const auto* v = std::get_if<VoltageSource>(&d)) {
      sources_.push_back({v->pos, v->neg, *v});
    } else if (const auto* f = std::get_if<FinFetElement>(&d)) {
      fets_.push_back({f->d, f->g, f->s, nl_.finfet_params(*f)});
    } else if (const auto* j = std::get_if<MtjElement>(&d)) {
      mtj_top_ = j->top;
      mtj_bottom_ = j->bottom;
      mtj_params_ = nl_.mtj_params(*j, magnet_);
    }
  }
}

int Circuit::node(std::string_view name) const {
  const int i = nl_.find_node(name);
  if (i < 0) throw ConfigError("netlist has no node '" + std::string(name) + "'");
  return i;
}

double OperatingPoint::v(const Circuit& c, std::string_view node) const {
  return node_voltage.at(static_cast<std::size_t>(c.node(node)));
}

const std::vector<double>& Waveform::probe(std::string_view name) const {
  for (std::size_t i = 0; i < probe_names.size(); ++i) {
    if (probe_names[i] == name) return probes[i];
  }
  throw ConfigError("waveform has no probe '" + std::string(name) + "'");
}

void Circuit::assemble(Workspace& ws, const std::vector<double>& x,
                       double time, double mz, double source_scale,
                       const CapHistory* caps) const {
  auto& J = ws.jac;
  auto& F = ws.rhs;
  J.setZero();
  F.setZero();

  // Current `i` leaving node a into node b with conductance partials.
  auto add_branch = [&](int a, int b, double i) {
    if (a) F[a - 1] += i;
    if (b) F[b - 1] -= i;
  };
  auto add_g = [&](int row_pos, int row_neg, int col, double g) {
    if (!col) return;
    if (row_pos) J(row_pos - 1, col - 1) += g;
    if (row_neg) J(row_neg - 1, col - 1) -= g;
  };

  for (const auto& r : resistors_) {
    const double i = r.value * (nv(x, r.a) - nv(x, r.b));
    add_branch(r.a, r.b, i);
    add_g(r.a, r.b, r.a, r.value);
    add_g(r.a, r.b, r.b, -r.value);
  }

  if (caps) {
    const double scale = caps->bdf2 ? 1.5 : 1.0;
    for (std::size_t k = 0; k < capacitors_.size(); ++k) {
      const auto& c = capacitors_[k];
      const double g = c.value / caps->h;
      const double v = nv(x, c.a) - nv(x, c.b);
      double i;
      if (caps->bdf2) {
        i = g * (1.5 * v - 2.0 * caps->v_prev[k] + 0.5 * caps->v_prev2[k]);
      } else {
        i = g * (v - caps->v_prev[k]);
      }
      add_branch(c.a, c.b, i);
      add_g(c.a, c.b, c.a, scale * g);
      add_g(c.a, c.b, c.b, -scale * g);
    }
  }

  for (const auto& f : fets_) {
    const double vd = nv(x, f.d), vg = nv(x, f.g), vs = nv(x, f.s);
    const FinFetEval e = finfet_eval(vg - vs, vd - vs, f.params);
    add_branch(f.d, f.s, e.id);
    add_g(f.d, f.s, f.d, e.gds);
    add_g(f.d, f.s, f.g, e.gm);
    add_g(f.d, f.s, f.s, -e.gm - e.gds);
  }

  if (mtj_params_) {
    const double v = nv(x, mtj_top_) - nv(x, mtj_bottom_);
    const MtjStamp st = mtj_branch(mz, v, *mtj_params_);
    add_branch(mtj_top_, mtj_bottom_, st.current);
    add_g(mtj_top_, mtj_bottom_, mtj_top_, st.conductance);
    add_g(mtj_top_, mtj_bottom_, mtj_bottom_, -st.conductance);
  }

  for (std::size_t j = 0; j < sources_.size(); ++j) {
    const auto& s = sources_[j];
    const int row = n_nodes_ + static_cast<int>(j);
    const double i = x[static_cast<std::size_t>(row)];
    // Branch current flows from + to - through the source.
    if (s.pos) {
      F[s.pos - 1] += i;
      J(s.pos - 1, row) += 1.0;
    }
    if (s.neg) {
      F[s.neg - 1] -= i;
      J(s.neg - 1, row) -= 1.0;
    }
    F[row] = nv(x, s.pos) - nv(x, s.neg) - source_scale * s.src.value(time);
    if (s.pos) J(row, s.pos - 1) += 1.0;
    if (s.neg) J(row, s.neg - 1) -= 1.0;
  }
}

void Circuit::throw_singular(const Workspace& ws) const {
  Eigen::FullPivLU<Eigen::MatrixXd> full(ws.jac);
  const Eigen::MatrixXd kernel = full.kernel();
  Eigen::Index idx = 0;
  kernel.col(0).cwiseAbs().maxCoeff(&idx);
  std::string name;
  std::string what;
  if (idx < n_nodes_) {
    name = nl_.nodes[static_cast<std::size_t>(idx) + 1];
    what = "singular nodal matrix: floating node '" + name + "'";
  } else {
    name = sources_[static_cast<std::size_t>(idx - n_nodes_)].src.name;
    what = "singular nodal matrix: voltage source loop through '" + name + "'";
  }
  throw TopologyError(name, what);
}

bool Circuit::newton(Workspace& ws, std::vector<double>& x, double time,
                     double mz, double source_scale,
                     const CapHistory* caps) const {
  double last_dv = 0.0;
  for (int it = 0; it <= opts_.max_iterations; ++it) {
    assemble(ws, x, time, mz, source_scale, caps);
    double kcl = 0.0, vres = 0.0;
    for (int i = 0; i < n_nodes_; ++i) kcl = std::max(kcl, std::abs(ws.rhs[i]));
    for (int i = n_nodes_; i < ws.rhs.size(); ++i) {
      vres = std::max(vres, std::abs(ws.rhs[i]));
    }
    if (it > 0 && last_dv <= opts_.v_tol && kcl <= opts_.i_tol &&
        vres <= opts_.v_tol) {
      ws.iterations = it;
      ws.kcl = kcl;
      return true;
    }
    if (it == opts_.max_iterations) break;
    ws.lu.compute(ws.jac);
    const auto pivots = ws.lu.matrixLU().diagonal().cwiseAbs();
    if (!(pivots.minCoeff() > 1e-14 * pivots.maxCoeff())) throw_singular(ws);
    ws.dx = ws.lu.solve(-ws.rhs);
    last_dv = 0.0;
    for (int i = 0; i < n_nodes_; ++i) {
      const double d = std::clamp(ws.dx[i], -opts_.v_limit, opts_.v_limit);
      x[static_cast<std::size_t>(i)] += d;
      last_dv = std::max(last_dv, std::abs(d));
    }
    for (int i = n_nodes_; i < ws.dx.size(); ++i) {
      x[static_cast<std::size_t>(i)] += ws.dx[i];
    }
    if (!std::isfinite(last_dv)) return false;
  }
  ws.kcl = 0.0;
  for (int i = 0; i < n_nodes_; ++i) ws.kcl = std::max(ws.kcl, std::abs(ws.rhs[i]));
  return false;
}

OperatingPoint Circuit::make_point(const Workspace& ws,
                                   const std::vector<double>& x,
                                   double mz) const {
  OperatingPoint op;
  op.node_voltage.resize(nl_.nodes.size(), 0.0);
  for (int i = 1; i <= n_nodes_; ++i) op.node_voltage[i] = x[i - 1];
  op.source_current.assign(x.begin() + n_nodes_, x.end());
  if (mtj_params_) {
    op.mtj_voltage = nv(x, mtj_top_) - nv(x, mtj_bottom_);
    op.mtj_current = mtj_branch(mz, op.mtj_voltage, *mtj_params_).current;
  }
  op.iterations = ws.iterations;
  op.kcl_residual = ws.kcl;
  return op;
}

OperatingPoint Circuit::dc_operating_point(const Magnetization& m,
                                           double time) const {
  const int n = n_nodes_ + static_cast<int>(sources_.size());
  Workspace ws(n);
  std::vector<double> x(static_cast<std::size_t>(n), 0.0);
  if (newton(ws, x, time, m.mz(), 1.0, nullptr)) {
    return make_point(ws, x, m.mz());
  }
  // Source stepping: ramp every source from 0 to 100 %.
  std::fill(x.begin(), x.end(), 0.0);
  int total = 0;
  for (int k = 1; k <= opts_.source_steps; ++k) {
    const double scale = static_cast<double>(k) / opts_.source_steps;
    if (!newton(ws, x, time, m.mz(), scale, nullptr)) {
      throw SolverError(fmt::format(
          "DC operating point did not converge (source stepping at {:.0f}%, "
          "max KCL residual {:.3e} A)",
          100.0 * scale, ws.kcl));
    }
    total += ws.iterations;
  }
  ws.iterations = total;
  return make_point(ws, x, m.mz());
}

TransientResult Circuit::transient(const Magnetization& m0,
                                   const TransientOptions& opts) const {
  const double dt_c = opts.dt_circuit.value_or(nl_.tran.dt);
  const double t_stop = opts.t_stop.value_or(nl_.tran.t_stop);
  if (!(dt_c > 0.0) || !(t_stop > 0.0)) {
    throw ConfigError("transient needs positive step and stop time");
  }
  const double ratio = dt_c / opts.sde.dt;
  const long long n_sub = std::llround(ratio);
  if (n_sub < 1 || std::abs(ratio - static_cast<double>(n_sub)) > 1e-6 * ratio) {
    throw ConfigError(fmt::format(
        "circuit step {:g} s must be an integer multiple of the SDE step {:g} s",
        dt_c, opts.sde.dt));
  }
  const auto n_steps =
      static_cast<long long>(std::floor(t_stop / dt_c + 1e-9));
  const int every = std::max(1, opts.record_every);

  std::vector<int> probe_nodes;
  for (const auto& p : nl_.probes) probe_nodes.push_back(node(p));

  TransientResult out;
  Waveform& w = out.wave;
  w.probe_names = nl_.probes;
  w.probes.resize(probe_nodes.size());
  const auto reserve = static_cast<std::size_t>(n_steps / every + 2);
  w.time.reserve(reserve);
  w.i_mtj.reserve(reserve);
  w.mz.reserve(reserve);
  for (auto& p : w.probes) p.reserve(reserve);

  const int n = n_nodes_ + static_cast<int>(sources_.size());
  Workspace ws(n);
  std::vector<double> x(static_cast<std::size_t>(n), 0.0);

  OperatingPoint op = dc_operating_point(m0, 0.0);
  for (int i = 1; i <= n_nodes_; ++i) x[i - 1] = op.node_voltage[i];
  std::copy(op.source_current.begin(), op.source_current.end(),
            x.begin() + n_nodes_);
  out.stats.max_newton_iterations = op.iterations;
  out.stats.newton_solves = 1;
  out.stats.max_kcl_residual = op.kcl_residual;

  CapHistory caps;
  caps.h = dt_c;
  for (const auto& c : capacitors_) {
    caps.v_prev.push_back(nv(x, c.a) - nv(x, c.b));
  }
  caps.v_prev2 = caps.v_prev;

  auto power = [&](double t) {
    double p = 0.0;
    for (std::size_t j = 0; j < sources_.size(); ++j) {
      p -= sources_[j].src.value(t) * x[n_nodes_ + j];
    }
    return p;
  };
  auto mtj_current = [&](double mz) {
    if (!mtj_params_) return 0.0;
    return mtj_branch(mz, nv(x, mtj_top_) - nv(x, mtj_bottom_), *mtj_params_)
        .current;
  };
  auto record = [&](double t, double i_mtj, double mz) {
    w.time.push_back(t);
    w.i_mtj.push_back(i_mtj);
    w.mz.push_back(mz);
    for (std::size_t k = 0; k < probe_nodes.size(); ++k) {
      w.probes[k].push_back(nv(x, probe_nodes[k]));
    }
  };

  Magnetization m = m0;
  LlgStepper stepper(magnet_, opts.temperature, opts.h_ext, opts.sde);
  CounterRng rng(opts.sde.seed, opts.trial, opts.stream);
  SwitchDetector detector(!m0.is_parallel(), opts.sde.switch_threshold);
  detector.observe(m0.mz(), 0.0);

  double i_mtj = mtj_current(m.mz());
  record(0.0, i_mtj, m.mz());
  double p_prev = power(0.0);

  for (long long k = 1; k <= n_steps; ++k) {
    const double t = static_cast<double>(k) * dt_c;
    const double t_prev = t - dt_c;
    caps.bdf2 = k > 1;
    if (!newton(ws, x, t, m.mz(), 1.0, &caps)) {
      throw SolverError(fmt::format(
          "transient Newton did not converge at t = {:.6e} s (max KCL "
          "residual {:.3e} A)",
          t, ws.kcl));
    }
    out.stats.max_newton_iterations =
        std::max(out.stats.max_newton_iterations, ws.iterations);
    out.stats.max_kcl_residual = std::max(out.stats.max_kcl_residual, ws.kcl);
    ++out.stats.newton_solves;

    i_mtj = mtj_current(m.mz());
    if (mtj_params_) {
      try {
        for (long long s = 1; s <= n_sub; ++s) {
          m = stepper.step(m, i_mtj, rng);
          detector.observe(m.mz(), t_prev + static_cast<double>(s) * opts.sde.dt);
        }
      } catch (const DivergenceError& e) {
        throw DivergenceError(fmt::format("{} at t = {:.6e} s", e.what(), t));
      }
    }

    for (std::size_t c = 0; c < capacitors_.size(); ++c) {
      caps.v_prev2[c] = caps.v_prev[c];
      caps.v_prev[c] = nv(x, capacitors_[c].a) - nv(x, capacitors_[c].b);
    }
    const double p_now = power(t);
    out.source_energy += 0.5 * (p_prev + p_now) * dt_c;
    p_prev = p_now;

    if (k % every == 0 || k == n_steps) record(t, i_mtj, m.mz());
  }

  out.final_state = m;
  out.switched = detector.switched();
  out.t_cross = detector.t_cross();
  return out;
}

OperatingPoint dc_operating_point(const Netlist& nl, const Magnetization& m,
                                  const MagnetParams& magnet) {
  return Circuit(nl, magnet).dc_operating_point(m);
}

TransientResult transient(const Netlist& nl, const Magnetization& m0,
                          const TransientOptions& opts,
                          const MagnetParams& magnet) {
  return Circuit(nl, magnet).transient(m0, opts);
}

}  // namespace mtjrng
