#pragma once

// Nonlinear nodal solver (Newton-Raphson on MNA equations) and the
// transient engine coupling the circuit to the macrospin integrator.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mtjrng/magnet.hpp"
#include "mtjrng/netlist.hpp"

namespace mtjrng {

struct NewtonOptions {
  double v_tol = 1e-9;   // V, max update at convergence
  double i_tol = 1e-12;  // A, max KCL residual at convergence
  int max_iterations = 100;
  int source_steps = 10;
  double v_limit = 0.5;  // V, per-iteration update clamp
};

struct OperatingPoint {
  std::vector<double> node_voltage;    // indexed like Netlist::nodes
  std::vector<double> source_current;  // per voltage source, + to - inside
  double mtj_current = 0.0;            // A, top -> bottom
  double mtj_voltage = 0.0;            // V, top - bottom
  int iterations = 0;
  double kcl_residual = 0.0;           // A, max over nodes

  double v(const class Circuit& c, std::string_view node) const;
};

/// Waveform of one transient run.  `probes[i]` holds the samples of node
/// `probe_names[i]`.
struct Waveform {
  std::vector<double> time;
  std::vector<std::string> probe_names;
  std::vector<std::vector<double>> probes;
  std::vector<double> i_mtj;
  std::vector<double> mz;

  const std::vector<double>& probe(std::string_view name) const;
  std::size_t size() const { return time.size(); }
};

struct TransientOptions {
  SdeConfig sde{};
  double temperature = 300.0;
  Vec3 h_ext{};
  std::uint64_t trial = 0;
  Substream stream = Substream::kWrite;
  /// Overrides the netlist's .tran stop time when set.
  std::optional<double> t_stop;
  /// Overrides the netlist's .tran step when set.
  std::optional<double> dt_circuit;
  /// Record every n-th circuit step (the last step is always kept).
  int record_every = 1;
};

struct SolverStats {
  int max_newton_iterations = 0;
  long long newton_solves = 0;
  double max_kcl_residual = 0.0;
};

struct TransientResult {
  Waveform wave;
  Magnetization final_state;
  /// Sustained m_z crossing away from the initial hemisphere.
  bool switched = false;
  std::optional<double> t_cross;
  /// Energy delivered by all independent sources, J.
  double source_energy = 0.0;
  SolverStats stats;
};

/// A netlist compiled for simulation: node and source indices resolved,
/// device cards turned into parameter records.
class Circuit {
 public:
  Circuit(Netlist netlist, const MagnetParams& magnet,
          NewtonOptions opts = {});

  const Netlist& netlist() const { return nl_; }
  const std::optional<MtjParams>& mtj_params() const { return mtj_params_; }
  int node(std::string_view name) const;

  /// DC solution with capacitors open and the MTJ at state `m`; sources are
  /// evaluated at `time`.  Falls back to source stepping if plain Newton
  /// fails.  Throws SolverError / TopologyError.
  OperatingPoint dc_operating_point(const Magnetization& m,
                                    double time = 0.0) const;

  /// Transient from the DC point at t = 0.  Per circuit step: (1) capacitor
  /// companion models (backward Euler on the first step, BDF2 after);
  /// (2) Newton solve with the MTJ frozen at the current magnetization;
  /// (3) the solved MTJ current drives dt_circuit / sde.dt Heun sub-steps;
  /// (4) the sample is recorded.
  TransientResult transient(const Magnetization& m0,
                            const TransientOptions& opts) const;

 private:
  struct Workspace;
  struct CapHistory;

  bool newton(Workspace& ws, std::vector<double>& x, double time, double mz,
              double source_scale, const CapHistory* caps) const;
  void assemble(Workspace& ws, const std::vector<double>& x, double time,
                double mz, double source_scale, const CapHistory* caps) const;
  [[noreturn]] void throw_singular(const Workspace& ws) const;
  OperatingPoint make_point(const Workspace& ws, const std::vector<double>& x,
                            double mz) const;

  struct FetRef {
    int d, g, s;
    FinFetParams params;
  };
  struct TwoTerminal {
    int a, b;
    double value;
  };
  struct SourceRef {
    int pos, neg;
    VoltageSource src;
  };

  Netlist nl_;
  NewtonOptions opts_;
  int n_nodes_ = 0;  // excluding ground
  std::vector<SourceRef> sources_;
  std::vector<FetRef> fets_;
  std::vector<TwoTerminal> resistors_;  // value = conductance
  std::vector<TwoTerminal> capacitors_;
  int mtj_top_ = -1;
  int mtj_bottom_ = -1;
  std::optional<MtjParams> mtj_params_;
  MagnetParams magnet_;
};

/// Free-function forms.
OperatingPoint dc_operating_point(const Netlist& nl, const Magnetization& m,
                                  const MagnetParams& magnet = {});
TransientResult transient(const Netlist& nl, const Magnetization& m0,
                          const TransientOptions& opts,
                          const MagnetParams& magnet = {});

}  // namespace mtjrng
