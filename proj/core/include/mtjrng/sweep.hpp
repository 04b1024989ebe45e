#pragma once

// Geometry sweeps of the write cell: zero-temperature write delays for both
// transitions, FinFET on/off figures and source energy per write.

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mtjrng/trng.hpp"

namespace mtjrng {

struct WriteDelays {
  double ap_to_p = 0.0;         // s, word-line edge to m_z zero crossing
  double p_to_ap = 0.0;         // s
  double energy_ap_to_p = 0.0;  // J, all sources over the window
  double energy_p_to_ap = 0.0;  // J
  int max_newton_iterations = 0;
  double max_kcl_residual = 0.0;
};

/// Deterministic (T = 0) write transients on the model's write netlist.
/// AP -> P: VWN grounded, word line as in the netlist (rising edge).
/// P -> AP: VWP grounded, word-line pulse inverted (falling edge).
/// The edge time is t_delay + t_rise / 2.  Both runs start from the pole
/// tilted by deterministic_tilt().  Throws SolverError if a transition does
/// not complete inside the .tran window.
WriteDelays measure_write_delays(const ModelConfig& model);

enum class SweepParam { kLg, kTfin };
SweepParam parse_sweep_param(std::string_view s);
std::string_view to_string(SweepParam p);

struct SweepRow {
  double value = 0.0;  // m
  std::optional<WriteDelays> delays;
  FinFetFigures figures{};
  std::string error;   // empty on success

  double energy_per_write() const {
    return delays ? 0.5 * (delays->energy_ap_to_p + delays->energy_p_to_ap)
                  : 0.0;
  }
};

struct SweepResult {
  SweepParam param = SweepParam::kLg;
  std::vector<SweepRow> rows;
};

/// Name of the device whose on/off figures are reported.
inline constexpr std::string_view kFiguresDevice = "mn2";

/// Sets `param` on every FinFET card of the write netlist.
ModelConfig with_geometry(const ModelConfig& model, SweepParam param,
                          double value);

/// One row per value (sorted ascending, at least 3).  A failing point is
/// recorded in its row and the sweep continues.
SweepResult sweep(const ModelConfig& model, SweepParam param,
                  std::span<const double> values, unsigned threads = 0);

}  // namespace mtjrng
