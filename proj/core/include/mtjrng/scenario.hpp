#pragma once

// Scenario files: JSON with units spelled out in key names.
//
// {
//   "netlists":     {"write": "write.net", "read": "read.net"},
//   "magnet":       {"ms_A_per_m", "volume_m3", "delta_300K" | "hk_A_per_m",
//                    "alpha", "eta", "tau0_ns", "chi_asym", "eps_smooth",
//                    "demag": [nx, ny, nz]},
//   "mtj":          {"rp_ohm", "tmr0", "vh_pos_V", "vh_neg_V"},
//   "finfet":       {"lg_nm", "tfin_nm", "hfin_nm", "vth0_V", "kdrive_A_per_V2", ...},
//   "environment":  {"temperature_K", "h_ext_A_per_m": [x, y, z]},
//   "timing":       {"t_write_ns", "t_gap_ns", "t_readreset_ns",
//                    "write_current_uA", "reset_current_uA"},
//   "simulation":   {"sde_dt_ps", "circuit_dt_ps", "edge_ps", "seed",
//                    "mode": "fast" | "circuit"},
//   "comparator":   {"hysteresis_mV"},
//   "calibration":  {"tol", "budget", "mode"},
//   "perturbations": [{"name", "delta_T_K", "h_ext_A_per_m", "tmr_drift",
//                      "ic_drift"}]
// }
//
// Every section and key is optional; relative paths resolve against the
// scenario file's directory.  "mtj" and "finfet" entries override the
// matching keys on every MTJ / FinFET card of both netlists.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mtjrng/calibrate.hpp"
#include "mtjrng/trng.hpp"

namespace mtjrng {

struct NamedPerturbation {
  std::string name;
  Perturbation perturb;
};

struct Scenario {
  std::filesystem::path write_netlist_path;
  std::filesystem::path read_netlist_path;
  ModelConfig model;
  PeriodTiming timing;
  /// False when the scenario leaves the write current to calibration.
  bool write_current_given = false;
  std::uint64_t seed = 1;
  Mode mode = Mode::kFast;
  Mode calibration_mode = Mode::kFast;
  CalibrationOptions calibration;
  std::vector<NamedPerturbation> perturbations;
};

/// Parses and validates; every problem found is listed in one ConfigError.
Scenario parse_scenario(const nlohmann::json& doc,
                        const std::filesystem::path& base_dir);
Scenario load_scenario(const std::filesystem::path& path);

/// Perturbation object as used in "perturbations" and --perturb files.
Perturbation parse_perturbation(const nlohmann::json& doc);
Perturbation load_perturbation(const std::filesystem::path& path);

/// Directory holding the shipped netlists and scenario.
std::filesystem::path default_data_dir();

}  // namespace mtjrng
