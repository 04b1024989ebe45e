#pragma once

// File formats: waveform and sweep CSV (12 significant digits), packed
// bitstreams, text summaries and JSON reports.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mtjrng/calibrate.hpp"
#include "mtjrng/randtest.hpp"
#include "mtjrng/sweep.hpp"

namespace mtjrng {

/// Header `time,<probe names>,i_mtj`.
void write_waveform_csv(std::ostream& out, const Waveform& wave);

/// Header `<param>_nm,delay_ap_to_p_s,delay_p_to_ap_s,i_on_A,i_off_A,
/// on_off_ratio,energy_per_write_J,error`; failed rows leave the numeric
/// fields empty.
void write_sweep_csv(std::ostream& out, const SweepResult& result);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};
/// Plain comma-separated reader (no quoting), enough for the files above.
CsvTable read_csv(std::istream& in);

/// Raw packed bytes, MSB first; the last byte is zero-padded.
void save_bits(const std::filesystem::path& path, const BitStream& bits);
/// Reads a packed file; `n_bits` defaults to 8 x file size.
BitStream load_bits(const std::filesystem::path& path,
                    std::optional<std::size_t> n_bits = std::nullopt);

std::string stream_summary(const StreamReport& rep, Mode mode,
                           std::uint64_t seed, double write_current);

nlohmann::json to_json(const ProbabilityEstimate& e);
nlohmann::json to_json(const Perturbation& p);
nlohmann::json to_json(const CalibrationResult& r);
nlohmann::json to_json(const RandTestReport& r);

/// Writes `doc` indented with a trailing newline.
void save_json(const std::filesystem::path& path, const nlohmann::json& doc);
void save_text(const std::filesystem::path& path, const std::string& text);

/// Opens `path` for writing or throws ConfigError.
std::ofstream open_output(const std::filesystem::path& path);

}  // namespace mtjrng
