#include "mtjrng/io.hpp"

#include <fmt/format.h>

#include <fstream>
#include <iterator>
#include <sstream>

#include "mtjrng/error.hpp"

namespace mtjrng {

namespace {

std::string num(double v) { return fmt::format("{:.12g}", v); }

}  // namespace

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  return out;
}

void write_waveform_csv(std::ostream& out, const Waveform& wave) {
  out << "time";
  for (const auto& p : wave.probe_names) out << ',' << p;
  out << ",i_mtj\n";
  for (std::size_t i = 0; i < wave.size(); ++i) {
    out << num(wave.time[i]);
    for (const auto& p : wave.probes) out << ',' << num(p[i]);
    out << ',' << num(wave.i_mtj[i]) << '\n';
  }
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  out << to_string(result.param)
      << "_nm,delay_ap_to_p_s,delay_p_to_ap_s,i_on_A,i_off_A,on_off_ratio,"
         "energy_per_write_J,error\n";
  for (const auto& row : result.rows) {
    out << num(row.value * 1e9);
    if (row.error.empty() && row.delays) {
      out << ',' << num(row.delays->ap_to_p) << ',' << num(row.delays->p_to_ap)
          << ',' << num(row.figures.i_on) << ',' << num(row.figures.i_off)
          << ',' << num(row.figures.ratio) << ',' << num(row.energy_per_write())
          << ",\n";
    } else {
      std::string msg = row.error;
      for (char& c : msg) {
        if (c == ',' || c == '\n' || c == '\r') c = ' ';
      }
      out << ",,,,,,," << msg << '\n';
    }
  }
}

CsvTable read_csv(std::istream& in) {
  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
  };
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("CSV input is empty");
  t.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    t.rows.push_back(split(line));
  }
  return t;
}

void save_bits(const std::filesystem::path& path, const BitStream& bits) {
  auto out = open_output(path);
  const auto& bytes = bits.bytes();
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ConfigError("failed writing '" + path.string() + "'");
}

BitStream load_bits(const std::filesystem::path& path,
                    std::optional<std::size_t> n_bits) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open bit file '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  const std::size_t n = n_bits.value_or(bytes.size() * 8);
  if (n > bytes.size() * 8) {
    throw ConfigError(fmt::format("'{}' holds {} bits, {} requested",
                                  path.string(), bytes.size() * 8, n));
  }
  return BitStream::from_bytes(std::move(bytes), n);
}

std::string stream_summary(const StreamReport& rep, Mode mode,
                           std::uint64_t seed, double write_current) {
  return fmt::format(
      "n = {}\nones = {}\nfraction_ones = {:.6f}\nmode = {}\nseed = {}\n"
      "write_current_A = {:.12g}\nperiod_s = {:.12g}\n"
      "throughput_bits_per_s = {:.12g}\nreset_failures = {}\n"
      "comparator_mismatches = {}\n",
      rep.bits.size(), rep.bits.ones(),
      static_cast<double>(rep.bits.ones()) /
          static_cast<double>(rep.bits.size()),
      to_string(mode), seed, write_current, rep.period, rep.throughput,
      rep.reset_failures, rep.comparator_mismatches);
}

nlohmann::json to_json(const ProbabilityEstimate& e) {
  return {{"p_hat", e.p_hat},
          {"n_trials", e.n_trials},
          {"successes", e.successes},
          {"ci_low", e.ci_low},
          {"ci_high", e.ci_high}};
}

nlohmann::json to_json(const Perturbation& p) {
  return {{"delta_T_K", p.delta_t},
          {"h_ext_A_per_m", {p.h_ext.x, p.h_ext.y, p.h_ext.z}},
          {"tmr_drift", p.tmr_drift},
          {"ic_drift", p.ic_drift}};
}

nlohmann::json to_json(const CalibrationResult& r) {
  return {{"amplitude_A", r.amplitude},
          {"p_final", to_json(r.p_final)},
          {"iterations", r.iterations},
          {"trials_total", r.trials_total}};
}

nlohmann::json to_json(const RandTestReport& r) {
  nlohmann::json tests = nlohmann::json::array();
  for (const auto& t : r.tests) {
    tests.push_back({{"name", t.name},
                     {"statistic", t.statistic},
                     {"p_value", t.p_value},
                     {"applicable", t.applicable},
                     {"pass", t.pass}});
  }
  return {{"n_bits", r.n_bits},
          {"alpha", r.alpha},
          {"tests", tests},
          {"verdict", r.verdict ? "pass" : "fail"}};
}

void save_json(const std::filesystem::path& path, const nlohmann::json& doc) {
  save_text(path, doc.dump(2) + "\n");
}

void save_text(const std::filesystem::path& path, const std::string& text) {
  auto out = open_output(path);
  out << text;
  if (!out) throw ConfigError("failed writing '" + path.string() + "'");
}

}  // namespace mtjrng
