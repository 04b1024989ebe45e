#include "mtjrng/scenario.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <tuple>
#include <set>
#include <sstream>

#include "mtjrng/error.hpp"

#ifndef MTJRNG_DEFAULT_DATA_DIR
#define MTJRNG_DEFAULT_DATA_DIR "data"
#endif

namespace mtjrng {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path default_data_dir() { return fs::path(MTJRNG_DEFAULT_DATA_DIR); }

namespace {

using Errors = std::vector<std::string>;

/// Reads typed keys from one JSON object, recording problems instead of
/// throwing, and flags keys nobody asked for.
class Section {
 public:
  Section(const json& doc, std::string name, Errors& errs)
      : name_(std::move(name)), errs_(errs) {
    if (doc.is_null()) return;
    if (!doc.is_object()) {
      errs_.push_back(name_ + ": expected an object");
      return;
    }
    obj_ = &doc;
  }
  Section(const Section&) = delete;
  Section& operator=(const Section&) = delete;

  ~Section() {
    if (!obj_) return;
    for (const auto& [key, value] : obj_->items()) {
      if (!seen_.count(key)) errs_.push_back(name_ + ": unknown key '" + key + "'");
    }
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return obj_ && obj_->contains(key) && !(*obj_)[key].is_null();
  }

  std::optional<double> number(const std::string& key) {
    if (!has(key)) return std::nullopt;
    const json& v = (*obj_)[key];
    if (!v.is_number()) {
      errs_.push_back(name_ + "." + key + ": expected a number");
      return std::nullopt;
    }
    return v.get<double>();
  }

  void number(const std::string& key, double& out, double scale = 1.0) {
    if (auto v = number(key)) out = *v * scale;
  }

  std::optional<std::string> text(const std::string& key) {
    if (!has(key)) return std::nullopt;
    const json& v = (*obj_)[key];
    if (!v.is_string()) {
      errs_.push_back(name_ + "." + key + ": expected a string");
      return std::nullopt;
    }
    return v.get<std::string>();
  }

  std::optional<Vec3> vec3(const std::string& key) {
    if (!has(key)) return std::nullopt;
    const json& v = (*obj_)[key];
    if (!v.is_array() || v.size() != 3 ||
        !std::all_of(v.begin(), v.end(),
                     [](const json& e) { return e.is_number(); })) {
      errs_.push_back(name_ + "." + key + ": expected [x, y, z]");
      return std::nullopt;
    }
    return Vec3{v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
  }

  const json& child(const std::string& key) {
    static const json kNull;
    return has(key) ? (*obj_)[key] : kNull;
  }

 private:
  const json* obj_ = nullptr;
  std::string name_;
  Errors& errs_;
  std::set<std::string> seen_;
};

Perturbation read_perturbation(const json& doc, const std::string& name,
                               Errors& errs, std::string* label = nullptr) {
  Section s(doc, name, errs);
  Perturbation p;
  if (label) {
    if (auto n = s.text("name")) *label = *n;
  }
  s.number("delta_T_K", p.delta_t);
  if (auto h = s.vec3("h_ext_A_per_m")) p.h_ext = *h;
  s.number("tmr_drift", p.tmr_drift);
  s.number("ic_drift", p.ic_drift);
  if (!(p.tmr_drift > 0.0)) errs.push_back(name + ".tmr_drift: must be > 0");
  if (!(p.ic_drift > 0.0)) errs.push_back(name + ".ic_drift: must be > 0");
  return p;
}

std::optional<Mode> read_mode(Section& s, const std::string& section,
                              Errors& errs) {
  const auto m = s.text("mode");
  if (!m) return std::nullopt;
  try {
    return parse_mode(*m);
  } catch (const ConfigError& e) {
    errs.push_back(section + ".mode: " + e.what());
    return std::nullopt;
  }
}

std::optional<Netlist> read_netlist(const fs::path& path, Errors& errs) {
  std::ifstream in(path);
  if (!in) {
    errs.push_back("netlist '" + path.string() + "' does not exist");
    return std::nullopt;
  }
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_netlist(ss.str());
  } catch (const ConfigError& e) {
    errs.push_back(path.filename().string() + ": " + e.what());
    return std::nullopt;
  }
}

void override_cards(Netlist& nl, bool mtj_cards,
                    const std::vector<std::pair<std::string, double>>& kv) {
  std::set<std::string> names;
  for (const auto& d : nl.devices) {
    if (mtj_cards) {
      if (const auto* j = std::get_if<MtjElement>(&d)) names.insert(j->card);
    } else if (const auto* f = std::get_if<FinFetElement>(&d)) {
      names.insert(f->card);
    }
  }
  for (const auto& n : names) {
    for (const auto& [k, v] : kv) nl.cards.at(n).set(k, v);
  }
}

}  // namespace

Perturbation parse_perturbation(const json& doc) {
  Errors errs;
  Perturbation p = read_perturbation(doc, "perturbation", errs);
  if (!errs.empty()) {
    std::string msg = "invalid perturbation: " + errs.front();
    for (std::size_t i = 1; i < errs.size(); ++i) msg += "; " + errs[i];
    throw ConfigError(msg);
  }
  return p;
}

Perturbation load_perturbation(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open perturbation file '" + path.string() + "'");
  try {
    return parse_perturbation(json::parse(in));
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

Scenario parse_scenario(const json& doc, const fs::path& base_dir) {
  Errors errs;
  Scenario sc;
  MagnetParams& mag = sc.model.magnet;
  std::optional<Netlist> write_nl;
  std::optional<Netlist> read_nl;
  {
    Section root(doc, "scenario", errs);

    {
      Section s(root.child("netlists"), "netlists", errs);
      const auto resolve = [&](const std::string& key, const char* fallback) {
        if (auto p = s.text(key)) {
          fs::path path(*p);
          return path.is_absolute() ? path : base_dir / path;
        }
        return default_data_dir() / fallback;
      };
      sc.write_netlist_path = resolve("write", "write.net");
      sc.read_netlist_path = resolve("read", "read.net");
    }
    write_nl = read_netlist(sc.write_netlist_path, errs);
    read_nl = read_netlist(sc.read_netlist_path, errs);

    {
      Section s(root.child("magnet"), "magnet", errs);
      s.number("ms_A_per_m", mag.ms);
      s.number("volume_m3", mag.volume);
      s.number("alpha", mag.alpha);
      s.number("eta", mag.eta);
      s.number("tau0_ns", mag.tau0, 1e-9);
      s.number("chi_asym", mag.chi_asym);
      s.number("beta", mag.beta);
      s.number("eps_smooth", mag.eps_smooth);
      if (auto n = s.vec3("demag")) mag.demag = *n;
      const auto delta = s.number("delta_300K");
      const auto hk = s.number("hk_A_per_m");
      if (delta && hk) {
        errs.push_back("magnet: give either delta_300K or hk_A_per_m, not both");
      } else if (delta) {
        mag.hk = anisotropy_field_for_delta(*delta, 300.0, mag.ms, mag.volume);
      } else if (hk) {
        mag.hk = *hk;
      }
    }

    std::vector<std::pair<std::string, double>> mtj_kv, fet_kv;
    {
      Section s(root.child("mtj"), "mtj", errs);
      const std::pair<const char*, const char*> keys[] = {
          {"rp_ohm", "rp"}, {"tmr0", "tmr0"}, {"vh_pos_V", "vhpos"},
          {"vh_neg_V", "vhneg"}};
      for (const auto& [json_key, card_key] : keys) {
        if (auto v = s.number(json_key)) mtj_kv.emplace_back(card_key, *v);
      }
    }
    {
      Section s(root.child("finfet"), "finfet", errs);
      const std::tuple<const char*, const char*, double> keys[] = {
          {"lg_nm", "lg", 1e-9},        {"tfin_nm", "tfin", 1e-9},
          {"hfin_nm", "hfin", 1e-9},    {"vth0_V", "vth0", 1.0},
          {"n_factor", "n", 1.0},       {"kdrive_A_per_V2", "kdrive", 1.0},
          {"dibl", "dibl", 1.0},        {"vrolloff_V", "vrolloff", 1.0},
          {"lambda_nm", "lambda", 1e-9}, {"ifloor_A", "ifloor", 1.0},
          {"temperature_K", "temp", 1.0}};
      for (const auto& [json_key, card_key, scale] : keys) {
        if (auto v = s.number(json_key)) fet_kv.emplace_back(card_key, *v * scale);
      }
    }
    for (auto* nl : {&write_nl, &read_nl}) {
      if (!*nl) continue;
      override_cards(**nl, true, mtj_kv);
      override_cards(**nl, false, fet_kv);
    }

    {
      Section s(root.child("environment"), "environment", errs);
      s.number("temperature_K", sc.model.temperature);
      if (auto h = s.vec3("h_ext_A_per_m")) sc.model.h_ext = *h;
    }
    {
      Section s(root.child("timing"), "timing", errs);
      s.number("t_write_ns", sc.timing.t_write, 1e-9);
      s.number("t_gap_ns", sc.timing.t_gap, 1e-9);
      s.number("t_readreset_ns", sc.timing.t_readreset, 1e-9);
      s.number("reset_current_uA", sc.timing.reset_current, 1e-6);
      if (auto w = s.number("write_current_uA")) {
        sc.timing.write_current = *w * 1e-6;
        sc.write_current_given = true;
      }
    }
    {
      Section s(root.child("simulation"), "simulation", errs);
      s.number("sde_dt_ps", sc.model.sde_dt, 1e-12);
      s.number("circuit_dt_ps", sc.model.dt_circuit, 1e-12);
      s.number("edge_ps", sc.model.edge, 1e-12);
      if (auto seed = s.number("seed")) {
        if (*seed < 0 || *seed != std::floor(*seed)) {
          errs.push_back("simulation.seed: expected a non-negative integer");
        } else {
          sc.seed = static_cast<std::uint64_t>(*seed);
        }
      }
      if (auto m = read_mode(s, "simulation", errs)) sc.mode = *m;
    }
    {
      Section s(root.child("comparator"), "comparator", errs);
      s.number("hysteresis_mV", sc.model.comparator.hysteresis, 1e-3);
    }
    {
      Section s(root.child("calibration"), "calibration", errs);
      s.number("tol", sc.calibration.tol);
      if (auto b = s.number("budget")) {
        if (*b < 1) {
          errs.push_back("calibration.budget: must be >= 1");
        } else {
          sc.calibration.budget = static_cast<std::size_t>(*b);
        }
      }
      if (auto m = read_mode(s, "calibration", errs)) sc.calibration_mode = *m;
      if (auto k = s.text("knob")) {
        try {
          sc.calibration.knob = parse_knob(*k);
        } catch (const ConfigError& e) {
          errs.push_back(std::string("calibration.knob: ") + e.what());
        }
      }
    }
    {
      const json& list = root.child("perturbations");
      if (!list.is_null() && !list.is_array()) {
        errs.push_back("perturbations: expected an array");
      } else if (list.is_array()) {
        for (std::size_t i = 0; i < list.size(); ++i) {
          NamedPerturbation np;
          np.name = fmt::format("perturbation_{}", i);
          np.perturb = read_perturbation(
              list[i], fmt::format("perturbations[{}]", i), errs, &np.name);
          sc.perturbations.push_back(std::move(np));
        }
      }
    }
  }  // sections report unknown keys on scope exit

  // Parameter invariants.
  auto check = [&](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      errs.emplace_back(e.what());
    }
  };
  check([&] { mag.validate(); });
  if (!(sc.model.temperature >= 0.0)) errs.push_back("temperature must be >= 0");
  if (!(sc.model.sde_dt > 0.0)) errs.push_back("SDE step must be > 0");
  if (!(sc.model.dt_circuit >= sc.model.sde_dt)) {
    errs.push_back("circuit step must be >= the SDE step");
  } else if (sc.model.sde_dt > 0.0) {
    const double ratio = sc.model.dt_circuit / sc.model.sde_dt;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio) {
      errs.push_back("circuit step must be an integer multiple of the SDE step");
    }
  }
  if (!(sc.model.edge > 0.0)) errs.push_back("edge time must be > 0");
  if (!(sc.model.comparator.hysteresis >= 0.0)) {
    errs.push_back("comparator hysteresis must be >= 0");
  }
  if (!(sc.calibration.tol > 0.0 && sc.calibration.tol < 0.5)) {
    errs.push_back("calibration.tol must lie in (0, 0.5)");
  }
  check([&] { sc.timing.validate(mag, sc.model.temperature); });
  for (auto* nl : {&write_nl, &read_nl}) {
    if (!*nl) continue;
    for (const auto& d : (*nl)->devices) {
      if (const auto* f = std::get_if<FinFetElement>(&d)) {
        check([&] { (*nl)->finfet_params(*f).validate(); });
      } else if (const auto* j = std::get_if<MtjElement>(&d)) {
        check([&] { (*nl)->mtj_params(*j, mag).validate(); });
      }
    }
  }

  if (write_nl) sc.model.write_netlist = std::move(*write_nl);
  if (read_nl) sc.model.read_netlist = std::move(*read_nl);
  if (!errs.empty()) {
    std::string msg = fmt::format("invalid scenario ({} problem{}):",
                                  errs.size(), errs.size() == 1 ? "" : "s");
    for (const auto& e : errs) msg += "\n  - " + e;
    throw ConfigError(msg);
  }
  return sc;
}

Scenario load_scenario(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_scenario(doc, path.parent_path());
}

}  // namespace mtjrng
