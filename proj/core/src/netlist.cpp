#include "mtjrng/netlist.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

#include "mtjrng/error.hpp"

namespace mtjrng {

namespace detail {

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

void throw_missing_device(std::string_view name) {
  throw ConfigError("netlist has no device named '" + std::string(name) + "'");
}

}  // namespace detail

using detail::lower;

namespace {

constexpr std::array<std::string_view, 12> kFinFetKeys{
    "lg", "tfin", "hfin", "nfins", "vth0", "n",
    "kdrive", "dibl", "vrolloff", "lambda", "ifloor", "temp"};
constexpr std::array<std::string_view, 4> kMtjKeys{"rp", "tmr0", "vhpos",
                                                   "vhneg"};

template <std::size_t N>
bool contains(const std::array<std::string_view, N>& keys,
              std::string_view k) {
  return std::find(keys.begin(), keys.end(), k) != keys.end();
}

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')' ||
        c == ',') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

class Parser {
 public:
  Netlist run(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string raw;
    int lineno = 0;
    bool have_tran = false;
    while (std::getline(in, raw)) {
      ++lineno;
      const std::string line = lower(raw);
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '*') continue;
      const auto tok = split(line);
      line_ = lineno;
      const std::string& head = tok[0];
      if (head[0] == '.') {
        if (head == ".tran") {
          expect_arity(tok, 3);
          nl_.tran = {number(tok[1]), number(tok[2])};
          if (!(nl_.tran.dt > 0.0) || !(nl_.tran.t_stop > 0.0)) {
            fail(tok[1], ".tran step and stop time must be > 0");
          }
          have_tran = true;
        } else if (head == ".probe") {
          if (tok.size() < 2) fail(head, ".probe needs at least one node");
          for (std::size_t i = 1; i < tok.size(); ++i) {
            nl_.probes.push_back(tok[i]);
            probe_lines_.push_back(lineno);
          }
        } else if (head == ".card") {
          parse_card(tok);
        } else {
          fail(head, "unknown directive");
        }
        continue;
      }
      parse_element(tok);
    }
    line_ = lineno;
    if (!have_tran) {
      throw ParseError(lineno, "", "no .tran analysis");
    }
    resolve();
    return std::move(nl_);
  }

 private:
  [[noreturn]] void fail(const std::string& token, const std::string& what) {
    throw ParseError(line_, token, what);
  }

  void expect_arity(const std::vector<std::string>& tok, std::size_t n) {
    if (tok.size() != n) {
      fail(tok[0], "expected " + std::to_string(n - 1) + " fields, got " +
                       std::to_string(tok.size() - 1));
    }
  }

  double number(const std::string& token) {
    const auto v = parse_value(token);
    if (!v) fail(token, "malformed number");
    return *v;
  }

  int node(const std::string& name) {
    int i = nl_.find_node(name);
    if (i >= 0) return i;
    nl_.nodes.push_back(name);
    return static_cast<int>(nl_.nodes.size()) - 1;
  }

  void declare(const std::string& name) {
    if (!names_.insert(name).second) fail(name, "duplicate element name");
  }

  void parse_card(const std::vector<std::string>& tok) {
    if (tok.size() < 2) fail(tok[0], ".card needs a name");
    Card card{tok[1], {}};
    if (nl_.cards.count(card.name)) fail(tok[1], "duplicate card");
    for (std::size_t i = 2; i < tok.size(); ++i) {
      const auto eq = tok[i].find('=');
      if (eq == std::string::npos || eq == 0) {
        fail(tok[i], "expected key=value");
      }
      const std::string key = tok[i].substr(0, eq);
      if (card.get(key)) fail(tok[i], "duplicate card key");
      card.values.emplace_back(key, number(tok[i].substr(eq + 1)));
    }
    card_lines_[card.name] = line_;
    nl_.cards.emplace(card.name, std::move(card));
  }

  void parse_element(const std::vector<std::string>& tok) {
    const std::string& name = tok[0];
    switch (name[0]) {
      case 'r':
      case 'c': {
        expect_arity(tok, 4);
        declare(name);
        const double v = number(tok[3]);
        if (!(v > 0.0)) fail(tok[3], "value must be > 0");
        if (name[0] == 'r') {
          nl_.devices.emplace_back(Resistor{name, node(tok[1]), node(tok[2]), v});
        } else {
          nl_.devices.emplace_back(Capacitor{name, node(tok[1]), node(tok[2]), v});
        }
        break;
      }
      case 'v': {
        if (tok.size() < 4) fail(name, "voltage source needs nodes and a waveform");
        declare(name);
        VoltageSource src{name, node(tok[1]), node(tok[2]), 0.0};
        if (tok[3] == "dc") {
          expect_arity(tok, 5);
          src.wave = number(tok[4]);
        } else if (tok[3] == "pulse") {
          if (tok.size() != 11) {
            fail(tok[3], "PULSE takes 7 values, got " +
                             std::to_string(tok.size() - 4));
          }
          PulseSpec p{number(tok[4]), number(tok[5]), number(tok[6]),
                      number(tok[7]), number(tok[8]), number(tok[9]),
                      number(tok[10])};
          if (p.delay < 0 || p.rise < 0 || p.fall < 0 || p.width < 0 ||
              p.period < 0) {
            fail(tok[3], "PULSE times must be >= 0");
          }
          src.wave = p;
        } else {
          fail(tok[3], "expected DC or PULSE");
        }
        nl_.devices.emplace_back(std::move(src));
        break;
      }
      case 'm': {
        if (name.size() < 2 || (name[1] != 'n' && name[1] != 'p')) {
          fail(name, "FinFET name must start with MN or MP");
        }
        expect_arity(tok, 5);
        declare(name);
        nl_.devices.emplace_back(FinFetElement{
            name, node(tok[1]), node(tok[2]), node(tok[3]),
            name[1] == 'n' ? Polarity::kN : Polarity::kP, tok[4]});
        refs_.push_back({tok[4], line_});
        break;
      }
      case 'j': {
        expect_arity(tok, 4);
        declare(name);
        if (nl_.mtj()) fail(name, "only one MTJ per netlist is supported");
        nl_.devices.emplace_back(
            MtjElement{name, node(tok[1]), node(tok[2]), tok[3]});
        refs_.push_back({tok[3], line_});
        break;
      }
      default:
        fail(name, "unknown element letter");
    }
  }

  void resolve() {
    for (const auto& [card, line] : refs_) {
      if (!nl_.cards.count(card)) {
        throw ParseError(line, card, "undefined card");
      }
    }
    for (const auto& d : nl_.devices) {
      if (const auto* f = std::get_if<FinFetElement>(&d)) {
        check_keys(nl_.cards.at(f->card), kFinFetKeys);
      } else if (const auto* j = std::get_if<MtjElement>(&d)) {
        check_keys(nl_.cards.at(j->card), kMtjKeys);
      }
    }
    for (std::size_t i = 0; i < nl_.probes.size(); ++i) {
      if (nl_.find_node(nl_.probes[i]) < 0) {
        throw ParseError(probe_lines_[i], nl_.probes[i], "probe of unknown node");
      }
    }
  }

  template <std::size_t N>
  void check_keys(const Card& card, const std::array<std::string_view, N>& keys) {
    for (const auto& kv : card.values) {
      if (!contains(keys, kv.first)) {
        throw ParseError(card_lines_.at(card.name), kv.first,
                         "key not valid for the device using card '" +
                             card.name + "'");
      }
    }
  }

  Netlist nl_;
  int line_ = 0;
  std::set<std::string> names_;
  std::vector<std::pair<std::string, int>> refs_;
  std::map<std::string, int> card_lines_;
  std::vector<int> probe_lines_;
};

}  // namespace

double PulseSpec::value(double t) const {
  if (t < delay) return v0;
  double tt = t - delay;
  if (period > 0.0) tt = std::fmod(tt, period);
  if (tt < rise) return v0 + (v1 - v0) * tt / rise;
  tt -= rise;
  if (tt < width) return v1;
  tt -= width;
  if (tt < fall) return v1 + (v0 - v1) * tt / fall;
  return v0;
}

double VoltageSource::value(double t) const {
  if (const double* dc = std::get_if<double>(&wave)) return *dc;
  return std::get<PulseSpec>(wave).value(t);
}

std::optional<double> Card::get(std::string_view key) const {
  for (const auto& kv : values) {
    if (kv.first == key) return kv.second;
  }
  return std::nullopt;
}

void Card::set(std::string_view key, double value) {
  for (auto& kv : values) {
    if (kv.first == key) {
      kv.second = value;
      return;
    }
  }
  values.emplace_back(std::string(key), value);
}

int Netlist::find_node(std::string_view name) const {
  const std::string key = lower(name);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i] == key) return static_cast<int>(i);
  }
  return -1;
}

const MtjElement* Netlist::mtj() const {
  for (const auto& d : devices) {
    if (const auto* j = std::get_if<MtjElement>(&d)) return j;
  }
  return nullptr;
}

FinFetParams Netlist::finfet_params(const FinFetElement& fet) const {
  FinFetParams p;
  p.polarity = fet.polarity;
  const auto it = cards.find(fet.card);
  if (it == cards.end()) throw ConfigError("undefined card '" + fet.card + "'");
  for (const auto& [k, v] : it->second.values) {
    if (k == "lg") p.l_g = v;
    else if (k == "tfin") p.t_fin = v;
    else if (k == "hfin") p.h_fin = v;
    else if (k == "nfins") p.n_fins = static_cast<int>(std::lround(v));
    else if (k == "vth0") p.vth0 = v;
    else if (k == "n") p.n_factor = v;
    else if (k == "kdrive") p.k_drive = v;
    else if (k == "dibl") p.dibl = v;
    else if (k == "vrolloff") p.v_rolloff = v;
    else if (k == "lambda") p.lambda_sc = v;
    else if (k == "ifloor") p.i_floor = v;
    else if (k == "temp") p.temperature = v;
    else throw ConfigError("card '" + fet.card + "': unknown FinFET key '" + k + "'");
  }
  p.validate();
  return p;
}

MtjParams Netlist::mtj_params(const MtjElement& mtj,
                              const MagnetParams& magnet) const {
  MtjParams p;
  p.magnet = magnet;
  const auto it = cards.find(mtj.card);
  if (it == cards.end()) throw ConfigError("undefined card '" + mtj.card + "'");
  for (const auto& [k, v] : it->second.values) {
    if (k == "rp") p.r_p = v;
    else if (k == "tmr0") p.tmr0 = v;
    else if (k == "vhpos") p.v_h_pos = v;
    else if (k == "vhneg") p.v_h_neg = v;
    else throw ConfigError("card '" + mtj.card + "': unknown MTJ key '" + k + "'");
  }
  p.validate();
  return p;
}

std::optional<double> parse_value(std::string_view token) {
  const std::string s = lower(token);
  double v = 0.0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr == begin) return std::nullopt;
  const std::string_view suffix(ptr, static_cast<std::size_t>(end - ptr));
  if (suffix.empty()) return v;
  if (suffix == "meg") return v * 1e6;
  if (suffix.size() != 1) return std::nullopt;
  switch (suffix[0]) {
    case 'f': return v * 1e-15;
    case 'p': return v * 1e-12;
    case 'n': return v * 1e-9;
    case 'u': return v * 1e-6;
    case 'm': return v * 1e-3;
    case 'k': return v * 1e3;
    default: return std::nullopt;
  }
}

Netlist parse_netlist(std::string_view text) { return Parser{}.run(text); }

std::string format_netlist(const Netlist& nl) {
  std::string out = "* mtjrng netlist\n";
  auto n = [&](int i) { return nl.node_name(i); };
  for (const auto& d : nl.devices) {
    std::visit(
        [&](const auto& e) {
          using T = std::decay_t<decltype(e)>;
          if constexpr (std::is_same_v<T, Resistor>) {
            out += fmt::format("{} {} {} {}\n", e.name, n(e.a), n(e.b), e.ohms);
          } else if constexpr (std::is_same_v<T, Capacitor>) {
            out += fmt::format("{} {} {} {}\n", e.name, n(e.a), n(e.b), e.farads);
          } else if constexpr (std::is_same_v<T, VoltageSource>) {
            if (const double* dc = std::get_if<double>(&e.wave)) {
              out += fmt::format("{} {} {} DC {}\n", e.name, n(e.pos), n(e.neg), *dc);
            } else {
              const auto& p = std::get<PulseSpec>(e.wave);
              out += fmt::format("{} {} {} PULSE({} {} {} {} {} {} {})\n", e.name,
                                 n(e.pos), n(e.neg), p.v0, p.v1, p.delay, p.rise,
                                 p.fall, p.width, p.period);
            }
          } else if constexpr (std::is_same_v<T, FinFetElement>) {
            out += fmt::format("{} {} {} {} {}\n", e.name, n(e.d), n(e.g), n(e.s),
                               e.card);
          } else {
            out += fmt::format("{} {} {} {}\n", e.name, n(e.top), n(e.bottom),
                               e.card);
          }
        },
        d);
  }
  for (const auto& [name, card] : nl.cards) {
    out += ".card " + name;
    for (const auto& [k, v] : card.values) out += fmt::format(" {}={}", k, v);
    out += "\n";
  }
  out += fmt::format(".tran {} {}\n", nl.tran.dt, nl.tran.t_stop);
  if (!nl.probes.empty()) {
    out += ".probe";
    for (const auto& p : nl.probes) out += " " + p;
    out += "\n";
  }
  return out;
}

}  // namespace mtjrng
