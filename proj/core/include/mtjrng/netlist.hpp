#pragma once

// Netlist representation and the line-oriented text format:
//
//   * comment
//   R<id> n1 n2 <ohms>
//   C<id> n1 n2 <farads>
//   V<id> n+ n- DC <v>
//   V<id> n+ n- PULSE(v0 v1 t_delay t_rise t_fall t_width t_period)
//   MN<id> d g s <card>       MP<id> d g s <card>
//   J<id> t b <card>          (MTJ, at most one)
//   .card <name> key=value ...
//   .tran <dt> <t_stop>
//   .probe n1 n2 ...
//
// Everything is case-insensitive (names are stored lower-case).  Numbers
// accept the suffixes f p n u m k meg.  Node "0" is ground.

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "mtjrng/devices.hpp"

namespace mtjrng {

struct PulseSpec {
  double v0 = 0.0;
  double v1 = 0.0;
  double delay = 0.0;
  double rise = 0.0;
  double fall = 0.0;
  double width = 0.0;
  double period = 0.0;

  double value(double t) const;
  friend bool operator==(const PulseSpec&, const PulseSpec&) = default;
};

struct Resistor {
  std::string name;
  int a = 0, b = 0;
  double ohms = 0.0;
  friend bool operator==(const Resistor&, const Resistor&) = default;
};

struct Capacitor {
  std::string name;
  int a = 0, b = 0;
  double farads = 0.0;
  friend bool operator==(const Capacitor&, const Capacitor&) = default;
};

struct VoltageSource {
  std::string name;
  int pos = 0, neg = 0;
  std::variant<double, PulseSpec> wave = 0.0;

  double value(double t) const;
  friend bool operator==(const VoltageSource&, const VoltageSource&) = default;
};

struct FinFetElement {
  std::string name;
  int d = 0, g = 0, s = 0;
  Polarity polarity = Polarity::kN;
  std::string card;
  friend bool operator==(const FinFetElement&, const FinFetElement&) = default;
};

struct MtjElement {
  std::string name;
  int top = 0, bottom = 0;
  std::string card;
  friend bool operator==(const MtjElement&, const MtjElement&) = default;
};

using Device =
    std::variant<Resistor, Capacitor, VoltageSource, FinFetElement, MtjElement>;

/// Ordered key=value pairs of a `.card` line.
struct Card {
  std::string name;
  std::vector<std::pair<std::string, double>> values;

  std::optional<double> get(std::string_view key) const;
  void set(std::string_view key, double value);
  friend bool operator==(const Card&, const Card&) = default;
};

struct TranSpec {
  double dt = 0.0;
  double t_stop = 0.0;
  friend bool operator==(const TranSpec&, const TranSpec&) = default;
};

struct Netlist {
  std::vector<std::string> nodes{"0"};  // index 0 is ground
  std::vector<Device> devices;
  std::map<std::string, Card> cards;
  TranSpec tran;
  std::vector<std::string> probes;

  /// Index of `name`, or -1.
  int find_node(std::string_view name) const;
  const std::string& node_name(int index) const { return nodes.at(index); }

  /// Looks up a device by (case-insensitive) name; throws ConfigError.
  template <class T>
  T& device(std::string_view name);
  template <class T>
  const T& device(std::string_view name) const;

  const MtjElement* mtj() const;

  /// FinFET parameters of `fet`: defaults overlaid with its card.
  FinFetParams finfet_params(const FinFetElement& fet) const;
  /// MTJ electrical parameters from the card plus the given magnet.
  MtjParams mtj_params(const MtjElement& mtj, const MagnetParams& magnet) const;

  friend bool operator==(const Netlist&, const Netlist&) = default;
};

/// Parses a number with optional engineering suffix; nullopt if malformed.
std::optional<double> parse_value(std::string_view token);

/// Throws ParseError naming the line and offending token.
Netlist parse_netlist(std::string_view text);

/// Renders a netlist in the grammar above; parse_netlist(format_netlist(n))
/// reproduces n.
std::string format_netlist(const Netlist& nl);

// -- template definitions --------------------------------------------------

namespace detail {
std::string lower(std::string_view s);
[[noreturn]] void throw_missing_device(std::string_view name);
}  // namespace detail

template <class T>
T& Netlist::device(std::string_view name) {
  return const_cast<T&>(std::as_const(*this).device<T>(name));
}

template <class T>
const T& Netlist::device(std::string_view name) const {
  const std::string key = detail::lower(name);
  for (const auto& d : devices) {
    if (const T* t = std::get_if<T>(&d); t && t->name == key) return *t;
  }
  detail::throw_missing_device(name);
}

}  // namespace mtjrng
