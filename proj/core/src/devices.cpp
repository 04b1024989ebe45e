#include "mtjrng/devices.hpp"

#include <cmath>
#include <string>

#include "mtjrng/constants.hpp"
#include "mtjrng/error.hpp"

namespace mtjrng {

namespace {

double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

FinFetEval nmos_law(double vgs, double vds, const FinFetParams& p) {
  const double vt = phys::thermal_voltage(p.temperature);
  const double nvt = p.n_factor * vt;
  const double vth = p.vth0 - p.dibl * vds -
                     p.v_rolloff * std::exp(-p.l_g / p.lambda_sc);
  const double scale =
      p.k_drive * (p.effective_width() / p.l_g) * p.n_factor * vt * vt;
  const double a = (vgs - vth) / nvt;
  const double b = a - vds / nvt;
  const double fa = softplus(a);
  const double fb = softplus(b);
  const double dfa = 2.0 * fa * sigmoid(a);
  const double dfb = 2.0 * fb * sigmoid(b);
  const double th = std::tanh(vds / vt);

  FinFetEval e;
  e.id = scale * (fa * fa - fb * fb) + p.i_floor * th;
  e.gm = scale * (dfa - dfb) / nvt;
  e.gds = scale * (dfa * p.dibl - dfb * (p.dibl - 1.0)) / nvt +
          p.i_floor * (1.0 - th * th) / vt;
  return e;
}

}  // namespace

void MtjParams::validate() const {
  std::string errs;
  auto need = [&](bool ok, const char* what) {
    if (!ok) errs += std::string(errs.empty() ? "" : "; ") + what;
  };
  need(r_p > 0.0, "R_P must be > 0");
  need(tmr0 > 0.0, "TMR0 must be > 0");
  need(v_h_pos > 0.0 && v_h_neg > 0.0, "V_h_pos and V_h_neg must be > 0");
  if (!errs.empty()) throw ConfigError("invalid MTJ parameters: " + errs);
  magnet.validate();
}

double tmr_at(double voltage, const MtjParams& p) {
  const double vh = voltage >= 0.0 ? p.v_h_pos : p.v_h_neg;
  const double r = voltage / vh;
  return p.tmr0 / (1.0 + r * r);
}

double mtj_resistance(double mz, double voltage, const MtjParams& p) {
  const double tmr = tmr_at(voltage, p);
  return p.r_p * (1.0 + tmr) / (1.0 + tmr * 0.5 * (1.0 + mz));
}

MtjStamp mtj_branch(double mz, double voltage, const MtjParams& p) {
  const double c = 0.5 * (1.0 + mz);
  const double vh = voltage >= 0.0 ? p.v_h_pos : p.v_h_neg;
  const double r = voltage / vh;
  const double den = 1.0 + r * r;
  const double tmr = p.tmr0 / den;
  const double dtmr = -p.tmr0 * 2.0 * voltage / (vh * vh * den * den);
  // I = V g(tmr) / R_P with g = (1 + tmr c) / (1 + tmr).
  const double g = (1.0 + tmr * c) / (1.0 + tmr);
  const double dg = (c - 1.0) / ((1.0 + tmr) * (1.0 + tmr));
  return {voltage * g / p.r_p, (g + voltage * dg * dtmr) / p.r_p};
}

void FinFetParams::validate() const {
  std::string errs;
  auto need = [&](bool ok, const char* what) {
    if (!ok) errs += std::string(errs.empty() ? "" : "; ") + what;
  };
  need(l_g > 0.0, "L_g must be > 0");
  need(t_fin > 0.0, "T_Fin must be > 0");
  need(h_fin > 0.0, "H_fin must be > 0");
  need(n_fins >= 1, "n_fins must be >= 1");
  need(n_factor >= 1.0, "n_factor must be >= 1");
  need(k_drive > 0.0, "k_drive must be > 0");
  need(lambda_sc > 0.0, "lambda_sc must be > 0");
  need(i_floor >= 0.0, "I_floor must be >= 0");
  need(temperature > 0.0, "temperature must be > 0");
  if (!errs.empty()) throw ConfigError("invalid FinFET parameters: " + errs);
}

FinFetEval finfet_eval(double vgs, double vds, const FinFetParams& p) {
  if (p.polarity == Polarity::kN) return nmos_law(vgs, vds, p);
  const FinFetEval m = nmos_law(-vgs, -vds, p);
  return {-m.id, m.gm, m.gds};
}

FinFetFigures finfet_figures(const FinFetParams& p, double vdd) {
  if (!(vdd > 0.0)) throw ContractError("VDD must be > 0");
  const double s = p.polarity == Polarity::kN ? 1.0 : -1.0;
  FinFetFigures f;
  f.i_on = std::abs(finfet_current(s * vdd, s * vdd, p));
  f.i_off = std::abs(finfet_current(0.0, s * vdd, p));
  f.ratio = f.i_on / f.i_off;
  return f;
}

}  // namespace mtjrng
