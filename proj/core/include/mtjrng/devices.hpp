#pragma once

// Electrical device models: MTJ resistance with bias-dependent asymmetric
// TMR, and a continuous EKV-style FinFET law.

#include "mtjrng/magnet.hpp"

namespace mtjrng {

struct MtjParams {
  double r_p = 2.0e3;      // ohm
  double tmr0 = 1.0;       // zero-bias TMR ratio (1.0 = 100 %)
  double v_h_pos = 0.5;    // V, bias halving the TMR for V >= 0
  double v_h_neg = 0.65;   // V, for V < 0
  MagnetParams magnet{};

  void validate() const;
};

/// TMR(V) = TMR0 / (1 + (V / V_h)^2), V_h chosen by the sign of V.
double tmr_at(double voltage, const MtjParams& p);

/// R(theta, V) = R_P (1 + TMR(V)) / (1 + TMR(V) (1 + m_z) / 2).
/// Interpolates in conductance so R(P) = R_P at every bias.
double mtj_resistance(double mz, double voltage, const MtjParams& p);
inline double mtj_resistance(const Magnetization& m, double voltage,
                             const MtjParams& p) {
  return mtj_resistance(m.mz(), voltage, p);
}

struct MtjStamp {
  double current;      // A, from top to bottom terminal
  double conductance;  // dI/dV
};
/// Branch current V / R(m_z, V) and its derivative for Newton stamping.
MtjStamp mtj_branch(double mz, double voltage, const MtjParams& p);

enum class Polarity { kN, kP };

struct FinFetParams {
  Polarity polarity = Polarity::kN;
  double l_g = 20e-9;       // m
  double t_fin = 10e-9;     // m
  double h_fin = 30e-9;     // m
  int n_fins = 2;
  double vth0 = 0.25;       // V
  double n_factor = 1.2;
  double k_drive = 3.96e-5;  // A/V^2
  double dibl = 0.08;       // V/V
  double v_rolloff = 0.1;   // V
  double lambda_sc = 12e-9; // m
  double i_floor = 1.0e-12; // A
  double temperature = 300.0;  // K

  double effective_width() const { return n_fins * (2.0 * h_fin + t_fin); }
  void validate() const;
};

struct FinFetEval {
  double id;   // drain current, A (into the drain)
  double gm;   // dId/dVgs
  double gds;  // dId/dVds
};

/// Drain current and small-signal derivatives.  n-type:
///   Id = k (W/L) n Vt^2 [F(a)^2 - F(a - Vds/(n Vt))^2] + I_floor tanh(Vds/Vt)
///   a = (Vgs - Vth)/(n Vt), F(x) = ln(1 + e^x),
///   Vth = Vth0 - dibl Vds - V_rolloff exp(-L_g / lambda_sc).
/// p-type mirrors the law with all terminal voltages and the current negated.
FinFetEval finfet_eval(double vgs, double vds, const FinFetParams& p);

inline double finfet_current(double vgs, double vds, const FinFetParams& p) {
  return finfet_eval(vgs, vds, p).id;
}

struct FinFetFigures {
  double i_on;
  double i_off;
  double ratio;
};

/// Corner currents at |Vgs| = |Vds| = VDD (on) and Vgs = 0, |Vds| = VDD (off),
/// as magnitudes.
FinFetFigures finfet_figures(const FinFetParams& p, double vdd);

}  // namespace mtjrng
