// transduction.hpp - microwave-to-optical transduction figures of merit:
// combined efficiency, thermal occupation, SNR, fidelity, and the
// dark-count (Poisson) noise model.

#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "lambdamem/constants.hpp"

namespace lambdamem {

// The three ground-state wiring options for the transducer. Informational:
// the choice does not change any figure of merit computed here.
enum class TransferScheme { NuclearWithTransfer, ElectronLambda,
                            ResolvedHyperfine };

struct TransducerConfig {
  double c_s = 10.0;          // microwave-side cooperativity
  double c_r = 10.0;          // optical-side cooperativity
  double eta_m = 1.0;         // mode-mismatch factor in [0, 1]
  double kappa_s = 0.0;       // microwave cavity decay (rad/s)
  double gamma_es = 0.0;      // microwave-leg polarization decoherence (rad/s)
  double b_sig_hz = 0.0;      // signal bandwidth (Hz, FWHM)
  double temperature_k = 0.02;
  double omega_mw = kTwoPi * 2.25e9; // rad/s
  double t_s = 0.0, t_r = 0.0;
  TransferScheme scheme = TransferScheme::NuclearWithTransfer;

  void validate() const {
    if (eta_m < 0.0 || eta_m > 1.0)
      throw std::invalid_argument("TransducerConfig: eta_m outside [0, 1]");
    if (c_s < 0.0 || c_r < 0.0)
      throw std::invalid_argument("TransducerConfig: negative cooperativity");
    if (temperature_k < 0.0)
      throw std::invalid_argument("TransducerConfig: negative temperature");
    if (kappa_s > 0.0 && b_sig_hz > 0.0 &&
        !(b_sig_hz < kappa_s / (kTwoPi * 10.0)))
      throw std::invalid_argument(
          "TransducerConfig: n_sig model requires B_sig << kappa_s "
          "(enforced as b_sig < kappa_s / (2 pi * 10))");
  }
};

struct FidelityReport {
  double n_th = 0.0;
  double n_sig = 0.0;
  double snr = 0.0;
  double fidelity = 0.0;
  double fidelity_approx = 0.0;
  double dark_count_rate = 0.0; // D = R eta
  double mean_dark_counts = 0.0;
};

// Bose-Einstein occupation; T = 0 returns exactly 0.
inline double thermal_occupation(double omega, double temperature_k) {
  if (!(omega > 0.0))
    throw std::invalid_argument("thermal_occupation: omega must be > 0");
  if (temperature_k < 0.0)
    throw std::invalid_argument("thermal_occupation: negative temperature");
  if (temperature_k == 0.0) return 0.0;
  return 1.0 / std::expm1(kHbar * omega / (kBoltzmann * temperature_k));
}

// eta_m * C_s C_r / ((1 + C_s)(1 + C_r))
inline double transduction_efficiency(double c_s, double c_r, double eta_m) {
  if (c_s < 0.0 || c_r < 0.0 || eta_m < 0.0 || eta_m > 1.0)
    throw std::invalid_argument("transduction_efficiency: bad input");
  return eta_m * (c_s / (1.0 + c_s)) * (c_r / (1.0 + c_r));
}

// n_sig = 2 pi B_sig / kappa_s. B_sig is an FWHM bandwidth in Hz, kappa_s
// an angular rate; the 2 pi bridge keeps B_sig = C_s gamma_es
// dimensionally coherent. Valid only for B_sig << kappa_s.
inline double signal_occupation(double b_sig_hz, double kappa_s) {
  if (b_sig_hz < 0.0 || !(kappa_s > 0.0))
    throw std::invalid_argument("signal_occupation: bad input");
  if (b_sig_hz > 0.0 && !(b_sig_hz < kappa_s / (kTwoPi * 10.0)))
    throw std::invalid_argument(
        "signal_occupation: validity requires b_sig < kappa_s/(2 pi * 10)");
  return kTwoPi * b_sig_hz / kappa_s;
}

inline double fidelity_from_snr(double snr) {
  if (!(snr > 0.0))
    throw std::invalid_argument("fidelity_from_snr: snr must be > 0");
  return 1.0 / (1.0 + 1.0 / snr);
}

// First-order fidelity at the maximum-efficiency operating point,
// F ~ 1 - n_th kappa_s / (C_s gamma_es). Guarded: the expansion is only
// used when the correction is below 1/2; otherwise use fidelity_from_snr.
inline double fidelity_at_max_efficiency(double n_th, double kappa_s,
                                         double c_s, double gamma_es) {
  if (!(c_s * gamma_es > 0.0))
    throw std::invalid_argument(
        "fidelity_at_max_efficiency: C_s gamma_es must be > 0");
  const double corr = n_th * kappa_s / (c_s * gamma_es);
  if (!(corr < 0.5))
    throw std::invalid_argument(
        "fidelity_at_max_efficiency: n_th kappa_s/(C_s gamma_es) >= 0.5; "
        "use the exact fidelity_from_snr path");
  return 1.0 - corr;
}

// P(n; mean) for the dark-count Poisson distribution.
inline double poisson_pmf(int n, double mean) {
  if (n < 0 || mean < 0.0)
    throw std::invalid_argument("poisson_pmf: bad input");
  if (mean == 0.0) return n == 0 ? 1.0 : 0.0;
  return std::exp(n * std::log(mean) - mean - std::lgamma(n + 1.0));
}

// Default thermal photon arrival rate, R = n_th kappa_s / (2 pi).
inline double default_thermal_rate(double n_th, double kappa_s) {
  if (n_th < 0.0 || kappa_s < 0.0)
    throw std::invalid_argument("default_thermal_rate: negative input");
  return n_th * kappa_s / kTwoPi;
}

// Thermal microwave photons treated as dark counts in the optical output:
// D = R eta, mean counts D*T_tr, post-transduction SNR = n_sig/(R T_tr).
// The reported n_th is the equivalent occupation R*T_tr, which makes the
// pre- and post-transduction SNR computations coincide at the
// maximum-efficiency point.
inline FidelityReport dark_count_model(double rate_thermal, double eta,
                                       double t_tr, double n_sig) {
  if (rate_thermal < 0.0 || eta < 0.0 || t_tr < 0.0 || n_sig < 0.0)
    throw std::invalid_argument("dark_count_model: negative input");
  FidelityReport r;
  r.n_sig = n_sig;
  r.dark_count_rate = rate_thermal * eta;
  r.mean_dark_counts = r.dark_count_rate * t_tr;
  r.n_th = rate_thermal * t_tr;
  if (r.n_th > 0.0 && n_sig > 0.0) {
    r.snr = n_sig / r.n_th; // eta cancels between signal and dark counts
    r.fidelity = fidelity_from_snr(r.snr);
    r.fidelity_approx = 1.0 - 1.0 / r.snr;
  } else {
    r.snr = std::numeric_limits<double>::infinity();
    r.fidelity = 1.0;
    r.fidelity_approx = 1.0;
  }
  return r;
}

} // namespace lambdamem
