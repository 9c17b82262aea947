// spectroscopy.hpp - spectrum reduction: resolution-limited absorption
// correction, optical depth and concentration extraction, OD forecasting,
// and lineshape fitting front ends.

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lambdamem/constants.hpp"
#include "lambdamem/fit.hpp"

namespace lambdamem {

enum class AxisUnit { Hz, MilliEv, InvCm };
enum class ValueUnit { Transmission, Counts, AlphaInvCm, Absorption };

inline double axis_to_hz(double v, AxisUnit u) {
  switch (u) {
    case AxisUnit::Hz: return v;
    case AxisUnit::MilliEv: return mev_to_hz(v);
    case AxisUnit::InvCm: return invcm_to_hz(v);
  }
  return v;
}

struct Spectrum {
  std::vector<double> axis;   // strictly monotone
  std::vector<double> values; // same length, >= 8
  AxisUnit axis_unit = AxisUnit::Hz;
  ValueUnit value_unit = ValueUnit::Transmission;
  std::map<std::string, std::string> metadata;

  void validate() const {
    if (axis.size() != values.size())
      throw std::invalid_argument("Spectrum: axis/value length mismatch");
    if (axis.size() < 8)
      throw std::invalid_argument("Spectrum: need at least 8 samples");
    const bool increasing = axis[1] > axis[0];
    for (std::size_t i = 1; i < axis.size(); ++i) {
      if (increasing ? axis[i] <= axis[i - 1] : axis[i] >= axis[i - 1])
        throw std::invalid_argument("Spectrum: axis not strictly monotone");
    }
    for (double v : values)
      if (!std::isfinite(v))
        throw std::invalid_argument("Spectrum: non-finite value");
    for (double a : axis)
      if (!std::isfinite(a))
        throw std::invalid_argument("Spectrum: non-finite axis");
  }

  // axis converted to Hz, ascending, values reordered to match
  Spectrum in_hz() const {
    Spectrum out = *this;
    out.axis_unit = AxisUnit::Hz;
    for (auto& a : out.axis) a = axis_to_hz(a, axis_unit);
    if (out.axis.size() > 1 && out.axis[1] < out.axis[0]) {
      std::reverse(out.axis.begin(), out.axis.end());
      std::reverse(out.values.begin(), out.values.end());
    }
    return out;
  }

  double trapezoid_area() const {
    double acc = 0.0;
    for (std::size_t i = 1; i < axis.size(); ++i)
      acc += 0.5 * (values[i] + values[i - 1]) * (axis[i] - axis[i - 1]);
    return acc;
  }
};

// Eq.-of-state for the concentration extraction:
// [c] = (g1/g2) * 8 pi n^2 tau_zp * integrated_area / lambda^2,
// tau_zp = lifetime / (eta_r * eta_dw). integrated_area is int alpha dnu in
// Hz cm^-1 and the wavelength is in cm, yielding cm^-3.
struct ConcentrationInput {
  double integrated_area_hz_invcm; // int alpha dnu
  double lifetime_s;
  double eta_r = 1.0;
  double eta_dw = 0.23;
  double degeneracy_ratio = 2.0; // g1/g2, unstated in the source material
  double refractive_index = 3.45;
  double wavelength_cm = 1326e-7;

  void validate() const {
    if (!(integrated_area_hz_invcm > 0.0) || !(lifetime_s > 0.0) ||
        !(wavelength_cm > 0.0) || !(refractive_index > 0.0) ||
        !(degeneracy_ratio > 0.0))
      throw std::invalid_argument("ConcentrationInput: non-positive field");
    if (!(eta_r > 0.0) || eta_r > 1.0 || !(eta_dw > 0.0) || eta_dw > 1.0)
      throw std::invalid_argument(
          "ConcentrationInput: efficiencies must lie in (0, 1]");
  }
};

// --- fitting front ends ------------------------------------------------------

inline LineFit fit_line(const Spectrum& s, LineModel model,
                        const std::optional<LineFit>& init_hint = {}) {
  s.validate();
  return fit_line_xy(s.axis, s.values, model, 0, init_hint);
}

// Broad ODMR peak with k narrow dips subtracted, jointly fitted.
inline LineFit fit_cpt(const Spectrum& s, int n_dips = 2,
                       const std::optional<LineFit>& init_hint = {}) {
  s.validate();
  if (n_dips < 1)
    throw std::invalid_argument("fit_cpt: need at least one dip");
  return fit_line_xy(s.axis, s.values, LineModel::PeakWithDips, n_dips,
                     init_hint);
}

// --- reductions ---------------------------------------------------------------

// Area-preserving correction of a resolution-limited absorption dip. The
// measured transmission spectrum is reduced to an absorption area above a
// linear baseline; the corrected peak is the model lineshape of the true
// FWHM carrying the same area. Returns the corrected peak absorption
// (fraction) and the reshaped absorption spectrum on the same axis.
inline std::pair<double, Spectrum> correct_resolution_limited(
    const Spectrum& measured, double true_fwhm_hz,
    LineModel model = LineModel::Lorentzian) {
  if (!(true_fwhm_hz > 0.0))
    throw std::invalid_argument("correct_resolution_limited: true_fwhm <= 0");
  Spectrum s = measured.in_hz();
  s.validate();

  // absorption fraction above the fitted dip baseline
  LineFit dip = fit_line(s, model);
  if (dip.amplitudes[0] > 0.0)
    throw std::invalid_argument(
        "correct_resolution_limited: expected a transmission dip");
  const double area = -dip.component_area(0); // Hz, positive
  if (!(area > 0.0))
    throw std::invalid_argument("correct_resolution_limited: area <= 0");

  double shape_area; // area of a unit-peak profile with the true FWHM
  switch (model) {
    case LineModel::Gaussian:
      shape_area = true_fwhm_hz * 0.5 *
                   std::sqrt(std::numbers::pi / std::numbers::ln2);
      break;
    default:
      shape_area = (std::numbers::pi / 2.0) * true_fwhm_hz;
      break;
  }
  const double peak = area / shape_area;

  Spectrum corrected;
  corrected.axis = s.axis;
  corrected.axis_unit = AxisUnit::Hz;
  corrected.value_unit = ValueUnit::Absorption;
  corrected.values.resize(s.axis.size());
  const double c = dip.centers[0];
  for (std::size_t i = 0; i < s.axis.size(); ++i) {
    const double x = s.axis[i];
    double u;
    if (model == LineModel::Gaussian) {
      const double t = (x - c) / true_fwhm_hz;
      u = std::exp(-4.0 * std::numbers::ln2 * t * t);
    } else {
      const double q = 2.0 * (x - c) / true_fwhm_hz;
      u = 1.0 / (1.0 + q * q);
    }
    corrected.values[i] = peak * u;
  }
  return {peak, corrected};
}

// d = -ln(1 - dip), alpha = d / length
inline std::pair<double, double> transmission_to_od(double dip_depth,
                                                    double sample_length_cm) {
  if (!(dip_depth > 0.0) || dip_depth >= 1.0)
    throw std::invalid_argument("transmission_to_od: depth outside (0, 1)");
  if (!(sample_length_cm > 0.0))
    throw std::invalid_argument("transmission_to_od: length <= 0");
  const double d = -std::log1p(-dip_depth);
  return {d, d / sample_length_cm};
}

inline double concentration_from_absorption(const ConcentrationInput& in) {
  in.validate();
  const double tau_zp = in.lifetime_s / (in.eta_r * in.eta_dw);
  return in.degeneracy_ratio * 8.0 * kPi * in.refractive_index *
         in.refractive_index * tau_zp * in.integrated_area_hz_invcm /
         (in.wavelength_cm * in.wavelength_cm);
}

// Inverse of the concentration relation: integrated area for a given
// concentration, converted to a Lorentzian peak absorption coefficient at
// the stated linewidth, then to optical depth over the sample length,
// reduced by the orientational-subset penalty.
inline double od_forecast(double concentration_invcm3, double length_cm,
                          double linewidth_fwhm_hz,
                          const ConcentrationInput& material,
                          double orientation_penalty = 1.0) {
  if (concentration_invcm3 < 0.0 || !(length_cm > 0.0) ||
      !(linewidth_fwhm_hz > 0.0))
    throw std::invalid_argument("od_forecast: bad geometry");
  if (orientation_penalty < 1.0 || orientation_penalty > 12.0)
    throw std::invalid_argument(
        "od_forecast: orientation penalty outside [1, 12]");
  if (concentration_invcm3 == 0.0) return 0.0;
  const double tau_zp = material.lifetime_s / (material.eta_r * material.eta_dw);
  const double area = concentration_invcm3 * material.wavelength_cm *
                      material.wavelength_cm /
                      (material.degeneracy_ratio * 8.0 * kPi *
                       material.refractive_index * material.refractive_index *
                       tau_zp);
  const double alpha_peak = area / ((std::numbers::pi / 2.0) * linewidth_fwhm_hz);
  return alpha_peak * length_cm / orientation_penalty;
}

// d_eff = (2 F / pi) d for a resonator of finesse F
inline double cavity_enhanced_od(double d_single_pass, double finesse) {
  if (d_single_pass < 0.0)
    throw std::invalid_argument("cavity_enhanced_od: d < 0");
  if (!(finesse >= 1.0))
    throw std::invalid_argument("cavity_enhanced_od: finesse must be >= 1");
  return 2.0 * finesse / kPi * d_single_pass;
}

// signed pump-probe frequency difference at the two-photon condition
inline double hyperfine_constant(double pump_freq_hz,
                                 double probe_freq_at_dip_hz) {
  return probe_freq_at_dip_hz - pump_freq_hz;
}

} // namespace lambdamem
