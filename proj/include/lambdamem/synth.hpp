// synth.hpp - synthetic spectrum generators for tests and bundled example
// data. Forward model evaluation only; the fit engine never sees this code
// path except through the generated samples.

#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "lambdamem/spectroscopy.hpp"

namespace lambdamem::synth {

inline double lorentz(double x, double center, double fwhm) {
  const double q = 2.0 * (x - center) / fwhm;
  return 1.0 / (1.0 + q * q);
}

inline double gauss(double x, double center, double fwhm) {
  const double t = (x - center) / fwhm;
  return std::exp(-4.0 * std::numbers::ln2 * t * t);
}

inline std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
  return v;
}

// additive Gaussian noise, sigma relative to the given scale
inline void add_noise(std::vector<double>& y, double sigma, double scale,
                      std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, sigma * scale);
  for (auto& v : y) v += dist(rng);
}

inline Spectrum single_peak(LineModel model, double center, double fwhm,
                            double amplitude, double span, int n,
                            double baseline0 = 0.0, double baseline1 = 0.0) {
  Spectrum s;
  s.axis = linspace(center - span / 2.0, center + span / 2.0, n);
  s.values.resize(n);
  s.value_unit = ValueUnit::Counts;
  for (int i = 0; i < n; ++i) {
    const double x = s.axis[i];
    const double u = model == LineModel::Gaussian ? gauss(x, center, fwhm)
                                                  : lorentz(x, center, fwhm);
    s.values[i] = baseline0 + baseline1 * x + amplitude * u;
  }
  return s;
}

// Autler-Townes doublet: two Lorentzians split symmetrically about center
inline Spectrum at_doublet(double center, double splitting, double fwhm,
                           double amplitude, double span, int n) {
  Spectrum s;
  s.axis = linspace(center - span / 2.0, center + span / 2.0, n);
  s.values.resize(n);
  s.value_unit = ValueUnit::Counts;
  for (int i = 0; i < n; ++i) {
    const double x = s.axis[i];
    s.values[i] = amplitude * (lorentz(x, center - splitting / 2.0, fwhm) +
                               lorentz(x, center + splitting / 2.0, fwhm));
  }
  return s;
}

// broad ODMR peak with narrow coherent-population-trapping dips
inline Spectrum cpt_profile(double center, double peak_fwhm,
                            double peak_amplitude,
                            const std::vector<double>& dip_centers,
                            double dip_fwhm, double dip_depth, double span,
                            int n) {
  Spectrum s;
  s.axis = linspace(center - span / 2.0, center + span / 2.0, n);
  s.values.resize(n);
  s.value_unit = ValueUnit::Counts;
  for (int i = 0; i < n; ++i) {
    const double x = s.axis[i];
    double v = peak_amplitude * lorentz(x, center, peak_fwhm);
    for (double dc : dip_centers) v -= dip_depth * lorentz(x, dc, dip_fwhm);
    s.values[i] = v;
  }
  return s;
}

// instrument-resolution-limited transmission dip: Lorentzian absorption of
// the given measured peak depth and (broadened) measured FWHM
inline Spectrum transmission_dip(double center_hz, double measured_fwhm_hz,
                                 double peak_absorption, double span_hz,
                                 int n) {
  Spectrum s;
  s.axis = linspace(center_hz - span_hz / 2.0, center_hz + span_hz / 2.0, n);
  s.values.resize(n);
  s.axis_unit = AxisUnit::Hz;
  s.value_unit = ValueUnit::Transmission;
  for (int i = 0; i < n; ++i)
    s.values[i] =
        1.0 - peak_absorption * lorentz(s.axis[i], center_hz, measured_fwhm_hz);
  return s;
}

// absorption-coefficient spectrum (cm^-1) with the stated integrated area
inline Spectrum alpha_spectrum(double center_hz, double fwhm_hz,
                               double integrated_area_hz_invcm, double span_hz,
                               int n) {
  const double peak =
      integrated_area_hz_invcm / ((std::numbers::pi / 2.0) * fwhm_hz);
  Spectrum s;
  s.axis = linspace(center_hz - span_hz / 2.0, center_hz + span_hz / 2.0, n);
  s.values.resize(n);
  s.axis_unit = AxisUnit::Hz;
  s.value_unit = ValueUnit::AlphaInvCm;
  for (int i = 0; i < n; ++i)
    s.values[i] = peak * lorentz(s.axis[i], center_hz, fwhm_hz);
  return s;
}

} // namespace lambdamem::synth
