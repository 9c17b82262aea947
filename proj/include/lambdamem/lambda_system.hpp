// lambda_system.hpp - domain types and presets for three-level Lambda/V
// spin ensembles, parameterized for the silicon T centre.

#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lambdamem/constants.hpp"

namespace lambdamem {

enum class Scheme { Lambda, V };

// Transition rates and scheme wiring of a three-level system. All rates are
// angular (rad/s). The polarization decoherence rate is Gamma/2 by
// definition and is exposed as an accessor so the relation cannot drift.
struct LambdaParams {
  double gamma_big;       // excited-state linewidth Gamma (rad/s)
  double gamma_s;         // spin-wave decoherence (rad/s, see note below)
  double splitting_g1g2;  // ground-state splitting omega_g1g2 (rad/s)
  Scheme scheme = Scheme::Lambda;
  std::string signal_transition = "A";
  std::string control_transition = "B";

  // gamma_s convention: stored-excitation (efficiency-level) decay rate,
  // i.e. a spin wave held for time t retains exp(-gamma_s * t) of its
  // excitation probability. The solver applies gamma_s/2 to the spin-wave
  // amplitude accordingly.
  double gamma_e() const { return 0.5 * gamma_big; }

  LambdaParams(double gamma_big_, double gamma_s_, double splitting_,
               Scheme scheme_ = Scheme::Lambda,
               std::string signal = "A", std::string control = "B")
      : gamma_big(gamma_big_), gamma_s(gamma_s_), splitting_g1g2(splitting_),
        scheme(scheme_), signal_transition(std::move(signal)),
        control_transition(std::move(control)) {
    if (!(gamma_big > 0.0))
      throw std::invalid_argument("LambdaParams: gamma_big must be > 0");
    if (gamma_s < 0.0)
      throw std::invalid_argument("LambdaParams: gamma_s must be >= 0");
    if (signal_transition == control_transition)
      throw std::invalid_argument(
          "LambdaParams: signal and control transitions must differ");
  }
};

// Measured T centre constants used throughout.
struct TCentrePreset {
  double tx0_lifetime_s;
  double debye_waller;
  std::pair<double, double> radiative_efficiency_bounds;
  double wavelength_m;
  double refractive_index;
  double homogeneous_linewidth_over_2pi_hz; // broadband-memory convention
  double lifetime_limited_linewidth_hz;     // 1/(2 pi tau), separate role
  double electron_t2_s;
  double nuclear_t2_s;
  double mw_frequency_over_2pi_hz;
  std::pair<double, double> hyperfine_constants_hz;
};

// FWHM linewidth (ordinary frequency, Hz) of a lifetime-limited transition.
inline double lifetime_limited_linewidth(double lifetime_s) {
  if (!(lifetime_s > 0.0))
    throw std::domain_error("lifetime_limited_linewidth: lifetime must be > 0");
  return 1.0 / (kTwoPi * lifetime_s);
}

inline TCentrePreset make_t_centre_preset() {
  TCentrePreset p;
  p.tx0_lifetime_s = 0.94e-6;
  p.debye_waller = 0.23;
  p.radiative_efficiency_bounds = {0.03, 1.0};
  p.wavelength_m = 1326e-9;
  p.refractive_index = 3.45;
  p.homogeneous_linewidth_over_2pi_hz = 27e6;
  p.lifetime_limited_linewidth_hz = lifetime_limited_linewidth(p.tx0_lifetime_s);
  p.electron_t2_s = 2.1e-3;
  p.nuclear_t2_s = 1.1;
  p.mw_frequency_over_2pi_hz = 2.25e9;
  p.hyperfine_constants_hz = {-2.93e6, -2.57e6};
  return p;
}

// Signal waveform descriptor. Energy is normalized to 1 by consumers.
struct PulseSpec {
  enum class Shape { Gaussian };
  Shape shape = Shape::Gaussian;
  double bandwidth_fwhm_hz = 0.0; // intensity-spectrum FWHM
  double duration_fwhm_s = 0.0;   // intensity-envelope FWHM
  double arrival_time_s = 0.0;

  static PulseSpec gaussian_from_bandwidth(double b_hz, double arrival_s) {
    if (!(b_hz > 0.0))
      throw std::invalid_argument("PulseSpec: bandwidth must be > 0");
    PulseSpec p;
    p.bandwidth_fwhm_hz = b_hz;
    p.duration_fwhm_s = kGaussianTbp / b_hz;
    p.arrival_time_s = arrival_s;
    return p;
  }

  static PulseSpec gaussian_from_duration(double tau_s, double arrival_s) {
    if (!(tau_s > 0.0))
      throw std::invalid_argument("PulseSpec: duration must be > 0");
    PulseSpec p;
    p.duration_fwhm_s = tau_s;
    p.bandwidth_fwhm_hz = kGaussianTbp / tau_s;
    p.arrival_time_s = arrival_s;
    return p;
  }
};

enum class RampKind { Step, TanhDown, TanhUp };

// One control segment. Step holds |rabi| constant on [start, end). The tanh
// ramps evaluate rabi * (1 -+ tanh((t - ramp_center)/ramp_time))/2, i.e.
// TanhDown goes 1 -> 0 through ramp_center, TanhUp goes 0 -> 1.
struct ControlSegment {
  double start = 0.0;
  double end = 0.0;
  std::complex<double> rabi{0.0, 0.0}; // rad/s
  RampKind ramp = RampKind::Step;
  double ramp_center = 0.0;
  double ramp_time = 0.0;

  std::complex<double> value(double t) const {
    if (t < start || t >= end) return {0.0, 0.0};
    switch (ramp) {
      case RampKind::Step:
        return rabi;
      case RampKind::TanhDown:
        return rabi * 0.5 * (1.0 - std::tanh((t - ramp_center) / ramp_time));
      case RampKind::TanhUp:
        return rabi * 0.5 * (1.0 + std::tanh((t - ramp_center) / ramp_time));
    }
    return {0.0, 0.0};
  }

  // integral of |value| over [a, b] within the segment, closed form
  double area(double a, double b) const {
    a = std::max(a, start);
    b = std::min(b, end);
    if (b <= a) return 0.0;
    const double mag = std::abs(rabi);
    if (ramp == RampKind::Step) return mag * (b - a);
    // antiderivative of (1 -+ tanh((t-c)/tau))/2 is
    // [ (t-c) -+ tau log cosh((t-c)/tau) ] / 2
    auto anti = [&](double t) {
      const double x = (t - ramp_center) / ramp_time;
      // log cosh with overflow guard
      const double lc = std::abs(x) > 20.0
                            ? std::abs(x) - std::numbers::ln2
                            : std::log(std::cosh(x));
      const double s = (ramp == RampKind::TanhDown) ? -1.0 : 1.0;
      return 0.5 * ((t - ramp_center) + s * ramp_time * lc);
    };
    return mag * (anti(b) - anti(a));
  }
};

// Time-ordered, non-overlapping control segments.
struct ControlSchedule {
  std::vector<ControlSegment> segments;

  void add(ControlSegment seg) {
    if (!(seg.end > seg.start))
      throw std::invalid_argument("ControlSchedule: segment end <= start");
    if (!segments.empty() && seg.start < segments.back().end - 1e-15)
      throw std::invalid_argument("ControlSchedule: overlapping segments");
    segments.push_back(seg);
  }

  std::complex<double> rabi_at(double t) const {
    for (const auto& s : segments)
      if (t >= s.start && t < s.end) return s.value(t);
    return {0.0, 0.0};
  }

  double max_rabi() const {
    double m = 0.0;
    for (const auto& s : segments) m = std::max(m, std::abs(s.rabi));
    return m;
  }

  // segment boundaries, used by solvers to land steps on discontinuities
  std::vector<double> event_times() const {
    std::vector<double> ev;
    for (const auto& s : segments) {
      ev.push_back(s.start);
      ev.push_back(s.end);
    }
    return ev;
  }
};

// int |Omega(t)| dt over [t0, t1]; exact per segment.
inline double pulse_area(const ControlSchedule& schedule, double t0,
                         double t1) {
  if (t1 <= t0) return 0.0;
  double area = 0.0;
  for (const auto& s : schedule.segments) area += s.area(t0, t1);
  return area;
}

} // namespace lambdamem
