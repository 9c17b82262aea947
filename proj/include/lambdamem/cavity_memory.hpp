// cavity_memory.hpp - cavity-assisted ensemble memory: the input-output ODE
// system, its adiabatic elimination, closed-form efficiencies, and optimal
// control shaping via time reversal.
//
// Full model (rates angular, time in seconds):
//   dP/dt = -gamma_e P + i g(t) sqrt(N) E + i (Omega/2) S
//   dS/dt = i (conj(Omega)/2) P
//   dE/dt = i g(t) sqrt(N) P - kappa E + sqrt(2 kappa) E_in
//   E_out = -E_in + sqrt(2 kappa) E
// AdiabaticCavity eliminates E = (i g sqrt(N) P + sqrt(2 kappa) E_in)/kappa.

#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "lambdamem/constants.hpp"
#include "lambdamem/lambda_system.hpp"
#include "lambdamem/maxwell_bloch.hpp" // SolverError

namespace lambdamem {

struct CavityParams {
  double kappa;   // cavity decay (rad/s)
  double g;       // per-emitter coupling (rad/s)
  double n_atoms; // N
  double gamma_e; // polarization decoherence (rad/s)

  CavityParams(double kappa_, double g_, double n, double gamma_e_)
      : kappa(kappa_), g(g_), n_atoms(n), gamma_e(gamma_e_) {
    // g = 0 is admitted as the empty-cavity limit
    if (!(kappa > 0.0) || g < 0.0 || !(n_atoms > 0.0) || !(gamma_e > 0.0))
      throw std::invalid_argument("CavityParams: invalid field");
  }

  // ensemble-enhanced cavity emission rate N g^2 / kappa
  double gamma_c() const { return n_atoms * g * g / kappa; }
};

inline double cooperativity(const CavityParams& p) {
  return p.n_atoms * p.g * p.g / (p.kappa * p.gamma_e);
}

enum class CavityMode { FullODE, AdiabaticCavity };

// Regularly sampled complex waveform with linear interpolation.
struct SampledSignal {
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<std::complex<double>> values;

  std::complex<double> at(double t) const {
    if (values.size() < 2 || dt <= 0.0) return {0.0, 0.0};
    const double x = (t - t0) / dt;
    const auto n = values.size();
    if (x < 0.0 || x > (double)(n - 1)) return {0.0, 0.0};
    const std::size_t i = std::min((std::size_t)x, n - 2);
    const double w = x - (double)i;
    return values[i] * (1.0 - w) + values[i + 1] * w;
  }

  double energy() const {
    if (values.size() < 2) return 0.0;
    double acc = 0.5 * (std::norm(values.front()) + std::norm(values.back()));
    for (std::size_t i = 1; i + 1 < values.size(); ++i)
      acc += std::norm(values[i]);
    return acc * dt;
  }

  static SampledSignal gaussian(double t0_window, double t_span, int n,
                                double tau_fwhm, double center) {
    SampledSignal s;
    s.t0 = t0_window;
    s.dt = t_span / (n - 1);
    s.values.resize(n);
    const double sig = tau_fwhm / (2.0 * std::sqrt(std::numbers::ln2));
    const double amp = std::pow(sig * std::sqrt(kPi), -0.5);
    for (int i = 0; i < n; ++i) {
      const double t = s.t0 + i * s.dt;
      const double x = (t - center) / sig;
      s.values[i] = amp * std::exp(-0.5 * x * x);
    }
    return s;
  }
};

struct CavityRun {
  std::vector<double> times;
  std::vector<std::complex<double>> p, s, e_cav, e_out;
};

namespace cavity_detail {

using cd = std::complex<double>;

struct OdeState {
  cd p{0, 0}, s{0, 0}, e{0, 0};
};

// one RK4 step of either model
template <typename Rhs>
inline OdeState rk4_step(const OdeState& y, double t, double dt, Rhs rhs) {
  const OdeState k1 = rhs(t, y);
  auto add = [](const OdeState& a, const OdeState& b, double w) {
    return OdeState{a.p + w * b.p, a.s + w * b.s, a.e + w * b.e};
  };
  const OdeState k2 = rhs(t + 0.5 * dt, add(y, k1, 0.5 * dt));
  const OdeState k3 = rhs(t + 0.5 * dt, add(y, k2, 0.5 * dt));
  const OdeState k4 = rhs(t + dt, add(y, k3, dt));
  OdeState out = y;
  out.p += dt / 6.0 * (k1.p + 2.0 * k2.p + 2.0 * k3.p + k4.p);
  out.s += dt / 6.0 * (k1.s + 2.0 * k2.s + 2.0 * k3.s + k4.s);
  out.e += dt / 6.0 * (k1.e + 2.0 * k2.e + 2.0 * k3.e + k4.e);
  return out;
}

} // namespace cavity_detail

// Integrate the cavity memory over [0, t_s + t_r] with the given control
// schedule and input; eta is the retrieved energy (output over
// [t_s, t_s + t_r]) divided by the input energy (or by |S(0)|^2 = 1 when
// the input is empty, i.e. a pure retrieval run from S(0) = 1).
inline std::pair<CavityRun, double> simulate_cavity_memory(
    const CavityParams& p, const ControlSchedule& omega,
    const std::function<double(double)>& g_schedule, // empty -> constant p.g
    const SampledSignal& input, CavityMode mode, double t_s, double t_r,
    int n_steps = 0) {
  using cavity_detail::cd;
  using cavity_detail::OdeState;
  if (t_s < 0.0 || t_r < 0.0)
    throw std::invalid_argument("simulate_cavity_memory: negative window");
  const double t_end = t_s + t_r;
  const bool retrieval_only = input.values.empty();

  auto g_at = [&](double t) { return g_schedule ? g_schedule(t) : p.g; };
  const double sqn = std::sqrt(p.n_atoms);

  // step size: resolve the fastest rate with margin
  double rate = p.gamma_e + p.gamma_c();
  rate = std::max(rate, omega.max_rabi());
  if (mode == CavityMode::FullODE) rate = std::max(rate, p.kappa);
  const int nsteps = n_steps > 0
                         ? n_steps
                         : std::max(2048, (int)std::ceil(t_end * rate * 40.0));
  const double dt = t_end / nsteps;
  if (dt * rate > 0.5)
    throw SolverError("simulate_cavity_memory: step-size instability");

  OdeState y;
  if (retrieval_only) y.s = 1.0;

  auto rhs_full = [&](double t, const OdeState& v) {
    const double gn = g_at(t) * sqn;
    const cd om = omega.rabi_at(t);
    OdeState d;
    d.p = -p.gamma_e * v.p + cd(0, 1) * gn * v.e + cd(0, 0.5) * om * v.s;
    d.s = cd(0, 0.5) * std::conj(om) * v.p;
    d.e = cd(0, 1) * gn * v.p - p.kappa * v.e +
          std::sqrt(2.0 * p.kappa) * input.at(t);
    return d;
  };
  auto rhs_adiabatic = [&](double t, const OdeState& v) {
    const double gn = g_at(t) * sqn;
    const cd om = omega.rabi_at(t);
    const cd e = (cd(0, 1) * gn * v.p +
                  std::sqrt(2.0 * p.kappa) * input.at(t)) / p.kappa;
    OdeState d;
    d.p = -p.gamma_e * v.p + cd(0, 1) * gn * e + cd(0, 0.5) * om * v.s;
    d.s = cd(0, 0.5) * std::conj(om) * v.p;
    d.e = 0.0;
    return d;
  };

  CavityRun run;
  const int stride = std::max(1, nsteps / 4096);
  run.times.reserve(nsteps / stride + 2);
  double ein = 0.0, eout_ret = 0.0;
  double prev_in = -1.0, prev_out = 0.0;
  for (int i = 0; i <= nsteps; ++i) {
    const double t = i * dt;
    cd e_cav;
    if (mode == CavityMode::FullODE) {
      e_cav = y.e;
    } else {
      e_cav = (cd(0, 1) * g_at(t) * sqn * y.p +
               std::sqrt(2.0 * p.kappa) * input.at(t)) / p.kappa;
    }
    const cd eout = -input.at(t) + std::sqrt(2.0 * p.kappa) * e_cav;
    const double in2 = std::norm(input.at(t));
    const double out2 = std::norm(eout);
    if (prev_in >= 0.0) {
      ein += 0.5 * (prev_in + in2) * dt;
      if (t > t_s) eout_ret += 0.5 * (prev_out + out2) * dt;
    }
    prev_in = in2;
    prev_out = out2;
    if (i % stride == 0 || i == nsteps) {
      run.times.push_back(t);
      run.p.push_back(y.p);
      run.s.push_back(y.s);
      run.e_cav.push_back(e_cav);
      run.e_out.push_back(eout);
    }
    if (i == nsteps) break;
    if (mode == CavityMode::FullODE)
      y = cavity_detail::rk4_step(y, t, dt, rhs_full);
    else
      y = cavity_detail::rk4_step(y, t, dt, rhs_adiabatic);
    if ((i & 1023) == 0 && !std::isfinite(std::norm(y.p)))
      throw SolverError("simulate_cavity_memory: non-finite state");
  }
  const double denom = (retrieval_only || ein <= 0.0) ? 1.0 : ein;
  return {std::move(run), eout_ret / denom};
}

// Retrieval efficiency quadrature for time-dependent coupling g(t):
// eta_r = int_0^tr (2N/kappa) g^2(t) exp(-int_0^t 2 (N g^2/kappa + gamma_e))
// Composite Simpson with a trapezoid cumulative inner integral.
inline double retrieval_efficiency_integral(
    const std::function<double(double)>& g_of_t, double n_atoms, double kappa,
    double gamma_e, double t_r, int n = 4096) {
  if (t_r < 0.0)
    throw std::invalid_argument("retrieval_efficiency_integral: t_r < 0");
  if (t_r == 0.0) return 0.0;
  // resolve the fastest decay rate on the window
  double rate_max = 2.0 * gamma_e;
  for (int i = 0; i <= 64; ++i) {
    const double g = g_of_t ? g_of_t(i * t_r / 64.0) : 0.0;
    rate_max = std::max(rate_max, 2.0 * (n_atoms * g * g / kappa + gamma_e));
  }
  n = std::max(n, (int)std::ceil(40.0 * rate_max * t_r));
  if (n % 2 != 0) ++n;
  const double h = t_r / n;
  std::vector<double> rate(n + 1), integrand(n + 1);
  double cum = 0.0, prev = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double t = i * h;
    const double g = g_of_t ? g_of_t(t) : 0.0;
    const double gc = n_atoms * g * g / kappa;
    const double a = 2.0 * (gc + gamma_e);
    if (i > 0) cum += 0.5 * (prev + a) * h;
    prev = a;
    rate[i] = a;
    integrand[i] = 2.0 * gc * std::exp(-cum);
  }
  double acc = integrand[0] + integrand[n];
  for (int i = 1; i < n; i += 2) acc += 4.0 * integrand[i];
  for (int i = 2; i < n; i += 2) acc += 2.0 * integrand[i];
  return acc * h / 3.0;
}

// eta ~ C^2/(1+C)^2 (1 - exp(-2 gamma_e (1+C) t_s))(1 - exp(-2 gamma_e (1+C) t_r));
// infinite windows are allowed.
inline double overall_efficiency(double c, double gamma_e, double t_s,
                                 double t_r) {
  if (c < 0.0 || gamma_e < 0.0 || t_s < 0.0 || t_r < 0.0)
    throw std::invalid_argument("overall_efficiency: negative input");
  const double base = c / (1.0 + c);
  auto window = [&](double t) {
    if (std::isinf(t)) return 1.0;
    return 1.0 - std::exp(-2.0 * gamma_e * (1.0 + c) * t);
  };
  return base * base * window(t_s) * window(t_r);
}

// shortest storable pulse duration at near-maximum efficiency
inline double optimal_pulse_duration(double c, double gamma_e) {
  if (!(c > 0.0))
    throw std::invalid_argument("optimal_pulse_duration: c must be > 0");
  return 1.0 / (c * gamma_e);
}

inline bool fast_limit_check(double omega, double gamma_big, double c) {
  return omega > gamma_big * c;
}

// --- optimal shaping ---------------------------------------------------------

// Storage control for a given input, built by time reversal: construct the
// retrieval control whose output is the time-reversed input (exact output
// shaping for the adiabatic-cavity equations), then run it backwards. The
// emitted fraction is bisected down from C/(1+C) until the spin-wave norm
// stays positive along the whole trajectory (shape feasibility).
inline SampledSignal optimal_storage_control(const CavityParams& p,
                                             const SampledSignal& input,
                                             double t_s, int n = 4096) {
  const double c = cooperativity(p);
  const double gc = p.gamma_c();
  const double kbar = p.gamma_e + gc;
  const double dt = t_s / n;

  // reversed input shape, L2-normalized on the window
  std::vector<double> w(n + 1);
  for (int i = 0; i <= n; ++i)
    w[i] = std::abs(input.at(t_s - i * dt));
  double wnorm = 0.5 * (w[0] * w[0] + w[n] * w[n]);
  for (int i = 1; i < n; ++i) wnorm += w[i] * w[i];
  wnorm *= dt;
  if (!(wnorm > 0.0))
    throw std::invalid_argument("optimal_storage_control: empty input");
  for (auto& x : w) x /= std::sqrt(wnorm);

  auto spin_floor = [&](double eta_frac, std::vector<double>* om_out) {
    const double eta_t = eta_frac * c / (1.0 + c);
    std::vector<double> pr(n + 1);
    for (int i = 0; i <= n; ++i)
      pr[i] = std::sqrt(eta_t) * w[i] / std::sqrt(2.0 * gc);
    double floor = 1.0, cum = 0.0;
    std::vector<double> s2(n + 1);
    for (int i = 0; i <= n; ++i) {
      if (i > 0) cum += 0.5 * (pr[i - 1] * pr[i - 1] + pr[i] * pr[i]) * dt;
      s2[i] = 1.0 - (pr[i] * pr[i] - pr[0] * pr[0]) - 2.0 * kbar * cum;
      floor = std::min(floor, s2[i]);
    }
    if (om_out) {
      om_out->resize(n + 1);
      for (int i = 0; i <= n; ++i) {
        const double pdot =
            i == 0 ? (pr[1] - pr[0]) / dt
                   : (i == n ? (pr[n] - pr[n - 1]) / dt
                             : (pr[i + 1] - pr[i - 1]) / (2.0 * dt));
        const double f = pdot + kbar * pr[i];
        const double s = std::sqrt(std::max(s2[i], 1e-12));
        double om = 2.0 * f / std::max(s, 1e-6);
        const double cap = 40.0 * kbar;
        (*om_out)[i] = std::clamp(om, -cap, cap);
      }
    }
    return floor;
  };

  double lo = 0.3, hi = 0.99999;
  for (int it = 0; it < 40; ++it) {
    const double mid = 0.5 * (lo + hi);
    (spin_floor(mid, nullptr) >= 1e-3 ? lo : hi) = mid;
  }
  std::vector<double> om_rev;
  spin_floor(lo, &om_rev);

  SampledSignal ctrl;
  ctrl.t0 = 0.0;
  ctrl.dt = dt;
  ctrl.values.resize(n + 1);
  for (int i = 0; i <= n; ++i) // reverse for storage
    ctrl.values[i] = om_rev[n - i];
  return ctrl;
}

struct TwoPassResult {
  double eta_storage = 0.0;
  double eta_retrieval = 0.0;
  double eta_total = 0.0;
  SampledSignal storage_control;
  CavityRun run;
};

// Two-pass optimally shaped memory: pass one stores the input with the
// time-reversal control, pass two retrieves with a constant control deep in
// the fast limit. Windows follow the retrieval-starts-at-zero bookkeeping.
inline TwoPassResult two_pass_optimal_memory(const CavityParams& p,
                                             const SampledSignal& input,
                                             double t_s, double t_r,
                                             CavityMode mode,
                                             int n_steps = 8192) {
  TwoPassResult out;
  out.storage_control = optimal_storage_control(p, input, t_s);
  const double c = cooperativity(p);
  const double om_read = 30.0 * std::max(2.0 * p.gamma_e * c,
                                         p.gamma_e * (1.0 + c));

  // storage control as a dense sampled lookup, constant read after t_s
  ControlSegment read_seg;
  read_seg.start = t_s;
  read_seg.end = t_s + t_r;
  read_seg.rabi = om_read;
  read_seg.ramp = RampKind::Step;

  const auto& ctrl = out.storage_control;
  auto omega_fn = [ctrl, read_seg](double t) -> std::complex<double> {
    if (t >= read_seg.start && t < read_seg.end) return read_seg.rabi;
    return ctrl.at(t);
  };

  // integrate manually (control is a hybrid of sampled and constant)
  using cavity_detail::cd;
  using cavity_detail::OdeState;
  const double gc = p.gamma_c();
  double rate = std::max(p.gamma_e + gc, om_read);
  if (mode == CavityMode::FullODE) rate = std::max(rate, p.kappa);
  const int nsteps = std::max(n_steps, (int)std::ceil((t_s + t_r) * rate * 40.0));
  const double dt = (t_s + t_r) / nsteps;
  const double sqn = std::sqrt(p.n_atoms);
  OdeState y;
  auto rhs = [&](double t, const OdeState& v) {
    const cd om = omega_fn(t);
    OdeState d;
    cd e;
    if (mode == CavityMode::FullODE) {
      e = v.e;
      d.e = cd(0, 1) * p.g * sqn * v.p - p.kappa * v.e +
            std::sqrt(2.0 * p.kappa) * input.at(t);
    } else {
      e = (cd(0, 1) * p.g * sqn * v.p +
           std::sqrt(2.0 * p.kappa) * input.at(t)) / p.kappa;
      d.e = 0.0;
    }
    d.p = -p.gamma_e * v.p + cd(0, 1) * p.g * sqn * e + cd(0, 0.5) * om * v.s;
    d.s = cd(0, 0.5) * std::conj(om) * v.p;
    return d;
  };

  double ein = 0.0, eret = 0.0, prev_in = -1.0, prev_out = 0.0;
  double stored = 0.0;
  const int stride = std::max(1, nsteps / 4096);
  for (int i = 0; i <= nsteps; ++i) {
    const double t = i * dt;
    cd e_cav = (mode == CavityMode::FullODE)
                   ? y.e
                   : (cd(0, 1) * p.g * sqn * y.p +
                      std::sqrt(2.0 * p.kappa) * input.at(t)) / p.kappa;
    const cd eout = -input.at(t) + std::sqrt(2.0 * p.kappa) * e_cav;
    const double in2 = std::norm(input.at(t));
    const double out2 = std::norm(eout);
    if (prev_in >= 0.0) {
      ein += 0.5 * (prev_in + in2) * dt;
      if (t > t_s) eret += 0.5 * (prev_out + out2) * dt;
    }
    prev_in = in2;
    prev_out = out2;
    if (std::abs(t - t_s) < 0.5 * dt) stored = std::norm(y.s);
    if (i % stride == 0 || i == nsteps) {
      out.run.times.push_back(t);
      out.run.p.push_back(y.p);
      out.run.s.push_back(y.s);
      out.run.e_cav.push_back(e_cav);
      out.run.e_out.push_back(eout);
    }
    if (i == nsteps) break;
    y = cavity_detail::rk4_step(y, t, dt, rhs);
  }
  out.eta_storage = stored / ein;
  out.eta_total = eret / ein;
  out.eta_retrieval = stored > 1e-12 ? out.eta_total / out.eta_storage : 0.0;
  return out;
}

} // namespace lambdamem
