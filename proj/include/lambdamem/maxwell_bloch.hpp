// maxwell_bloch.hpp - 1-D free-space Lambda-system propagation and the
// EIT / ATS storage-retrieval protocols built on it.
//
// The solver integrates the dimensionless system (time in units of
// 1/gamma_e, z in [0, 1], c = sqrt(d/2)):
//
//   dP/dt = -(1 + i delta) P + i c E + i (Omega/2) S
//   dS/dt = -(gamma_s/2) S  + i (conj(Omega)/2) P
//   dE/dz = i c P,   E(0, t) = E_in(t)      (co-moving frame)
//
// Normalization: resonant stationary intensity transmission is exactly
// exp(-d). E is integrated in z by the trapezoid rule per stage of an
// explicit RK4 step in t, so the scheme is 4th order in time and 2nd order
// in space. gamma_s is the stored-excitation decay rate: the spin-wave
// amplitude decays at gamma_s/2, a spin wave held for t keeps exp(-gamma_s t)
// of its excitation.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lambdamem/constants.hpp"
#include "lambdamem/lambda_system.hpp"

namespace lambdamem {

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Direction { Forward, Backward };

struct MediumParams {
  double optical_depth = 0.0;      // resonant intensity OD, T = exp(-d)
  double length_m = 0.0;           // metadata
  double inhom_linewidth_hz = 0.0; // metadata, never enters the solver

  MediumParams() = default;
  explicit MediumParams(double d, double length = 0.0, double inhom = 0.0)
      : optical_depth(d), length_m(length), inhom_linewidth_hz(inhom) {
    if (optical_depth < 0.0)
      throw std::invalid_argument("MediumParams: optical_depth must be >= 0");
  }
};

struct Grid1D {
  int nz = 256;
  int nt = 4096;
  double t_max_s = 0.0;

  Grid1D() = default;
  Grid1D(int nz_, int nt_, double t_max) : nz(nz_), nt(nt_), t_max_s(t_max) {
    if (nz < 16) throw std::invalid_argument("Grid1D: nz must be >= 16");
    if (nt < 64) throw std::invalid_argument("Grid1D: nt must be >= 64");
    if (!(t_max_s > 0.0)) throw std::invalid_argument("Grid1D: t_max <= 0");
  }
  double dz() const { return 1.0 / nz; }
  double dt_s() const { return t_max_s / nt; }
};

// (E, P, S) trajectory, possibly strided in time.
struct FieldState {
  std::vector<double> times_s;       // stored sample times
  std::vector<double> z;             // nz+1 nodes on [0, 1]
  std::vector<std::complex<double>> e, p, s; // row-major [it][iz]
  int nz = 0;

  std::complex<double> at(const std::vector<std::complex<double>>& f,
                          std::size_t it, int iz) const {
    return f[it * (nz + 1) + iz];
  }
};

struct MemoryResult {
  double eta_storage = 0.0;
  double eta_retrieval = 0.0;
  double eta_total = 0.0;
  std::vector<double> waveform_times_s;
  std::vector<double> output_waveform;  // |E(1,t)|^2 during retrieval, 1/s
  std::vector<double> leak_waveform;    // |E(1,t)|^2 during write, 1/s
  double input_energy = 0.0;            // normalized, ~1
  double leaked_fraction = 0.0;
  double decayed_fraction = 0.0;        // polarization channel
  double spin_decayed_fraction = 0.0;   // gamma_s channel
  double spin_remaining = 0.0;
  double control_rabi = 0.0;            // rad/s, control actually applied
  std::vector<std::string> warnings;
};

namespace detail {

using cd = std::complex<double>;
using ControlFn = std::function<cd(double)>;
using InputFn = std::function<cd(double)>;

// Dimensionless solver core. Reentrant; one instance per run.
class MbCore {
 public:
  MbCore(double d, int nz, double delta = 0.0, double gamma_s_tilde = 0.0)
      : nz_(nz), dz_(1.0 / nz), coupling_(std::sqrt(0.5 * d)),
        delta_(delta), gs_half_(0.5 * gamma_s_tilde),
        p_(nz + 1), s_(nz + 1),
        kp_(nz + 1), ks_(nz + 1), ap_(nz + 1), as_(nz + 1),
        tp_(nz + 1), ts_(nz + 1) {}

  int nz() const { return nz_; }
  const std::vector<cd>& p() const { return p_; }
  const std::vector<cd>& s() const { return s_; }
  std::vector<cd>& s() { return s_; }

  void flip_spin_wave() { std::reverse(s_.begin(), s_.end()); }

  // trapezoid-in-z norm integrals
  double spin_norm() const { return znorm(s_); }
  double pol_norm() const { return znorm(p_); }

  // advance [t0, t1] with steps no larger than dt_target; accumulates
  // time-trapezoid integrals of |E_out|^2, |E_in|^2, int|P|^2dz, int|S|^2dz.
  // record, when non-null, is called once per step with (t, |E_out|^2).
  struct Accumulators {
    double in_energy = 0.0;
    double out_energy = 0.0;
    double pol_decay = 0.0;   // 2 * int int |P|^2 dz dt
    double spin_decay = 0.0;  // gamma_s_tilde * int int |S|^2 dz dt
  };

  void integrate(double t0, double t1, double dt_target, const ControlFn& ctrl,
                 const InputFn& input, Accumulators& acc,
                 const std::function<void(double, double)>& record = nullptr,
                 double gs_tilde = -1.0) {
    if (t1 <= t0) return;
    if (gs_tilde >= 0.0) gs_half_ = 0.5 * gs_tilde;
    const int nsteps = std::max(1, (int)std::ceil((t1 - t0) / dt_target));
    const double dt = (t1 - t0) / nsteps;
    double prev_out = -1.0, prev_in = 0.0, prev_p = 0.0, prev_s = 0.0;
    for (int i = 0; i <= nsteps; ++i) {
      const double t = t0 + i * dt;
      const cd eout = rhs(p_, s_, t, ctrl, input, kp_, ks_);
      const double out2 = std::norm(eout);
      const double in2 = std::norm(input(t));
      const double pn = pol_norm();
      const double sn = spin_norm();
      if (prev_out >= 0.0) {
        acc.out_energy += 0.5 * (prev_out + out2) * dt;
        acc.in_energy += 0.5 * (prev_in + in2) * dt;
        acc.pol_decay += (prev_p + pn) * dt; // 2 * trapezoid
        acc.spin_decay += gs_half_ * (prev_s + sn) * dt;
      }
      if (record) record(t, out2);
      prev_out = out2;
      prev_in = in2;
      prev_p = pn;
      prev_s = sn;
      if (i == nsteps) break;
      // RK4; stage 1 already in kp_/ks_
      axpy(p_, kp_, 0.5 * dt, tp_);
      axpy(s_, ks_, 0.5 * dt, ts_);
      rhs(tp_, ts_, t + 0.5 * dt, ctrl, input, ap_, as_);
      accumulate_stage(2.0);
      axpy(p_, ap_, 0.5 * dt, tp_);
      axpy(s_, as_, 0.5 * dt, ts_);
      rhs(tp_, ts_, t + 0.5 * dt, ctrl, input, ap_, as_);
      accumulate_stage(2.0);
      axpy(p_, ap_, dt, tp_);
      axpy(s_, as_, dt, ts_);
      rhs(tp_, ts_, t + dt, ctrl, input, ap_, as_);
      accumulate_stage(1.0);
      const double w = dt / 6.0;
      for (int j = 0; j <= nz_; ++j) {
        p_[j] += w * kp_[j];
        s_[j] += w * ks_[j];
      }
      if ((i & 63) == 0 && !std::isfinite(std::norm(p_[nz_ / 2])))
        throw SolverError("maxwell_bloch: non-finite field detected");
    }
  }

  // snapshot of E(z) for the current P and boundary value
  void field_profile(const InputFn& input, double t, std::vector<cd>& e) const {
    e.resize(nz_ + 1);
    e[0] = input(t);
    for (int j = 0; j < nz_; ++j)
      e[j + 1] = e[j] + cd(0, 1) * coupling_ * dz_ * 0.5 * (p_[j] + p_[j + 1]);
  }

 private:
  // dP, dS for given (p, s) at time t; returns E at z=1
  cd rhs(const std::vector<cd>& p, const std::vector<cd>& s, double t,
         const ControlFn& ctrl, const InputFn& input, std::vector<cd>& dp,
         std::vector<cd>& ds) const {
    const cd om = ctrl(t);
    const cd half_om(0.5 * om.real(), 0.5 * om.imag());
    const cd half_om_conj = std::conj(half_om);
    const cd ic(0.0, coupling_);
    const cd decay(1.0, delta_); // multiplies -P
    cd e = input(t);
    for (int j = 0; j <= nz_; ++j) {
      dp[j] = -decay * p[j] + ic * e + cd(0, 1) * half_om * s[j];
      ds[j] = -gs_half_ * s[j] + cd(0, 1) * half_om_conj * p[j];
      if (j < nz_)
        e += ic * dz_ * 0.5 * (p[j] + p[j + 1]);
    }
    return e;
  }

  static void axpy(const std::vector<cd>& x, const std::vector<cd>& k,
                   double a, std::vector<cd>& out) {
    for (std::size_t j = 0; j < x.size(); ++j) out[j] = x[j] + a * k[j];
  }

  void accumulate_stage(double weight) {
    for (int j = 0; j <= nz_; ++j) {
      kp_[j] += weight * ap_[j];
      ks_[j] += weight * as_[j];
    }
  }

  double znorm(const std::vector<cd>& f) const {
    double acc = 0.5 * (std::norm(f[0]) + std::norm(f[nz_]));
    for (int j = 1; j < nz_; ++j) acc += std::norm(f[j]);
    return acc * dz_;
  }

  int nz_;
  double dz_;
  double coupling_;
  double delta_;
  double gs_half_;
  std::vector<cd> p_, s_, kp_, ks_, ap_, as_, tp_, ts_;
};

// normalized Gaussian envelope in dimensionless time
struct GaussEnvelope {
  double t0, sigma, amp;
  GaussEnvelope(double center, double tsig_fwhm)
      : t0(center), sigma(tsig_fwhm / (2.0 * std::sqrt(std::numbers::ln2))),
        amp(std::pow(sigma * std::sqrt(kPi), -0.5)) {}
  cd operator()(double t) const {
    const double x = (t - t0) / sigma;
    return amp * std::exp(-0.5 * x * x);
  }
};

inline double stability_dt(double omega_tilde_max, double b_tilde,
                           double delta_tilde = 0.0) {
  double lim = 1.0;
  if (omega_tilde_max > 0.0) lim = std::min(lim, kTwoPi / omega_tilde_max);
  if (b_tilde > 0.0) lim = std::min(lim, 1.0 / (kTwoPi * b_tilde));
  if (delta_tilde != 0.0)
    lim = std::min(lim, kTwoPi / std::abs(delta_tilde));
  return 0.1 * lim;
}

} // namespace detail

// --- closed-form helpers ---------------------------------------------------

// Control Rabi frequency (rad/s) satisfying the group-delay condition
// tau_d = 2 tau_sig for a Fourier-limited Gaussian signal:
// Omega^2 = d Gamma B_sig / 0.8825 with Gamma angular and B_sig in Hz.
inline double eit_optimal_rabi(double d, double gamma_big, double b_sig_hz) {
  if (!(d > 0.0) || !(gamma_big > 0.0) || !(b_sig_hz >= 0.0))
    throw std::invalid_argument("eit_optimal_rabi: non-positive input");
  return std::sqrt(d * gamma_big * b_sig_hz / kEitConditionFactor);
}

// tau_d = d Gamma / Omega^2 (units follow the arguments)
inline double group_delay(double d, double gamma_big, double omega) {
  if (omega == 0.0) throw std::invalid_argument("group_delay: zero Omega");
  return d * gamma_big / (omega * omega);
}

// Omega/2pi (Hz) for a given ATS factor F = Omega/Gamma
inline double ats_rabi_for_factor(double f, double gamma_over_2pi_hz) {
  if (f < 0.0 || gamma_over_2pi_hz < 0.0)
    throw std::invalid_argument("ats_rabi_for_factor: negative input");
  return f * gamma_over_2pi_hz;
}

inline double apply_storage_decay(double eta, double gamma_s, double t) {
  if (eta < 0.0 || eta > 1.0 || t < 0.0)
    throw std::invalid_argument("apply_storage_decay: bad input");
  return eta * std::exp(-gamma_s * t);
}

// Free-space ATS memory efficiency model (matched-bandwidth broadband
// protocol with 2pi write/read pulses): the absorbed fraction per pass is
// 1 - exp(-d/2F) and the decoherence of the stored coherence contributes
// exp(-1/F). Forward retrieval re-traverses the absorbing medium, which
// turns the squared absorption term into (d/2F)^2 exp(-d/2F).
inline double ats_efficiency_model(double d, double f, Direction dir) {
  if (!(f > 0.0) || d < 0.0)
    throw std::invalid_argument("ats_efficiency_model: bad input");
  const double x = 0.5 * d / f;
  const double decoh = std::exp(-1.0 / f);
  if (dir == Direction::Backward) {
    const double a = 1.0 - std::exp(-x);
    return a * a * decoh;
  }
  return x * x * std::exp(-x) * decoh;
}

// --- propagate --------------------------------------------------------------

// Full trajectory of the driven medium on the given grid. The stored time
// axis is strided so at most ~4096 snapshots are kept. detuning is the
// signal-carrier detuning (rad/s).
inline FieldState propagate(const MediumParams& medium,
                            const LambdaParams& params,
                            const ControlSchedule& control,
                            const std::function<std::complex<double>(double)>&
                                input_envelope_si,
                            const Grid1D& grid, double detuning = 0.0) {
  const double ge = params.gamma_e();
  const double dt_tilde = grid.dt_s() * ge;
  const double om_max = control.max_rabi() / ge;
  const double dt_bound = detail::stability_dt(om_max, 0.0, detuning / ge);
  if (dt_tilde > dt_bound)
    throw SolverError(
        "propagate: unstable step size: dt = " + std::to_string(dt_tilde) +
        " (units of 1/gamma_e) exceeds 0.1*min(1, 2pi/Omega, 2pi/delta); "
        "need nt >= " +
        std::to_string((int)std::ceil(grid.t_max_s * ge / dt_bound)));

  detail::MbCore core(medium.optical_depth, grid.nz, detuning / ge,
                      params.gamma_s / ge);
  auto ctrl = [&](double t) { return control.rabi_at(t / ge) / ge; };
  auto input = [&](double t) { return input_envelope_si(t / ge); };

  const int stride = std::max(1, (grid.nt + 1) / 4096 + 1);
  FieldState fs;
  fs.nz = grid.nz;
  fs.z.resize(grid.nz + 1);
  for (int j = 0; j <= grid.nz; ++j) fs.z[j] = j * grid.dz();

  detail::MbCore::Accumulators acc;
  std::vector<std::complex<double>> eprofile;
  for (int it = 0; it <= grid.nt; ++it) {
    const double t = it * dt_tilde;
    if (it % stride == 0 || it == grid.nt) {
      fs.times_s.push_back(t / ge);
      core.field_profile(input, t, eprofile);
      fs.e.insert(fs.e.end(), eprofile.begin(), eprofile.end());
      fs.p.insert(fs.p.end(), core.p().begin(), core.p().end());
      fs.s.insert(fs.s.end(), core.s().begin(), core.s().end());
    }
    if (it == grid.nt) break;
    core.integrate(t, t + dt_tilde, dt_tilde, ctrl, input, acc);
  }
  return fs;
}

// PulseSpec-driven overload (normalized Gaussian envelope, dimensionless
// energy 1 in units of gamma_e time). Additionally requires the grid to
// resolve the signal bandwidth.
inline FieldState propagate(const MediumParams& medium,
                            const LambdaParams& params,
                            const ControlSchedule& control,
                            const PulseSpec& input, const Grid1D& grid,
                            double detuning = 0.0) {
  const double ge = params.gamma_e();
  const double b_tilde = input.bandwidth_fwhm_hz / ge;
  if (grid.dt_s() * ge > detail::stability_dt(0.0, b_tilde))
    throw SolverError(
        "propagate: grid does not resolve the signal bandwidth; need nt >= " +
        std::to_string((int)std::ceil(grid.t_max_s * ge /
                                      detail::stability_dt(0.0, b_tilde))));
  detail::GaussEnvelope env(input.arrival_time_s * ge,
                            input.duration_fwhm_s * ge);
  auto f = [&, env](double t_si) { return env(t_si * ge); };
  return propagate(medium, params, control, f, grid, detuning);
}

// --- memory protocols -------------------------------------------------------

struct EitTuning {
  double ramp_time_frac = 0.25;  // t_ramp / tau_sig
  bool refine = true;            // golden-section refinement of Omega
  double refine_bracket = 0.3;   // +-30% around the analytic condition
  double grid_scale = 1.0;       // <1 refines dt and dz together
  int nz = 256;
};

struct AtsTuning {
  double read_area_turns = 1.0; // read pulse area in units of 2pi
  double gap_min = 3.0;         // minimum control-off gap, 1/gamma_e units
  double grid_scale = 1.0;
  int nz = 256;
};

namespace detail {

struct EitRunSpec {
  double d, om, btil, gs_tilde, ramp_frac, gap_tilde;
  Direction dir;
  int nz;
  double dt_scale;
};

inline MemoryResult run_eit_once(const EitRunSpec& rs, bool keep_waveforms) {
  const double tsig = kGaussianTbp / rs.btil;
  const double tdel = 2.0 * rs.d / (rs.om * rs.om);
  const double t0 = 3.0 * tsig;
  const double tc = t0 + 0.5 * tdel;
  const double tramp = rs.ramp_frac * tsig;
  const double gap = std::max(rs.gap_tilde, 8.0 * tramp + 2.0);
  const double trc = tc + gap;
  const double split = 0.5 * (tc + trc);
  const double tend = trc + tdel + 4.0 * tsig;
  const double dt = rs.dt_scale *
                    0.5 * stability_dt(rs.om, rs.btil); // margin 0.05
  GaussEnvelope env(t0, tsig);
  auto input = [env](double t) { return env(t); };
  auto ctrl = [=](double t) {
    const double down = 0.5 * (1.0 - std::tanh((t - tc) / tramp));
    const double up = 0.5 * (1.0 + std::tanh((t - trc) / tramp));
    return cd(rs.om * (down + up), 0.0);
  };

  MbCore core(rs.d, rs.nz, 0.0, rs.gs_tilde);
  MbCore::Accumulators wacc, racc;
  MemoryResult res;
  auto recorder = [&](std::vector<double>& wf) {
    return [&res, &wf](double t, double out2) {
      res.waveform_times_s.push_back(t);
      wf.push_back(out2);
    };
  };
  if (keep_waveforms)
    core.integrate(0.0, split, dt, ctrl, input, wacc,
                   recorder(res.leak_waveform));
  else
    core.integrate(0.0, split, dt, ctrl, input, wacc);
  const double stored = core.spin_norm();
  if (rs.dir == Direction::Backward) core.flip_spin_wave();
  if (keep_waveforms)
    core.integrate(split, tend, dt, ctrl, input, racc,
                   recorder(res.output_waveform));
  else
    core.integrate(split, tend, dt, ctrl, input, racc);

  const double ein = wacc.in_energy + racc.in_energy;
  res.input_energy = ein;
  res.eta_storage = stored / ein;
  res.eta_total = racc.out_energy / ein;
  res.eta_retrieval = stored > 1e-12 ? res.eta_total / res.eta_storage : 0.0;
  res.leaked_fraction = wacc.out_energy / ein;
  res.decayed_fraction = (wacc.pol_decay + racc.pol_decay) / ein;
  res.spin_decayed_fraction = (wacc.spin_decay + racc.spin_decay) / ein;
  res.spin_remaining = core.spin_norm() / ein;
  return res;
}

} // namespace detail

// EIT storage and retrieval with the group-delay-matched constant control,
// tanh ramp-down centered when the delayed pulse center reaches z = 0.5,
// hold, ramp-up and retrieval. Backward retrieval flips the spin wave.
inline MemoryResult run_eit_memory(const MediumParams& medium,
                                   const LambdaParams& params,
                                   const PulseSpec& input,
                                   double storage_time_s, Direction dir,
                                   const EitTuning& tuning = {}) {
  if (storage_time_s < 0.0)
    throw std::invalid_argument("run_eit_memory: storage_time < 0");
  const double ge = params.gamma_e();
  const double d = medium.optical_depth;
  const double btil = input.bandwidth_fwhm_hz / ge;

  detail::EitRunSpec rs;
  rs.d = d;
  rs.btil = btil;
  rs.gs_tilde = params.gamma_s / ge;
  rs.ramp_frac = tuning.ramp_time_frac;
  rs.gap_tilde = storage_time_s * ge;
  rs.dir = dir;
  rs.nz = tuning.nz;
  rs.dt_scale = tuning.grid_scale;

  MemoryResult res;
  if (d <= 0.0) {
    rs.om = 1.0;
    res = detail::run_eit_once(rs, true);
    res.control_rabi = 0.0;
    return res;
  }

  const double om0 = eit_optimal_rabi(d, params.gamma_big,
                                      input.bandwidth_fwhm_hz) / ge;
  double best_om = om0;
  if (tuning.refine) {
    // golden-section maximization of eta_total over the bracket
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = om0 * (1.0 - tuning.refine_bracket);
    double b = om0 * (1.0 + tuning.refine_bracket);
    auto eval = [&](double om) {
      rs.om = om;
      return detail::run_eit_once(rs, false).eta_total;
    };
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = eval(x1), f2 = eval(x2);
    for (int it = 0; it < 10; ++it) {
      if (f1 < f2) {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + gr * (b - a);
        f2 = eval(x2);
      } else {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - gr * (b - a);
        f1 = eval(x1);
      }
    }
    best_om = f1 > f2 ? x1 : x2;
  }
  rs.om = best_om;
  res = detail::run_eit_once(rs, true);
  res.control_rabi = best_om * ge;

  if (d <= 20.0)
    res.warnings.push_back(
        "d <= 20: the group-delay control condition is marginal at this "
        "optical depth");
  if (input.bandwidth_fwhm_hz >= params.gamma_big / kTwoPi)
    res.warnings.push_back(
        "signal bandwidth exceeds Gamma/2pi: outside the narrowband regime");
  if (dir == Direction::Backward && medium.length_m > 0.0 &&
      std::sqrt(d) < 10.0 * medium.length_m * params.splitting_g1g2 /
                         kSpeedOfLight)
    res.warnings.push_back(
        "backward retrieval momentum mismatch: sqrt(d) < 10 L w_g1g2 / c");
  return res;
}

// ATS protocol: constant control Omega = F*Gamma over a write window of
// area exactly 2pi centered on the signal peak, abrupt switch-off, hold,
// 2pi read pulse. Signal bandwidth is tied to the factor, B = F Gamma/2pi.
inline MemoryResult run_ats_memory(const MediumParams& medium,
                                   const LambdaParams& params, double f_factor,
                                   double storage_time_s, Direction dir,
                                   const AtsTuning& tuning = {}) {
  if (!(f_factor > 0.0))
    throw std::invalid_argument("run_ats_memory: F must be > 0");
  if (storage_time_s < 0.0)
    throw std::invalid_argument("run_ats_memory: storage_time < 0");
  const double ge = params.gamma_e();
  const double d = medium.optical_depth;
  const double om = 2.0 * f_factor;            // Omega/gamma_e, Gamma = 2
  const double tw = kTwoPi / om;               // 2pi write area
  const double tsig = kGaussianTbp * kPi / f_factor;
  const double t0 = std::max(3.0 * tsig, 0.5 * tw + 0.5);
  const double w_start = t0 - 0.5 * tw;
  const double w_end = t0 + 0.5 * tw;
  const double gap = std::max(storage_time_s * ge, tuning.gap_min);
  const double r_start = w_end + gap;
  const double r_end = r_start + tuning.read_area_turns * tw;
  const double split = w_end + 0.5 * gap;
  const double tend = r_end + 8.0;
  const double dt = tuning.grid_scale * 0.5 * detail::stability_dt(om, 0.0);

  detail::GaussEnvelope env(t0, tsig);
  auto input = [env](double t) { return env(t); };
  auto ctrl_on = [om](double) { return detail::cd(om, 0.0); };
  auto ctrl_off = [](double) { return detail::cd(0.0, 0.0); };

  detail::MbCore core(d, tuning.nz, 0.0, params.gamma_s / ge);
  detail::MbCore::Accumulators wacc, racc;
  MemoryResult res;
  auto rec_leak = [&](double t, double o) {
    res.waveform_times_s.push_back(t);
    res.leak_waveform.push_back(o);
  };
  auto rec_out = [&](double t, double o) {
    res.waveform_times_s.push_back(t);
    res.output_waveform.push_back(o);
  };
  // piecewise integration lands exactly on the control discontinuities
  core.integrate(0.0, w_start, dt, ctrl_off, input, wacc, rec_leak);
  core.integrate(w_start, w_end, dt, ctrl_on, input, wacc, rec_leak);
  core.integrate(w_end, split, dt, ctrl_off, input, wacc, rec_leak);
  const double stored = core.spin_norm();
  if (dir == Direction::Backward) core.flip_spin_wave();
  core.integrate(split, r_start, dt, ctrl_off, input, racc, rec_out);
  core.integrate(r_start, r_end, dt, ctrl_on, input, racc, rec_out);
  core.integrate(r_end, tend, dt, ctrl_off, input, racc, rec_out);

  const double ein = wacc.in_energy + racc.in_energy;
  res.input_energy = ein;
  res.eta_storage = stored / ein;
  res.eta_total = racc.out_energy / ein;
  res.eta_retrieval = stored > 1e-12 ? res.eta_total / res.eta_storage : 0.0;
  res.leaked_fraction = wacc.out_energy / ein;
  res.decayed_fraction = (wacc.pol_decay + racc.pol_decay) / ein;
  res.spin_decayed_fraction = (wacc.spin_decay + racc.spin_decay) / ein;
  res.spin_remaining = core.spin_norm() / ein;
  res.control_rabi = om * ge;
  if (dir == Direction::Backward && medium.length_m > 0.0 &&
      std::sqrt(d) < 10.0 * medium.length_m * params.splitting_g1g2 /
                         kSpeedOfLight)
    res.warnings.push_back(
        "backward retrieval momentum mismatch: sqrt(d) < 10 L w_g1g2 / c");
  return res;
}

struct AtsSweepPoint {
  double f = 0.0;
  double eta_storage = 0.0;
  double eta_retrieval = 0.0;
  double eta_total = 0.0;
  double eta_model = 0.0; // closed-form curve at the same (d, F)
};

// One run_ats_memory per F value; results are ordered as given.
// jobs > 1 fans runs out across threads (declared in sweep.hpp; forward
// declaration here keeps this header self-contained for jobs = 1).
inline std::vector<AtsSweepPoint> sweep_ats_factor(
    const MediumParams& medium, const LambdaParams& params,
    const std::vector<double>& f_values, Direction dir,
    const AtsTuning& tuning = {}) {
  if (f_values.empty())
    throw std::invalid_argument("sweep_ats_factor: empty F list");
  for (std::size_t i = 0; i < f_values.size(); ++i) {
    if (!(f_values[i] > 0.0))
      throw std::invalid_argument("sweep_ats_factor: F values must be > 0");
    if (i > 0 && f_values[i] < f_values[i - 1])
      throw std::invalid_argument("sweep_ats_factor: F values must be sorted");
  }
  std::vector<AtsSweepPoint> out(f_values.size());
  for (std::size_t i = 0; i < f_values.size(); ++i) {
    const MemoryResult r =
        run_ats_memory(medium, params, f_values[i], 0.0, dir, tuning);
    out[i] = {f_values[i], r.eta_storage, r.eta_retrieval, r.eta_total,
              ats_efficiency_model(medium.optical_depth, f_values[i], dir)};
  }
  return out;
}

} // namespace lambdamem
