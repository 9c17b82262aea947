// Acceptance suite: one line per criterion, PASS/FAIL with measured values
// and runtime bounds. Returns the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lambdamem/cavity_memory.hpp"
#include "lambdamem/lambda_system.hpp"
#include "lambdamem/maxwell_bloch.hpp"
#include "lambdamem/spectroscopy.hpp"
#include "lambdamem/spectrum_io.hpp"
#include "lambdamem/synth.hpp"
#include "lambdamem/transduction.hpp"

namespace fs = std::filesystem;
using namespace lambdamem;

namespace {

int g_failures = 0;

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         t0)
        .count();
  }
};

void report(int criterion, bool pass, const std::string& detail,
            double elapsed, double budget) {
  const bool in_time = elapsed <= budget;
  const bool ok = pass && in_time;
  if (!ok) ++g_failures;
  std::printf("%s criterion %2d: %s [%.2f s / budget %.0f s]\n",
              ok ? "PASS" : "FAIL", criterion, detail.c_str(), elapsed,
              budget);
  std::fflush(stdout);
}

LambdaParams t_centre_params() {
  return LambdaParams(kTwoPi * 27e6, 0.0, kTwoPi * 2.25e9);
}

// ---------------------------------------------------------------------------

void criterion_1_beers_law() {
  Timer timer;
  LambdaParams lp = t_centre_params();
  const double ge = lp.gamma_e();
  bool pass = true;
  std::ostringstream detail;
  detail << "Beer's law transmission vs exp(-d):";
  for (double d : {0.009, 1.0, 5.0, 27.0}) {
    ControlSchedule none;
    Grid1D grid(256, 2048, 40.0 / ge);
    auto cw = [](double) { return std::complex<double>(1.0, 0.0); };
    FieldState fs = propagate(MediumParams(d), lp, none, cw, grid);
    const double t = std::norm(fs.at(fs.e, fs.times_s.size() - 1, 256));
    const double rel = std::abs(t - std::exp(-d)) / std::exp(-d);
    pass = pass && rel < 0.01;
    detail << " d=" << d << " err=" << format_double(rel);
  }
  report(1, pass, detail.str(), timer.seconds(), 10.0);
}

void criterion_2_ats_sweep() {
  Timer timer;
  LambdaParams lp = t_centre_params();
  MediumParams medium(27.0);
  std::vector<double> fvals;
  for (int i = 0; i < 19; ++i) fvals.push_back(1.0 + 0.5 * i);

  auto bwd = sweep_ats_factor(medium, lp, fvals, Direction::Backward);
  auto fwd = sweep_ats_factor(medium, lp, fvals, Direction::Forward);
  std::size_t ib = 0, iff = 0;
  for (std::size_t i = 0; i < fvals.size(); ++i) {
    if (bwd[i].eta_model > bwd[ib].eta_model) ib = i;
    if (fwd[i].eta_model > fwd[iff].eta_model) iff = i;
  }
  const bool pass_b = std::abs(bwd[ib].eta_model - 0.726) <= 0.03 &&
                      bwd[ib].f >= 3.0 && bwd[ib].f <= 5.0;
  const bool pass_f = std::abs(fwd[iff].eta_model - 0.469) <= 0.03 &&
                      fwd[iff].f >= 6.0 && fwd[iff].f <= 8.5;
  std::ostringstream detail;
  detail << "ATS d=27 curve maxima: backward " <<
      format_double(bwd[ib].eta_model) << " at F=" << bwd[ib].f
         << " (simulated " << format_double(bwd[ib].eta_total)
         << "), forward " << format_double(fwd[iff].eta_model) << " at F="
         << fwd[iff].f << " (simulated " << format_double(fwd[iff].eta_total)
         << "); targets 0.726+-0.03 near F=4, 0.469+-0.03 near F=7.25";
  report(2, pass_b && pass_f, detail.str(), timer.seconds(), 300.0);
}

void criterion_3_eit() {
  Timer timer;
  // The quoted ~71% optimized forward efficiency corresponds to the
  // amplitude-convention depth 27 used by the optimization literature,
  // i.e. intensity OD 54 in this solver's exp(-d) normalization.
  LambdaParams lp = t_centre_params();
  MediumParams medium(54.0);
  MemoryResult r = run_eit_memory(medium, lp,
                                  PulseSpec::gaussian_from_bandwidth(1e6, 0.0),
                                  0.0, Direction::Forward);
  const bool pass = std::abs(r.eta_total - 0.71) <= 0.05;
  std::ostringstream detail;
  detail << "EIT optimized forward total at amplitude-OD 27 (intensity OD "
            "54): eta="
         << format_double(r.eta_total) << ", target 0.71+-0.05";
  report(3, pass, detail.str(), timer.seconds(), 60.0);
}

void criterion_4_cavity_closed_forms() {
  Timer timer;
  bool pass = true;
  double worst = 0.0;
  for (double c : {0.1, 1.0, 10.0, 100.0}) {
    for (double trg : {0.1, 1.0, 10.0}) {
      const double gamma_e = 1.0;
      const double kappa = 100.0, n = 1000.0;
      const double g = std::sqrt(c * kappa * gamma_e / n);
      const double got = retrieval_efficiency_integral(
          [g](double) { return g; }, n, kappa, gamma_e, trg);
      const double want =
          c / (1.0 + c) * (1.0 - std::exp(-2.0 * (1.0 + c) * trg));
      const double rel = std::abs(got - want) / want;
      worst = std::max(worst, rel);
      pass = pass && rel < 1e-6;
    }
  }
  const double inf = std::numeric_limits<double>::infinity();
  const double asym = overall_efficiency(10.0, 1.0, inf, inf);
  pass = pass && std::abs(asym - 0.82645) <= 1e-5;
  std::ostringstream detail;
  detail << "retrieval quadrature vs closed form worst rel err "
         << format_double(worst) << " (12-point grid); overall_efficiency(10,"
         << "inf,inf)=" << format_double(asym) << " vs 0.82645+-1e-5";
  report(4, pass, detail.str(), timer.seconds(), 1.0);
}

void criterion_5_cavity_ode() {
  Timer timer;
  const double gamma_e = 1.0;
  const double kappa = 100.0, n = 1000.0;
  const double g = std::sqrt(10.0 * kappa * gamma_e / n);
  CavityParams p(kappa, g, n, gamma_e);
  const double t_s = 0.5, t_r = 0.5;
  SampledSignal in =
      SampledSignal::gaussian(0.0, t_s, 4001, 0.4 * t_s, 0.5 * t_s);
  TwoPassResult r =
      two_pass_optimal_memory(p, in, t_s, t_r, CavityMode::AdiabaticCavity);
  const double target = overall_efficiency(10.0, gamma_e, t_s, t_r);
  const bool pass = std::abs(r.eta_total - target) < 0.02;
  std::ostringstream detail;
  detail << "two-pass shaped memory at C=10: eta="
         << format_double(r.eta_total) << " vs closed form "
         << format_double(target) << " (|diff| "
         << format_double(std::abs(r.eta_total - target)) << " < 0.02)";
  report(5, pass, detail.str(), timer.seconds(), 30.0);
}

void criterion_6_transduction() {
  Timer timer;
  const double n_th = thermal_occupation(kTwoPi * 2.25e9, 0.02);
  const double eta = transduction_efficiency(10.0, 10.0, 1.0);
  const double n_sig = 0.1;
  const double t_tr = 2e-6;
  const FidelityReport dk = dark_count_model(n_th / t_tr, eta, t_tr, n_sig);
  const double snr_pre = n_sig / n_th;
  const double equiv = std::abs(dk.snr - snr_pre) / snr_pre;
  const bool pass = std::abs(n_th - 0.0045) <= 0.0002 &&
                    std::abs(eta - 0.8264) <= 1e-4 && equiv <= 1e-12;
  std::ostringstream detail;
  detail << "n_th(2pi x 2.25 GHz, 20 mK)=" << format_double(n_th)
         << " (0.0045+-0.0002); efficiency(10,10,1)=" << format_double(eta)
         << " (0.8264+-1e-4); dark-count SNR equivalence rel err "
         << format_double(equiv) << " (<=1e-12)";
  report(6, pass, detail.str(), timer.seconds(), 1.0);
}

void criterion_7_spectroscopy() {
  Timer timer;
  // area-preserving correction of the resolution-limited dip
  const double true_fwhm = 56e6;
  const double measured_fwhm = true_fwhm * 0.0093 / 0.0027;
  Spectrum dip =
      synth::transmission_dip(0.0, measured_fwhm, 0.0027, 4e9, 801);
  auto [peak, corrected] = correct_resolution_limited(dip, true_fwhm);
  bool pass = std::abs(peak - 0.0093) <= 0.0005;

  // concentration within a factor of 3, exact 1/eta_r scaling, round trip
  ConcentrationInput in;
  in.lifetime_s = 0.94e-6;
  in.eta_r = 1.0;
  in.eta_dw = 0.23;
  auto [d, alpha_peak] = transmission_to_od(peak, 0.5);
  (void)d;
  in.integrated_area_hz_invcm = alpha_peak * (kPi / 2.0) * true_fwhm;
  const double conc = concentration_from_absorption(in);
  const double ratio = conc / 8.2e10;
  pass = pass && ratio > 1.0 / 3.0 && ratio < 3.0;

  ConcentrationInput low = in;
  low.eta_r = 0.03;
  const double conc_low = concentration_from_absorption(low);
  pass = pass && std::abs(conc_low - conc / 0.03) / (conc / 0.03) < 1e-12;
  const double ratio_low = conc_low / 2.7e12;
  pass = pass && ratio_low > 1.0 / 3.0 && ratio_low < 3.0;

  // round trip to 1e-9 relative
  const double target = 5.5e11;
  ConcentrationInput rt = in;
  rt.integrated_area_hz_invcm =
      target * rt.wavelength_cm * rt.wavelength_cm /
      (rt.degeneracy_ratio * 8.0 * kPi * rt.refractive_index *
       rt.refractive_index * (rt.lifetime_s / (rt.eta_r * rt.eta_dw)));
  Spectrum alpha = synth::alpha_spectrum(0.0, true_fwhm,
                                         rt.integrated_area_hz_invcm, 4e9,
                                         801);
  LineFit f = fit_line(alpha, LineModel::Lorentzian);
  ConcentrationInput rt2 = rt;
  rt2.integrated_area_hz_invcm = f.component_area(0);
  const double rt_err =
      std::abs(concentration_from_absorption(rt2) - target) / target;
  pass = pass && rt_err < 1e-9;

  std::ostringstream detail;
  detail << "corrected peak " << format_double(100.0 * peak)
         << "% (0.93+-0.05); [c]/8.2e10=" << format_double(ratio)
         << ", [c]_{eta_R=0.03}/2.7e12=" << format_double(ratio_low)
         << " (both within x3); round-trip rel err " << format_double(rt_err)
         << " (<1e-9)";
  report(7, pass, detail.str(), timer.seconds(), 5.0);
}

void criterion_8_fit_monte_carlo() {
  Timer timer;
  // AT splitting: 100 noisy doublets
  double sum_split = 0.0;
  for (int seed = 0; seed < 100; ++seed) {
    Spectrum s = synth::at_doublet(0.0, 55e3, 25e3, 1.0, 400e3, 241);
    std::mt19937_64 rng(1000 + seed);
    synth::add_noise(s.values, 0.05, 1.0, rng);
    sum_split += fit_line(s, LineModel::SplitPeak).splitting();
  }
  const double mean_split = sum_split / 100.0;

  // CPT dips: widths and separation
  double sum_sep = 0.0, sum_w = 0.0;
  for (int seed = 0; seed < 100; ++seed) {
    Spectrum s = synth::cpt_profile(0.0, 500e3, 1.0, {-121e3, 121e3}, 16e3,
                                    0.45, 1.6e6, 1201);
    std::mt19937_64 rng(500 + seed);
    synth::add_noise(s.values, 0.03, 1.0, rng);
    LineFit f = fit_cpt(s, 2);
    sum_sep += f.splitting();
    sum_w += 0.5 * (f.fwhms[1] + f.fwhms[2]);
  }
  const double mean_sep = sum_sep / 100.0;
  const double mean_w = sum_w / 100.0;

  const bool pass = std::abs(mean_split - 55e3) <= 2e3 &&
                    std::abs(mean_w - 16e3) <= 2e3 &&
                    std::abs(mean_sep - 242e3) <= 5e3;
  std::ostringstream detail;
  detail << "100-seed recoveries: AT splitting "
         << format_double(mean_split / 1e3) << " kHz (55+-2), dip width "
         << format_double(mean_w / 1e3) << " kHz (16+-2), dip separation "
         << format_double(mean_sep / 1e3) << " kHz (242+-5)";
  report(8, pass, detail.str(), timer.seconds(), 60.0);
}

void criterion_9_determinism(const std::string& cli) {
  Timer timer;
  bool pass = true;
  std::ostringstream detail;
  if (cli.empty()) {
    pass = false;
    detail << "CLI path not provided";
  } else {
    auto dir1 = fs::temp_directory_path() / "lambdamem_acc_det1";
    auto dir2 = fs::temp_directory_path() / "lambdamem_acc_det2";
    fs::remove_all(dir1);
    fs::remove_all(dir2);
    auto slurp = [](const fs::path& p) {
      std::ifstream f(p, std::ios::binary);
      std::ostringstream ss;
      ss << f.rdbuf();
      return ss.str();
    };
    const std::string common =
        " --seed 42 >/dev/null 2>&1";
    for (const char* args :
         {"simulate ats --d 27 --f-min 2 --f-max 6 --steps 5",
          "simulate cavity --c-min 1 --c-max 20 --steps 8", "transduce",
          "synth at-corpus --count 3"}) {
      const std::string c1 = cli + " " + std::string(args) +
                             " --output " + dir1.string() + common;
      const std::string c2 = cli + " " + std::string(args) +
                             " --output " + dir2.string() + common;
      pass = pass && std::system(c1.c_str()) == 0 &&
             std::system(c2.c_str()) == 0;
    }
    for (const auto& entry : fs::directory_iterator(dir1)) {
      const auto other = dir2 / entry.path().filename();
      const bool same = fs::exists(other) &&
                        slurp(entry.path()) == slurp(other);
      pass = pass && same;
    }
    detail << "repeated CLI runs with identical config+seed produce "
              "byte-identical artifacts across ats/cavity/transduce/synth";
  }
  report(9, pass, detail.str(), timer.seconds(), 120.0);
}

void criterion_10_grid_convergence() {
  Timer timer;
  LambdaParams lp = t_centre_params();
  bool pass = true;
  std::ostringstream detail;
  detail << "halving dt and dz:";

  // ATS peaks from criterion 2
  {
    MediumParams medium(27.0);
    AtsTuning base, fine;
    fine.grid_scale = 0.5;
    fine.nz = 512;
    const struct {
      double f;
      Direction dir;
      const char* name;
    } cases[] = {{4.0, Direction::Backward, "ats-bwd-F4"},
                 {7.25, Direction::Forward, "ats-fwd-F7.25"}};
    for (const auto& c : cases) {
      const double e1 =
          run_ats_memory(medium, lp, c.f, 0.0, c.dir, base).eta_total;
      const double e2 =
          run_ats_memory(medium, lp, c.f, 0.0, c.dir, fine).eta_total;
      const double rel = std::abs(e2 - e1) / e1;
      pass = pass && rel < 0.005;
      detail << " " << c.name << " " << format_double(100.0 * rel) << "%";
    }
  }
  // EIT operating point, fixed control for a like-for-like comparison
  {
    MediumParams medium(54.0);
    EitTuning base, fine;
    base.refine = false;
    fine.refine = false;
    fine.grid_scale = 0.5;
    fine.nz = 512;
    PulseSpec pulse = PulseSpec::gaussian_from_bandwidth(1e6, 0.0);
    const double e1 =
        run_eit_memory(medium, lp, pulse, 0.0, Direction::Forward, base)
            .eta_total;
    const double e2 =
        run_eit_memory(medium, lp, pulse, 0.0, Direction::Forward, fine)
            .eta_total;
    const double rel = std::abs(e2 - e1) / e1;
    pass = pass && rel < 0.005;
    detail << " eit-d54 " << format_double(100.0 * rel) << "%";
  }
  detail << " (all < 0.5%)";
  report(10, pass, detail.str(), timer.seconds(), 300.0);
}

} // namespace

int main(int argc, char** argv) {
  std::string cli;
#ifdef LAMBDAMEM_CLI_PATH
  cli = LAMBDAMEM_CLI_PATH;
#endif
  if (argc > 1) cli = argv[1];

  criterion_1_beers_law();
  criterion_2_ats_sweep();
  criterion_3_eit();
  criterion_4_cavity_closed_forms();
  criterion_5_cavity_ode();
  criterion_6_transduction();
  criterion_7_spectroscopy();
  criterion_8_fit_monte_carlo();
  criterion_9_determinism(cli);
  criterion_10_grid_convergence();

  if (g_failures == 0)
    std::printf("acceptance: all criteria passed\n");
  else
    std::printf("acceptance: %d criterion(s) failed\n", g_failures);
  return g_failures;
}
