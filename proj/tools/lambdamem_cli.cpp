// lambdamem - command-line front end: memory simulations, transduction
// figures of merit, spectrum fitting, and synthetic data generation.
//
// Exit codes: 0 success, 2 configuration error, 3 solver failure,
// 4 fit non-convergence.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "lambdamem/cavity_memory.hpp"
#include "lambdamem/lambda_system.hpp"
#include "lambdamem/maxwell_bloch.hpp"
#include "lambdamem/spectroscopy.hpp"
#include "lambdamem/spectrum_io.hpp"
#include "lambdamem/svg.hpp"
#include "lambdamem/sweep.hpp"
#include "lambdamem/synth.hpp"
#include "lambdamem/transduction.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace lambdamem;

namespace {

struct GlobalOpts {
  std::string output = ".";
  std::string config_path;
  int jobs = default_jobs();
  unsigned long long seed = 12345;
  bool emit_plots = false;
};

struct SweepSpec {
  std::string param;
  std::vector<double> values;
};

// ---- small CSV table ---------------------------------------------------------

class ResultTable {
 public:
  explicit ResultTable(std::vector<std::string> columns)
      : columns_(std::move(columns)) {}

  void add_row(std::vector<std::string> cells) {
    if (cells.size() != columns_.size())
      throw std::logic_error("ResultTable: column count mismatch");
    rows_.push_back(std::move(cells));
  }

  std::string to_string(const std::vector<std::string>& comments) const {
    std::string out;
    for (const auto& c : comments) out += "# " + c + "\n";
    for (std::size_t i = 0; i < columns_.size(); ++i)
      out += columns_[i] + (i + 1 < columns_.size() ? "," : "\n");
    for (const auto& r : rows_) {
      for (std::size_t i = 0; i < r.size(); ++i)
        out += r[i] + (i + 1 < r.size() ? "," : "\n");
    }
    return out;
  }

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

std::string fmt(double v) { return format_double(v); }

void write_file(const fs::path& path, const std::string& body) {
  fs::create_directories(path.parent_path().empty() ? "."
                                                    : path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << body;
}

// resolved-config comment embedded in every artifact
std::string config_comment(const json& cfg) {
  return "config: " + cfg.dump();
}

// ---- config file handling ----------------------------------------------------

// Flags given on the command line win over config-file values: config
// entries are injected as tokens before the user's flags and every option
// takes the last occurrence.
struct ConfigInjection {
  std::vector<std::string> tokens;
  std::optional<SweepSpec> sweep;
};

ConfigInjection load_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw CLI::ValidationError("--config", "cannot open " + path);
  json cfg;
  try {
    f >> cfg;
  } catch (const json::exception& e) {
    throw CLI::ValidationError("--config",
                               std::string("bad JSON: ") + e.what());
  }
  if (!cfg.is_object())
    throw CLI::ValidationError("--config", "top level must be an object");
  ConfigInjection out;
  for (const auto& [key, value] : cfg.items()) {
    if (key == "sweep") {
      if (!value.is_object() || !value.contains("param") ||
          !value.contains("values"))
        throw CLI::ValidationError(
            "--config", "sweep must be {\"param\": ..., \"values\": [...]}");
      SweepSpec sw;
      sw.param = value["param"].get<std::string>();
      for (const auto& v : value["values"])
        sw.values.push_back(v.get<double>());
      out.sweep = std::move(sw);
      continue;
    }
    std::string token;
    if (value.is_boolean()) {
      if (value.get<bool>()) out.tokens.push_back("--" + key);
      continue;
    } else if (value.is_number()) {
      token = fmt(value.get<double>());
    } else if (value.is_string()) {
      token = value.get<std::string>();
    } else {
      throw CLI::ValidationError(
          "--config", "unsupported value type for key '" + key + "'");
    }
    out.tokens.push_back("--" + key);
    out.tokens.push_back(token);
  }
  return out;
}

// every config key must name an option of the invoked subcommand (or a
// global option)
void validate_config_keys(CLI::App& root, const CLI::App* leaf,
                          const ConfigInjection& inj) {
  for (std::size_t i = 0; i < inj.tokens.size(); ++i) {
    const std::string& t = inj.tokens[i];
    if (t.rfind("--", 0) != 0) continue;
    bool found = false;
    for (const CLI::App* a = leaf; a != nullptr && !found;
         a = a->get_parent())
      found = const_cast<CLI::App*>(a)->get_option_no_throw(t) != nullptr;
    found = found || root.get_option_no_throw(t) != nullptr;
    if (!found)
      throw CLI::ValidationError("--config",
                                 "unknown config key '" + t.substr(2) + "'");
  }
}

// ---- shared parameter blocks ----------------------------------------------------

struct MediumOpts {
  double d = 27.0;
  double length_m = 0.0;
  double gamma_over_2pi_hz = 27e6;
  double gamma_s = 0.0; // 1/s
  double splitting_over_2pi_hz = 2.25e9;

  LambdaParams lambda_params() const {
    return LambdaParams(kTwoPi * gamma_over_2pi_hz, gamma_s,
                        kTwoPi * splitting_over_2pi_hz);
  }
  MediumParams medium() const { return MediumParams(d, length_m); }
};

void add_medium_options(CLI::App* app, MediumOpts& m) {
  app->add_option("--d", m.d, "resonant intensity optical depth");
  app->add_option("--length", m.length_m, "medium length (m, metadata)");
  app->add_option("--gamma-over-2pi", m.gamma_over_2pi_hz,
                  "transition linewidth Gamma/2pi (Hz)");
  app->add_option("--gamma-s", m.gamma_s,
                  "spin-wave excitation decay rate (1/s)");
  app->add_option("--splitting-over-2pi", m.splitting_over_2pi_hz,
                  "ground-state splitting (Hz)");
}

Direction parse_direction(const std::string& s) {
  if (s == "forward") return Direction::Forward;
  if (s == "backward") return Direction::Backward;
  throw CLI::ValidationError("--direction", "must be forward or backward");
}

void check_sweep_param(const std::optional<SweepSpec>& sweep,
                       const std::vector<std::string>& allowed) {
  if (!sweep) return;
  for (const auto& a : allowed)
    if (sweep->param == a) {
      if (sweep->values.empty())
        throw CLI::ValidationError("--config", "sweep values list is empty");
      return;
    }
  throw CLI::ValidationError(
      "--config", "unknown sweep parameter '" + sweep->param + "'");
}

// ---- simulate eit ---------------------------------------------------------------

struct EitOpts {
  MediumOpts medium;
  double b_sig_hz = 1e6;
  double storage_time_s = 0.0;
  std::string direction = "forward";
  double t_ramp_frac = 0.25;
  bool no_refine = false;
  double grid_scale = 1.0;
  int nz = 256;
};

int run_eit_cmd(const GlobalOpts& g, const EitOpts& o,
                const std::optional<SweepSpec>& sweep) {
  check_sweep_param(sweep, {"d", "b-sig", "storage-time", "gamma-s"});
  json cfg = {{"command", "simulate eit"},
              {"d", o.medium.d},
              {"b_sig_hz", o.b_sig_hz},
              {"gamma_over_2pi_hz", o.medium.gamma_over_2pi_hz},
              {"gamma_s", o.medium.gamma_s},
              {"storage_time_s", o.storage_time_s},
              {"direction", o.direction},
              {"t_ramp_frac", o.t_ramp_frac},
              {"refine", !o.no_refine},
              {"grid_scale", o.grid_scale},
              {"nz", o.nz},
              {"jobs", g.jobs},
              {"seed", g.seed}};
  if (sweep)
    cfg["sweep"] = {{"param", sweep->param}, {"values", sweep->values}};

  const std::string param = sweep ? sweep->param : "d";
  const std::vector<double> values =
      sweep ? sweep->values : std::vector<double>{o.medium.d};

  ResultTable table({param, "eta_storage", "eta_retrieval", "eta_total",
                     "control_rabi_over_2pi_hz", "leaked_fraction",
                     "decayed_fraction", "warnings"});
  std::vector<MemoryResult> results(values.size());
  parallel_for_indexed(values.size(), g.jobs, [&](std::size_t i) {
    EitOpts local = o;
    if (param == "d") local.medium.d = values[i];
    else if (param == "b-sig") local.b_sig_hz = values[i];
    else if (param == "storage-time") local.storage_time_s = values[i];
    else if (param == "gamma-s") local.medium.gamma_s = values[i];
    EitTuning tuning;
    tuning.ramp_time_frac = local.t_ramp_frac;
    tuning.refine = !local.no_refine;
    tuning.grid_scale = local.grid_scale;
    tuning.nz = local.nz;
    results[i] = run_eit_memory(
        local.medium.medium(), local.medium.lambda_params(),
        PulseSpec::gaussian_from_bandwidth(local.b_sig_hz, 0.0),
        local.storage_time_s, parse_direction(local.direction), tuning);
  });

  std::vector<double> etas;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const MemoryResult& r = results[i];
    std::string warn;
    for (const auto& w : r.warnings) warn += (warn.empty() ? "" : "; ") + w;
    table.add_row({fmt(values[i]), fmt(r.eta_storage), fmt(r.eta_retrieval),
                   fmt(r.eta_total), fmt(r.control_rabi / kTwoPi),
                   fmt(r.leaked_fraction), fmt(r.decayed_fraction), warn});
    etas.push_back(r.eta_total);
  }
  write_file(fs::path(g.output) / "results.csv",
             table.to_string({config_comment(cfg)}));
  if (g.emit_plots && values.size() > 1) {
    SvgSeries s{"eta_total", values, etas, "#1f6fb2", false};
    write_file(fs::path(g.output) / "efficiency.svg",
               svg_line_chart("EIT memory efficiency", param, "efficiency",
                              {s}, config_comment(cfg)));
  }
  std::printf("eit: %zu run(s); eta_total(last) = %.6f\n", values.size(),
              etas.back());
  return 0;
}

// ---- simulate ats ---------------------------------------------------------------

struct AtsOpts {
  MediumOpts medium;
  double f = 4.0;
  double f_min = 0.0, f_max = 0.0;
  int steps = 0;
  double storage_time_s = 0.0;
  std::string direction = "backward";
  double read_area_turns = 1.0;
  double grid_scale = 1.0;
  int nz = 256;
};

int run_ats_cmd(const GlobalOpts& g, const AtsOpts& o,
                const std::optional<SweepSpec>& sweep) {
  check_sweep_param(sweep, {"f"});
  std::vector<double> fvals;
  if (sweep) {
    fvals = sweep->values;
  } else if (o.steps > 0) {
    if (!(o.f_max > o.f_min) || o.f_min <= 0.0)
      throw CLI::ValidationError("--f-min/--f-max",
                                 "need 0 < f-min < f-max with --steps");
    if (o.steps == 1) {
      fvals = {o.f_min};
    } else {
      for (int i = 0; i < o.steps; ++i)
        fvals.push_back(o.f_min + (o.f_max - o.f_min) * i / (o.steps - 1));
    }
  } else {
    fvals = {o.f};
  }
  if (fvals.empty())
    throw CLI::ValidationError("--config", "sweep values list is empty");

  json cfg = {{"command", "simulate ats"},
              {"d", o.medium.d},
              {"f_values", fvals},
              {"gamma_over_2pi_hz", o.medium.gamma_over_2pi_hz},
              {"storage_time_s", o.storage_time_s},
              {"direction", o.direction},
              {"read_area_turns", o.read_area_turns},
              {"grid_scale", o.grid_scale},
              {"nz", o.nz},
              {"jobs", g.jobs},
              {"seed", g.seed}};

  const Direction dir = parse_direction(o.direction);
  AtsTuning tuning;
  tuning.read_area_turns = o.read_area_turns;
  tuning.grid_scale = o.grid_scale;
  tuning.nz = o.nz;

  std::vector<MemoryResult> results(fvals.size());
  parallel_for_indexed(fvals.size(), g.jobs, [&](std::size_t i) {
    results[i] = run_ats_memory(o.medium.medium(), o.medium.lambda_params(),
                                fvals[i], o.storage_time_s, dir, tuning);
  });

  ResultTable table({"f", "eta_storage", "eta_retrieval", "eta_total",
                     "eta_model", "control_rabi_over_2pi_hz"});
  std::vector<double> sim, model;
  for (std::size_t i = 0; i < fvals.size(); ++i) {
    const MemoryResult& r = results[i];
    const double m = ats_efficiency_model(o.medium.d, fvals[i], dir);
    table.add_row({fmt(fvals[i]), fmt(r.eta_storage), fmt(r.eta_retrieval),
                   fmt(r.eta_total), fmt(m), fmt(r.control_rabi / kTwoPi)});
    sim.push_back(r.eta_total);
    model.push_back(m);
  }
  write_file(fs::path(g.output) / "results.csv",
             table.to_string({config_comment(cfg)}));
  if (g.emit_plots && fvals.size() > 1) {
    SvgSeries s1{"simulated", fvals, sim, "#1f6fb2", false};
    SvgSeries s2{"matched-filter model", fvals, model, "#b2451f", true};
    write_file(fs::path(g.output) / "efficiency.svg",
               svg_line_chart("ATS memory efficiency, d = " +
                                  fmt(o.medium.d) + " (" + o.direction + ")",
                              "ATS factor F", "efficiency", {s1, s2},
                              config_comment(cfg)));
  }
  std::size_t best = 0;
  for (std::size_t i = 0; i < model.size(); ++i)
    if (model[i] > model[best]) best = i;
  std::printf("ats: %zu run(s); model max eta = %.4f at F = %g\n",
              fvals.size(), model[best], fvals[best]);
  return 0;
}

// ---- simulate cavity -------------------------------------------------------------

struct CavityOpts {
  double c = 10.0;
  double c_min = 0.0, c_max = 0.0;
  int steps = 0;
  double gamma_e_over_2pi_hz = 13.5e6;
  double t_s = -1.0; // seconds; negative selects 1/(2 gamma_e)
  double t_r = -1.0;
  bool asymptotic = false;
  bool simulate = false;
  std::string mode = "adiabatic";
  double tau_frac = 0.4;
  double t0_frac = 0.5;
};

int run_cavity_cmd(const GlobalOpts& g, const CavityOpts& o,
                   const std::optional<SweepSpec>& sweep) {
  check_sweep_param(sweep, {"c"});
  std::vector<double> cvals;
  if (sweep) {
    cvals = sweep->values;
  } else if (o.steps > 0) {
    if (!(o.c_max > o.c_min) || o.c_min < 0.0)
      throw CLI::ValidationError("--c-min/--c-max",
                                 "need 0 <= c-min < c-max with --steps");
    for (int i = 0; i < o.steps; ++i)
      cvals.push_back(o.c_min +
                      (o.c_max - o.c_min) * i / std::max(1, o.steps - 1));
  } else {
    cvals = {o.c};
  }
  if (cvals.empty())
    throw CLI::ValidationError("--config", "sweep values list is empty");

  const double ge = kTwoPi * o.gamma_e_over_2pi_hz;
  const double t_s = o.t_s >= 0.0 ? o.t_s : 0.5 / ge;
  const double t_r = o.t_r >= 0.0 ? o.t_r : 0.5 / ge;
  if (o.mode != "full" && o.mode != "adiabatic")
    throw CLI::ValidationError("--mode", "must be full or adiabatic");
  const CavityMode mode = o.mode == "full" ? CavityMode::FullODE
                                           : CavityMode::AdiabaticCavity;

  json cfg = {{"command", "simulate cavity"},
              {"c_values", cvals},
              {"gamma_e_over_2pi_hz", o.gamma_e_over_2pi_hz},
              {"t_s", t_s},
              {"t_r", t_r},
              {"asymptotic", o.asymptotic},
              {"simulate", o.simulate},
              {"mode", o.mode},
              {"tau_frac", o.tau_frac},
              {"t0_frac", o.t0_frac},
              {"jobs", g.jobs},
              {"seed", g.seed}};

  ResultTable table({"c", "eta_asymptotic", "eta_closed_form",
                     "eta_simulated", "eta_storage", "eta_retrieval"});
  std::vector<double> asym(cvals.size()), closed(cvals.size()),
      simulated(cvals.size(), -1.0), stor(cvals.size(), -1.0),
      retr(cvals.size(), -1.0);
  parallel_for_indexed(cvals.size(), g.jobs, [&](std::size_t i) {
    const double c = cvals[i];
    asym[i] = c > 0.0 ? (c / (1.0 + c)) * (c / (1.0 + c)) : 0.0;
    closed[i] = overall_efficiency(c, ge, t_s, t_r);
    if (o.simulate && c > 0.0) {
      const double kappa = 100.0 * ge;
      const double n = 1000.0;
      const double gc = std::sqrt(c * kappa * ge / n);
      CavityParams p(kappa, gc, n, ge);
      SampledSignal in = SampledSignal::gaussian(
          0.0, t_s, 4001, o.tau_frac * t_s, o.t0_frac * t_s);
      TwoPassResult r = two_pass_optimal_memory(p, in, t_s, t_r, mode);
      simulated[i] = r.eta_total;
      stor[i] = r.eta_storage;
      retr[i] = r.eta_retrieval;
    }
  });
  for (std::size_t i = 0; i < cvals.size(); ++i)
    table.add_row({fmt(cvals[i]), fmt(asym[i]), fmt(closed[i]),
                   simulated[i] >= 0.0 ? fmt(simulated[i]) : "",
                   stor[i] >= 0.0 ? fmt(stor[i]) : "",
                   retr[i] >= 0.0 ? fmt(retr[i]) : ""});
  write_file(fs::path(g.output) / "results.csv",
             table.to_string({config_comment(cfg)}));
  if (g.emit_plots && cvals.size() > 1) {
    SvgSeries s1{"finite windows", cvals, closed, "#1f6fb2", false};
    SvgSeries s2{"asymptotic", cvals, asym, "#b2451f", true};
    std::vector<SvgSeries> series{s1, s2};
    if (o.simulate) {
      std::vector<double> xs, ys;
      for (std::size_t i = 0; i < cvals.size(); ++i)
        if (simulated[i] >= 0.0) {
          xs.push_back(cvals[i]);
          ys.push_back(simulated[i]);
        }
      series.push_back({"simulated", xs, ys, "#2f8f2f", false});
    }
    write_file(fs::path(g.output) / "efficiency.svg",
               svg_line_chart("Cavity memory efficiency vs cooperativity",
                              "cooperativity C", "efficiency", series,
                              config_comment(cfg)));
  }
  const double headline = o.asymptotic ? asym.back() : closed.back();
  std::printf("cavity: %zu run(s); eta%s = %.6f\n", cvals.size(),
              o.asymptotic ? " (asymptotic)" : "", headline);
  return 0;
}

// ---- transduce ---------------------------------------------------------------------

struct TransduceOpts {
  double c_s = 10.0, c_r = 10.0, eta_m = 1.0;
  double temperature_k = 0.02;
  double mw_frequency_over_2pi_hz = 2.25e9;
  double kappa_s_over_2pi_hz = 1e8;
  double gamma_es_over_2pi_hz = 1e5;
  double b_sig_hz = 1e6;
  double t_s = 1e-6, t_r = 1e-6;
  double rate_thermal = -1.0; // 1/s; negative selects n_th kappa_s/(2 pi)
  std::string scheme = "nuclear-with-transfer";
};

int run_transduce_cmd(const GlobalOpts& g, const TransduceOpts& o,
                      const std::optional<SweepSpec>& sweep) {
  check_sweep_param(sweep, {"c-s", "c-r", "eta-m", "temperature", "b-sig"});
  if (o.scheme != "nuclear-with-transfer" && o.scheme != "electron-lambda" &&
      o.scheme != "resolved-hyperfine")
    throw CLI::ValidationError("--scheme",
                               "must be nuclear-with-transfer, "
                               "electron-lambda or resolved-hyperfine");

  const std::string param = sweep ? sweep->param : "c-s";
  const std::vector<double> values =
      sweep ? sweep->values : std::vector<double>{o.c_s};

  json cfg = {{"command", "transduce"},
              {"c_s", o.c_s},
              {"c_r", o.c_r},
              {"eta_m", o.eta_m},
              {"temperature_k", o.temperature_k},
              {"mw_frequency_over_2pi_hz", o.mw_frequency_over_2pi_hz},
              {"kappa_s_over_2pi_hz", o.kappa_s_over_2pi_hz},
              {"gamma_es_over_2pi_hz", o.gamma_es_over_2pi_hz},
              {"b_sig_hz", o.b_sig_hz},
              {"t_s", o.t_s},
              {"t_r", o.t_r},
              {"scheme", o.scheme},
              {"jobs", g.jobs},
              {"seed", g.seed}};
  if (sweep)
    cfg["sweep"] = {{"param", sweep->param}, {"values", sweep->values}};

  ResultTable table({param, "efficiency", "n_th", "n_sig", "snr", "fidelity",
                     "fidelity_approx", "dark_count_rate", "mean_dark_counts",
                     "snr_post"});
  json last_report;
  for (double v : values) {
    TransduceOpts lo = o;
    if (param == "c-s") lo.c_s = v;
    else if (param == "c-r") lo.c_r = v;
    else if (param == "eta-m") lo.eta_m = v;
    else if (param == "temperature") lo.temperature_k = v;
    else if (param == "b-sig") lo.b_sig_hz = v;

    TransducerConfig tc;
    tc.c_s = lo.c_s;
    tc.c_r = lo.c_r;
    tc.eta_m = lo.eta_m;
    tc.temperature_k = lo.temperature_k;
    tc.omega_mw = kTwoPi * lo.mw_frequency_over_2pi_hz;
    tc.kappa_s = kTwoPi * lo.kappa_s_over_2pi_hz;
    tc.gamma_es = kTwoPi * lo.gamma_es_over_2pi_hz;
    tc.b_sig_hz = lo.b_sig_hz;
    tc.t_s = lo.t_s;
    tc.t_r = lo.t_r;
    tc.validate();

    const double n_th = thermal_occupation(tc.omega_mw, tc.temperature_k);
    const double eta = transduction_efficiency(tc.c_s, tc.c_r, tc.eta_m);
    const double n_sig = signal_occupation(tc.b_sig_hz, tc.kappa_s);
    const double snr = n_th > 0.0
                           ? n_sig / n_th
                           : std::numeric_limits<double>::infinity();
    const double fid = n_th > 0.0 ? fidelity_from_snr(snr) : 1.0;
    const double fid_approx = n_th > 0.0 && n_sig > 0.0
                                  ? 1.0 - n_th / n_sig
                                  : 1.0;
    const double rate = lo.rate_thermal >= 0.0
                            ? lo.rate_thermal
                            : default_thermal_rate(n_th, tc.kappa_s);
    const double t_tr = tc.t_s + tc.t_r;
    const FidelityReport dk = dark_count_model(rate, eta, t_tr, n_sig);

    table.add_row({fmt(v), fmt(eta), fmt(n_th), fmt(n_sig), fmt(snr),
                   fmt(fid), fmt(fid_approx), fmt(dk.dark_count_rate),
                   fmt(dk.mean_dark_counts), fmt(dk.snr)});
    last_report = {{"efficiency", eta},
                   {"n_th", n_th},
                   {"n_sig", n_sig},
                   {"snr", snr},
                   {"fidelity", fid},
                   {"fidelity_approx", fid_approx},
                   {"dark_count_rate", dk.dark_count_rate},
                   {"mean_dark_counts", dk.mean_dark_counts},
                   {"snr_post", dk.snr},
                   {"fidelity_post", dk.fidelity},
                   {"t_tr", t_tr},
                   {"thermal_rate", rate}};
  }
  write_file(fs::path(g.output) / "results.csv",
             table.to_string({config_comment(cfg)}));
  json report = {{"config", cfg}, {"report", last_report}};
  write_file(fs::path(g.output) / "report.json", report.dump(2) + "\n");
  std::printf("transduce: efficiency = %.6f, n_th = %.6f, fidelity = %.6f\n",
              last_report["efficiency"].get<double>(),
              last_report["n_th"].get<double>(),
              last_report["fidelity"].get<double>());
  return 0;
}

// ---- fit commands ---------------------------------------------------------------

LineModel parse_model(const std::string& s) {
  if (s == "lorentzian") return LineModel::Lorentzian;
  if (s == "gaussian") return LineModel::Gaussian;
  if (s == "pseudovoigt") return LineModel::PseudoVoigt;
  if (s == "splitpeak") return LineModel::SplitPeak;
  throw CLI::ValidationError("--model",
                             "must be lorentzian, gaussian, pseudovoigt or "
                             "splitpeak");
}

const char* model_name(LineModel m) {
  switch (m) {
    case LineModel::Lorentzian: return "lorentzian";
    case LineModel::Gaussian: return "gaussian";
    case LineModel::PseudoVoigt: return "pseudovoigt";
    case LineModel::SplitPeak: return "splitpeak";
    case LineModel::PeakWithDips: return "peakwithdips";
  }
  return "?";
}

json fit_to_json(const LineFit& f) {
  json j = {{"model", model_name(f.model)},
            {"centers", f.centers},
            {"fwhms", f.fwhms},
            {"amplitudes", f.amplitudes},
            {"baseline", {f.baseline0, f.baseline1}},
            {"residual_rms", f.residual_rms},
            {"iterations", f.iterations},
            {"covariance_diag", f.covariance_diag},
            {"degenerate", f.degenerate}};
  if (f.model == LineModel::PseudoVoigt) j["mixing"] = f.mixing;
  if (f.centers.size() >= 2) j["splitting"] = f.splitting();
  return j;
}

int run_fit_line_cmd(const GlobalOpts& g, const std::string& input,
                     const std::string& model_s, int dips) {
  const LineModel model =
      dips > 0 ? LineModel::PeakWithDips : parse_model(model_s);
  Spectrum s = read_spectrum_csv(input);
  LineFit f = dips > 0 ? fit_cpt(s, dips) : fit_line(s, model);
  json cfg = {{"command", dips > 0 ? "fit cpt" : "fit line"},
              {"input", input},
              {"model", model_name(model)},
              {"dips", dips},
              {"seed", g.seed}};
  json out = {{"config", cfg},
              {"provenance",
               {{"input_hash", file_hash_hex(input)},
                {"model", model_name(model)},
                {"iterations", f.iterations}}},
              {"fit", fit_to_json(f)}};
  write_file(fs::path(g.output) / "fit.json", out.dump(2) + "\n");
  std::printf("fit: center = %s, fwhm = %s, rms = %s\n",
              fmt(f.centers[0]).c_str(), fmt(f.fwhms[0]).c_str(),
              fmt(f.residual_rms).c_str());
  if (f.centers.size() >= 2)
    std::printf("fit: splitting = %s\n", fmt(f.splitting()).c_str());
  return 0;
}

int run_fit_split_corpus(const GlobalOpts& g, const std::string& manifest) {
  std::ifstream mf(manifest);
  if (!mf) throw FormatError("cannot open corpus manifest: " + manifest);
  json m;
  try {
    mf >> m;
  } catch (const json::exception& e) {
    throw FormatError(std::string("corpus manifest: bad JSON: ") + e.what());
  }
  if (!m.contains("files") || !m["files"].is_array() || m["files"].empty())
    throw FormatError("corpus manifest needs a non-empty files array");
  const fs::path base = fs::path(manifest).parent_path();

  std::vector<std::string> paths;
  std::vector<double> omegas;
  for (const auto& e : m["files"]) {
    paths.push_back((base / e["path"].get<std::string>()).string());
    omegas.push_back(e["omega_hz"].get<double>());
  }
  std::vector<LineFit> fits(paths.size());
  parallel_for_indexed(paths.size(), g.jobs, [&](std::size_t i) {
    Spectrum s = read_spectrum_csv(paths[i]);
    fits[i] = fit_line(s, LineModel::SplitPeak);
  });

  json cfg = {{"command", "fit split --corpus"},
              {"corpus", manifest},
              {"jobs", g.jobs},
              {"seed", g.seed}};
  ResultTable table({"omega_hz", "splitting_hz", "fwhm1_hz", "fwhm2_hz",
                     "residual_rms"});
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < fits.size(); ++i) {
    table.add_row({fmt(omegas[i]), fmt(fits[i].splitting()),
                   fmt(fits[i].fwhms[0]), fmt(fits[i].fwhms[1]),
                   fmt(fits[i].residual_rms)});
    sx += omegas[i];
    sy += fits[i].splitting();
    sxx += omegas[i] * omegas[i];
    sxy += omegas[i] * fits[i].splitting();
  }
  const double n = (double)fits.size();
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  write_file(fs::path(g.output) / "splittings.csv",
             table.to_string(
                 {config_comment(cfg), "slope_vs_omega: " + fmt(slope)}));
  std::printf("fit split corpus: %zu files, slope = %.4f\n", fits.size(),
              slope);
  return 0;
}

struct ConcentrationOpts {
  std::string input;
  double lifetime_s = 0.94e-6;
  double eta_r = 1.0;
  double eta_dw = 0.23;
  double g_ratio = 2.0;
  double refractive_index = 3.45;
  double wavelength_nm = 1326.0;
};

int run_fit_concentration(const GlobalOpts& g, const ConcentrationOpts& o) {
  Spectrum s = read_spectrum_csv(o.input).in_hz();
  if (s.value_unit != ValueUnit::AlphaInvCm)
    throw FormatError("fit concentration: input must carry value_alpha_invcm");
  LineFit f = fit_line(s, LineModel::Lorentzian);
  ConcentrationInput in;
  in.integrated_area_hz_invcm = f.component_area(0);
  in.lifetime_s = o.lifetime_s;
  in.eta_r = o.eta_r;
  in.eta_dw = o.eta_dw;
  in.degeneracy_ratio = o.g_ratio;
  in.refractive_index = o.refractive_index;
  in.wavelength_cm = o.wavelength_nm * 1e-7;
  const double conc = concentration_from_absorption(in);

  json cfg = {{"command", "fit concentration"}, {"input", o.input},
              {"lifetime_s", o.lifetime_s},     {"eta_r", o.eta_r},
              {"eta_dw", o.eta_dw},             {"g_ratio", o.g_ratio},
              {"refractive_index", o.refractive_index},
              {"wavelength_nm", o.wavelength_nm}};
  json out = {{"config", cfg},
              {"provenance",
               {{"input_hash", file_hash_hex(o.input)},
                {"model", "lorentzian"},
                {"iterations", f.iterations}}},
              {"fit", fit_to_json(f)},
              {"integrated_area_hz_invcm", in.integrated_area_hz_invcm},
              {"concentration_invcm3", conc}};
  write_file(fs::path(g.output) / "fit.json", out.dump(2) + "\n");
  std::printf("concentration = %.4g cm^-3 (area %.4g Hz/cm)\n", conc,
              in.integrated_area_hz_invcm);
  return 0;
}

struct OdOpts {
  std::string input;
  double true_fwhm_hz = 56e6;
  double length_cm = 0.5;
  double finesse = 0.0;
};

int run_fit_od(const GlobalOpts& g, const OdOpts& o) {
  Spectrum s = read_spectrum_csv(o.input);
  if (s.value_unit != ValueUnit::Transmission)
    throw FormatError("fit od: input must carry value_transmission");
  auto [peak, corrected] = correct_resolution_limited(s, o.true_fwhm_hz);
  auto [d, alpha] = transmission_to_od(peak, o.length_cm);

  json cfg = {{"command", "fit od"},
              {"input", o.input},
              {"true_fwhm_hz", o.true_fwhm_hz},
              {"length_cm", o.length_cm},
              {"finesse", o.finesse}};
  json out = {{"config", cfg},
              {"provenance", {{"input_hash", file_hash_hex(o.input)}}},
              {"corrected_peak_absorption", peak},
              {"optical_depth", d},
              {"alpha_invcm", alpha}};
  if (o.finesse >= 1.0)
    out["cavity_enhanced_od"] = cavity_enhanced_od(d, o.finesse);
  write_file(fs::path(g.output) / "od.json", out.dump(2) + "\n");
  write_spectrum_csv((fs::path(g.output) / "corrected.csv").string(),
                     corrected, {config_comment(cfg)});
  std::printf("corrected peak = %.4f%%, d = %.5f, alpha = %.5f /cm\n",
              100.0 * peak, d, alpha);
  return 0;
}

// ---- synth -----------------------------------------------------------------------

int run_synth_at_corpus(const GlobalOpts& g, int count, double omega_min_hz,
                        double omega_step_hz, double fwhm_hz, double noise) {
  if (count < 2)
    throw CLI::ValidationError("--count", "need at least two spectra");
  json manifest;
  manifest["seed"] = g.seed;
  manifest["files"] = json::array();
  const double span = 6.0 * (omega_min_hz + count * omega_step_hz);
  for (int i = 0; i < count; ++i) {
    const double omega = omega_min_hz + i * omega_step_hz;
    Spectrum s = synth::at_doublet(0.0, omega, fwhm_hz, 1.0, span, 301);
    std::mt19937_64 rng(g.seed + (unsigned long long)i);
    synth::add_noise(s.values, noise, 1.0, rng);
    char name[64];
    std::snprintf(name, sizeof(name), "at_%02d.csv", i);
    json cfg = {{"command", "synth at-corpus"},
                {"omega_hz", omega},
                {"fwhm_hz", fwhm_hz},
                {"noise", noise},
                {"seed", g.seed + (unsigned long long)i}};
    write_spectrum_csv((fs::path(g.output) / name).string(), s,
                       {config_comment(cfg)});
    manifest["files"].push_back({{"path", name}, {"omega_hz", omega}});
  }
  write_file(fs::path(g.output) / "at_corpus.json", manifest.dump(2) + "\n");
  std::printf("synth: wrote %d doublet spectra + manifest\n", count);
  return 0;
}

int run_synth_cpt(const GlobalOpts& g, double noise) {
  Spectrum s = synth::cpt_profile(0.0, 500e3, 1.0, {-121e3, 121e3}, 16e3,
                                  0.45, 1.6e6, 1201);
  std::mt19937_64 rng(g.seed);
  synth::add_noise(s.values, noise, 1.0, rng);
  json cfg = {{"command", "synth cpt"}, {"noise", noise}, {"seed", g.seed}};
  write_spectrum_csv((fs::path(g.output) / "cpt_example.csv").string(), s,
                     {config_comment(cfg)});
  std::printf("synth: wrote cpt_example.csv\n");
  return 0;
}

int run_synth_absorption(const GlobalOpts& g) {
  // resolution-limited dip whose area matches a 0.93% peak at 56 MHz
  const double true_fwhm = 56e6, true_peak = 0.0093;
  const double measured_peak = 0.0027;
  const double measured_fwhm = true_fwhm * true_peak / measured_peak;
  Spectrum dip = synth::transmission_dip(0.0, measured_fwhm, measured_peak,
                                         4e9, 801);
  json cfg = {{"command", "synth absorption"}, {"seed", g.seed}};
  write_spectrum_csv((fs::path(g.output) / "absorption_dip.csv").string(),
                     dip, {config_comment(cfg)});

  // matching absorption-coefficient spectrum over a 0.5 cm sample
  const double alpha_peak = -std::log1p(-true_peak) / 0.5;
  Spectrum alpha = synth::alpha_spectrum(
      0.0, true_fwhm, alpha_peak * (kPi / 2.0) * true_fwhm, 4e9, 801);
  write_spectrum_csv((fs::path(g.output) / "alpha_spectrum.csv").string(),
                     alpha, {config_comment(cfg)});
  std::printf("synth: wrote absorption_dip.csv and alpha_spectrum.csv\n");
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"lambdamem: three-level ensemble memory and transduction "
               "toolkit"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--output", g.output, "output directory for artifacts");
  app.add_option("--config", g.config_path,
                 "JSON config file; command-line flags win");
  app.add_option("--jobs", g.jobs,
                 "worker threads for sweeps (default: LAMBDAMEM_JOBS or "
                 "hardware concurrency)");
  app.add_option("--seed", g.seed, "seed for synthetic data generation");
  app.add_flag("--emit-plots", g.emit_plots, "write SVG charts for sweeps");

  auto* simulate = app.add_subcommand("simulate", "memory simulations");
  simulate->require_subcommand(1);

  EitOpts eit;
  auto* eit_cmd = simulate->add_subcommand("eit", "EIT storage and retrieval");
  add_medium_options(eit_cmd, eit.medium);
  eit_cmd->add_option("--b-sig", eit.b_sig_hz, "signal bandwidth FWHM (Hz)");
  eit_cmd->add_option("--storage-time", eit.storage_time_s,
                      "hold time between write and read (s)");
  eit_cmd->add_option("--direction", eit.direction, "forward | backward");
  eit_cmd->add_option("--t-ramp-frac", eit.t_ramp_frac,
                      "control ramp time as a fraction of the signal FWHM");
  eit_cmd->add_flag("--no-refine", eit.no_refine,
                    "skip the golden-section control refinement");
  eit_cmd->add_option("--grid-scale", eit.grid_scale,
                      "time-step scale (<1 refines)");
  eit_cmd->add_option("--nz", eit.nz, "spatial cells");

  AtsOpts ats;
  auto* ats_cmd = simulate->add_subcommand("ats", "ATS storage and retrieval");
  add_medium_options(ats_cmd, ats.medium);
  ats_cmd->add_option("--f", ats.f, "ATS factor F = Omega/Gamma");
  ats_cmd->add_option("--f-min", ats.f_min, "sweep start");
  ats_cmd->add_option("--f-max", ats.f_max, "sweep end");
  ats_cmd->add_option("--steps", ats.steps, "sweep point count");
  ats_cmd->add_option("--storage-time", ats.storage_time_s,
                      "hold time between write and read (s)");
  ats_cmd->add_option("--direction", ats.direction, "forward | backward");
  ats_cmd->add_option("--read-area-turns", ats.read_area_turns,
                      "read pulse area in units of 2 pi");
  ats_cmd->add_option("--grid-scale", ats.grid_scale,
                      "time-step scale (<1 refines)");
  ats_cmd->add_option("--nz", ats.nz, "spatial cells");

  CavityOpts cav;
  auto* cav_cmd = simulate->add_subcommand("cavity", "cavity-assisted memory");
  cav_cmd->add_option("--c", cav.c, "cooperativity");
  cav_cmd->add_option("--c-min", cav.c_min, "sweep start");
  cav_cmd->add_option("--c-max", cav.c_max, "sweep end");
  cav_cmd->add_option("--steps", cav.steps, "sweep point count");
  cav_cmd->add_option("--gamma-e-over-2pi", cav.gamma_e_over_2pi_hz,
                      "polarization decoherence gamma_e/2pi (Hz)");
  cav_cmd->add_option("--t-s", cav.t_s,
                      "storage window (s); negative = 1/(2 gamma_e)");
  cav_cmd->add_option("--t-r", cav.t_r,
                      "retrieval window (s); negative = 1/(2 gamma_e)");
  cav_cmd->add_flag("--asymptotic", cav.asymptotic,
                    "report the infinite-window efficiency C^2/(1+C)^2");
  cav_cmd->add_flag("--simulate", cav.simulate,
                    "run the two-pass shaped ODE memory");
  cav_cmd->add_option("--mode", cav.mode, "adiabatic | full");
  cav_cmd->add_option("--tau-frac", cav.tau_frac,
                      "input pulse FWHM as a fraction of t_s");
  cav_cmd->add_option("--t0-frac", cav.t0_frac,
                      "input pulse center as a fraction of t_s");

  TransduceOpts td;
  auto* td_cmd = app.add_subcommand("transduce",
                                    "microwave-to-optical figures of merit");
  td_cmd->add_option("--c-s", td.c_s, "microwave-side cooperativity");
  td_cmd->add_option("--c-r", td.c_r, "optical-side cooperativity");
  td_cmd->add_option("--eta-m", td.eta_m, "mode-mismatch factor in [0,1]");
  td_cmd->add_option("--temperature", td.temperature_k,
                     "bath temperature (K)");
  td_cmd->add_option("--mw-frequency-over-2pi", td.mw_frequency_over_2pi_hz,
                     "microwave transition frequency (Hz)");
  td_cmd->add_option("--kappa-s-over-2pi", td.kappa_s_over_2pi_hz,
                     "microwave cavity decay kappa_s/2pi (Hz)");
  td_cmd->add_option("--gamma-es-over-2pi", td.gamma_es_over_2pi_hz,
                     "microwave-leg polarization decoherence /2pi (Hz)");
  td_cmd->add_option("--b-sig", td.b_sig_hz, "signal bandwidth FWHM (Hz)");
  td_cmd->add_option("--t-s", td.t_s, "storage time (s)");
  td_cmd->add_option("--t-r", td.t_r, "retrieval time (s)");
  td_cmd->add_option("--rate-thermal", td.rate_thermal,
                     "thermal photon rate (1/s); negative = derived default");
  td_cmd->add_option("--scheme", td.scheme,
                     "nuclear-with-transfer | electron-lambda | "
                     "resolved-hyperfine");

  auto* fit_cmd = app.add_subcommand("fit", "spectrum fitting and reduction");
  fit_cmd->require_subcommand(1);
  std::string fit_input, fit_model = "lorentzian", corpus_path;
  int cpt_dips = 2;
  auto* fl = fit_cmd->add_subcommand("line", "single-line fit");
  fl->add_option("--input", fit_input, "spectrum CSV path")->required();
  fl->add_option("--model", fit_model,
                 "lorentzian | gaussian | pseudovoigt | splitpeak");
  auto* fc = fit_cmd->add_subcommand("cpt", "peak-with-dips fit");
  fc->add_option("--input", fit_input, "spectrum CSV path")->required();
  fc->add_option("--dips", cpt_dips, "number of dips");
  auto* fsp = fit_cmd->add_subcommand("split", "split-peak fit");
  fsp->add_option("--input", fit_input, "spectrum CSV path");
  fsp->add_option("--corpus", corpus_path,
                  "corpus manifest JSON (fits every file)");
  ConcentrationOpts conc;
  auto* fconc = fit_cmd->add_subcommand(
      "concentration",
      "centre concentration from an absorption-coefficient spectrum");
  fconc->add_option("--input", conc.input, "alpha spectrum CSV")->required();
  fconc->add_option("--lifetime", conc.lifetime_s,
                    "excited-state lifetime (s)");
  fconc->add_option("--eta-r", conc.eta_r, "radiative efficiency (0,1]");
  fconc->add_option("--eta-dw", conc.eta_dw, "zero-phonon fraction (0,1]");
  fconc->add_option("--g-ratio", conc.g_ratio, "degeneracy ratio g1/g2");
  fconc->add_option("--index", conc.refractive_index, "refractive index");
  fconc->add_option("--wavelength-nm", conc.wavelength_nm, "wavelength (nm)");
  OdOpts od;
  auto* fod = fit_cmd->add_subcommand(
      "od", "optical depth from a resolution-limited transmission dip");
  fod->add_option("--input", od.input, "transmission CSV")->required();
  fod->add_option("--true-fwhm", od.true_fwhm_hz, "true linewidth FWHM (Hz)");
  fod->add_option("--length-cm", od.length_cm, "sample length (cm)");
  fod->add_option("--finesse", od.finesse,
                  "optional resonator finesse for the enhanced OD");

  auto* synth_cmd = app.add_subcommand("synth", "synthetic example spectra");
  synth_cmd->require_subcommand(1);
  int at_count = 6;
  double at_omega_min = 45e3, at_omega_step = 15e3, at_fwhm = 25e3,
         at_noise = 0.01, cpt_noise = 0.03;
  auto* sat = synth_cmd->add_subcommand("at-corpus",
                                        "doublet corpus + manifest");
  sat->add_option("--count", at_count, "number of spectra");
  sat->add_option("--omega-min", at_omega_min, "smallest splitting (Hz)");
  sat->add_option("--omega-step", at_omega_step, "splitting increment (Hz)");
  sat->add_option("--fwhm", at_fwhm, "component linewidth (Hz)");
  sat->add_option("--noise", at_noise, "noise sigma relative to peak");
  auto* scpt = synth_cmd->add_subcommand("cpt", "peak-with-dips example");
  scpt->add_option("--noise", cpt_noise, "noise sigma relative to peak");
  auto* sabs = synth_cmd->add_subcommand(
      "absorption", "resolution-limited dip + alpha spectrum");
  (void)sabs;

  // global options may appear after the subcommand
  std::vector<CLI::App*> stack{&app};
  while (!stack.empty()) {
    CLI::App* a = stack.back();
    stack.pop_back();
    a->fallthrough(true);
    for (CLI::App* s : a->get_subcommands({})) stack.push_back(s);
  }

  // parse: config file tokens first, user flags win
  std::vector<std::string> args(argv + 1, argv + argc);
  std::optional<SweepSpec> sweep;
  try {
    std::string cfg_path;
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (args[i] == "--config" && i + 1 < args.size()) cfg_path = args[i + 1];
      else if (args[i].rfind("--config=", 0) == 0)
        cfg_path = args[i].substr(9);
    }
    ConfigInjection inj;
    if (!cfg_path.empty()) inj = load_config_file(cfg_path);
    std::vector<std::string> final_args;
    std::size_t i = 0;
    while (i < args.size() && !args[i].empty() && args[i][0] != '-') {
      final_args.push_back(args[i]);
      ++i;
    }
    final_args.insert(final_args.end(), inj.tokens.begin(), inj.tokens.end());
    final_args.insert(final_args.end(), args.begin() + i, args.end());

    std::vector<const char*> cargv;
    cargv.push_back(argv[0]);
    for (const auto& a : final_args) cargv.push_back(a.c_str());
    app.parse((int)cargv.size(), cargv.data());

    const CLI::App* leaf = &app;
    while (!leaf->get_subcommands().empty())
      leaf = leaf->get_subcommands().front();
    if (!cfg_path.empty()) validate_config_keys(app, leaf, inj);
    sweep = inj.sweep;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    fs::create_directories(g.output);
    if (eit_cmd->parsed()) return run_eit_cmd(g, eit, sweep);
    if (ats_cmd->parsed()) return run_ats_cmd(g, ats, sweep);
    if (cav_cmd->parsed()) return run_cavity_cmd(g, cav, sweep);
    if (td_cmd->parsed()) return run_transduce_cmd(g, td, sweep);
    if (fl->parsed()) return run_fit_line_cmd(g, fit_input, fit_model, 0);
    if (fc->parsed()) return run_fit_line_cmd(g, fit_input, "", cpt_dips);
    if (fsp->parsed()) {
      if (!corpus_path.empty()) return run_fit_split_corpus(g, corpus_path);
      if (fit_input.empty())
        throw CLI::ValidationError("--input", "need --input or --corpus");
      return run_fit_line_cmd(g, fit_input, "splitpeak", 0);
    }
    if (fconc->parsed()) return run_fit_concentration(g, conc);
    if (fod->parsed()) return run_fit_od(g, od);
    if (sat->parsed())
      return run_synth_at_corpus(g, at_count, at_omega_min, at_omega_step,
                                 at_fwhm, at_noise);
    if (scpt->parsed()) return run_synth_cpt(g, cpt_noise);
    if (sabs->parsed()) return run_synth_absorption(g);
    std::fprintf(stderr, "no command selected\n");
    return 2;
  } catch (const CLI::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const FitError& e) {
    std::fprintf(stderr, "fit error: %s\n", e.what());
    return 4;
  } catch (const FormatError& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "invalid parameter: %s\n", e.what());
    return 2;
  } catch (const SolverError& e) {
    std::fprintf(stderr, "solver error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
