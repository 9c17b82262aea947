// fit.hpp - damped least-squares fitting of spectral lineshapes with
// analytic Jacobians. Deterministic: no randomness, bounded iterations,
// convergence at relative step < 1e-10.

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace lambdamem {

enum class LineModel { Lorentzian, Gaussian, PseudoVoigt, SplitPeak,
                       PeakWithDips };

struct FitError : std::runtime_error {
  double best_residual_rms;
  explicit FitError(const std::string& what, double residual = 0.0)
      : std::runtime_error(what), best_residual_rms(residual) {}
};

// Fitted lineshape parameters. For SplitPeak the two components are listed
// in ascending center order; for PeakWithDips entry 0 is the broad peak and
// the rest are the dips (amplitudes stored positive, subtracted in the
// model).
struct LineFit {
  LineModel model = LineModel::Lorentzian;
  std::vector<double> centers;
  std::vector<double> fwhms;
  std::vector<double> amplitudes;
  double mixing = 1.0; // PseudoVoigt Lorentzian fraction
  double baseline0 = 0.0;
  double baseline1 = 0.0;
  double residual_rms = 0.0;
  std::vector<double> covariance_diag;
  int iterations = 0;
  int n_dips = 0;
  bool degenerate = false;

  double splitting() const {
    // split-peak: distance between the two components; peak-with-dips:
    // distance between the first two dips
    if (model == LineModel::PeakWithDips)
      return centers.size() >= 3 ? std::abs(centers[2] - centers[1]) : 0.0;
    if (centers.size() < 2) return 0.0;
    return std::abs(centers[1] - centers[0]);
  }

  // analytic area of component i (baseline excluded)
  double component_area(std::size_t i) const {
    const double a = amplitudes.at(i), w = fwhms.at(i);
    const double lor = a * (std::numbers::pi / 2.0) * w;
    const double gau = a * w * 0.5 * std::sqrt(std::numbers::pi /
                                               std::numbers::ln2);
    switch (model) {
      case LineModel::Gaussian:
        return gau;
      case LineModel::PseudoVoigt:
        return mixing * lor + (1.0 - mixing) * gau;
      default:
        return lor;
    }
  }
};

namespace fit_detail {

// unit-peak profiles and partials wrt (c, w)
struct Profile {
  double value, d_center, d_width;
};

inline Profile lorentz_unit(double x, double c, double w) {
  const double q = 2.0 * (x - c) / w;
  const double u = 1.0 / (1.0 + q * q);
  const double du_dq = -2.0 * q * u * u;
  return {u, du_dq * (-2.0 / w), du_dq * (-q / w)};
}

inline Profile gauss_unit(double x, double c, double w) {
  const double a = 4.0 * std::numbers::ln2;
  const double t = (x - c) / w;
  const double e = std::exp(-a * t * t);
  return {e, e * 2.0 * a * t / w, e * 2.0 * a * t * t / w};
}

struct ModelSpec {
  LineModel model;
  int n_dips = 0;

  int n_components() const {
    switch (model) {
      case LineModel::SplitPeak: return 2;
      case LineModel::PeakWithDips: return 1 + n_dips;
      default: return 1;
    }
  }
  bool has_mixing() const { return model == LineModel::PseudoVoigt; }
  // layout: [A_i, c_i, w_i] x components, [m]?, b0, b1
  int n_params() const {
    return 3 * n_components() + (has_mixing() ? 1 : 0) + 2;
  }
};

inline double eval(const ModelSpec& spec, const double* p, double x,
                   double* jac) {
  const int nc = spec.n_components();
  const int mix_idx = 3 * nc;
  const int b_idx = mix_idx + (spec.has_mixing() ? 1 : 0);
  double y = p[b_idx] + p[b_idx + 1] * x;
  if (jac) {
    jac[b_idx] = 1.0;
    jac[b_idx + 1] = x;
    if (spec.has_mixing()) jac[mix_idx] = 0.0;
  }
  for (int i = 0; i < nc; ++i) {
    const double a = p[3 * i], c = p[3 * i + 1], w = p[3 * i + 2];
    const double sign =
        (spec.model == LineModel::PeakWithDips && i > 0) ? -1.0 : 1.0;
    Profile pr;
    double dm = 0.0;
    if (spec.model == LineModel::Gaussian) {
      pr = gauss_unit(x, c, w);
    } else if (spec.model == LineModel::PseudoVoigt) {
      const double m = p[mix_idx];
      const Profile lor = lorentz_unit(x, c, w);
      const Profile gau = gauss_unit(x, c, w);
      pr = {m * lor.value + (1.0 - m) * gau.value,
            m * lor.d_center + (1.0 - m) * gau.d_center,
            m * lor.d_width + (1.0 - m) * gau.d_width};
      dm = lor.value - gau.value;
    } else {
      pr = lorentz_unit(x, c, w);
    }
    y += sign * a * pr.value;
    if (jac) {
      jac[3 * i] = sign * pr.value;
      jac[3 * i + 1] = sign * a * pr.d_center;
      jac[3 * i + 2] = sign * a * pr.d_width;
      if (spec.has_mixing()) jac[mix_idx] += sign * a * dm;
    }
  }
  return y;
}

inline double cost(const ModelSpec& spec, const std::vector<double>& p,
                   const std::vector<double>& x, const std::vector<double>& y) {
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - eval(spec, p.data(), x[i], nullptr);
    acc += r * r;
  }
  return acc;
}

inline bool params_valid(const ModelSpec& spec, const std::vector<double>& p) {
  const int nc = spec.n_components();
  for (int i = 0; i < nc; ++i)
    if (!(p[3 * i + 2] > 0.0)) return false;
  if (spec.has_mixing()) {
    const double m = p[3 * nc];
    if (m < 0.0 || m > 1.0) return false;
  }
  return true;
}

struct LmOutcome {
  std::vector<double> p;
  double rms;
  int iterations;
  std::vector<double> covariance_diag;
  bool converged;
};

inline LmOutcome levenberg(const ModelSpec& spec, std::vector<double> p,
                           const std::vector<double>& x,
                           const std::vector<double>& y) {
  using Eigen::MatrixXd;
  using Eigen::VectorXd;
  const int np = spec.n_params();
  const auto n = x.size();
  MatrixXd jac((Eigen::Index)n, np);
  VectorXd resid((Eigen::Index)n);
  std::vector<double> row(np);

  double lambda = 1e-3;
  double c_now = cost(spec, p, x, y);
  int it = 0;
  bool converged = false;
  for (; it < 200 && !converged; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      const double f = eval(spec, p.data(), x[i], row.data());
      resid((Eigen::Index)i) = y[i] - f;
      for (int j = 0; j < np; ++j) jac((Eigen::Index)i, j) = row[j];
    }
    const MatrixXd jtj = jac.transpose() * jac;
    const VectorXd jtr = jac.transpose() * resid;

    bool accepted = false;
    for (int attempt = 0; attempt < 24; ++attempt) {
      MatrixXd damped = jtj;
      for (int j = 0; j < np; ++j)
        damped(j, j) += lambda * std::max(jtj(j, j), 1e-30);
      const VectorXd delta = damped.ldlt().solve(jtr);
      std::vector<double> trial = p;
      for (int j = 0; j < np; ++j) trial[j] += delta(j);
      if (spec.has_mixing())
        trial[3 * spec.n_components()] =
            std::clamp(trial[3 * spec.n_components()], 0.0, 1.0);
      if (!params_valid(spec, trial)) {
        lambda *= 4.0;
        continue;
      }
      const double c_trial = cost(spec, trial, x, y);
      if (c_trial <= c_now) {
        // converge on a vanishing relative step or a stagnant cost; the
        // step test alone never fires for parameters that are exactly zero
        double step = 0.0;
        for (int j = 0; j < np; ++j)
          step = std::max(step,
                          std::abs(delta(j)) / (std::abs(p[j]) + 1e-30));
        const double drop = c_now - c_trial;
        p = std::move(trial);
        c_now = c_trial;
        lambda = std::max(lambda / 3.0, 1e-12);
        accepted = true;
        if (step < 1e-10 || drop <= 1e-14 * c_now + 1e-300) converged = true;
        break;
      }
      lambda *= 4.0;
    }
    if (!accepted) {
      converged = true; // stuck in a damping wall: treat as stationary
      break;
    }
  }

  LmOutcome out;
  out.rms = std::sqrt(c_now / (double)n);
  out.iterations = it;
  out.converged = converged || it < 200;
  // covariance diagonal from the final Jacobian
  for (std::size_t i = 0; i < n; ++i) {
    eval(spec, p.data(), x[i], row.data());
    for (int j = 0; j < np; ++j) jac((Eigen::Index)i, j) = row[j];
  }
  const MatrixXd jtj = jac.transpose() * jac;
  const MatrixXd cov = jtj.completeOrthogonalDecomposition().pseudoInverse();
  out.covariance_diag.resize(np);
  const double sigma2 =
      c_now / std::max<double>(1.0, (double)n - (double)np);
  for (int j = 0; j < np; ++j)
    out.covariance_diag[j] = cov(j, j) * sigma2;
  out.p = std::move(p);
  return out;
}

// moving-average smoothing used by the peak finder
inline std::vector<double> smooth(const std::vector<double>& y, int half) {
  std::vector<double> out(y.size());
  const int n = (int)y.size();
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - half), hi = std::min(n - 1, i + half);
    double acc = 0.0;
    for (int j = lo; j <= hi; ++j) acc += y[j];
    out[i] = acc / (hi - lo + 1);
  }
  return out;
}

struct PeakGuess {
  double amplitude, center, fwhm;
};

// Single dominant feature above/below an edge-estimated baseline. The
// width comes from the integrated area (w = 2 area / (pi A) for a
// Lorentzian), which is robust against narrow dips riding on the feature;
// the center is the area centroid.
inline PeakGuess guess_single(const std::vector<double>& x,
                              const std::vector<double>& y, double b0,
                              double b1) {
  const int n = (int)x.size();
  double best = 0.0;
  for (int i = 0; i < n; ++i) {
    const double dev = y[i] - (b0 + b1 * x[i]);
    if (std::abs(dev) > std::abs(best)) best = dev;
  }
  double area = 0.0, moment = 0.0;
  for (int i = 1; i < n; ++i) {
    const double dx = x[i] - x[i - 1];
    const double d0 = y[i - 1] - (b0 + b1 * x[i - 1]);
    const double d1 = y[i] - (b0 + b1 * x[i]);
    area += 0.5 * (d0 + d1) * dx;
    moment += 0.5 * (d0 * x[i - 1] + d1 * x[i]) * dx;
  }
  const double span = x.back() - x.front();
  double center = std::abs(area) > 1e-300 ? moment / area
                                          : 0.5 * (x.front() + x.back());
  if (center < x.front() || center > x.back())
    center = 0.5 * (x.front() + x.back());
  double w = 0.0;
  if (std::abs(best) > 0.0)
    w = 2.0 * std::abs(area) / (std::numbers::pi * std::abs(best));
  const double dx_min = span / (n - 1);
  w = std::clamp(w, 2.0 * dx_min, span);
  return {best, center, w};
}

inline void edge_baseline(const std::vector<double>& x,
                          const std::vector<double>& y, double& b0,
                          double& b1) {
  // least squares over the outer 10% on each side
  const int n = (int)x.size();
  const int m = std::max(2, n / 10);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  auto add = [&](int i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
    ++cnt;
  };
  for (int i = 0; i < m; ++i) add(i);
  for (int i = n - m; i < n; ++i) add(i);
  const double det = cnt * sxx - sx * sx;
  if (std::abs(det) < 1e-300) {
    b0 = sy / cnt;
    b1 = 0.0;
  } else {
    b1 = (cnt * sxy - sx * sy) / det;
    b0 = (sy - b1 * sx) / cnt;
  }
}

} // namespace fit_detail

// Least-squares fit of a single model plus linear baseline to (x, y).
// init_hint, when given, seeds the parameters and the fit is fully
// deterministic in it; otherwise a peak-finding auto-initialization runs.
inline LineFit fit_line_xy(const std::vector<double>& x,
                           const std::vector<double>& y, LineModel model,
                           int n_dips = 0,
                           const std::optional<LineFit>& init_hint = {}) {
  using namespace fit_detail;
  if (x.size() != y.size() || x.size() < 8)
    throw std::invalid_argument("fit_line: need >= 8 samples");
  ModelSpec spec{model, model == LineModel::PeakWithDips ? n_dips : 0};
  const int nc = spec.n_components();

  std::vector<double> p(spec.n_params(), 0.0);
  double b0 = 0.0, b1 = 0.0;
  edge_baseline(x, y, b0, b1);

  if (init_hint) {
    const LineFit& h = *init_hint;
    for (int i = 0; i < nc; ++i) {
      p[3 * i] = h.amplitudes.at(i);
      p[3 * i + 1] = h.centers.at(i);
      p[3 * i + 2] = h.fwhms.at(i);
    }
    if (spec.has_mixing()) p[3 * nc] = h.mixing;
    p[3 * nc + (spec.has_mixing() ? 1 : 0)] = h.baseline0;
    p[3 * nc + (spec.has_mixing() ? 1 : 0) + 1] = h.baseline1;
  } else {
    const double span = *std::max_element(y.begin(), y.end()) -
                        *std::min_element(y.begin(), y.end());
    PeakGuess g = guess_single(x, smooth(y, 2), b0, b1);
    if (std::abs(g.amplitude) < 1e-12 + 1e-6 * span || span <= 0.0)
      throw FitError("fit_line: no dominant feature above the baseline", 0.0);
    if (model == LineModel::SplitPeak) {
      // two local maxima of the smoothed, baseline-subtracted signal,
      // separated by at least a fifth of the single-feature width
      const auto ys = smooth(y, 3);
      std::vector<std::pair<double, double>> peaks; // (value, x)
      for (std::size_t i = 2; i + 2 < x.size(); ++i) {
        const double v = ys[i] - (b0 + b1 * x[i]);
        if (ys[i] > ys[i - 1] && ys[i] >= ys[i + 1] &&
            v > 0.3 * std::abs(g.amplitude))
          peaks.emplace_back(v, x[i]);
      }
      std::sort(peaks.rbegin(), peaks.rend());
      double c1 = g.center - 0.3 * g.fwhm, c2 = g.center + 0.3 * g.fwhm;
      for (std::size_t j = 1; j < peaks.size(); ++j) {
        if (std::abs(peaks[j].second - peaks[0].second) > 0.2 * g.fwhm) {
          c1 = std::min(peaks[0].second, peaks[j].second);
          c2 = std::max(peaks[0].second, peaks[j].second);
          break;
        }
      }
      const double w = std::max(0.5 * g.fwhm, (c2 - c1) * 0.5);
      p = {g.amplitude, c1, w, g.amplitude, c2, w, b0, b1};
    } else if (model == LineModel::PeakWithDips) {
      p[0] = g.amplitude;
      p[1] = g.center;
      p[2] = g.fwhm;
      // dips: deepest local minima of the smoothed residual inside the
      // peak, greedily enforcing a minimum mutual separation
      const auto yd = smooth(y, 2);
      std::vector<std::pair<double, double>> dips; // (depth, x)
      for (std::size_t i = 2; i + 2 < x.size(); ++i) {
        if (std::abs(x[i] - g.center) > g.fwhm) continue;
        const Profile pk = lorentz_unit(x[i], g.center, g.fwhm);
        const double resid = (b0 + b1 * x[i] + g.amplitude * pk.value) - yd[i];
        if (yd[i] < yd[i - 1] && yd[i] <= yd[i + 1] && resid > 0.0)
          dips.emplace_back(resid, x[i]);
      }
      std::sort(dips.rbegin(), dips.rend());
      std::vector<std::pair<double, double>> picked;
      const double min_sep = g.fwhm / 10.0;
      for (const auto& d : dips) {
        bool clear = true;
        for (const auto& q : picked)
          clear &= std::abs(d.second - q.second) >= min_sep;
        if (clear) picked.push_back(d);
        if ((int)picked.size() == n_dips) break;
      }
      for (int k = 0; k < n_dips; ++k) {
        const double depth =
            k < (int)picked.size() ? picked[k].first : 0.3 * g.amplitude;
        const double cx = k < (int)picked.size()
                              ? picked[k].second
                              : g.center + (k - 0.5) * 0.2 * g.fwhm;
        p[3 * (k + 1)] = depth;
        p[3 * (k + 1) + 1] = cx;
        p[3 * (k + 1) + 2] = g.fwhm / 20.0;
      }
      p[3 * nc] = b0;
      p[3 * nc + 1] = b1;
    } else {
      p[0] = g.amplitude;
      p[1] = g.center;
      p[2] = g.fwhm;
      if (spec.has_mixing()) p[3] = 0.5;
      p[3 * nc + (spec.has_mixing() ? 1 : 0)] = b0;
      p[3 * nc + (spec.has_mixing() ? 1 : 0) + 1] = b1;
    }
  }

  LmOutcome lm = levenberg(spec, std::move(p), x, y);

  const double span = *std::max_element(y.begin(), y.end()) -
                      *std::min_element(y.begin(), y.end());
  LineFit out;
  out.model = model;
  out.n_dips = spec.n_dips;
  out.iterations = lm.iterations;
  out.residual_rms = lm.rms;
  out.covariance_diag = lm.covariance_diag;
  const int mix_idx = 3 * nc;
  if (spec.has_mixing()) out.mixing = lm.p[mix_idx];
  const int b_idx = mix_idx + (spec.has_mixing() ? 1 : 0);
  out.baseline0 = lm.p[b_idx];
  out.baseline1 = lm.p[b_idx + 1];
  for (int i = 0; i < nc; ++i) {
    out.amplitudes.push_back(lm.p[3 * i]);
    out.centers.push_back(lm.p[3 * i + 1]);
    out.fwhms.push_back(std::abs(lm.p[3 * i + 2]));
  }
  if (model == LineModel::SplitPeak && out.centers[0] > out.centers[1]) {
    std::swap(out.centers[0], out.centers[1]);
    std::swap(out.fwhms[0], out.fwhms[1]);
    std::swap(out.amplitudes[0], out.amplitudes[1]);
  }
  if (model == LineModel::PeakWithDips && n_dips >= 2) {
    // flag unresolvable dip pairs: separation below a quarter dip width, or
    // dip centers statistically indistinguishable (overlapping components
    // blow up the center covariance)
    const double sep = std::abs(out.centers[2] - out.centers[1]);
    const double wd = 0.5 * (out.fwhms[1] + out.fwhms[2]);
    const double sigma_c = std::sqrt(
        std::max(lm.covariance_diag[4], lm.covariance_diag[7]));
    if (sep < 0.25 * wd || sigma_c > 0.25 * sep) out.degenerate = true;
  }

  // overlapping components leave a flat direction that can exhaust the
  // iteration budget; that outcome is reported through the degenerate flag
  if (!lm.converged && !out.degenerate)
    throw FitError("fit_line: no convergence within 200 iterations", lm.rms);
  if (std::abs(lm.p[0]) < 2.0 * lm.rms || std::abs(lm.p[0]) < 1e-9 * span)
    throw FitError("fit_line: fitted amplitude not significant", lm.rms);
  return out;
}

} // namespace lambdamem
