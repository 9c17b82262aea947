#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "lambdamem/maxwell_bloch.hpp"

using namespace lambdamem;
using Catch::Approx;

namespace {

LambdaParams t_centre_params(double gamma_s = 0.0) {
  return LambdaParams(kTwoPi * 27e6, gamma_s, kTwoPi * 417e6);
}

PulseSpec megahertz_pulse() {
  return PulseSpec::gaussian_from_bandwidth(1e6, 0.0);
}

} // namespace

TEST_CASE("ATS memory at d = 27: simulated protocol", "[ats]") {
  LambdaParams lp = t_centre_params();
  MediumParams medium(27.0);

  // The full protocol simulation carries the complete polarization decay;
  // the matched-filter curve books an idealized exp(-1/F) decoherence, so
  // the simulation sits a few points below it. Values here are regression
  // anchors for the simulator; the closed form carries the quoted maxima.
  MemoryResult back = run_ats_memory(medium, lp, 4.0, 0.0,
                                     Direction::Backward);
  CHECK(back.eta_total == Approx(0.66).margin(0.02));
  CHECK(std::abs(back.eta_total -
                 ats_efficiency_model(27.0, 4.0, Direction::Backward)) < 0.1);

  MemoryResult fwd = run_ats_memory(medium, lp, 7.25, 0.0, Direction::Forward);
  CHECK(fwd.eta_total == Approx(0.40).margin(0.02));
  CHECK(std::abs(fwd.eta_total -
                 ats_efficiency_model(27.0, 7.25, Direction::Forward)) < 0.1);

  CHECK(back.eta_total <= back.eta_storage);
  CHECK(back.eta_storage <= 1.0 + 1e-9);
  CHECK(back.eta_retrieval <= 1.0 + 1e-9);
  CHECK(back.control_rabi ==
        Approx(kTwoPi * ats_rabi_for_factor(4.0, 27e6)).epsilon(1e-12));
}

TEST_CASE("ATS energy bookkeeping closes within 1%", "[ats]") {
  LambdaParams lp = t_centre_params();
  MediumParams medium(27.0);
  MemoryResult r = run_ats_memory(medium, lp, 4.0, 0.0, Direction::Backward);
  const double total = r.leaked_fraction + r.eta_total + r.decayed_fraction +
                       r.spin_remaining;
  CHECK(total == Approx(1.0).margin(0.01));
}

TEST_CASE("ATS narrowband limit stores nothing", "[ats]") {
  LambdaParams lp = t_centre_params();
  MediumParams medium(27.0);
  MemoryResult r = run_ats_memory(medium, lp, 0.2, 0.0, Direction::Backward);
  CHECK(r.eta_total < 0.05);
}

TEST_CASE("ATS backward beats forward at d = 27", "[ats]") {
  LambdaParams lp = t_centre_params();
  MediumParams medium(27.0);
  for (double f : {3.0, 4.0, 5.0, 7.25}) {
    MemoryResult b = run_ats_memory(medium, lp, f, 0.0, Direction::Backward);
    MemoryResult fw = run_ats_memory(medium, lp, f, 0.0, Direction::Forward);
    CHECK(b.eta_total >= fw.eta_total);
  }
}

TEST_CASE("ATS sweep: ordering, model maxima, bounds", "[ats][sweep]") {
  LambdaParams lp = t_centre_params();
  MediumParams medium(27.0);
  std::vector<double> fs;
  for (int i = 0; i < 19; ++i) fs.push_back(1.0 + 0.5 * i);
  auto curve = sweep_ats_factor(medium, lp, fs, Direction::Backward);
  REQUIRE(curve.size() == fs.size());

  std::size_t best_sim = 0, best_model = 0;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    CHECK(curve[i].eta_total >= 0.0);
    CHECK(curve[i].eta_total <= 1.0);
    if (curve[i].eta_total > curve[best_sim].eta_total) best_sim = i;
    if (curve[i].eta_model > curve[best_model].eta_model) best_model = i;
  }
  // the closed form peaks at F = 4; the simulated curve has a broad
  // plateau over F ~ 4-7 whose maximum stays within 0.1 of the model peak
  CHECK(curve[best_model].f == Approx(4.0).margin(0.6));
  CHECK(curve[best_sim].f >= 3.0);
  CHECK(curve[best_sim].f <= 8.0);
  CHECK(std::abs(curve[best_sim].eta_total - curve[best_model].eta_model) <
        0.1);
  CHECK(curve[best_model].eta_model == Approx(0.726).margin(0.001));

  auto fwd = sweep_ats_factor(medium, lp, fs, Direction::Forward);
  std::size_t fbest = 0;
  for (std::size_t i = 0; i < fwd.size(); ++i)
    if (fwd[i].eta_model > fwd[fbest].eta_model) fbest = i;
  CHECK(fwd[fbest].f >= 6.0);
  CHECK(fwd[fbest].f <= 8.5);
  CHECK(fwd[fbest].eta_model == Approx(0.469).margin(0.001));

  CHECK_THROWS_AS(sweep_ats_factor(medium, lp, {}, Direction::Forward),
                  std::invalid_argument);
  CHECK_THROWS_AS(sweep_ats_factor(medium, lp, {2.0, 1.0}, Direction::Forward),
                  std::invalid_argument);
}

TEST_CASE("EIT memory: d = 0 gives zero efficiency", "[eit]") {
  LambdaParams lp = t_centre_params();
  MediumParams medium(0.0);
  MemoryResult r = run_eit_memory(medium, lp, megahertz_pulse(), 0.0,
                                  Direction::Forward);
  // nothing is absorbed; the residual after the hold is the transmitted tail
  CHECK(r.eta_storage < 1e-9);
  CHECK(r.eta_total < 0.01);
}

TEST_CASE("EIT memory at the amplitude-convention operating point", "[eit][slow]") {
  // The quoted optimized forward efficiency of ~0.71 corresponds to an
  // amplitude optical depth of 27, i.e. intensity OD 54 in this solver's
  // normalization (see README conventions).
  LambdaParams lp = t_centre_params();
  MediumParams medium(54.0);
  MemoryResult r = run_eit_memory(medium, lp, megahertz_pulse(), 0.0,
                                  Direction::Forward);
  CHECK(r.eta_total == Approx(0.71).margin(0.05));
  CHECK(r.eta_total <= r.eta_storage);
}

TEST_CASE("EIT memory at intensity OD 27 (regression)", "[eit][slow]") {
  LambdaParams lp = t_centre_params();
  MediumParams medium(27.0);
  MemoryResult r = run_eit_memory(medium, lp, megahertz_pulse(), 0.0,
                                  Direction::Forward);
  // honest simulated optimum at intensity OD 27 sits near 0.57
  CHECK(r.eta_total == Approx(0.57).margin(0.03));
  const double total = r.leaked_fraction + r.eta_total + r.decayed_fraction +
                       r.spin_remaining;
  CHECK(total == Approx(1.0).margin(0.01));
}

TEST_CASE("EIT monotonicity in optical depth", "[eit][slow]") {
  LambdaParams lp = t_centre_params();
  EitTuning tuning;
  double prev = -1.0;
  for (double d : {1.0, 5.0, 10.0, 27.0}) {
    MediumParams medium(d);
    MemoryResult r =
        run_eit_memory(medium, lp, megahertz_pulse(), 0.0, Direction::Forward,
                       tuning);
    CHECK(r.eta_total >= prev);
    prev = r.eta_total;
  }
}

TEST_CASE("EIT spin decoherence factorizes as exp(-gamma_s t)", "[eit][slow]") {
  // run with a hold long enough that write/read exposure is negligible
  const double ge = kPi * 27e6;
  const double hold_s = 4000.0 / ge;
  const double gamma_s = 1e-4 * ge; // decay exponent ~0.4 over the hold
  EitTuning tuning;
  tuning.refine = false; // same control in both runs

  MediumParams medium(27.0);
  MemoryResult base = run_eit_memory(medium, t_centre_params(0.0),
                                     megahertz_pulse(), hold_s,
                                     Direction::Forward, tuning);
  MemoryResult decayed = run_eit_memory(medium, t_centre_params(gamma_s),
                                        megahertz_pulse(), hold_s,
                                        Direction::Forward, tuning);
  const double predicted = base.eta_total * std::exp(-gamma_s * hold_s);
  CHECK(decayed.eta_total == Approx(predicted).epsilon(0.02));
}

TEST_CASE("EIT advisory warnings", "[eit]") {
  LambdaParams lp = t_centre_params();
  MediumParams shallow(5.0);
  MemoryResult r = run_eit_memory(shallow, lp, megahertz_pulse(), 0.0,
                                  Direction::Forward);
  bool low_d = false;
  for (const auto& w : r.warnings) low_d |= w.find("d <= 20") != std::string::npos;
  CHECK(low_d);

  // backward momentum-mismatch warning for a long medium
  MediumParams long_medium(5.0, 1.0 /* m */);
  MemoryResult rb = run_eit_memory(long_medium, lp, megahertz_pulse(), 0.0,
                                   Direction::Backward);
  bool mismatch = false;
  for (const auto& w : rb.warnings)
    mismatch |= w.find("momentum") != std::string::npos;
  CHECK(mismatch);
}

TEST_CASE("run_ats_memory input validation", "[ats]") {
  LambdaParams lp = t_centre_params();
  MediumParams medium(27.0);
  CHECK_THROWS_AS(run_ats_memory(medium, lp, 0.0, 0.0, Direction::Forward),
                  std::invalid_argument);
  CHECK_THROWS_AS(run_ats_memory(medium, lp, 4.0, -1.0, Direction::Forward),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      run_eit_memory(medium, lp, megahertz_pulse(), -1.0, Direction::Forward),
      std::invalid_argument);
}
