#include <cmath>

#include "doctest.h"
#include "quincunx/errors.hpp"
#include "quincunx/protocol.hpp"

using namespace quincunx;

namespace {

constexpr double kPi = 3.14159265358979323846;

const BoundCheck& find(const ValidationReport& r, const std::string& prefix) {
  for (const auto& c : r.checks)
    if (c.name.rfind(prefix, 0) == 0) return c;
  FAIL("no check named " << prefix);
  return r.checks.front();
}

WalkConfig short_walk(int steps, PulseMode mode) {
  WalkConfig c;
  c.n_steps = steps;
  c.pulse_mode = mode;
  c.cutoff = FockCutoff(30);
  return c;
}

}  // namespace

TEST_CASE("Hadamard duration reproduces the 0.01567 us anchor") {
  const SystemParams p = SystemParams::reference();
  // pi [Delta + 2 (n+1) chi - 2 g eps / Delta] / (4 g eps) with Delta = 2000, chi = 5.
  const double by_hand = kPi * (2000.0 + 2.0 * 10.0 * 5.0 - 2.0 * 100.0 * 1000.0 / 2000.0) / (4.0 * 100.0 * 1000.0);
  CHECK(hadamard_duration(9.0, p) == doctest::Approx(by_hand).epsilon(1e-14));
  CHECK(std::abs(hadamard_duration(9.0, p) - 0.01567) / 0.01567 < 0.01);
  // Each extra photon lengthens the pulse by pi chi / (2 g eps).
  CHECK(hadamard_duration(10.0, p) - hadamard_duration(9.0, p) == doctest::Approx(kPi * 5.0 / (2.0 * 1e5)));
  CHECK_THROWS_AS(hadamard_duration(-1.0, p), DurationError);
}

TEST_CASE("drive frequency and step angle") {
  const SystemParams p = SystemParams::reference();
  CHECK(drive_frequency(9.0, p) == doctest::Approx(2.0 * 9.0 * 5.0 - 100.0 + 7000.0));
  CHECK(step_angle(0.01, 0.02, p) == doctest::Approx(5.0 * 0.03));
  const double tau = default_tau(21, 9.0, p);
  CHECK(step_angle(hadamard_duration(9.0, p), tau, p) == doctest::Approx(2.0 * kPi / 21.0).epsilon(1e-12));
  CHECK(tau == doctest::Approx(2.0 * kPi / 105.0 - hadamard_duration(9.0, p)));
  WalkConfig c;
  CHECK(resolved_tau(c) == doctest::Approx(tau));
  c.tau = 0.5;
  CHECK(resolved_tau(c) == 0.5);
}

TEST_CASE("reference configuration flags the upper d bound with its exact margin") {
  const ValidationReport r = validate_config(WalkConfig{});
  CHECK_FALSE(r.has_errors());
  CHECK(r.has_warnings());
  const BoundCheck& hi = find(r, "d upper");
  CHECK_FALSE(hi.passed);
  CHECK(hi.severity == Severity::Warning);
  CHECK(hi.margin == doctest::Approx(2.0 * kPi * 3.0 - 21.0));
  const BoundCheck& lo = find(r, "d lower");
  CHECK(lo.passed);
  CHECK(lo.margin == doctest::Approx(21.0 - 12.0));
  CHECK(find(r, "n0 < n_crit").margin == doctest::Approx(91.0));
  CHECK(r.to_string().find("d upper bound") != std::string::npos);
}

TEST_CASE("validation errors") {
  WalkConfig c;
  c.d = 5;
  ValidationReport r = validate_config(c);
  CHECK(r.has_errors());
  CHECK(find(r, "d lower").margin == doctest::Approx(-7.0));

  c = WalkConfig{};
  c.n_steps = 19;
  CHECK_FALSE(find(validate_config(c), "step count").passed);

  c = WalkConfig{};
  c.alpha = 10.0;
  c.d = 120;
  CHECK_FALSE(find(validate_config(c), "n0 < n_crit").passed);

  c = WalkConfig{};
  c.tau = -0.01;
  CHECK(validate_config(c).has_errors());

  c = WalkConfig{};
  c.params.omega_r = 6200.0;  // Delta = 8 g
  CHECK(validate_config(c).has_errors());
  c.params.omega_r = 5500.0;  // Delta = 15 g: warning only
  const ValidationReport weak = validate_config(c);
  CHECK_FALSE(weak.has_errors());
  CHECK_FALSE(find(weak, "dispersive").passed);
}

TEST_CASE("pulse mode names round-trip") {
  for (auto m : {PulseMode::Adaptive, PulseMode::Fixed, PulseMode::FrequencyOnly})
    CHECK(parse_pulse_mode(to_string(m)) == m);
  CHECK_THROWS_AS(parse_pulse_mode("ballistic"), ConfigError);
}

TEST_CASE("window average uses the trapezoid rule") {
  std::vector<double> t, y;
  for (int i = 0; i <= 100; ++i) {
    t.push_back(0.01 * i);
    y.push_back(3.0 + 2.0 * t.back());
  }
  CHECK(window_average(t, y, 0.0, 1.0) == doctest::Approx(4.0));
  CHECK(window_average(t, y, 0.5, 1.0) == doctest::Approx(4.5));
}

TEST_CASE("photon pre-simulation samples every window densely") {
  const WalkConfig c = short_walk(3, PulseMode::Adaptive);
  const PhotonTrajectory traj = precompute_photon_trajectory(c);
  REQUIRE(traj.n_bar_steps.size() == 3);
  const double period = hadamard_duration(9.0, c.params) + resolved_tau(c);
  for (int j = 0; j < 3; ++j) {
    int inside = 0;
    for (double t : traj.t) inside += (t >= j * period - 1e-12 && t <= (j + 1) * period + 1e-12);
    CHECK(inside >= 50);
    CHECK(traj.n_bar_steps[j] > 5.0);
    CHECK(traj.n_bar_steps[j] < 12.0);
  }
  CHECK(traj.n_bar.front() == doctest::Approx(9.0));
}

TEST_CASE("schedules") {
  const SystemParams p = SystemParams::reference();
  const double t0 = hadamard_duration(9.0, p);

  const PulseSchedule fixed = build_schedule(short_walk(4, PulseMode::Fixed));
  REQUIRE(fixed.steps.size() == 4);
  for (const auto& s : fixed.steps) {
    CHECK(s.t_h == t0);
    CHECK(s.omega_d == drive_frequency(9.0, p));
    CHECK(s.tau > 0.0);
  }
  CHECK(fixed.segments().size() == 8);
  CHECK(fixed.total_duration() == doctest::Approx(4.0 * (t0 + fixed.steps[0].tau)));

  const WalkConfig ac = short_walk(4, PulseMode::Adaptive);
  const PhotonTrajectory traj = precompute_photon_trajectory(ac);
  const PulseSchedule adaptive = build_schedule(ac, &traj);
  const PulseSchedule freq = build_schedule(short_walk(4, PulseMode::FrequencyOnly), &traj);
  for (int j = 0; j < 4; ++j) {
    CHECK(adaptive.n_bar_sequence[j] == traj.n_bar_steps[j]);
    CHECK(adaptive.steps[j].t_h == doctest::Approx(hadamard_duration(traj.n_bar_steps[j], p)));
    CHECK(adaptive.steps[j].omega_d == doctest::Approx(drive_frequency(traj.n_bar_steps[j], p)));
    CHECK(freq.steps[j].t_h == t0);
    CHECK(freq.steps[j].omega_d == adaptive.steps[j].omega_d);
  }
  CHECK(build_schedule(short_walk(0, PulseMode::Adaptive)).steps.empty());
}

TEST_CASE("walks return the initial state plus one snapshot per step") {
  WalkConfig c = short_walk(0, PulseMode::Adaptive);
  const WalkResult none = run_walk(c);
  REQUIRE(none.snapshots.size() == 1);
  CHECK(none.snapshots[0].t == 0.0);

  c = short_walk(3, PulseMode::Fixed);
  const WalkResult a = run_walk(c);
  const WalkResult b = run_walk(c);
  REQUIRE(a.snapshots.size() == 4);
  for (int j = 1; j <= 3; ++j) {
    CHECK(a.snapshots[j].t == doctest::Approx(j * (a.schedule.steps[0].t_h + a.schedule.steps[0].tau)));
    // bit-identical reruns
    CHECK((a.snapshots[j].rho.matrix() - b.snapshots[j].rho.matrix()).cwiseAbs().maxCoeff() == 0.0);
  }
  // The closed path renormalizes after each segment; the norm drift recorded
  // before that stays below 1e-8 per step (two segments).
  CHECK(2.0 * a.diagnostics.max_trace_drift_per_segment < 1e-8);
  CHECK(std::abs(a.snapshots.back().rho.trace() - 1.0) < 1e-12);
}
