#include <cmath>

#include "doctest.h"
#include "quincunx/analysis.hpp"
#include "quincunx/errors.hpp"
#include "quincunx/observables.hpp"
#include "quincunx/reference.hpp"

using namespace quincunx;

namespace {

constexpr double kPi = 3.14159265358979323846;

double slope_over_steps(const std::vector<double>& sigma, int first, int last) {
  SigmaSeries s;
  for (int n = first; n <= last; ++n) {
    s.times.push_back(n);
    s.values.push_back(sigma[n]);
  }
  return loglog_regression(s).s;
}

CMatrix walker_of(const JointState& s) { return partial_trace_coin(JointDensity::from_state(s)); }

}  // namespace

TEST_CASE("two-site walk: both coin branches land on the other site") {
  CVector coin = CVector::Zero(2);
  coin(0) = 1.0;
  const CycleWalkState s = ideal_qw_step(cycle_initial_state(2, coin));
  const auto p = s.site_probabilities();
  CHECK(p[0] == doctest::Approx(0.0));
  CHECK(p[1] == doctest::Approx(1.0));
}

TEST_CASE("ideal walk with the symmetric coin is unitary and mirror symmetric") {
  const int d = 21;
  CycleWalkState s = cycle_initial_state(d, symmetric_coin());
  for (int j = 0; j < 15; ++j) {
    s = ideal_qw_step(s);
    CHECK(std::abs(s.amplitudes.norm() - 1.0) < 1e-12);
  }
  const auto p = s.site_probabilities();
  for (int m = 1; m < d; ++m) CHECK(std::abs(p[m] - p[d - m]) < 1e-10);

  const SigmaSequence seq = ideal_qw_sigma(d, 9, symmetric_coin());
  CHECK(seq.sigma[0] == 0.0);
  CHECK_FALSE(seq.wraparound_warning);
  CHECK(ideal_qw_sigma(d, 11, symmetric_coin()).wraparound_warning);
}

TEST_CASE("classical walk is an exact binomial convolution") {
  const auto one = classical_rw_dist(21, 1);
  CHECK(one[1][1] == doctest::Approx(0.5));
  CHECK(one[1][20] == doctest::Approx(0.5));

  const int d = 101;
  const auto dist = classical_rw_dist(d, 6, 0.3);
  for (const auto& p : dist) {
    double sum = 0.0;
    for (double v : p) {
      CHECK(v >= 0.0);
      sum += v;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
  }

  const double dth = 2.0 * kPi / d;
  const auto fair = classical_rw_dist(d, 4)[4];
  double var = 0.0;
  for (int m = 0; m < d; ++m) {
    const int k = m <= d / 2 ? m : m - d;
    var += fair[m] * (k * dth) * (k * dth);
  }
  CHECK(var == doctest::Approx(4.0 * dth * dth));
  CHECK_THROWS_AS(classical_rw_dist(21, 3, 1.5), ConfigError);
}

TEST_CASE("quantum walk spreads faster than the classical walk") {
  const auto qw = ideal_qw_sigma(21, 9, symmetric_coin()).sigma;
  const auto rw = classical_rw_sigma(21, 9).sigma;
  // Three steps of the symmetric-coin walk still give the binomial 1:3:3:1.
  CHECK(std::abs(qw[3] - rw[3]) < 1e-12);
  for (int n = 4; n <= 9; ++n) {
    CAPTURE(n);
    CHECK(qw[n] > rw[n]);
  }
  // Finite-size bending shrinks on a larger cycle.
  const double small = slope_over_steps(qw, 1, 9);
  const double large = slope_over_steps(ideal_qw_sigma(101, 40, symmetric_coin()).sigma, 1, 40);
  CHECK(std::abs(large - 1.0) < std::abs(small - 1.0));
  CHECK(slope_over_steps(qw, 1, 9) > slope_over_steps(rw, 1, 9) + 0.4);
}

TEST_CASE("undisplaced circle walk leaves photon statistics untouched") {
  const FockCutoff c(50);
  const double dth = 2.0 * kPi / 21.0;
  const DisplacedCircleWalk walk(c, dth, 0.0);
  CHECK((walk.unitary().adjoint() * walk.unitary() - CMatrix::Identity(c.joint_dim(), c.joint_dim())).norm() < 1e-12);

  JointState s = prepare_initial_joint({3.0, 0.0}, c);
  const std::vector<double> p0 = photon_stats(walker_of(s)).pn;
  std::vector<double> sigma{0.0};
  for (int n = 1; n <= 9; ++n) {
    s = walk.step(s);
    const CMatrix w = walker_of(s);
    const std::vector<double> p = photon_stats(w).pn;
    for (std::size_t k = 0; k < p.size(); ++k) CHECK(std::abs(p[k] - p0[k]) < 1e-12);
    sigma.push_back(holevo_std(phase_distribution(w, 4 * 50 + 1)));
  }
  const double ideal = slope_over_steps(ideal_qw_sigma(21, 9, symmetric_coin()).sigma, 1, 9);
  CHECK(std::abs(slope_over_steps(sigma, 1, 9) - ideal) < 0.1);
}

TEST_CASE("displaced circle walk: photon spread against the analytic estimate") {
  const FockCutoff c(60);
  const double dth = 2.0 * kPi / 21.0;
  // The analytic lambda term grows like cos((1 - N) dtheta) / sin^2(dtheta / 2);
  // the factor-2 agreement holds at every step for lambda = 0.01 and over the
  // first six steps for the larger displacements.
  for (auto [lambda, last] : {std::pair{0.01, 15}, {0.05, 6}, {0.1, 6}}) {
    const DisplacedCircleWalk walk(c, dth, lambda);
    JointState s = prepare_initial_joint({3.0, 0.0}, c);
    for (int n = 1; n <= last; ++n) {
      s = walk.step(s);
      const double simulated = photon_stats(walker_of(s)).delta_n;
      const double predicted = analytic_delta_n(9.0, dth, lambda, n);
      CAPTURE(lambda);
      CAPTURE(n);
      CHECK(simulated / predicted < 2.0);
      CHECK(predicted / simulated < 2.0);
    }
  }
  const DisplacedCircleWalk small(FockCutoff(40), dth, 0.1);
  CHECK_THROWS_AS(small.step(prepare_initial_joint({3.0, 0.0}, c)), InvalidStateError);
}
