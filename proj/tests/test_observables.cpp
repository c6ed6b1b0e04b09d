#include <cmath>
#include <unsupported/Eigen/MatrixFunctions>

#include "doctest.h"
#include "quincunx/errors.hpp"
#include "quincunx/observables.hpp"
#include "support.hpp"

using namespace quincunx;

namespace {

constexpr double kPi = 3.14159265358979323846;

CMatrix coherent_density(cplx alpha, int n_max) {
  const CVector c = coherent_state(alpha, FockCutoff(n_max));
  return c * c.adjoint();
}

CMatrix fock_density(int n, int n_max) {
  CMatrix rho = CMatrix::Zero(n_max + 1, n_max + 1);
  rho(n, n) = 1.0;
  return rho;
}

// Rank-3 random density on a small Fock space.
CMatrix low_rank_density(int n_max, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  CMatrix v(n_max + 1, 3);
  for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = cplx(g(rng), g(rng));
  const CMatrix rho = v * v.adjoint();
  return rho / rho.trace();
}

}  // namespace

TEST_CASE("phase distribution: flat for Fock states, peaked for coherent states") {
  const AngularDistribution vac = phase_distribution(fock_density(0, 10), 41);
  for (double v : vac.values) CHECK(v == doctest::Approx(1.0 / (2.0 * kPi)));
  CHECK(std::isinf(holevo_std(vac)));
  CHECK_THROWS_AS(phase_distribution(fock_density(0, 10), 39), GridError);

  const AngularDistribution coh = phase_distribution(coherent_density(3.0, 40), 161);
  double sum = 0.0;
  for (double v : coh.values) sum += v;
  CHECK(sum * coh.dtheta() == doctest::Approx(1.0).epsilon(1e-8));
  const auto peak = std::max_element(coh.values.begin(), coh.values.end()) - coh.values.begin();
  CHECK(peak == 0);
  for (int j = 1; j < 80; ++j) CHECK(std::abs(coh.values[j] - coh.values[161 - j]) < 1e-12);
  CHECK(std::arg(circular_moment(coh)) == doctest::Approx(0.0));
  CHECK(std::abs(circular_skewness(coh)) < 1e-10);
}

TEST_CASE("Fourier coefficients of the phase distribution are the off-diagonal sums") {
  const int n_max = 40;
  const CMatrix rho = low_rank_density(n_max, 2);
  const AngularDistribution P = phase_distribution(rho, 4 * n_max + 1);
  for (int k = 1; k <= 3; ++k) {
    cplx grid = 0.0, exact = 0.0;
    for (std::size_t j = 0; j < P.size(); ++j) grid += P.values[j] * std::exp(kI * (k * P.theta[j])) * P.dtheta();
    for (int n = 0; n + k <= n_max; ++n) exact += rho(n + k, n);
    CAPTURE(k);
    CHECK(std::abs(grid - exact) < 1e-10);
  }
}

TEST_CASE("Holevo spread") {
  // Two points at +-a carry <e^{i theta}> = cos a.
  const double a = kPi / 6.0;
  AngularDistribution two;
  const int M = 12;
  for (int j = 0; j < M; ++j) {
    two.theta.push_back(2.0 * kPi * j / M);
    two.values.push_back(0.0);
  }
  two.values[1] = two.values[M - 1] = 0.5 / two.dtheta();
  CHECK(holevo_std(two) == doctest::Approx(std::tan(a)));

  std::vector<double> delta(21, 0.0);
  delta[0] = 1.0;
  CHECK(holevo_std(distribution_from_sites(delta)) == 0.0);

  // P = (1 + 2 r cos theta)/2pi has |<e^{i theta}>| = r.
  AngularDistribution cosine;
  for (int j = 0; j < 64; ++j) {
    cosine.theta.push_back(2.0 * kPi * j / 64);
    cosine.values.push_back((1.0 + 2.0 * 0.3 * std::cos(cosine.theta.back())) / (2.0 * kPi));
  }
  CHECK(holevo_std(cosine) == doctest::Approx(std::sqrt(1.0 / 0.09 - 1.0)));

  // Small spreads: Holevo and rms agree within 5%.
  for (double amp : {2.5, 3.0, 4.0}) {
    const AngularDistribution P = phase_distribution(coherent_density(amp, 40), 161);
    const double h = holevo_std(P);
    REQUIRE(h < 0.3);
    CHECK(std::abs(h - rms_circular_std(P)) / h < 0.05);
  }
}

TEST_CASE("quadrature distributions") {
  const auto grid = uniform_grid(12.0, 481);
  const QuadratureDistribution vac = quadrature_distribution(fock_density(0, 20), 0.7, grid);
  CHECK(vac.std * vac.std == doctest::Approx(0.5).epsilon(1e-8));
  for (std::size_t i = 0; i < grid.size(); i += 40)
    CHECK(vac.values[i] == doctest::Approx(std::exp(-grid[i] * grid[i]) / std::sqrt(kPi)).epsilon(1e-10));

  const QuadratureDistribution coh = quadrature_distribution(coherent_density(3.0, 40), 0.0, grid);
  CHECK(coh.mean == doctest::Approx(3.0 * std::sqrt(2.0)).epsilon(1e-8));
  CHECK(coh.std * coh.std == doctest::Approx(0.5).epsilon(1e-6));

  // x_phi = x cos(phi) + p sin(phi): a coherent state 2 + i has mean sqrt(2) Re(alpha e^{-i phi}).
  const cplx alpha(2.0, 1.0);
  for (double phi : {0.3, kPi / 2.0, 2.0}) {
    const QuadratureDistribution q = quadrature_distribution(coherent_density(alpha, 40), phi, grid);
    CHECK(q.mean == doctest::Approx(std::sqrt(2.0) * (alpha * std::exp(-kI * phi)).real()).epsilon(1e-8));
  }
  CHECK_THROWS_AS(quadrature_distribution(coherent_density(3.0, 40), 0.0, uniform_grid(6.0, 101)), GridError);
}

TEST_CASE("quadrature spread: grid moments agree with operator moments") {
  const auto grid = uniform_grid(14.0, 701);
  for (unsigned seed = 1; seed <= 4; ++seed) {
    const CMatrix rho = low_rank_density(20, seed);
    for (double phi : {0.0, 0.9, 2.4}) {
      const QuadratureDistribution q = quadrature_distribution(rho, phi, grid);
      CAPTURE(seed);
      CAPTURE(phi);
      CHECK(std::abs(q.std - q.operator_std) < 1e-6);
      CHECK(std::abs(q.mean - q.operator_mean) < 1e-6);
    }
  }
}

TEST_CASE("rotated quadratures follow from rotating the state") {
  const CMatrix rho = low_rank_density(15, 9);
  const auto grid = uniform_grid(10.0, 201);
  const double phi = 0.8;
  const QuadratureDistribution direct = quadrature_distribution(rho, phi, grid);
  const QuadratureDistribution rotated = quadrature_distribution(rotate_phase(rho, phi), 0.0, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(std::abs(direct.values[i] - rotated.values[i]) < 1e-8);
}

TEST_CASE("displacement matrix equals the truncated exponential") {
  const int n_max = 20;
  const cplx gamma(0.6, -0.4);
  const support::Mat a = support::annihilation(120);
  const support::Mat big = (gamma * a.adjoint() - std::conj(gamma) * a).exp();
  const CMatrix D = displacement_matrix(gamma, n_max);
  CHECK((D - big.topLeftCorner(n_max + 1, n_max + 1)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("Wigner function") {
  const std::vector<double> origin{0.0};
  CHECK(wigner(fock_density(0, 10), origin, origin).values(0, 0) == doctest::Approx(1.0 / kPi));
  CHECK(wigner(fock_density(1, 10), origin, origin).values(0, 0) == doctest::Approx(-1.0 / kPi));

  const cplx alpha(3.0, 0.0);
  const auto g = uniform_grid(8.0, 81);
  const WignerGrid w = wigner(coherent_density(alpha, 40), g, g);
  double worst = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = 0; j < g.size(); ++j) {
      const double dx = g[i] - std::sqrt(2.0) * 3.0, dp = g[j];
      worst = std::max(worst, std::abs(w.values(i, j) - std::exp(-dx * dx - dp * dp) / kPi));
    }
  CHECK(worst < 1e-7);
  CHECK(w.integral() == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("Wigner projections reproduce the quadrature distributions") {
  const int n_max = 10;
  const CMatrix rho = low_rank_density(n_max, 4);
  const auto s_grid = uniform_grid(8.0, 33);
  const auto t_grid = uniform_grid(8.0, 161);
  const double dt = t_grid[1] - t_grid[0];
  for (double phi : {0.0, kPi / 4.0, kPi / 2.0}) {
    const QuadratureDistribution q = quadrature_distribution(rho, phi, s_grid);
    for (std::size_t i = 0; i < s_grid.size(); ++i) {
      double acc = 0.0;
      for (double t : t_grid) {
        const double x = s_grid[i] * std::cos(phi) - t * std::sin(phi);
        const double p = s_grid[i] * std::sin(phi) + t * std::cos(phi);
        acc += wigner(rho, {x}, {p}).values(0, 0) * dt;
      }
      CAPTURE(phi);
      CHECK(std::abs(acc - q.values[i]) < 1e-3);
    }
  }
}

TEST_CASE("photon statistics") {
  const PhotonStats coh = photon_stats(coherent_density(3.0, 40));
  CHECK(coh.n_bar == doctest::Approx(9.0).epsilon(1e-9));
  CHECK(coh.delta_n == doctest::Approx(3.0).epsilon(1e-8));
  double tv = 0.0, poisson = std::exp(-9.0);
  for (int n = 0; n <= 40; ++n) {
    tv += 0.5 * std::abs(coh.pn[n] - poisson);
    poisson *= 9.0 / (n + 1);
  }
  CHECK(tv < 1e-6);
  const PhotonStats five = photon_stats(fock_density(5, 10));
  CHECK(five.n_bar == doctest::Approx(5.0));
  CHECK(five.delta_n == doctest::Approx(0.0));
}

TEST_CASE("analytic photon-number spread") {
  const double dth = 2.0 * kPi / 21.0;
  const double base = std::sqrt(3.0 * (1.0 + std::cos(dth)) / 2.0);
  CHECK(analytic_delta_n(9.0, dth, 0.0, 1) == doctest::Approx(base));
  CHECK(analytic_delta_n(9.0, dth, 0.0, 15) == doctest::Approx(base));
  CHECK(analytic_delta_n(16.0, 1e-6, 0.0, 3) == doctest::Approx(2.0));
  const double lam = 0.05, N = 4;
  const double s2 = std::pow(std::sin(dth / 2.0), 2);
  const double expected = base + lam * (2.0 + std::cos(dth) - std::cos(N * dth) + std::cos((1.0 - N) * dth) / s2) /
                                     (2.0 * std::sqrt(2.0) * std::sqrt(1.0 + std::cos(dth)));
  CHECK(analytic_delta_n(9.0, dth, lam, 4) == doctest::Approx(expected));
  CHECK_THROWS_AS(analytic_delta_n(9.0, 0.0, 0.1, 3), SingularityError);
  CHECK_THROWS_AS(analytic_delta_n(9.0, 2.0 * kPi, 0.1, 3), SingularityError);
}
