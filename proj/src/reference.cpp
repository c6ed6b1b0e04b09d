#include "quincunx/reference.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

#include "quincunx/errors.hpp"
#include "quincunx/observables.hpp"

namespace quincunx {

std::vector<double> CycleWalkState::site_probabilities() const {
  std::vector<double> p(d, 0.0);
  for (int c = 0; c < 2; ++c) {
    for (int m = 0; m < d; ++m) p[m] += std::norm(amplitudes(c * d + m));
  }
  return p;
}

CVector symmetric_coin() {
  CVector coin(2);
  coin << 1.0 / std::sqrt(2.0), kI / std::sqrt(2.0);
  return coin;
}

CycleWalkState cycle_initial_state(int d, const CVector& coin) {
  if (d < 2) throw ConfigError("cycle walk needs d >= 2");
  if (coin.size() != 2) throw InvalidStateError("coin state must have two components");
  CycleWalkState s;
  s.d = d;
  s.amplitudes = CVector::Zero(2 * d);
  s.amplitudes(0) = coin(0);
  s.amplitudes(d) = coin(1);
  return s;
}

CycleWalkState ideal_qw_step(const CycleWalkState& state) {
  const int d = state.d;
  const double h = 1.0 / std::sqrt(2.0);
  CycleWalkState out;
  out.d = d;
  out.amplitudes = CVector::Zero(2 * d);
  for (int m = 0; m < d; ++m) {
    const cplx u = state.amplitudes(m);
    const cplx v = state.amplitudes(d + m);
    const cplx up = h * (u + v);
    const cplx down = h * (u - v);
    out.amplitudes((m + 1) % d) += up;
    out.amplitudes(d + (m - 1 + d) % d) += down;
  }
  return out;
}

SigmaSequence ideal_qw_sigma(int d, int n_steps, const CVector& coin) {
  SigmaSequence seq;
  seq.wraparound_warning = 2 * n_steps >= d;
  CycleWalkState s = cycle_initial_state(d, coin);
  seq.sigma.push_back(holevo_std(distribution_from_sites(s.site_probabilities())));
  for (int j = 0; j < n_steps; ++j) {
    s = ideal_qw_step(s);
    seq.sigma.push_back(holevo_std(distribution_from_sites(s.site_probabilities())));
  }
  return seq;
}

std::vector<std::vector<double>> classical_rw_dist(int d, int n_steps, double p) {
  if (d < 2) throw ConfigError("cycle walk needs d >= 2");
  if (p < 0.0 || p > 1.0) throw ConfigError("step probability must lie in [0, 1]");
  std::vector<std::vector<double>> out;
  std::vector<double> cur(d, 0.0);
  cur[0] = 1.0;
  out.push_back(cur);
  for (int j = 0; j < n_steps; ++j) {
    std::vector<double> next(d, 0.0);
    for (int m = 0; m < d; ++m) {
      next[(m + 1) % d] += p * cur[m];
      next[(m - 1 + d) % d] += (1.0 - p) * cur[m];
    }
    cur = std::move(next);
    out.push_back(cur);
  }
  return out;
}

SigmaSequence classical_rw_sigma(int d, int n_steps, double p) {
  SigmaSequence seq;
  seq.wraparound_warning = 2 * n_steps >= d;
  for (const auto& dist : classical_rw_dist(d, n_steps, p)) seq.sigma.push_back(holevo_std(distribution_from_sites(dist)));
  return seq;
}

DisplacedCircleWalk::DisplacedCircleWalk(FockCutoff cutoff, double delta_theta, double lambda) : cutoff_(cutoff) {
  const OperatorSet ops(cutoff);
  const cplx gamma = kI * lambda / std::sqrt(2.0);
  const CMatrix generator = gamma * ops.a_dagger - std::conj(gamma) * ops.a;
  const CMatrix displacement = generator.exp();

  CMatrix hadamard(2, 2);
  hadamard << 1.0, 1.0, 1.0, -1.0;
  hadamard /= std::sqrt(2.0);

  const int nw = cutoff.walker_dim();
  CMatrix kick = CMatrix::Zero(2 * nw, 2 * nw);
  for (int c = 0; c < 2; ++c) {
    for (int e = 0; e < 2; ++e) kick.block(c * nw, e * nw, nw, nw) = hadamard(c, e) * displacement;
  }
  CVector rotation(2 * nw);
  for (int c = 0; c < 2; ++c) {
    const double sz = c == 0 ? 1.0 : -1.0;
    for (int n = 0; n < nw; ++n) rotation(cutoff.index(c, n)) = std::exp(kI * (n * sz * delta_theta));
  }
  unitary_ = rotation.asDiagonal() * kick;
}

JointState DisplacedCircleWalk::step(const JointState& state) const {
  if (!(state.cutoff() == cutoff_)) throw InvalidStateError("state cutoff does not match the walk");
  return JointState(unitary_ * state.amplitudes(), cutoff_);
}

JointState displaced_circle_step(const JointState& state, double delta_theta, double lambda) {
  return DisplacedCircleWalk(state.cutoff(), delta_theta, lambda).step(state);
}

}  // namespace quincunx
