#pragma once

// Small closed-form reference walks used as oracles for the full simulator:
// the ideal coined walk on a d-cycle, the exact classical random walk on the
// same cycle, and the displaced-circle approximation in Fock space.

#include <vector>

#include "quincunx/hilbert.hpp"

namespace quincunx {

// Amplitudes indexed coin * d + site, site m at theta_m = 2 pi m / d.
struct CycleWalkState {
  int d = 0;
  CVector amplitudes;

  std::vector<double> site_probabilities() const;
};

// Symmetric coin (|0> + i|1>)/sqrt(2).
CVector symmetric_coin();

// Walker on site 0 with the given coin state.
CycleWalkState cycle_initial_state(int d, const CVector& coin);

// Hadamard |+><0| + |-><1| on the coin, then coin 0 -> site m+1, coin 1 -> m-1.
CycleWalkState ideal_qw_step(const CycleWalkState& state);

struct SigmaSequence {
  std::vector<double> sigma;  // Holevo sigma after 0..N steps
  bool wraparound_warning = false;
};

// Holevo sigma of the site marginal per step; warns when N >= d/2.
SigmaSequence ideal_qw_sigma(int d, int n_steps, const CVector& coin);

// Site distributions after 0..N steps of the +-1 walk with step-up
// probability p, by exact convolution on the cycle.
std::vector<std::vector<double>> classical_rw_dist(int d, int n_steps, double p = 0.5);

SigmaSequence classical_rw_sigma(int d, int n_steps, double p = 0.5);

// One step of the walk embedded in Fock space: coin Hadamard with walker
// displacement D(i lambda/sqrt(2)) (matrix exponential), then the conditional
// rotation exp(i n sz dtheta).
class DisplacedCircleWalk {
 public:
  DisplacedCircleWalk(FockCutoff cutoff, double delta_theta, double lambda);

  JointState step(const JointState& state) const;
  const CMatrix& unitary() const { return unitary_; }

 private:
  FockCutoff cutoff_;
  CMatrix unitary_;
};

JointState displaced_circle_step(const JointState& state, double delta_theta, double lambda);

}  // namespace quincunx
