#include "quincunx/hilbert.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

#include "quincunx/errors.hpp"

namespace quincunx {

FockCutoff::FockCutoff(int n_max) : n_max_(n_max) {
  if (n_max < 1) {
    throw CutoffTooSmallError("Fock cutoff n_max must be >= 1, got " + std::to_string(n_max));
  }
}

JointState::JointState(CVector amplitudes, FockCutoff cutoff)
    : amplitudes_(std::move(amplitudes)), cutoff_(cutoff) {
  if (amplitudes_.size() != cutoff_.joint_dim()) {
    throw InvalidStateError("joint state has wrong dimension");
  }
}

JointDensity::JointDensity(CMatrix matrix, FockCutoff cutoff)
    : matrix_(std::move(matrix)), cutoff_(cutoff) {
  const int dim = cutoff_.joint_dim();
  if (matrix_.rows() != dim || matrix_.cols() != dim) {
    throw InvalidStateError("density matrix has wrong dimension");
  }
  const double herm = (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff();
  if (herm > 1e-10) {
    std::ostringstream msg;
    msg << "density matrix is not Hermitian (max deviation " << herm << ")";
    throw InvalidStateError(msg.str());
  }
  if (std::abs(trace() - 1.0) > 1e-8) {
    std::ostringstream msg;
    msg.precision(12);
    msg << "density matrix trace " << trace() << " differs from 1";
    throw InvalidStateError(msg.str());
  }
}

JointDensity JointDensity::from_state(const JointState& state) {
  const CVector& psi = state.amplitudes();
  return JointDensity(psi * psi.adjoint(), state.cutoff());
}

double JointDensity::purity() const { return (matrix_ * matrix_).trace().real(); }

double JointDensity::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(matrix_, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

void JointDensity::validate() const {
  const double lowest = min_eigenvalue();
  if (lowest < -1e-8) {
    std::ostringstream msg;
    msg << "density matrix is not positive semidefinite (min eigenvalue " << lowest << ")";
    throw InvalidStateError(msg.str());
  }
}

OperatorSet::OperatorSet(FockCutoff cut) : cutoff(cut) {
  const int nw = cutoff.walker_dim();
  a = CMatrix::Zero(nw, nw);
  for (int n = 1; n < nw; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  a_dagger = a.adjoint();
  n_op = CMatrix::Zero(nw, nw);
  for (int n = 0; n < nw; ++n) n_op(n, n) = n;

  sigma_plus = CMatrix::Zero(2, 2);
  sigma_plus(0, 1) = 1.0;
  sigma_minus = sigma_plus.adjoint();
  sigma_x = sigma_plus + sigma_minus;
  sigma_y = CMatrix::Zero(2, 2);
  sigma_y(0, 1) = -kI;
  sigma_y(1, 0) = kI;
  sigma_z = CMatrix::Zero(2, 2);
  sigma_z(0, 0) = 1.0;
  sigma_z(1, 1) = -1.0;

  A = lift_walker(a);
  A_dagger = lift_walker(a_dagger);
  N = lift_walker(n_op);
  SigmaPlus = lift_coin(sigma_plus);
  SigmaMinus = lift_coin(sigma_minus);
  SigmaX = lift_coin(sigma_x);
  SigmaY = lift_coin(sigma_y);
  SigmaZ = lift_coin(sigma_z);

  A_sparse = A.sparseView();
  SigmaMinus_sparse = SigmaMinus.sparseView();
}

CMatrix OperatorSet::lift_coin(const CMatrix& coin_op) const {
  const int nw = cutoff.walker_dim();
  CMatrix out = CMatrix::Zero(2 * nw, 2 * nw);
  for (int c = 0; c < 2; ++c) {
    for (int d = 0; d < 2; ++d) {
      out.block(c * nw, d * nw, nw, nw) = coin_op(c, d) * CMatrix::Identity(nw, nw);
    }
  }
  return out;
}

CMatrix OperatorSet::lift_walker(const CMatrix& walker_op) const {
  const int nw = cutoff.walker_dim();
  CMatrix out = CMatrix::Zero(2 * nw, 2 * nw);
  out.block(0, 0, nw, nw) = walker_op;
  out.block(nw, nw, nw, nw) = walker_op;
  return out;
}

CVector coherent_state(cplx alpha, FockCutoff cutoff) {
  const double mag = std::abs(alpha);
  if (mag * mag + 5.0 * mag > cutoff.n_max()) {
    std::ostringstream msg;
    msg << "Fock cutoff n_max=" << cutoff.n_max() << " too small for coherent amplitude |alpha|=" << mag
        << " (need n_max >= |alpha|^2 + 5|alpha| = " << mag * mag + 5.0 * mag << ")";
    throw CutoffTooSmallError(msg.str());
  }
  const int nw = cutoff.walker_dim();
  CVector c(nw);
  // c_n = c_{n-1} * alpha / sqrt(n) avoids factorial overflow.
  c(0) = std::exp(-0.5 * mag * mag);
  for (int n = 1; n < nw; ++n) c(n) = c(n - 1) * alpha / std::sqrt(static_cast<double>(n));
  c.normalize();
  return c;
}

JointState product_state(const CVector& coin, const CVector& walker, FockCutoff cutoff) {
  const int nw = cutoff.walker_dim();
  if (coin.size() != 2 || walker.size() != nw) {
    throw InvalidStateError("product_state: factor dimensions do not match cutoff");
  }
  CVector psi(2 * nw);
  psi.head(nw) = coin(0) * walker;
  psi.tail(nw) = coin(1) * walker;
  return JointState(std::move(psi), cutoff);
}

JointState prepare_initial_joint(cplx alpha, FockCutoff cutoff) {
  CVector coin(2);
  coin << 1.0 / std::sqrt(2.0), kI / std::sqrt(2.0);
  return product_state(coin, coherent_state(alpha, cutoff), cutoff);
}

CMatrix partial_trace_coin(const CMatrix& rho, FockCutoff cutoff) {
  const int nw = cutoff.walker_dim();
  return rho.block(0, 0, nw, nw) + rho.block(nw, nw, nw, nw);
}

CMatrix partial_trace_coin(const JointDensity& rho) { return partial_trace_coin(rho.matrix(), rho.cutoff()); }

CMatrix partial_trace_walker(const CMatrix& rho, FockCutoff cutoff) {
  const int nw = cutoff.walker_dim();
  CMatrix out(2, 2);
  for (int c = 0; c < 2; ++c) {
    for (int d = 0; d < 2; ++d) out(c, d) = rho.block(c * nw, d * nw, nw, nw).trace();
  }
  return out;
}

}  // namespace quincunx
