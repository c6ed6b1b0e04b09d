#pragma once

// Truncated coin (qubit) x walker (resonator) state space.
//
// Joint basis ordering: index = coin * (n_max + 1) + fock. Coin |0> is the +1
// eigenstate of sigma_z and sigma_minus = |1><0|.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>

namespace quincunx {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using SparseCMatrix = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

inline constexpr cplx kI{0.0, 1.0};

class FockCutoff {
 public:
  explicit FockCutoff(int n_max);

  int n_max() const { return n_max_; }
  int walker_dim() const { return n_max_ + 1; }
  int joint_dim() const { return 2 * (n_max_ + 1); }
  int index(int coin, int fock) const { return coin * (n_max_ + 1) + fock; }

  friend bool operator==(const FockCutoff&, const FockCutoff&) = default;

 private:
  int n_max_;
};

class JointState {
 public:
  JointState(CVector amplitudes, FockCutoff cutoff);

  const CVector& amplitudes() const { return amplitudes_; }
  const FockCutoff& cutoff() const { return cutoff_; }
  double norm_squared() const { return amplitudes_.squaredNorm(); }

 private:
  CVector amplitudes_;
  FockCutoff cutoff_;
};

class JointDensity {
 public:
  // Validates Hermiticity (1e-10) and trace (1e-8); positivity is checked by
  // validate() since it needs an eigendecomposition.
  JointDensity(CMatrix matrix, FockCutoff cutoff);

  static JointDensity from_state(const JointState& state);

  const CMatrix& matrix() const { return matrix_; }
  const FockCutoff& cutoff() const { return cutoff_; }

  double trace() const { return matrix_.trace().real(); }
  double purity() const;
  double min_eigenvalue() const;

  // Full invariant check including positive semidefiniteness (-1e-8).
  void validate() const;

 private:
  CMatrix matrix_;
  FockCutoff cutoff_;
};

// Walker, coin and lifted joint-space operators. Dense copies are kept for
// algebra and tests; the sparse forms drive the integrator.
struct OperatorSet {
  explicit OperatorSet(FockCutoff cutoff);

  FockCutoff cutoff;

  // walker space
  CMatrix a, a_dagger, n_op;
  // coin space
  CMatrix sigma_plus, sigma_minus, sigma_x, sigma_y, sigma_z;
  // joint space
  CMatrix A, A_dagger, N, SigmaPlus, SigmaMinus, SigmaX, SigmaY, SigmaZ;

  SparseCMatrix A_sparse, SigmaMinus_sparse;

  CMatrix lift_coin(const CMatrix& coin_op) const;
  CMatrix lift_walker(const CMatrix& walker_op) const;
};

// Coherent state amplitudes c_n = exp(-|alpha|^2/2) alpha^n / sqrt(n!),
// renormalized after truncation. Throws CutoffTooSmallError unless
// |alpha|^2 + 5|alpha| <= n_max.
CVector coherent_state(cplx alpha, FockCutoff cutoff);

// (|0> + i|1>)/sqrt(2) tensored with |alpha>.
JointState prepare_initial_joint(cplx alpha, FockCutoff cutoff);

JointState product_state(const CVector& coin, const CVector& walker, FockCutoff cutoff);

CMatrix partial_trace_coin(const JointDensity& rho);
CMatrix partial_trace_coin(const CMatrix& rho, FockCutoff cutoff);

// Reduced coin density matrix (2x2).
CMatrix partial_trace_walker(const CMatrix& rho, FockCutoff cutoff);

}  // namespace quincunx
