#pragma once

// Small dense helpers shared by the unit tests. They are written against
// plain Eigen so they can serve as oracles for the library.

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <complex>
#include <random>

namespace support {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline Mat annihilation(int n_max) {
  Mat a = Mat::Zero(n_max + 1, n_max + 1);
  for (int n = 1; n <= n_max; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

// Column-stacking vectorization: vec(A X B) = (B^T kron A) vec(X).
inline Vec vec(const Mat& m) { return Eigen::Map<const Vec>(m.data(), m.size()); }
inline Mat unvec(const Vec& v, Eigen::Index n) { return Eigen::Map<const Mat>(v.data(), n, n); }

// Superoperator of -i[H, .] + sum_k c_k D[L_k].
inline Mat liouvillian(const Mat& H, const std::vector<std::pair<double, Mat>>& jumps) {
  const Eigen::Index n = H.rows();
  const Mat I = Mat::Identity(n, n);
  const cplx i(0.0, 1.0);
  Mat L = -i * (kron(I, H) - kron(H.transpose(), I));
  for (const auto& [rate, J] : jumps) {
    const Mat JdJ = J.adjoint() * J;
    L += rate * (kron(J.conjugate(), J) - 0.5 * kron(I, JdJ) - 0.5 * kron(JdJ.transpose(), I));
  }
  return L;
}

inline Mat random_density(int dim, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  Mat a(dim, dim);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = cplx(g(rng), g(rng));
  Mat rho = a * a.adjoint();
  return rho / rho.trace();
}

}  // namespace support
