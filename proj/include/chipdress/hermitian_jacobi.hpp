#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <vector>

#include <Eigen/Core>

namespace chipdress {

/// Cyclic Jacobi eigensolver for small dense Hermitian (or real symmetric)
/// matrices. Eigenvalues are returned in ascending order with the matching
/// eigenvectors as columns.
///
/// Each pivot first removes the phase of A(p,q) with a diagonal unitary and
/// then applies a real Givens rotation, so the iteration never leaves the
/// Hermitian manifold. Sweeps stop when the off-diagonal Frobenius norm falls
/// below `relative_tolerance` times the norm of the input.
template <typename MatrixType>
class HermitianJacobi {
 public:
  using Scalar = typename MatrixType::Scalar;
  using RealScalar = typename Eigen::NumTraits<Scalar>::Real;
  using RealVector = Eigen::Matrix<RealScalar, MatrixType::RowsAtCompileTime, 1>;

  explicit HermitianJacobi(const MatrixType& matrix, RealScalar relative_tolerance = RealScalar(1e-14),
                           int max_sweeps = 64) {
    compute(matrix, relative_tolerance, max_sweeps);
  }

  const RealVector& eigenvalues() const { return eigenvalues_; }
  const MatrixType& eigenvectors() const { return eigenvectors_; }
  int sweeps() const { return sweeps_; }
  bool converged() const { return converged_; }

 private:
  static RealScalar off_norm2(const MatrixType& a) {
    RealScalar s(0);
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      for (Eigen::Index j = 0; j < a.cols(); ++j)
        if (i != j) s += std::norm(a(i, j));
    return s;
  }

  void compute(const MatrixType& matrix, RealScalar relative_tolerance, int max_sweeps) {
    const Eigen::Index n = matrix.rows();
    MatrixType a = matrix;
    MatrixType v = MatrixType::Identity(n, n);
    const RealScalar target = relative_tolerance * matrix.norm();
    const RealScalar target2 = target * target;

    converged_ = off_norm2(a) <= target2;
    for (sweeps_ = 0; !converged_ && sweeps_ < max_sweeps; ++sweeps_) {
      for (Eigen::Index p = 0; p < n - 1; ++p) {
        for (Eigen::Index q = p + 1; q < n; ++q) {
          const RealScalar mag = std::abs(a(p, q));
          if (mag == RealScalar(0)) continue;

          if constexpr (Eigen::NumTraits<Scalar>::IsComplex) {
            // D = diag(..., e^{-i phi} at q, ...) makes A(p,q) real positive.
            const Scalar phase = std::conj(a(p, q)) / mag;
            a.col(q) *= phase;
            a.row(q) *= std::conj(phase);
            v.col(q) *= phase;
            a(p, q) = Scalar(mag);
            a(q, p) = Scalar(mag);
          }

          const RealScalar app = std::real(a(p, p));
          const RealScalar aqq = std::real(a(q, q));
          const RealScalar theta = (aqq - app) / (RealScalar(2) * mag);
          const RealScalar t = (theta >= RealScalar(0) ? RealScalar(1) : RealScalar(-1)) /
                               (std::abs(theta) + std::sqrt(theta * theta + RealScalar(1)));
          const RealScalar c = RealScalar(1) / std::sqrt(t * t + RealScalar(1));
          const RealScalar s = t * c;

          for (Eigen::Index k = 0; k < n; ++k) {
            const Scalar akp = a(k, p), akq = a(k, q);
            a(k, p) = c * akp - s * akq;
            a(k, q) = s * akp + c * akq;
          }
          for (Eigen::Index k = 0; k < n; ++k) {
            const Scalar apk = a(p, k), aqk = a(q, k);
            a(p, k) = c * apk - s * aqk;
            a(q, k) = s * apk + c * aqk;
          }
          for (Eigen::Index k = 0; k < n; ++k) {
            const Scalar vkp = v(k, p), vkq = v(k, q);
            v(k, p) = c * vkp - s * vkq;
            v(k, q) = s * vkp + c * vkq;
          }
          a(p, q) = Scalar(0);
          a(q, p) = Scalar(0);
        }
      }
      converged_ = off_norm2(a) <= target2;
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index(0));
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index i, Eigen::Index j) { return std::real(a(i, i)) < std::real(a(j, j)); });
    eigenvalues_.resize(n);
    eigenvectors_.resize(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
      eigenvalues_(k) = std::real(a(order[k], order[k]));
      eigenvectors_.col(k) = v.col(order[k]);
    }
  }

  RealVector eigenvalues_;
  MatrixType eigenvectors_;
  int sweeps_ = 0;
  bool converged_ = false;
};

}  // namespace chipdress
