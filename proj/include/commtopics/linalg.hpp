#pragma once

#include <algorithm>
#include <cstdint>

#include <Eigen/Core>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <Eigen/SparseCore>

#include "commtopics/random.hpp"

namespace commtopics {

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using DenseVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

inline constexpr std::uint64_t kSvdSeed = 0x5eed5eed2718281ULL;

template <typename Scalar>
struct TruncatedSvd {
  DenseMatrix<Scalar> U;
  DenseVector<Scalar> singular_values;
  DenseMatrix<Scalar> V;
};

// Orthonormal basis of the column space via thin Householder QR.
template <typename Derived>
DenseMatrix<typename Derived::Scalar> orthonormalize(const Eigen::MatrixBase<Derived>& basis) {
  using Scalar = typename Derived::Scalar;
  Eigen::HouseholderQR<DenseMatrix<Scalar>> qr(basis);
  DenseMatrix<Scalar> q = qr.householderQ() * DenseMatrix<Scalar>::Identity(basis.rows(), basis.cols());
  return q;
}

// Uniform [-1, 1) test matrix drawn column by column from a fixed stream.
template <typename Scalar>
DenseMatrix<Scalar> random_test_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  Rng rng(seed);
  DenseMatrix<Scalar> omega(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) omega(i, j) = static_cast<Scalar>(2.0 * rng.uniform() - 1.0);
  }
  return omega;
}

// Rank-`rank` SVD by randomized subspace iteration. Works for dense and
// sparse operands; deterministic for a fixed seed. Each singular pair is
// sign-normalized so the largest-magnitude entry of U's column is positive.
template <typename MatrixType>
TruncatedSvd<typename MatrixType::Scalar> randomized_svd(const MatrixType& a, Eigen::Index rank,
                                                         int power_iterations = 4,
                                                         Eigen::Index oversampling = 10,
                                                         std::uint64_t seed = kSvdSeed) {
  using Scalar = typename MatrixType::Scalar;
  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();
  const Eigen::Index width = std::min(rank + oversampling, std::min(m, n));
  rank = std::min(rank, width);

  DenseMatrix<Scalar> q = orthonormalize(DenseMatrix<Scalar>(a * random_test_matrix<Scalar>(n, width, seed)));
  for (int it = 0; it < power_iterations; ++it) {
    DenseMatrix<Scalar> z = orthonormalize(DenseMatrix<Scalar>(a.transpose() * q));
    q = orthonormalize(DenseMatrix<Scalar>(a * z));
  }
  // B = Q^T A, formed as (A^T Q)^T so sparse operands stay on the left.
  DenseMatrix<Scalar> b = DenseMatrix<Scalar>(a.transpose() * q).transpose();
  Eigen::JacobiSVD<DenseMatrix<Scalar>> svd(b, Eigen::ComputeThinU | Eigen::ComputeThinV);

  TruncatedSvd<Scalar> result;
  result.U = q * svd.matrixU().leftCols(rank);
  result.singular_values = svd.singularValues().head(rank);
  result.V = svd.matrixV().leftCols(rank);
  for (Eigen::Index k = 0; k < rank; ++k) {
    Eigen::Index pivot = 0;
    result.U.col(k).cwiseAbs().maxCoeff(&pivot);
    if (result.U(pivot, k) < Scalar(0)) {
      result.U.col(k) *= Scalar(-1);
      result.V.col(k) *= Scalar(-1);
    }
  }
  return result;
}

// Number of singular values above max(m, n) * eps * sigma_max.
template <typename Scalar>
Eigen::Index numerical_rank(const DenseVector<Scalar>& singular_values, Eigen::Index rows, Eigen::Index cols) {
  if (singular_values.size() == 0 || singular_values[0] <= Scalar(0)) return 0;
  const Scalar cutoff = static_cast<Scalar>(std::max(rows, cols)) * Eigen::NumTraits<Scalar>::epsilon() *
                        singular_values[0];
  return (singular_values.array() > cutoff).count();
}

}  // namespace commtopics
