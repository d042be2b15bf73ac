#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "commtopics/error.hpp"
#include "commtopics/linalg.hpp"

namespace commtopics {

template <typename Scalar>
struct NndsvdFactors {
  DenseMatrix<Scalar> W;  // terms x rank
  DenseMatrix<Scalar> H;  // rank x documents
  Eigen::Index requested_rank = 0;
  // Below requested_rank when the operand is rank deficient.
  Eigen::Index rank = 0;
};

namespace detail {

template <typename Derived>
void require_non_negative(const Eigen::MatrixBase<Derived>& v, const char* stage) {
  if (v.size() > 0 && !(v.minCoeff() >= typename Derived::Scalar(0))) {
    throw ArgumentError(stage, "matrix must be non-negative and finite");
  }
}

}  // namespace detail

// Non-negative double SVD initialization (Boutsidis & Gallopoulos),
// without random fill: entries that start at zero stay at zero under
// multiplicative updates.
template <typename MatrixType>
NndsvdFactors<typename MatrixType::Scalar> nndsvd_init(const MatrixType& v, Eigen::Index topics) {
  using Scalar = typename MatrixType::Scalar;
  const Eigen::Index m = v.rows();
  const Eigen::Index n = v.cols();
  if (topics < 1 || topics > std::min(m, n)) {
    throw ArgumentError("topics", "topic count must lie in [1, min(terms, documents)]");
  }
  detail::require_non_negative(DenseMatrix<Scalar>(v), "topics");

  const auto svd = randomized_svd(v, topics);
  NndsvdFactors<Scalar> factors;
  factors.requested_rank = topics;
  factors.rank = std::min(topics, numerical_rank<Scalar>(svd.singular_values, m, n));
  if (factors.rank == 0) throw ArgumentError("topics", "matrix is zero; nothing to factorize");

  const Eigen::Index k = factors.rank;
  factors.W = DenseMatrix<Scalar>::Zero(m, k);
  factors.H = DenseMatrix<Scalar>::Zero(k, n);

  const Scalar s0 = std::sqrt(svd.singular_values[0]);
  factors.W.col(0) = s0 * svd.U.col(0).cwiseAbs();
  factors.H.row(0) = s0 * svd.V.col(0).cwiseAbs().transpose();

  for (Eigen::Index j = 1; j < k; ++j) {
    const DenseVector<Scalar> x = svd.U.col(j);
    const DenseVector<Scalar> y = svd.V.col(j);
    const DenseVector<Scalar> xp = x.cwiseMax(Scalar(0));
    const DenseVector<Scalar> xn = (-x).cwiseMax(Scalar(0));
    const DenseVector<Scalar> yp = y.cwiseMax(Scalar(0));
    const DenseVector<Scalar> yn = (-y).cwiseMax(Scalar(0));
    const Scalar xp_norm = xp.norm(), yp_norm = yp.norm();
    const Scalar xn_norm = xn.norm(), yn_norm = yn.norm();
    const Scalar positive_mass = xp_norm * yp_norm;
    const Scalar negative_mass = xn_norm * yn_norm;

    DenseVector<Scalar> u, w;
    Scalar sigma;
    if (positive_mass > negative_mass) {
      u = xp / xp_norm;
      w = yp / yp_norm;
      sigma = positive_mass;
    } else if (negative_mass > Scalar(0)) {
      u = xn / xn_norm;
      w = yn / yn_norm;
      sigma = negative_mass;
    } else {
      continue;
    }
    const Scalar scale = std::sqrt(svd.singular_values[j] * sigma);
    factors.W.col(j) = scale * u;
    factors.H.row(j) = scale * w.transpose();
  }
  // Round-off residue from the SVD is not a real support.
  const Scalar floor = std::numeric_limits<Scalar>::epsilon();
  factors.W = (factors.W.array() < floor).select(Scalar(0), factors.W);
  factors.H = (factors.H.array() < floor).select(Scalar(0), factors.H);
  return factors;
}

struct NmfOptions {
  int max_iterations = 400;
  double tolerance = 1e-5;
  double epsilon = 1e-9;
};

template <typename Scalar>
struct TopicModel {
  DenseMatrix<Scalar> W;  // terms x topics
  DenseMatrix<Scalar> H;  // topics x documents
  Eigen::Index requested_topics = 0;
  // ||V - WH||_F, starting with the NNDSVD initialization.
  std::vector<Scalar> objective_trace;
  int iterations = 0;
  bool converged = false;

  Eigen::Index topics() const { return W.cols(); }
  bool rank_reduced() const { return topics() < requested_topics; }
};

// Lee-Seung multiplicative updates for ||V - WH||_F^2 from NNDSVD factors.
// Stops after max_iterations or when the relative change of the residual
// drops below the tolerance.
template <typename MatrixType>
TopicModel<typename MatrixType::Scalar> nmf(const MatrixType& v, Eigen::Index topics, const NmfOptions& options = {}) {
  using Scalar = typename MatrixType::Scalar;
  auto init = nndsvd_init(v, topics);
  const DenseMatrix<Scalar> dense = v;
  const auto eps = static_cast<Scalar>(options.epsilon);

  TopicModel<Scalar> model;
  model.requested_topics = topics;
  model.W = std::move(init.W);
  model.H = std::move(init.H);
  model.objective_trace.push_back((dense - model.W * model.H).norm());

  for (int iteration = 1; iteration <= options.max_iterations; ++iteration) {
    const DenseMatrix<Scalar> wt_v = DenseMatrix<Scalar>(v.transpose() * model.W).transpose();
    const DenseMatrix<Scalar> h_denominator = (model.W.transpose() * model.W) * model.H;
    model.H = (model.H.array() * wt_v.array() / (h_denominator.array() + eps)).matrix();
    const DenseMatrix<Scalar> v_ht = v * model.H.transpose();
    const DenseMatrix<Scalar> w_denominator = model.W * (model.H * model.H.transpose());
    model.W = (model.W.array() * v_ht.array() / (w_denominator.array() + eps)).matrix();

    if (!model.W.allFinite() || !model.H.allFinite()) {
      throw NumericalError("topics", "non-finite factor entries at iteration " + std::to_string(iteration));
    }
    const Scalar residual = (dense - model.W * model.H).norm();
    const Scalar previous = model.objective_trace.back();
    model.objective_trace.push_back(residual);
    model.iterations = iteration;
    const Scalar change = std::abs(previous - residual);
    if (previous == Scalar(0) || change / previous < static_cast<Scalar>(options.tolerance)) {
      model.converged = true;
      break;
    }
  }
  return model;
}

}  // namespace commtopics
