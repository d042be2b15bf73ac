#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "commtopics/nmf.hpp"
#include "commtopics/textvec.hpp"

namespace commtopics {

// Cosine of the angle between two vectors; nullopt when either is zero.
template <typename DerivedA, typename DerivedB>
std::optional<typename DerivedA::Scalar> cosine_similarity(const Eigen::MatrixBase<DerivedA>& a,
                                                           const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  const Scalar norms = a.norm() * b.norm();
  if (norms == Scalar(0)) return std::nullopt;
  return a.dot(b) / norms;
}

using WeightedTerms = std::vector<std::pair<std::string, double>>;

// Largest k entries of each W column (positive only), ties by term.
template <typename Scalar>
std::vector<WeightedTerms> top_topic_terms(const DenseMatrix<Scalar>& w, const std::vector<std::string>& terms,
                                           std::size_t k = 10) {
  std::vector<WeightedTerms> out;
  out.reserve(static_cast<std::size_t>(w.cols()));
  for (Eigen::Index t = 0; t < w.cols(); ++t) {
    out.push_back(top_terms(w.col(t).template cast<double>(), terms, k));
  }
  return out;
}

struct CommunityTopicMap {
  Eigen::Index community_id = 0;
  std::vector<std::pair<Eigen::Index, double>> entries;  // (topic, similarity), descending
  std::optional<std::string> error;
};

// Topics whose basis vector has cosine >= threshold with the community
// centroid. A zero centroid yields an error entry for that community only.
std::vector<CommunityTopicMap> map_communities(const std::vector<CommunityDescription>& descriptions,
                                               const Eigen::MatrixXd& topic_basis, double threshold = 0.1);

}  // namespace commtopics
