#include "commtopics/topics.hpp"

#include <algorithm>

#include "commtopics/error.hpp"

namespace commtopics {

std::vector<CommunityTopicMap> map_communities(const std::vector<CommunityDescription>& descriptions,
                                               const Eigen::MatrixXd& topic_basis, double threshold) {
  std::vector<CommunityTopicMap> maps;
  maps.reserve(descriptions.size());
  for (const auto& description : descriptions) {
    if (description.centroid.size() != topic_basis.rows()) {
      throw ArgumentError("map", "community description and topic basis use different vocabularies");
    }
    CommunityTopicMap map;
    map.community_id = description.community_id;
    if (description.centroid.norm() == 0.0) {
      map.error = "zero description vector; cosine similarity undefined";
      maps.push_back(std::move(map));
      continue;
    }
    for (Eigen::Index t = 0; t < topic_basis.cols(); ++t) {
      const auto similarity = cosine_similarity(description.centroid, topic_basis.col(t));
      if (similarity && *similarity >= threshold) map.entries.emplace_back(t, *similarity);
    }
    std::stable_sort(map.entries.begin(), map.entries.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    maps.push_back(std::move(map));
  }
  return maps;
}

}  // namespace commtopics
