#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "commtopics/ingest.hpp"

namespace commtopics {

struct Vocabulary {
  std::vector<std::string> terms;  // lexicographic
  std::vector<int> document_frequency;  // aligned with terms
  int min_df = 4;
  int min_doc_terms = 10;

  std::optional<Eigen::Index> find(const std::string& term) const;
};

struct VocabularyResult {
  Vocabulary vocabulary;
  std::vector<ProfileDocument> documents;  // retained, terms restricted to the vocabulary
  std::size_t input_documents = 0;
  std::size_t input_terms = 0;
};

// Alternates the term filter (df >= min_df) and the document filter
// (>= min_doc_terms tokens) until neither removes anything. Throws DataError
// when the vocabulary ends up empty.
VocabularyResult build_vocabulary(const std::vector<ProfileDocument>& documents, int min_df = 4,
                                  int min_doc_terms = 10);

// Terms x documents, unit-norm columns. Documents whose weights are all
// zero (every term ubiquitous) have no column and are listed in `dropped`.
struct ProfileMatrix {
  Eigen::SparseMatrix<double> values;
  std::vector<std::string> terms;
  std::vector<AccountId> doc_ids;
  std::vector<AccountId> dropped;

  std::optional<Eigen::Index> column(const AccountId& id) const;
  void rebuild_index();

 private:
  std::unordered_map<AccountId, Eigen::Index> column_index_;
};

// (1 + ln tf) * ln(N / df) per entry, then L2-normalized per document.
ProfileMatrix tfidf(const std::vector<ProfileDocument>& documents, const Vocabulary& vocabulary);

struct CommunityDescription {
  Eigen::Index community_id = 0;
  Eigen::VectorXd centroid;  // mean of the members' columns
  std::vector<std::pair<std::string, double>> top_terms;
  std::size_t profiled_members = 0;
  std::size_t unprofiled_members = 0;
};

// Positive entries of `weights`, largest first, ties by term; at most k.
std::vector<std::pair<std::string, double>> top_terms(const Eigen::Ref<const Eigen::VectorXd>& weights,
                                                      const std::vector<std::string>& terms,
                                                      std::size_t k = 10);

CommunityDescription describe_community(Eigen::Index community_id, const std::vector<AccountId>& members,
                                        const ProfileMatrix& profiles, std::size_t k = 10);

// MatrixMarket coordinate export plus one-per-line term and document files.
void write_matrix_market(std::ostream& out, const Eigen::SparseMatrix<double>& matrix);
Eigen::SparseMatrix<double> read_matrix_market(std::istream& in);
void write_profile_matrix(const std::filesystem::path& directory, const ProfileMatrix& profiles);
ProfileMatrix read_profile_matrix(const std::filesystem::path& directory);

}  // namespace commtopics
