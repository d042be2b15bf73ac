#include "commtopics/textvec.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "commtopics/error.hpp"
#include "commtopics/io.hpp"

namespace commtopics {

namespace {

constexpr const char* kStage = "describe";

std::map<std::string, int> document_frequencies(const std::vector<ProfileDocument>& documents) {
  std::map<std::string, int> df;
  for (const auto& doc : documents) {
    for (const auto& [term, count] : doc.term_counts) {
      if (count > 0) ++df[term];
    }
  }
  return df;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  auto in = io::open_input(path, kStage);
  std::vector<std::string> lines;
  std::string raw;
  while (std::getline(in, raw)) lines.emplace_back(io::trim_line(raw, lines.empty()));
  return lines;
}

}  // namespace

std::optional<Eigen::Index> Vocabulary::find(const std::string& term) const {
  auto it = std::lower_bound(terms.begin(), terms.end(), term);
  if (it == terms.end() || *it != term) return std::nullopt;
  return static_cast<Eigen::Index>(it - terms.begin());
}

VocabularyResult build_vocabulary(const std::vector<ProfileDocument>& documents, int min_df,
                                  int min_doc_terms) {
  if (documents.empty()) throw DataError(kStage, "no profile documents to build a vocabulary from");
  VocabularyResult result;
  result.input_documents = documents.size();
  result.input_terms = document_frequencies(documents).size();

  std::vector<ProfileDocument> current = documents;
  std::map<std::string, int> df;
  while (true) {
    df = document_frequencies(current);
    std::set<std::string> rare;
    for (const auto& [term, count] : df) {
      if (count < min_df) rare.insert(term);
    }
    std::vector<ProfileDocument> next;
    next.reserve(current.size());
    for (auto& doc : current) {
      std::erase_if(doc.term_counts, [&](const auto& entry) {
        return entry.second <= 0 || rare.count(entry.first) > 0;
      });
      if (doc.token_count() >= static_cast<std::size_t>(std::max(min_doc_terms, 0))) {
        next.push_back(std::move(doc));
      }
    }
    const bool stable = rare.empty() && next.size() == current.size();
    current = std::move(next);
    if (stable) break;
  }
  df = document_frequencies(current);
  if (df.empty()) {
    throw DataError(kStage, "empty vocabulary after filtering (" + std::to_string(result.input_terms) +
                                " terms over " + std::to_string(result.input_documents) +
                                " documents; " + std::to_string(current.size()) + " documents retained, min_df=" +
                                std::to_string(min_df) + ", min_doc_terms=" + std::to_string(min_doc_terms) + ")");
  }
  result.vocabulary.min_df = min_df;
  result.vocabulary.min_doc_terms = min_doc_terms;
  for (const auto& [term, count] : df) {
    result.vocabulary.terms.push_back(term);
    result.vocabulary.document_frequency.push_back(count);
  }
  result.documents = std::move(current);
  return result;
}

std::optional<Eigen::Index> ProfileMatrix::column(const AccountId& id) const {
  auto it = column_index_.find(id);
  if (it == column_index_.end()) return std::nullopt;
  return it->second;
}

void ProfileMatrix::rebuild_index() {
  column_index_.clear();
  for (std::size_t i = 0; i < doc_ids.size(); ++i) column_index_.emplace(doc_ids[i], static_cast<Eigen::Index>(i));
}

ProfileMatrix tfidf(const std::vector<ProfileDocument>& documents, const Vocabulary& vocabulary) {
  const auto n_docs = static_cast<double>(documents.size());
  ProfileMatrix profiles;
  profiles.terms = vocabulary.terms;

  std::vector<Eigen::Triplet<double>> triplets;
  std::vector<std::pair<Eigen::Index, double>> column;
  for (const auto& doc : documents) {
    column.clear();
    double norm_squared = 0.0;
    for (const auto& [term, tf] : doc.term_counts) {
      if (tf <= 0) continue;
      const auto row = vocabulary.find(term);
      if (!row) continue;
      const double df = vocabulary.document_frequency[static_cast<std::size_t>(*row)];
      const double weight = (1.0 + std::log(static_cast<double>(tf))) * std::log(n_docs / df);
      if (weight == 0.0) continue;
      column.emplace_back(*row, weight);
      norm_squared += weight * weight;
    }
    if (norm_squared == 0.0) {
      profiles.dropped.push_back(doc.account_id);
      continue;
    }
    const double norm = std::sqrt(norm_squared);
    const auto col = static_cast<Eigen::Index>(profiles.doc_ids.size());
    for (const auto& [row, weight] : column) triplets.emplace_back(row, col, weight / norm);
    profiles.doc_ids.push_back(doc.account_id);
  }
  profiles.values.resize(static_cast<Eigen::Index>(profiles.terms.size()),
                         static_cast<Eigen::Index>(profiles.doc_ids.size()));
  profiles.values.setFromTriplets(triplets.begin(), triplets.end());
  profiles.values.makeCompressed();
  profiles.rebuild_index();
  return profiles;
}

std::vector<std::pair<std::string, double>> top_terms(const Eigen::Ref<const Eigen::VectorXd>& weights,
                                                      const std::vector<std::string>& terms,
                                                      std::size_t k) {
  std::vector<Eigen::Index> order;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    if (weights[i] > 0.0) order.push_back(i);
  }
  auto before = [&](Eigen::Index a, Eigen::Index b) {
    if (weights[a] != weights[b]) return weights[a] > weights[b];
    return terms[static_cast<std::size_t>(a)] < terms[static_cast<std::size_t>(b)];
  };
  const std::size_t keep = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(), before);
  std::vector<std::pair<std::string, double>> out;
  for (std::size_t i = 0; i < keep; ++i) out.emplace_back(terms[static_cast<std::size_t>(order[i])], weights[order[i]]);
  return out;
}

CommunityDescription describe_community(Eigen::Index community_id, const std::vector<AccountId>& members,
                                        const ProfileMatrix& profiles, std::size_t k) {
  CommunityDescription description;
  description.community_id = community_id;
  std::set<AccountId> unique(members.begin(), members.end());
  std::vector<Eigen::Index> columns;
  for (const auto& id : unique) {
    if (auto col = profiles.column(id)) {
      columns.push_back(*col);
    } else {
      ++description.unprofiled_members;
    }
  }
  if (columns.empty()) {
    throw DataError(kStage, "community " + std::to_string(community_id) + " has no member with a profile");
  }
  std::sort(columns.begin(), columns.end());
  description.profiled_members = columns.size();
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(profiles.values.rows());
  for (Eigen::Index col : columns) sum += profiles.values.col(col);
  description.centroid = sum / static_cast<double>(columns.size());
  description.top_terms = top_terms(description.centroid, profiles.terms, k);
  return description;
}

void write_matrix_market(std::ostream& out, const Eigen::SparseMatrix<double>& matrix) {
  out << "%%MatrixMarket matrix coordinate real general\n"
      << matrix.rows() << ' ' << matrix.cols() << ' ' << matrix.nonZeros() << '\n';
  for (Eigen::Index col = 0; col < matrix.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(matrix, col); it; ++it) {
      out << it.row() + 1 << ' ' << col + 1 << ' ' << io::format_double(it.value()) << '\n';
    }
  }
}

Eigen::SparseMatrix<double> read_matrix_market(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || !line.starts_with("%%MatrixMarket matrix coordinate real general")) {
    throw DataError(kStage, "expected a MatrixMarket coordinate real general header");
  }
  while (std::getline(in, line) && line.starts_with("%")) {
  }
  std::istringstream dims(line);
  Eigen::Index rows = 0, cols = 0, nnz = 0;
  if (!(dims >> rows >> cols >> nnz)) throw DataError(kStage, "malformed MatrixMarket size line");
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(nnz));
  for (Eigen::Index k = 0; k < nnz; ++k) {
    Eigen::Index i = 0, j = 0;
    std::string value;
    if (!(in >> i >> j >> value) || i < 1 || j < 1 || i > rows || j > cols) {
      throw DataError(kStage, "malformed MatrixMarket entry " + std::to_string(k + 1));
    }
    triplets.emplace_back(i - 1, j - 1, std::stod(value));
  }
  Eigen::SparseMatrix<double> matrix(rows, cols);
  matrix.setFromTriplets(triplets.begin(), triplets.end());
  matrix.makeCompressed();
  return matrix;
}

void write_profile_matrix(const std::filesystem::path& directory, const ProfileMatrix& profiles) {
  {
    auto out = io::open_output(directory / "profiles.mtx", kStage);
    write_matrix_market(out, profiles.values);
  }
  {
    auto out = io::open_output(directory / "terms.txt", kStage);
    for (const auto& term : profiles.terms) out << term << '\n';
  }
  {
    auto out = io::open_output(directory / "docs.txt", kStage);
    for (const auto& id : profiles.doc_ids) out << id << '\n';
  }
}

ProfileMatrix read_profile_matrix(const std::filesystem::path& directory) {
  ProfileMatrix profiles;
  auto in = io::open_input(directory / "profiles.mtx", kStage);
  profiles.values = read_matrix_market(in);
  profiles.terms = read_lines(directory / "terms.txt");
  profiles.doc_ids = read_lines(directory / "docs.txt");
  if (static_cast<Eigen::Index>(profiles.terms.size()) != profiles.values.rows() ||
      static_cast<Eigen::Index>(profiles.doc_ids.size()) != profiles.values.cols()) {
    throw DataError(kStage, "profile matrix shape does not match terms.txt/docs.txt");
  }
  profiles.rebuild_index();
  return profiles;
}

}  // namespace commtopics
