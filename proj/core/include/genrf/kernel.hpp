#pragma once

// Weighted identity-by-state similarity between subjects.

#include "genrf/model_data.hpp"

#include <Eigen/Dense>

namespace genrf {

/// Symmetric n x n similarity with a zero diagonal; off-diagonal entries lie
/// in [0, 2 * sum(w)].
class SimilarityMatrix {
 public:
  /// Validates symmetry, zero diagonal and nonnegativity. Used for matrices
  /// that were not produced by similarity_matrix().
  static SimilarityMatrix from_dense(Eigen::MatrixXd s);

  Index n() const { return s_.rows(); }
  const Eigen::MatrixXd& matrix() const { return s_; }
  double operator()(Index i, Index j) const { return s_(i, j); }

  /// Same permutation applied to rows and columns.
  SimilarityMatrix permuted(const std::vector<Index>& order) const;

 private:
  friend SimilarityMatrix similarity_matrix(const GenotypeMatrix&, const WeightVector&);
  explicit SimilarityMatrix(Eigen::MatrixXd s) : s_(std::move(s)) {}
  Eigen::MatrixXd s_;
};

/// sum_k w_k (2 - |g_i[k] - g_j[k]|)
double ibs_pair(const Eigen::Ref<const Eigen::VectorXi>& g_i,
                const Eigen::Ref<const Eigen::VectorXi>& g_j, const WeightVector& w);

SimilarityMatrix similarity_matrix(const GenotypeMatrix& geno, const WeightVector& w);

}  // namespace genrf
