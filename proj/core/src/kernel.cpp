#include "genrf/kernel.hpp"

#include "genrf/errors.hpp"

#include <cstdlib>

namespace genrf {

double ibs_pair(const Eigen::Ref<const Eigen::VectorXi>& g_i,
                const Eigen::Ref<const Eigen::VectorXi>& g_j, const WeightVector& w) {
  if (g_i.size() != g_j.size() || g_i.size() != w.size())
    throw InputError("ibs_pair: genotype and weight lengths differ");
  double s = 0.0;
  for (Index k = 0; k < g_i.size(); ++k) s += w[k] * (2 - std::abs(g_i[k] - g_j[k]));
  return s;
}

SimilarityMatrix similarity_matrix(const GenotypeMatrix& geno, const WeightVector& w) {
  if (w.size() != geno.p())
    throw InputError("similarity_matrix: " + std::to_string(w.size()) + " weights for " +
                     std::to_string(geno.p()) + " variants");
  const Index n = geno.n();
  const Index p = geno.p();
  // Row-major copy keeps each subject's calls contiguous for the pair loop.
  const Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> g = geno.values();
  const Eigen::VectorXd& wv = w.values();

  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    const int* gi = g.data() + i * p;
    for (Index j = i + 1; j < n; ++j) {
      const int* gj = g.data() + j * p;
      double acc = 0.0;
      for (Index k = 0; k < p; ++k) acc += wv[k] * (2 - std::abs(gi[k] - gj[k]));
      s(i, j) = acc;
      s(j, i) = acc;
    }
  }
  return SimilarityMatrix(std::move(s));
}

SimilarityMatrix SimilarityMatrix::from_dense(Eigen::MatrixXd s) {
  if (s.rows() != s.cols() || s.rows() < 2)
    throw InputError("similarity matrix must be square with n >= 2");
  if (!s.allFinite()) throw InputError("similarity matrix has non-finite entries");
  for (Index i = 0; i < s.rows(); ++i) {
    if (s(i, i) != 0.0) throw InputError("similarity matrix diagonal must be zero");
    for (Index j = i + 1; j < s.cols(); ++j) {
      if (s(i, j) != s(j, i)) throw InputError("similarity matrix must be symmetric");
      if (s(i, j) < 0.0) throw InputError("similarity entries must be nonnegative");
    }
  }
  return SimilarityMatrix(std::move(s));
}

SimilarityMatrix SimilarityMatrix::permuted(const std::vector<Index>& order) const {
  if (static_cast<Index>(order.size()) != n()) throw InputError("permutation length mismatch");
  Eigen::MatrixXd out(n(), n());
  for (Index i = 0; i < n(); ++i)
    for (Index j = 0; j < n(); ++j)
      out(i, j) = s_(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
  return SimilarityMatrix(std::move(out));
}

}  // namespace genrf
