#include "genrf/baselines.hpp"

#include "genrf/errors.hpp"
#include "genrf/genrf.hpp"

#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <cmath>

namespace genrf {

namespace {

Eigen::MatrixXd orthonormal_basis(const Eigen::MatrixXd& x, const char* what) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(x);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv[sv.size() - 1] < CovariateMatrix::kRankTolerance * sv[0])
    throw InputError(std::string(what) + " is rank deficient");
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(x);
  return qr.householderQ() * Eigen::MatrixXd::Identity(x.rows(), x.cols());
}

}  // namespace

KernelMatrix KernelMatrix::from_dense(Eigen::MatrixXd k) {
  if (k.rows() != k.cols() || k.rows() < 2)
    throw InputError("kernel matrix must be square with n >= 2");
  if (!k.allFinite()) throw InputError("kernel matrix has non-finite entries");
  for (Index i = 0; i < k.rows(); ++i)
    for (Index j = i + 1; j < k.cols(); ++j)
      if (k(i, j) != k(j, i)) throw InputError("kernel matrix must be symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (lo < -1e-8 * std::max(hi, 0.0) || (hi <= 0.0 && lo < 0.0))
    throw InputError("kernel matrix is not positive semidefinite");
  return KernelMatrix(std::move(k));
}

KernelMatrix ibs_kernel_matrix(const GenotypeMatrix& geno, const WeightVector& w) {
  Eigen::MatrixXd k = similarity_matrix(geno, w).matrix();
  k.diagonal().setConstant(2.0 * w.sum());
  return KernelMatrix(std::move(k));
}

double f_upper_tail(double f, double d1, double d2) {
  if (!(d1 > 0.0) || !(d2 > 0.0)) throw InputError("F degrees of freedom must be positive");
  if (std::isnan(f)) throw NumericalError("F statistic is NaN");
  if (f <= 0.0) return 1.0;
  if (std::isinf(f)) return 0.0;
  return boost::math::ibeta(0.5 * d2, 0.5 * d1, d2 / (d2 + d1 * f));
}

LinearFTestResult linear_f_test(const PhenotypeVector& Y, const CovariateMatrix& X,
                                const GenotypeMatrix& geno) {
  const Index n = Y.n();
  if (X.n() != n || geno.n() != n) throw InputError("linear_f_test: dimension mismatch");
  const Eigen::MatrixXi& g = geno.values();

  LinearFTestResult result;
  for (Index k = 0; k < geno.p(); ++k) {
    const auto col = g.col(k);
    if ((col.array() == col[0]).all()) continue;
    bool duplicate = false;
    for (Index kept : result.retained_columns) {
      if (g.col(kept) == col) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) result.retained_columns.push_back(k);
  }
  const auto p_used = static_cast<Index>(result.retained_columns.size());
  const Index q = X.q();
  if (p_used == 0) throw InputError("linear_f_test: every genotype column is constant");
  if (n <= q + p_used)
    throw InputError("linear_f_test: need n > q + p' (n=" + std::to_string(n) +
                     ", q=" + std::to_string(q) + ", p'=" + std::to_string(p_used) + ")");

  Eigen::MatrixXd full(n, q + p_used);
  full.leftCols(q) = X.values();
  for (Index j = 0; j < p_used; ++j)
    full.col(q + j) = g.col(result.retained_columns[static_cast<std::size_t>(j)]).cast<double>();

  const Eigen::VectorXd& y = Y.values();
  const Eigen::MatrixXd q0 = orthonormal_basis(X.values(), "covariate design");
  const Eigen::MatrixXd q1 = orthonormal_basis(full, "design [X | G]");
  const double rss0 = (y - q0 * (q0.transpose() * y)).squaredNorm();
  const double rss1 = (y - q1 * (q1.transpose() * y)).squaredNorm();

  result.df_numerator = static_cast<int>(p_used);
  result.df_denominator = static_cast<int>(n - q - p_used);
  const double gain = rss0 - rss1;
  if (!(gain > 1e-12 * rss0)) {
    result.f_statistic = 0.0;
    result.p_value = 1.0;
    return result;
  }
  result.f_statistic = rss1 > 0.0 ? (gain / result.df_numerator) / (rss1 / result.df_denominator)
                                  : std::numeric_limits<double>::infinity();
  result.p_value = f_upper_tail(result.f_statistic, result.df_numerator, result.df_denominator);
  return result;
}

SkatResult skat_score_test(const PhenotypeVector& Y, const CovariateMatrix& X,
                           const KernelMatrix& K, const QuadformOptions& quad) {
  const Index n = Y.n();
  if (X.n() != n || K.n() != n) throw InputError("skat_score_test: dimension mismatch");
  const Eigen::MatrixXd basis = orthonormal_basis(X.values(), "covariate design");
  const Eigen::VectorXd& y = Y.values();
  const Eigen::VectorXd r = y - basis * (basis.transpose() * y);
  const double rr = r.squaredNorm();
  if (!(rr > 1e-24 * std::max(1.0, y.squaredNorm())))
    throw NumericalError("skat_score_test: zero residual variance");

  SkatResult result;
  result.sigma_sq = rr / static_cast<double>(n - X.q());
  const Eigen::MatrixXd& k = K.matrix();
  result.q_statistic = r.dot(k * r);

  Eigen::MatrixXd bk = k;
  bk.noalias() -= basis * (basis.transpose() * k);
  Eigen::MatrixXd m = bk;
  m.noalias() -= (bk * basis) * basis.transpose();
  m = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("skat_score_test: eigensolve failed");
  const auto& ev = es.eigenvalues();
  const double max_abs = ev.cwiseAbs().maxCoeff();

  if (!(max_abs > 1e-12 * std::max(k.norm(), std::numeric_limits<double>::min()))) {
    result.n_eigen_dropped = static_cast<int>(ev.size());
    result.degenerate = true;
    result.p_value = 1.0;
    result.note = "degenerate: BKB has no nonzero eigenvalue";
    return result;
  }
  for (Index i = ev.size() - 1; i >= 0; --i) {
    if (std::abs(ev[i]) < kEigenTruncation * max_abs) {
      ++result.n_eigen_dropped;
    } else {
      result.eigenvalues.push_back(ev[i]);
    }
  }
  std::vector<double> scaled = result.eigenvalues;
  for (double& v : scaled) v *= result.sigma_sq;
  const TailProbability tail =
      tail_prob_weighted_chisq(MixtureSpec::create(std::move(scaled), result.q_statistic), quad);
  result.p_value = tail.value;
  result.approximate = tail.approximate;
  result.note = tail.approximate ? "moment-matched tail (inversion did not converge)"
                                 : "exact mixture chi-square tail";
  return result;
}

}  // namespace genrf
