#pragma once

// Comparator tests: the classical p-degree-of-freedom regression F-test and a
// variance-component (SKAT-style) score test with the same IBS similarity.

#include "genrf/kernel.hpp"
#include "genrf/model_data.hpp"
#include "genrf/quadform.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace genrf {

/// Symmetric positive-semidefinite n x n kernel (smallest eigenvalue at least
/// -1e-8 times the largest).
class KernelMatrix {
 public:
  static KernelMatrix from_dense(Eigen::MatrixXd k);

  Index n() const { return k_.rows(); }
  const Eigen::MatrixXd& matrix() const { return k_; }

 private:
  friend KernelMatrix ibs_kernel_matrix(const GenotypeMatrix&, const WeightVector&);
  explicit KernelMatrix(Eigen::MatrixXd k) : k_(std::move(k)) {}
  Eigen::MatrixXd k_;
};

/// Weighted IBS including the self-similarity diagonal 2 * sum(w).
KernelMatrix ibs_kernel_matrix(const GenotypeMatrix& geno, const WeightVector& w);

struct LinearFTestResult {
  double f_statistic = 0.0;
  double p_value = 1.0;
  int df_numerator = 0;    // retained genotype columns p'
  int df_denominator = 0;  // n - q - p'
  /// Genotype columns used, after dropping constant and duplicate columns.
  std::vector<Index> retained_columns;
};

/// Nested-model F-test of [X | G] against X. Throws InputError when the
/// design is degenerate after column hygiene.
LinearFTestResult linear_f_test(const PhenotypeVector& Y, const CovariateMatrix& X,
                                const GenotypeMatrix& geno);

/// P(F(d1, d2) > f) through the regularized incomplete beta function.
double f_upper_tail(double f, double d1, double d2);

struct SkatResult {
  double q_statistic = 0.0;  // r'Kr
  double sigma_sq = 0.0;     // r'r / (n - q)
  double p_value = 1.0;
  std::vector<double> eigenvalues;  // of BKB, retained, descending
  int n_eigen_dropped = 0;
  bool degenerate = false;
  bool approximate = false;
  std::string note;
};

/// Score test of tau = 0: Q = r'Kr against sigma_hat^2 * sum lambda_i chi2_1,
/// lambda = eig(BKB). Throws NumericalError on zero residual variance.
SkatResult skat_score_test(const PhenotypeVector& Y, const CovariateMatrix& X,
                           const KernelMatrix& K, const QuadformOptions& quad = {});

}  // namespace genrf
