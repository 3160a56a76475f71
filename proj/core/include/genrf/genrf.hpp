#pragma once

// Genetic random field association test.
//
// The trait is modelled as a conditional autoregression over genotype space,
//   Y | Y_-, X = X beta + gamma S (Y - X beta) + eps,
// and H0: gamma = 0 is tested with the pseudo-likelihood estimate
//   gamma_hat = Y'BSBY / Y'BS^2BY,   B = I - X (X'X)^-1 X'.
// Under H0, P(gamma_hat > eta) = P(Z'(S - eta S^2)Z > 0) with Z ~ N(0, B),
// a weighted chi-square tail whose weights are the eigenvalues of
// B(S - eta S^2)B.

#include "genrf/kernel.hpp"
#include "genrf/model_data.hpp"
#include "genrf/quadform.hpp"

#include <Eigen/Dense>

#include <random>
#include <string>
#include <vector>

namespace genrf {

struct TestResult {
  double gamma_hat = 0.0;
  Eigen::VectorXd beta_hat;
  /// Retained eigenvalues of B(S - gamma_hat S^2)B, descending.
  std::vector<double> eigenvalues;
  double p_value = 1.0;
  int n_eigen_dropped = 0;
  bool degenerate = false;
  bool approximate = false;
  std::string method_note;
};

/// Relative cutoff below which eigenvalues are treated as numerical zeros.
inline constexpr double kEigenTruncation = 1e-8;

/// Residual-maker I - X (X'X)^-1 X'. Throws NumericalError if X'X is singular.
Eigen::MatrixXd projection_matrix(const CovariateMatrix& X);

struct GenrfStatistic {
  double gamma_hat;
  Eigen::VectorXd beta_hat;
  double numerator;    // Y'BSBY
  double denominator;  // Y'BS^2BY
};

/// Throws DegenerateStatistic when SBY vanishes (relative to |S| |BY|).
GenrfStatistic genrf_statistic(const PhenotypeVector& Y, const CovariateMatrix& X,
                               const SimilarityMatrix& S);

/// Full test. A degenerate statistic yields p = 1 with an explanatory note.
TestResult genrf_test(const PhenotypeVector& Y, const CovariateMatrix& X,
                      const SimilarityMatrix& S, const QuadformOptions& quad = {});

/// Eigenvalues of B(S - eta S^2)B before truncation, descending. Exposed for
/// diagnostics and identity checks.
std::vector<double> genrf_spectrum(const Eigen::MatrixXd& B, const SimilarityMatrix& S,
                                   double eta);

/// Parameters of the joint field Y ~ N(X beta, zeta^2 (I - gamma S)^-1).
struct GenRFFieldParams {
  double gamma = 0.0;
  Eigen::VectorXd beta;
  double zeta_sq = 1.0;
};

/// One draw of Y from the joint GenRF distribution. Throws InputError unless
/// I - gamma S is positive definite (gamma < 1 / lambda_max(S) for gamma > 0).
PhenotypeVector sample_genrf_field(const GenRFFieldParams& params, const CovariateMatrix& X,
                                   const SimilarityMatrix& S, std::mt19937_64& rng);

}  // namespace genrf
