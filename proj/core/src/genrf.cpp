#include "genrf/genrf.hpp"

#include "genrf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace genrf {

namespace {

// Orthonormal basis of col(X); rejects numerically singular X'X.
Eigen::MatrixXd column_basis(const Eigen::MatrixXd& x) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(x);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv[sv.size() - 1] < CovariateMatrix::kRankTolerance * sv[0])
    throw NumericalError("X'X is numerically singular");
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(x);
  return qr.householderQ() * Eigen::MatrixXd::Identity(x.rows(), x.cols());
}

void check_dims(const PhenotypeVector& Y, const CovariateMatrix& X, const SimilarityMatrix& S) {
  if (Y.n() != X.n() || Y.n() != S.n())
    throw InputError("dimension mismatch: Y has " + std::to_string(Y.n()) + " rows, X has " +
                     std::to_string(X.n()) + ", S is " + std::to_string(S.n()) + " x " +
                     std::to_string(S.n()));
}

std::vector<double> symmetric_eigenvalues_desc(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("symmetric eigensolve failed");
  const auto& ev = es.eigenvalues();
  std::vector<double> out(ev.data(), ev.data() + ev.size());
  std::reverse(out.begin(), out.end());
  return out;
}

}  // namespace

Eigen::MatrixXd projection_matrix(const CovariateMatrix& X) {
  const Eigen::MatrixXd q = column_basis(X.values());
  Eigen::MatrixXd b = -q * q.transpose();
  b.diagonal().array() += 1.0;
  return 0.5 * (b + b.transpose());
}

GenrfStatistic genrf_statistic(const PhenotypeVector& Y, const CovariateMatrix& X,
                               const SimilarityMatrix& S) {
  check_dims(Y, X, S);
  const Eigen::MatrixXd q = column_basis(X.values());
  const Eigen::VectorXd& y = Y.values();
  const Eigen::VectorXd r = y - q * (q.transpose() * y);
  const Eigen::VectorXd sr = S.matrix() * r;
  const double num = r.dot(sr);
  const double den = sr.squaredNorm();
  const double rr = r.squaredNorm();

  Eigen::VectorXd beta = X.values().householderQr().solve(y);

  const double s_norm = S.matrix().norm();
  const bool flat = !(rr > 1e-24 * y.squaredNorm());
  if (rr == 0.0 || flat || !(std::sqrt(den) > 1e-10 * s_norm * std::sqrt(rr))) {
    throw DegenerateStatistic("degenerate statistic: S B Y vanishes", num, den, rr);
  }
  return GenrfStatistic{num / den, std::move(beta), num, den};
}

std::vector<double> genrf_spectrum(const Eigen::MatrixXd& B, const SimilarityMatrix& S,
                                   double eta) {
  const Eigen::MatrixXd& s = S.matrix();
  Eigen::MatrixXd a = s;
  a.noalias() -= eta * (s * s);
  Eigen::MatrixXd m = B * a * B;
  m = 0.5 * (m + m.transpose());
  return symmetric_eigenvalues_desc(m);
}

TestResult genrf_test(const PhenotypeVector& Y, const CovariateMatrix& X,
                      const SimilarityMatrix& S, const QuadformOptions& quad) {
  TestResult result;
  GenrfStatistic stat{};
  try {
    stat = genrf_statistic(Y, X, S);
  } catch (const DegenerateStatistic&) {
    result.gamma_hat = std::numeric_limits<double>::quiet_NaN();
    result.beta_hat = X.values().householderQr().solve(Y.values());
    result.p_value = 1.0;
    result.degenerate = true;
    result.method_note = "degenerate: S*B*Y is numerically zero; no genetic-similarity contrast";
    return result;
  }
  result.gamma_hat = stat.gamma_hat;
  result.beta_hat = stat.beta_hat;

  // B(S - eta S^2)B with B = I - QQ', formed in O(n^2 q) once S^2 is known.
  const Eigen::MatrixXd basis = column_basis(X.values());
  const Eigen::MatrixXd& s = S.matrix();
  const Eigen::MatrixXd s2 = s * s;
  Eigen::MatrixXd a = s - stat.gamma_hat * s2;
  const double scale = s.norm() + std::abs(stat.gamma_hat) * s2.norm();
  Eigen::MatrixXd ba = a;
  ba.noalias() -= basis * (basis.transpose() * a);
  Eigen::MatrixXd m = ba;
  m.noalias() -= (ba * basis) * basis.transpose();
  m = 0.5 * (m + m.transpose());

  const std::vector<double> all = symmetric_eigenvalues_desc(m);
  double max_abs = 0.0;
  for (double v : all) max_abs = std::max(max_abs, std::abs(v));

  if (!(max_abs > 1e-9 * scale)) {
    result.n_eigen_dropped = static_cast<int>(all.size());
    result.p_value = 1.0;
    result.degenerate = true;
    result.method_note =
        "degenerate: every eigenvalue of B(S-eta*S^2)B is numerically zero";
    return result;
  }

  const double cutoff = kEigenTruncation * max_abs;
  for (double v : all) {
    if (std::abs(v) < cutoff) {
      ++result.n_eigen_dropped;
    } else {
      result.eigenvalues.push_back(v);
    }
  }

  const TailProbability tail =
      tail_prob_weighted_chisq(MixtureSpec::create(result.eigenvalues, 0.0), quad);
  result.p_value = tail.value;
  result.approximate = tail.approximate;
  result.method_note = tail.approximate ? "moment-matched tail (inversion did not converge)"
                                        : "exact mixture chi-square tail";
  return result;
}

PhenotypeVector sample_genrf_field(const GenRFFieldParams& params, const CovariateMatrix& X,
                                   const SimilarityMatrix& S, std::mt19937_64& rng) {
  if (!(params.zeta_sq > 0.0)) throw InputError("zeta_sq must be positive");
  if (params.beta.size() != X.q())
    throw InputError("beta has " + std::to_string(params.beta.size()) + " entries, X has " +
                     std::to_string(X.q()) + " columns");
  if (X.n() != S.n()) throw InputError("X and S dimensions differ");
  const Index n = X.n();

  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd z(n);
  for (Index i = 0; i < n; ++i) z[i] = normal(rng);

  const double zeta = std::sqrt(params.zeta_sq);
  Eigen::VectorXd y = X.values() * params.beta;
  if (params.gamma == 0.0) {
    y += zeta * z;
    return PhenotypeVector::create(std::move(y));
  }

  Eigen::MatrixXd precision = -params.gamma * S.matrix();
  precision.diagonal().array() += 1.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S.matrix(), Eigen::EigenvaluesOnly);
  const double lmax = es.eigenvalues().maxCoeff();
  const double lmin = es.eigenvalues().minCoeff();
  const double smallest = std::min(1.0 - params.gamma * lmax, 1.0 - params.gamma * lmin);
  if (!(smallest > 0.0)) {
    std::ostringstream msg;
    msg << "I - gamma*S is not positive definite for gamma = " << params.gamma
        << "; need gamma < 1/lambda_max(S) = " << 1.0 / lmax;
    throw InputError(msg.str());
  }
  // precision = L L'; v = zeta L'^{-1} z has covariance zeta^2 precision^{-1}.
  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success) throw NumericalError("Cholesky of I - gamma*S failed");
  y += zeta * llt.matrixU().solve(z);
  return PhenotypeVector::create(std::move(y));
}

}  // namespace genrf
