#include "oracles.hpp"

#include "genrf/errors.hpp"
#include "genrf/genrf.hpp"
#include "genrf/kernel.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace genrf;

namespace {

struct Dataset {
  PhenotypeVector y;
  CovariateMatrix x;
  SimilarityMatrix s;
};

Dataset random_dataset(Index n, Index p, Index extra_covariates, std::mt19937_64& rng) {
  const auto geno = GenotypeMatrix::create(oracle::random_genotypes(n, p, rng));
  Eigen::MatrixXd raw(n, extra_covariates);
  for (Index j = 0; j < extra_covariates; ++j) raw.col(j) = oracle::random_normal(n, rng);
  auto x = extra_covariates == 0 ? CovariateMatrix::intercept_only(n)
                                 : CovariateMatrix::with_intercept(raw);
  return {PhenotypeVector::create(oracle::random_normal(n, rng)), std::move(x),
          similarity_matrix(geno, WeightVector::uniform(p))};
}

}  // namespace

TEST_SUITE("genrf") {

TEST_CASE("centering projector for n = 2") {
  const Eigen::MatrixXd b = projection_matrix(CovariateMatrix::intercept_only(2));
  Eigen::Matrix2d expected;
  expected << 0.5, -0.5, -0.5, 0.5;
  CHECK((b - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("projector annihilates X, is idempotent and has trace n - q") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const Dataset d = random_dataset(8, 3, 2, rng);
    const Eigen::MatrixXd b = projection_matrix(d.x);
    const Eigen::MatrixXd& x = d.x.values();
    const double col_scale = x.colwise().norm().maxCoeff();
    CHECK((b * x).cwiseAbs().maxCoeff() < 1e-9 * col_scale);
    CHECK(std::abs(b.trace() - 5.0) < 1e-9);
    CHECK(((b * b) - b).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((b - oracle::hat_complement(x)).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("two-subject exchange example gives gamma_hat = -1") {
  Eigen::Matrix2d s;
  s << 0, 1, 1, 0;
  const auto stat = genrf_statistic(PhenotypeVector::create(Eigen::Vector2d(0, 2)),
                                    CovariateMatrix::intercept_only(2),
                                    SimilarityMatrix::from_dense(s));
  CHECK(stat.numerator == doctest::Approx(-2.0));
  CHECK(stat.denominator == doctest::Approx(2.0));
  CHECK(stat.gamma_hat == doctest::Approx(-1.0));
  CHECK(stat.beta_hat[0] == doctest::Approx(1.0));
}

TEST_CASE("gamma_hat is the minimizer of the pseudo-likelihood objective") {
  std::mt19937_64 rng(20);
  const Dataset d = random_dataset(20, 5, 0, rng);
  const Eigen::MatrixXd b = oracle::hat_complement(d.x.values());
  const Eigen::VectorXd by = b * d.y.values();
  const Eigen::MatrixXd& s = d.s.matrix();
  auto objective = [&](double g) { return (by - g * (s * by)).squaredNorm(); };
  const double oracle_gamma = oracle::golden_section(objective, -1.0, 1.0);
  const double gamma = genrf_statistic(d.y, d.x, d.s).gamma_hat;
  CHECK(std::abs(gamma - oracle_gamma) < 1e-7);
}

TEST_CASE("shift and scale invariance") {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 10; ++trial) {
    const Dataset d = random_dataset(30, 6, 1, rng);
    const TestResult base = genrf_test(d.y, d.x, d.s);
    const Eigen::VectorXd shift = d.x.values() * Eigen::Vector2d(3.0, -1.5);
    for (const Eigen::VectorXd& y2 : {Eigen::VectorXd(d.y.values() + shift),
                                       Eigen::VectorXd(7.3 * d.y.values()),
                                       Eigen::VectorXd(0.1 * d.y.values())}) {
      const TestResult other = genrf_test(PhenotypeVector::create(y2), d.x, d.s);
      CHECK(std::abs(other.gamma_hat - base.gamma_hat) < 1e-10 * std::max(1.0, std::abs(base.gamma_hat)));
      CHECK(std::abs(other.p_value - base.p_value) < 1e-10);
    }
  }
}

TEST_CASE("self-consistency and eigenvalue trace identity") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const Dataset d = random_dataset(25, 5, 1, rng);
    const auto stat = genrf_statistic(d.y, d.x, d.s);
    const Eigen::MatrixXd b = oracle::hat_complement(d.x.values());
    const Eigen::MatrixXd& s = d.s.matrix();
    const Eigen::VectorXd by = b * d.y.values();
    const Eigen::MatrixXd a = s - stat.gamma_hat * s * s;
    CHECK(std::abs(by.dot(a * by)) < 1e-6 * by.squaredNorm() * s.norm());

    const TestResult r = genrf_test(d.y, d.x, d.s);
    double sum = 0.0;
    for (double v : r.eigenvalues) sum += v;
    const double trace = (b * a * b).trace();
    double abs_sum = 0.0;
    for (double v : r.eigenvalues) abs_sum += std::abs(v);
    CHECK(std::abs(sum - trace) < 1e-6 * abs_sum);
    CHECK(std::is_sorted(r.eigenvalues.rbegin(), r.eigenvalues.rend()));
    CHECK(r.p_value >= 0.0);
    CHECK(r.p_value <= 1.0);
  }
}

TEST_CASE("p-value matches Monte Carlo of Z'MZ > 0 with Z ~ N(0, B)") {
  std::mt19937_64 rng(50);
  const Dataset d = random_dataset(50, 10, 0, rng);
  const TestResult r = genrf_test(d.y, d.x, d.s);
  const Eigen::MatrixXd b = oracle::hat_complement(d.x.values());
  const Eigen::MatrixXd& s = d.s.matrix();
  const Eigen::MatrixXd m = b * (s - r.gamma_hat * s * s) * b;

  std::mt19937_64 mc(5050);
  std::normal_distribution<double> normal;
  constexpr int kBatch = 10000;
  constexpr int kDraws = 1'000'000;
  long hits = 0;
  Eigen::MatrixXd e(50, kBatch);
  for (int done = 0; done < kDraws; done += kBatch) {
    for (Index j = 0; j < kBatch; ++j)
      for (Index i = 0; i < 50; ++i) e(i, j) = normal(mc);
    const Eigen::MatrixXd z = b * e;
    const Eigen::VectorXd q = (z.array() * (m * z).array()).colwise().sum();
    hits += (q.array() > 0.0).count();
  }
  const double p_mc = static_cast<double>(hits) / kDraws;
  CHECK(std::abs(r.p_value - p_mc) < 0.005);
}

TEST_CASE("degenerate inputs map to p = 1") {
  // Constant phenotype: BY = 0.
  std::mt19937_64 rng(24);
  const Dataset d = random_dataset(10, 3, 0, rng);
  const auto flat = PhenotypeVector::create(Eigen::VectorXd::Constant(10, 4.0));
  CHECK_THROWS_AS(genrf_statistic(flat, d.x, d.s), DegenerateStatistic);
  const TestResult r = genrf_test(flat, d.x, d.s);
  CHECK(r.degenerate);
  CHECK(r.p_value == 1.0);
  CHECK_FALSE(r.method_note.empty());

  // Identical genotypes: S is a constant off-diagonal matrix.
  const auto same = GenotypeMatrix::create(Eigen::MatrixXi::Ones(10, 3));
  const TestResult r2 =
      genrf_test(d.y, d.x, similarity_matrix(same, WeightVector::uniform(3)));
  CHECK(r2.degenerate);
  CHECK(r2.p_value == 1.0);
}

TEST_CASE("dimension mismatch is rejected") {
  std::mt19937_64 rng(25);
  const Dataset d = random_dataset(10, 3, 0, rng);
  CHECK_THROWS_AS(genrf_test(PhenotypeVector::create(Eigen::VectorXd::Ones(9)), d.x, d.s),
                  InputError);
}

TEST_CASE("field sampler with gamma = 0 is iid noise around X beta") {
  std::mt19937_64 rng(26);
  const Dataset d = random_dataset(5, 4, 0, rng);
  GenRFFieldParams params;
  params.beta = Eigen::VectorXd::Constant(1, 2.0);
  params.zeta_sq = 2.0;
  constexpr int kDraws = 100000;
  Eigen::MatrixXd draws(5, kDraws);
  for (int t = 0; t < kDraws; ++t) draws.col(t) = sample_genrf_field(params, d.x, d.s, rng).values();
  const Eigen::VectorXd mean = draws.rowwise().mean();
  const Eigen::MatrixXd c = draws.colwise() - mean;
  const Eigen::MatrixXd cov = c * c.transpose() / (kDraws - 1);
  CHECK((mean.array() - 2.0).abs().maxCoeff() < 0.03);
  for (Index i = 0; i < 5; ++i)
    for (Index j = 0; j < 5; ++j)
      CHECK(std::abs(cov(i, j) - (i == j ? 2.0 : 0.0)) < 0.02 * 2.0);
}

TEST_CASE("field sampler with gamma > 0 has covariance zeta^2 (I - gamma S)^-1") {
  std::mt19937_64 rng(27);
  const Dataset d = random_dataset(5, 4, 0, rng);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(d.s.matrix());
  GenRFFieldParams params;
  params.gamma = 0.5 / es.eigenvalues().maxCoeff();
  params.beta = Eigen::VectorXd::Zero(1);
  params.zeta_sq = 1.5;
  const Eigen::MatrixXd target =
      params.zeta_sq *
      (Eigen::MatrixXd::Identity(5, 5) - params.gamma * d.s.matrix()).inverse();
  constexpr int kDraws = 100000;
  Eigen::MatrixXd draws(5, kDraws);
  for (int t = 0; t < kDraws; ++t) draws.col(t) = sample_genrf_field(params, d.x, d.s, rng).values();
  const Eigen::MatrixXd cov = draws * draws.transpose() / kDraws;
  for (Index i = 0; i < 5; ++i)
    for (Index j = 0; j < 5; ++j) {
      const double se = std::sqrt((target(i, i) * target(j, j) + target(i, j) * target(i, j)) / kDraws);
      CHECK(std::abs(cov(i, j) - target(i, j)) < 5.0 * se);
    }
}

TEST_CASE("field sampler rejects gamma past the positive-definite boundary") {
  std::mt19937_64 rng(28);
  const Dataset d = random_dataset(6, 4, 0, rng);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(d.s.matrix());
  GenRFFieldParams params;
  params.gamma = 1.01 / es.eigenvalues().maxCoeff();
  params.beta = Eigen::VectorXd::Zero(1);
  try {
    sample_genrf_field(params, d.x, d.s, rng);
    FAIL("expected rejection");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("1/lambda_max") != std::string::npos);
  }
}

}
