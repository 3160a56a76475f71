#include "oracles.hpp"

#include "genrf/baselines.hpp"
#include "genrf/errors.hpp"
#include "genrf/kernel.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace genrf;

TEST_SUITE("baselines") {

TEST_CASE("IBS kernel differs from S only on the diagonal") {
  std::mt19937_64 rng(31);
  const auto geno = GenotypeMatrix::create(oracle::random_genotypes(12, 4, rng));
  const auto w = WeightVector::create(Eigen::Vector4d(1.0, 0.5, 2.0, 0.25));
  const Eigen::MatrixXd diff =
      ibs_kernel_matrix(geno, w).matrix() - similarity_matrix(geno, w).matrix();
  const Eigen::MatrixXd expected = 2.0 * w.sum() * Eigen::MatrixXd::Identity(12, 12);
  CHECK((diff - expected).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(ibs_kernel_matrix(geno, WeightVector::uniform(4)).matrix()(3, 3) == 8.0);
}

TEST_CASE("IBS kernel is positive semidefinite") {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 20; ++trial) {
    const auto geno = GenotypeMatrix::create(oracle::random_genotypes(5, 3, rng));
    const Eigen::MatrixXd k = ibs_kernel_matrix(geno, WeightVector::uniform(3)).matrix();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k);
    CHECK(es.eigenvalues().minCoeff() > -1e-10);
    CHECK_NOTHROW(KernelMatrix::from_dense(k));
  }
  Eigen::Matrix2d indefinite;
  indefinite << 0, 1, 1, 0;
  CHECK_THROWS_AS(KernelMatrix::from_dense(indefinite), InputError);
}

TEST_CASE("F test: zero residual gain gives F = 0, p = 1") {
  Eigen::MatrixXi g(6, 2);
  g << 0, 1, 1, 2, 2, 0, 0, 0, 1, 1, 2, 2;
  const auto geno = GenotypeMatrix::create(g);
  const auto y = PhenotypeVector::create(Eigen::VectorXd::Constant(6, 3.0));
  const auto r = linear_f_test(y, CovariateMatrix::intercept_only(6), geno);
  CHECK(r.f_statistic == 0.0);
  CHECK(r.p_value == 1.0);
}

TEST_CASE("F test matches normal equations and a continued-fraction beta") {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 10; ++trial) {
    const Index n = 40;
    const auto geno = GenotypeMatrix::create(oracle::random_genotypes(n, 5, rng));
    const auto covar = CovariateMatrix::with_intercept(Eigen::MatrixXd(oracle::random_normal(n, rng)));
    Eigen::VectorXd y = oracle::random_normal(n, rng);
    y += 0.3 * geno.as_double().col(1);
    const auto r = linear_f_test(PhenotypeVector::create(y), covar, geno);

    Eigen::MatrixXd full(n, 7);
    full << covar.values(), geno.as_double();
    const double rss0 = oracle::rss_normal_equations(covar.values(), y);
    const double rss1 = oracle::rss_normal_equations(full, y);
    const double f = ((rss0 - rss1) / 5.0) / (rss1 / (n - 7.0));
    REQUIRE(r.df_numerator == 5);
    REQUIRE(r.df_denominator == n - 7);
    CHECK(std::abs(r.f_statistic - f) < 1e-8 * std::max(1.0, f));
    CHECK(std::abs(r.p_value - oracle::f_upper_tail_cf(f, 5.0, n - 7.0)) < 1e-8);
  }
}

TEST_CASE("F tail values") {
  // F(1, d) is t^2: P(F(1,10) > 4.964603) = 0.05
  CHECK(std::abs(f_upper_tail(4.964603, 1, 10) - 0.05) < 1e-6);
  CHECK(f_upper_tail(0.0, 3, 10) == 1.0);
  for (double f : {0.3, 1.0, 2.5, 7.0})
    CHECK(std::abs(f_upper_tail(f, 4, 23) - oracle::f_upper_tail_cf(f, 4, 23)) < 1e-12);
}

TEST_CASE("F test drops constant and duplicate columns") {
  std::mt19937_64 rng(34);
  Eigen::MatrixXi g = oracle::random_genotypes(30, 4, rng);
  g.col(1).setConstant(1);
  g.col(3) = g.col(0);
  const auto r = linear_f_test(PhenotypeVector::create(oracle::random_normal(30, rng)),
                               CovariateMatrix::intercept_only(30), GenotypeMatrix::create(g));
  CHECK(r.retained_columns == std::vector<Index>{0, 2});
  CHECK(r.df_numerator == 2);
}

TEST_CASE("F test is invariant to affine recoding of genotype columns") {
  std::mt19937_64 rng(35);
  const Eigen::MatrixXi g = oracle::random_genotypes(30, 3, rng);
  const Eigen::MatrixXi recoded = (2 - g.array()).matrix();
  const auto y = PhenotypeVector::create(oracle::random_normal(30, rng));
  const auto x = CovariateMatrix::intercept_only(30);
  const double p1 = linear_f_test(y, x, GenotypeMatrix::create(g)).p_value;
  const double p2 = linear_f_test(y, x, GenotypeMatrix::create(recoded)).p_value;
  CHECK(std::abs(p1 - p2) < 1e-10);
}

TEST_CASE("SKAT with a zero kernel is degenerate") {
  std::mt19937_64 rng(36);
  const auto r = skat_score_test(PhenotypeVector::create(oracle::random_normal(8, rng)),
                                 CovariateMatrix::intercept_only(8),
                                 KernelMatrix::from_dense(Eigen::MatrixXd::Zero(8, 8)));
  CHECK(r.q_statistic == 0.0);
  CHECK(r.degenerate);
  CHECK(r.p_value == 1.0);
  CHECK_FALSE(r.note.empty());
}

TEST_CASE("SKAT rejects zero residual variance") {
  std::mt19937_64 rng(37);
  const auto geno = GenotypeMatrix::create(oracle::random_genotypes(8, 3, rng));
  CHECK_THROWS_AS(skat_score_test(PhenotypeVector::create(Eigen::VectorXd::Constant(8, 1.0)),
                                  CovariateMatrix::intercept_only(8),
                                  ibs_kernel_matrix(geno, WeightVector::uniform(3))),
                  NumericalError);
}

TEST_CASE("SKAT p-value matches a parametric bootstrap of r'Kr") {
  std::mt19937_64 rng(38);
  const Index n = 30;
  const auto geno = GenotypeMatrix::create(oracle::random_genotypes(n, 5, rng));
  const auto k = ibs_kernel_matrix(geno, WeightVector::uniform(5));
  const auto x = CovariateMatrix::intercept_only(n);
  const auto y = PhenotypeVector::create(oracle::random_normal(n, rng));
  const auto r = skat_score_test(y, x, k);

  const Eigen::MatrixXd b = oracle::hat_complement(x.values());
  const double sigma = std::sqrt(r.sigma_sq);
  std::mt19937_64 mc(3838);
  std::normal_distribution<double> normal;
  constexpr int kBatch = 10000;
  constexpr int kDraws = 1'000'000;
  long hits = 0;
  Eigen::MatrixXd e(n, kBatch);
  for (int done = 0; done < kDraws; done += kBatch) {
    for (Index j = 0; j < kBatch; ++j)
      for (Index i = 0; i < n; ++i) e(i, j) = sigma * normal(mc);
    const Eigen::MatrixXd res = b * e;
    const Eigen::VectorXd q = (res.array() * (k.matrix() * res).array()).colwise().sum();
    hits += (q.array() > r.q_statistic).count();
  }
  CHECK(std::abs(r.p_value - static_cast<double>(hits) / kDraws) < 0.01);
}

TEST_CASE("SKAT is invariant to covariate shifts") {
  std::mt19937_64 rng(39);
  const Index n = 25;
  const auto geno = GenotypeMatrix::create(oracle::random_genotypes(n, 4, rng));
  const auto k = ibs_kernel_matrix(geno, WeightVector::uniform(4));
  const auto x = CovariateMatrix::with_intercept(Eigen::MatrixXd(oracle::random_normal(n, rng)));
  const Eigen::VectorXd y = oracle::random_normal(n, rng);
  const auto a = skat_score_test(PhenotypeVector::create(y), x, k);
  const auto c = skat_score_test(
      PhenotypeVector::create(y + x.values() * Eigen::Vector2d(-4.0, 2.5)), x, k);
  CHECK(std::abs(a.q_statistic - c.q_statistic) < 1e-9 * a.q_statistic);
  CHECK(std::abs(a.p_value - c.p_value) < 1e-10);
}

}
