#include "genrf/baselines.hpp"
#include "genrf/genrf.hpp"
#include "genrf/kernel.hpp"
#include "genrf/quadform.hpp"
#include "genrf/simulate.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

using namespace genrf;

struct Fixture {
  GenotypeMatrix geno;
  PhenotypeVector pheno;
  CovariateMatrix covar;
};

Fixture make_fixture(Index n, Index p) {
  std::mt19937_64 rng(2024);
  auto geno = gen_genotypes(n, p, 0.3, 0.4, rng);
  PhenotypeModel model;
  model.a = 0.5;
  auto pheno = gen_phenotype(model, geno, rng);
  return {std::move(geno), std::move(pheno), CovariateMatrix::intercept_only(n)};
}

void BM_SimilarityMatrix(benchmark::State& state) {
  const auto f = make_fixture(state.range(0), 10);
  const auto w = WeightVector::uniform(10);
  for (auto _ : state) benchmark::DoNotOptimize(similarity_matrix(f.geno, w));
}
BENCHMARK(BM_SimilarityMatrix)->Arg(100)->Arg(400);

void BM_GenrfTest(benchmark::State& state) {
  const auto f = make_fixture(state.range(0), 10);
  const auto s = similarity_matrix(f.geno, WeightVector::uniform(10));
  for (auto _ : state) benchmark::DoNotOptimize(genrf_test(f.pheno, f.covar, s).p_value);
}
BENCHMARK(BM_GenrfTest)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_SkatTest(benchmark::State& state) {
  const auto f = make_fixture(100, 10);
  const auto k = ibs_kernel_matrix(f.geno, WeightVector::uniform(10));
  for (auto _ : state) benchmark::DoNotOptimize(skat_score_test(f.pheno, f.covar, k).p_value);
}
BENCHMARK(BM_SkatTest)->Unit(benchmark::kMillisecond);

void BM_LinearFTest(benchmark::State& state) {
  const auto f = make_fixture(100, 10);
  for (auto _ : state) benchmark::DoNotOptimize(linear_f_test(f.pheno, f.covar, f.geno).p_value);
}
BENCHMARK(BM_LinearFTest);

void BM_TailProbability(benchmark::State& state) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unif(-1.0, 2.0);
  std::vector<double> l(static_cast<std::size_t>(state.range(0)));
  for (auto& v : l) v = unif(rng);
  const auto spec = MixtureSpec::create(l, 0.0);
  for (auto _ : state) benchmark::DoNotOptimize(tail_prob_weighted_chisq(spec).value);
}
BENCHMARK(BM_TailProbability)->Arg(3)->Arg(10)->Arg(99);

void BM_Replicate(benchmark::State& state) {
  StudyScenario s;
  s.rho = 0.4;
  s.model.a = 0.5;
  std::uint64_t r = 0;
  for (auto _ : state) benchmark::DoNotOptimize(run_replicate(s, r++).p_values);
}
BENCHMARK(BM_Replicate)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
