#pragma once

// Scenario generators and the Monte Carlo power/type-I engine.

#include "genrf/model_data.hpp"

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace genrf {

enum class Family {
  kNormalMain,              // Y = a G_c + N(0, zeta^2)
  kNormalInteraction,       // Y = b sum_{k=1..9} G_1 G_{k+1} + N(0, zeta^2)
  kExponentialInteraction,  // Y ~ Exp(rate = 1 + b sum_{k=1..9} G_1 G_{k+1})
  kGlmNormal,               // identity link: same law as kNormalMain
  kGlmExponential,          // log link: Y ~ Exp(mean = exp(a G_c))
  kGlmBinary,               // logit link, zero intercept: P(Y=1) = expit(a G_c)
  kMixtureNormalMain,       // Y = a G_c + eps, eps ~ .5 N(-gap/2, zeta^2) + .5 N(gap/2, zeta^2)
};

std::string_view to_string(Family family);
/// Accepts the names printed by to_string (e.g. "glm_main(binary)").
Family family_from_string(std::string_view name);

struct PhenotypeModel {
  Family family = Family::kNormalMain;
  double a = 0.0;  // main-effect coefficient
  double b = 0.0;  // interaction coefficient
  double zeta_sq = 1.0;
  int causal_locus = 5;  // 1-based
  double mixture_gap = 10.0;

  bool uses_interaction() const;
  /// Coefficient of the family's genetic effect (a or b).
  double effect() const { return uses_interaction() ? b : a; }
  bool is_null() const { return effect() == 0.0; }
  TraitKind trait_kind() const;
  void validate(Index p) const;
};

enum class Method { kGenRF = 0, kSkat = 1, kLinear = 2 };
inline constexpr std::array<Method, 3> kAllMethods = {Method::kGenRF, Method::kSkat,
                                                      Method::kLinear};

std::string_view to_string(Method method);
Method method_from_string(std::string_view name);

struct StudyScenario {
  std::string name = "scenario";
  Index n = 100;
  Index p = 10;
  double maf = 0.3;
  double rho = 0.0;
  PhenotypeModel model;
  int n_reps = 1000;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  std::vector<Method> methods = {kAllMethods.begin(), kAllMethods.end()};

  void validate() const;
  /// Methods actually run: SKAT is skipped for binary traits.
  std::vector<Method> effective_methods() const;
};

/// count x p matrix of 0/1 alleles. Each row is a two-state Markov chain with
/// stationary frequency maf and lag-one correlation rho:
///   P(1 | 1) = maf + rho (1 - maf),  P(1 | 0) = maf (1 - rho).
Eigen::MatrixXi gen_correlated_haplotypes(Index count, Index p, double maf, double rho,
                                          std::mt19937_64& rng);

/// Sum of two independent haplotype draws per subject.
GenotypeMatrix gen_genotypes(Index n, Index p, double maf, double rho, std::mt19937_64& rng);

PhenotypeVector gen_phenotype(const PhenotypeModel& model, const GenotypeMatrix& geno,
                              std::mt19937_64& rng);

/// Seed of replicate r's generator: a SplitMix64 mix of (seed, r).
std::uint64_t child_seed(std::uint64_t seed, std::uint64_t replicate);

/// Uniform double in [0, 1) from the top 53 bits of one engine output.
double uniform01(std::mt19937_64& rng);

struct ReplicateOutcome {
  bool ok = true;
  std::string error;
  /// Indexed by Method; NaN where the method was not run.
  std::array<double, 3> p_values;
};

/// Replicate r on its own generator; reproducible in isolation.
ReplicateOutcome run_replicate(const StudyScenario& scenario, std::uint64_t replicate);

/// All replicates, in replicate order, computed on `threads` workers.
std::vector<ReplicateOutcome> run_replicates(const StudyScenario& scenario, int threads = 1);

struct MethodTally {
  Method method = Method::kGenRF;
  int rejections = 0;
  int n_valid = 0;
  double rate = 0.0;
  double standard_error = 0.0;  // sqrt(rate (1 - rate) / n_valid)
};

struct StudyReport {
  StudyScenario scenario;
  std::vector<MethodTally> tallies;
  int n_reps = 0;
  int n_excluded = 0;
  std::vector<std::string> exclusion_notes;  // first few failures, replicate-tagged
  double wall_seconds = 0.0;
};

/// Fraction of replicates that may fail before the study itself fails.
inline constexpr double kMaxExcludedFraction = 0.01;

/// Runs the scenario and tallies rejections at level alpha (p < alpha).
/// Throws NumericalError when more than 1% of replicates fail.
StudyReport run_study(const StudyScenario& scenario, int threads = 1);

/// Aggregates precomputed replicate outcomes (same rules as run_study).
StudyReport summarize(const StudyScenario& scenario,
                      const std::vector<ReplicateOutcome>& outcomes);

}  // namespace genrf
