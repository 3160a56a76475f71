#include "genrf/simulate.hpp"

#include "genrf/baselines.hpp"
#include "genrf/errors.hpp"
#include "genrf/genrf.hpp"
#include "genrf/kernel.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <thread>

namespace genrf {

namespace {

constexpr std::array<std::pair<Family, std::string_view>, 7> kFamilyNames = {{
    {Family::kNormalMain, "normal_main"},
    {Family::kNormalInteraction, "normal_interaction"},
    {Family::kExponentialInteraction, "exponential_interaction"},
    {Family::kGlmNormal, "glm_main(normal)"},
    {Family::kGlmExponential, "glm_main(exponential)"},
    {Family::kGlmBinary, "glm_main(binary)"},
    {Family::kMixtureNormalMain, "mixture_normal_main"},
}};

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double interaction_burden(const GenotypeMatrix& g, Index i) {
  double s = 0.0;
  for (Index k = 1; k <= 9; ++k) s += g(i, 0) * g(i, k);
  return s;
}

}  // namespace

std::string_view to_string(Family family) {
  for (const auto& [f, name] : kFamilyNames)
    if (f == family) return name;
  return "unknown";
}

Family family_from_string(std::string_view name) {
  for (const auto& [f, n] : kFamilyNames)
    if (n == name) return f;
  if (name == "glm_main_normal") return Family::kGlmNormal;
  if (name == "glm_main_exponential") return Family::kGlmExponential;
  if (name == "glm_main_binary") return Family::kGlmBinary;
  throw InputError("unknown phenotype family '" + std::string(name) + "'");
}

std::string_view to_string(Method method) {
  switch (method) {
    case Method::kGenRF:
      return "GENRF";
    case Method::kSkat:
      return "SKAT";
    case Method::kLinear:
      return "LINEAR";
  }
  return "unknown";
}

Method method_from_string(std::string_view name) {
  std::string upper(name);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  if (upper == "GENRF") return Method::kGenRF;
  if (upper == "SKAT") return Method::kSkat;
  if (upper == "LINEAR") return Method::kLinear;
  throw InputError("unknown method '" + std::string(name) + "' (expected GENRF, SKAT or LINEAR)");
}

bool PhenotypeModel::uses_interaction() const {
  return family == Family::kNormalInteraction || family == Family::kExponentialInteraction;
}

TraitKind PhenotypeModel::trait_kind() const {
  return family == Family::kGlmBinary ? TraitKind::kBinary : TraitKind::kContinuous;
}

void PhenotypeModel::validate(Index p) const {
  if (!std::isfinite(a) || !std::isfinite(b)) throw InputError("model coefficients must be finite");
  if (!(zeta_sq > 0.0) || !std::isfinite(zeta_sq)) throw InputError("zeta_sq must be positive");
  if (uses_interaction()) {
    if (a != 0.0)
      throw InputError(std::string(to_string(family)) + " uses b only; a must be 0");
    if (p < 10)
      throw InputError(std::string(to_string(family)) + " needs p >= 10 (uses loci 1-10)");
    if (family == Family::kExponentialInteraction && b < 0.0)
      throw InputError("exponential_interaction needs b >= 0 so every rate is positive");
  } else {
    if (b != 0.0)
      throw InputError(std::string(to_string(family)) + " uses a only; b must be 0");
    if (causal_locus < 1 || causal_locus > p)
      throw InputError("causal_locus must lie in [1, p]");
  }
  if (family == Family::kMixtureNormalMain && !std::isfinite(mixture_gap))
    throw InputError("mixture_gap must be finite");
}

void StudyScenario::validate() const {
  if (n <= 2) throw InputError("n must exceed q + 1 = 2 for an intercept-only design");
  if (p < 1) throw InputError("p must be at least 1");
  if (!(maf > 0.0 && maf <= 0.5)) throw InputError("maf must lie in (0, 0.5]");
  if (!(rho >= 0.0 && rho < 1.0)) throw InputError("rho must lie in [0, 1)");
  if (n_reps < 1) throw InputError("n_reps must be at least 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha must lie in (0, 1)");
  if (methods.empty()) throw InputError("at least one method is required");
  model.validate(p);
}

std::vector<Method> StudyScenario::effective_methods() const {
  std::vector<Method> out;
  for (Method m : methods) {
    if (m == Method::kSkat && model.trait_kind() == TraitKind::kBinary) continue;
    if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
  }
  return out;
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::uint64_t child_seed(std::uint64_t seed, std::uint64_t replicate) {
  return splitmix64(splitmix64(seed) ^ splitmix64(replicate + 0x632be59bd9b4e019ULL));
}

Eigen::MatrixXi gen_correlated_haplotypes(Index count, Index p, double maf, double rho,
                                          std::mt19937_64& rng) {
  if (count < 1 || p < 1) throw InputError("haplotype dimensions must be positive");
  if (!(maf > 0.0 && maf <= 0.5)) throw InputError("maf must lie in (0, 0.5]");
  if (!(rho >= 0.0 && rho < 1.0)) throw InputError("rho must lie in [0, 1)");
  const double p11 = maf + rho * (1.0 - maf);
  const double p01 = maf * (1.0 - rho);
  Eigen::MatrixXi h(count, p);
  for (Index i = 0; i < count; ++i) {
    int prev = uniform01(rng) < maf ? 1 : 0;
    h(i, 0) = prev;
    for (Index k = 1; k < p; ++k) {
      prev = uniform01(rng) < (prev ? p11 : p01) ? 1 : 0;
      h(i, k) = prev;
    }
  }
  return h;
}

GenotypeMatrix gen_genotypes(Index n, Index p, double maf, double rho, std::mt19937_64& rng) {
  Eigen::MatrixXi g = gen_correlated_haplotypes(n, p, maf, rho, rng);
  g += gen_correlated_haplotypes(n, p, maf, rho, rng);
  return GenotypeMatrix::create(std::move(g));
}

PhenotypeVector gen_phenotype(const PhenotypeModel& model, const GenotypeMatrix& geno,
                              std::mt19937_64& rng) {
  model.validate(geno.p());
  const Index n = geno.n();
  const Index c = model.causal_locus - 1;
  const double zeta = std::sqrt(model.zeta_sq);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd y(n);

  for (Index i = 0; i < n; ++i) {
    switch (model.family) {
      case Family::kNormalMain:
      case Family::kGlmNormal:
        y[i] = model.a * geno(i, c) + zeta * normal(rng);
        break;
      case Family::kNormalInteraction:
        y[i] = model.b * interaction_burden(geno, i) + zeta * normal(rng);
        break;
      case Family::kExponentialInteraction: {
        const double rate = 1.0 + model.b * interaction_burden(geno, i);
        y[i] = -std::log1p(-uniform01(rng)) / rate;
        break;
      }
      case Family::kGlmExponential: {
        const double mean = std::exp(model.a * geno(i, c));
        y[i] = -std::log1p(-uniform01(rng)) * mean;
        break;
      }
      case Family::kGlmBinary: {
        const double prob = 1.0 / (1.0 + std::exp(-model.a * geno(i, c)));
        y[i] = uniform01(rng) < prob ? 1.0 : 0.0;
        break;
      }
      case Family::kMixtureNormalMain: {
        const double shift = (uniform01(rng) < 0.5 ? -0.5 : 0.5) * model.mixture_gap;
        y[i] = model.a * geno(i, c) + shift + zeta * normal(rng);
        break;
      }
    }
  }
  return PhenotypeVector::create(std::move(y), model.trait_kind(), geno.subject_ids());
}

ReplicateOutcome run_replicate(const StudyScenario& scenario, std::uint64_t replicate) {
  ReplicateOutcome out;
  out.p_values.fill(std::numeric_limits<double>::quiet_NaN());
  std::mt19937_64 rng(child_seed(scenario.seed, replicate));
  try {
    const GenotypeMatrix geno =
        gen_genotypes(scenario.n, scenario.p, scenario.maf, scenario.rho, rng);
    const PhenotypeVector pheno = gen_phenotype(scenario.model, geno, rng);
    const CovariateMatrix x = CovariateMatrix::intercept_only(scenario.n, geno.subject_ids());
    const WeightVector w = WeightVector::uniform(scenario.p);

    for (Method m : scenario.effective_methods()) {
      double p = 1.0;
      switch (m) {
        case Method::kGenRF:
          p = genrf_test(pheno, x, similarity_matrix(geno, w)).p_value;
          break;
        case Method::kSkat:
          p = skat_score_test(pheno, x, ibs_kernel_matrix(geno, w)).p_value;
          break;
        case Method::kLinear:
          p = linear_f_test(pheno, x, geno).p_value;
          break;
      }
      out.p_values[static_cast<std::size_t>(m)] = p;
    }
  } catch (const std::exception& e) {
    out.ok = false;
    out.error = e.what();
  }
  return out;
}

std::vector<ReplicateOutcome> run_replicates(const StudyScenario& scenario, int threads) {
  scenario.validate();
  const auto reps = static_cast<std::size_t>(scenario.n_reps);
  std::vector<ReplicateOutcome> outcomes(reps);
  const auto workers = static_cast<std::size_t>(std::clamp<long>(threads, 1L, static_cast<long>(reps)));
  if (workers == 1) {
    for (std::size_t r = 0; r < reps; ++r) outcomes[r] = run_replicate(scenario, r);
    return outcomes;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (std::size_t r = next++; r < reps; r = next++) outcomes[r] = run_replicate(scenario, r);
    });
  }
  for (auto& th : pool) th.join();
  return outcomes;
}

StudyReport summarize(const StudyScenario& scenario,
                      const std::vector<ReplicateOutcome>& outcomes) {
  StudyReport report;
  report.scenario = scenario;
  report.n_reps = static_cast<int>(outcomes.size());
  for (Method m : scenario.effective_methods()) report.tallies.push_back(MethodTally{m});

  for (std::size_t r = 0; r < outcomes.size(); ++r) {
    const auto& o = outcomes[r];
    if (!o.ok) {
      ++report.n_excluded;
      if (report.exclusion_notes.size() < 10)
        report.exclusion_notes.push_back("replicate " + std::to_string(r) + ": " + o.error);
      continue;
    }
    for (auto& t : report.tallies) {
      ++t.n_valid;
      if (o.p_values[static_cast<std::size_t>(t.method)] < scenario.alpha) ++t.rejections;
    }
  }
  for (auto& t : report.tallies) {
    if (t.n_valid == 0) continue;
    t.rate = static_cast<double>(t.rejections) / t.n_valid;
    t.standard_error = std::sqrt(t.rate * (1.0 - t.rate) / t.n_valid);
  }
  if (report.n_excluded > kMaxExcludedFraction * report.n_reps) {
    throw NumericalError("scenario '" + scenario.name + "': " +
                         std::to_string(report.n_excluded) + " of " +
                         std::to_string(report.n_reps) +
                         " replicates failed (limit 1%); first: " +
                         report.exclusion_notes.front());
  }
  return report;
}

StudyReport run_study(const StudyScenario& scenario, int threads) {
  const auto start = std::chrono::steady_clock::now();
  StudyReport report = summarize(scenario, run_replicates(scenario, threads));
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace genrf
