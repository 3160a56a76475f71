#include "cli.hpp"

#include "genrf/errors.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  using namespace genrf::cli;

  CLI::App app{"GenRF joint association test and simulation harness"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  TestCommand test;
  std::string test_methods = "GENRF";
  std::string test_out;
  std::string covariates;
  std::string weights;
  auto* t = app.add_subcommand("test", "Test a variant set for joint association with a trait");
  t->add_option("genotypes", test.genotype_path, "Genotype TSV (subjects x variants)")
      ->required()
      ->check(CLI::ExistingFile);
  t->add_option("phenotype", test.phenotype_path, "Phenotype TSV (subject_id, trait)")
      ->required()
      ->check(CLI::ExistingFile);
  t->add_option("--covariates", covariates, "Covariate TSV; an intercept is added if absent")
      ->check(CLI::ExistingFile);
  t->add_option("--weights", weights, "Per-variant weight TSV (variant_id, weight)")
      ->check(CLI::ExistingFile);
  t->add_option("--methods", test_methods, "Comma-separated subset of GENRF,SKAT,LINEAR");
  t->add_option("--alpha", test.alpha, "Test level recorded with the results");
  t->add_option("--out", test_out, "Output file (.tsv, or .jsonl for JSON lines)");
  t->add_flag("--impute-missing", test.impute_missing,
              "Fill missing genotypes with the rounded variant mean");

  SimulateCommand sim;
  std::uint64_t sim_seed = 0;
  double sim_alpha = 0.05;
  std::string sim_methods;
  auto* s = app.add_subcommand("simulate", "Run Monte Carlo power / type-I scenarios");
  s->add_option("scenarios", sim.scenario_path, "Scenario file")->required()->check(CLI::ExistingFile);
  s->add_option("--out", sim.output_dir, "Output directory")->required();
  s->add_option("--threads", sim.threads, "Worker threads")->check(CLI::PositiveNumber);
  auto* seed_opt = s->add_option("--seed", sim_seed, "Override every scenario's seed");
  auto* alpha_opt = s->add_option("--alpha", sim_alpha, "Override every scenario's alpha");
  auto* methods_opt = s->add_option("--methods", sim_methods, "Override methods (GENRF,SKAT,LINEAR)");

  std::vector<double> lambdas;
  double x = 0.0;
  auto* q = app.add_subcommand("quadform", "Tail probability of a weighted chi-square sum");
  q->group("");  // hidden debug command
  q->add_option("--lambdas", lambdas, "Mixture weights")->required()->delimiter(',');
  q->add_option("--x", x, "Threshold")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (t->parsed()) {
      test.methods = parse_method_list(test_methods);
      if (!covariates.empty()) test.covariate_path = covariates;
      if (!weights.empty()) test.weights_path = weights;
      if (!test_out.empty()) test.output_path = test_out;
      return cmd_test(test, std::cout, std::cerr);
    }
    if (s->parsed()) {
      if (*seed_opt) sim.seed = sim_seed;
      if (*alpha_opt) sim.alpha = sim_alpha;
      if (*methods_opt) sim.methods = parse_method_list(sim_methods);
      return cmd_simulate(sim, std::cout, std::cerr);
    }
    if (q->parsed()) return cmd_quadform(lambdas, x, std::cout, std::cerr);
  } catch (const genrf::InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitUsage;
}
