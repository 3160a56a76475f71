#include "oracles.hpp"

#include "cli.hpp"
#include "genrf/baselines.hpp"
#include "genrf/genrf.hpp"
#include "genrf/kernel.hpp"
#include "genrf/simulate.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace genrf;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "genrf_unit_cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("test command reproduces library calls exactly") {
  const fs::path dir = scratch_dir("equivalence");
  std::mt19937_64 rng(61);
  const auto geno = gen_genotypes(100, 10, 0.3, 0.4, rng);
  PhenotypeModel model;
  model.a = 0.4;
  const auto pheno = gen_phenotype(model, geno, rng);
  write_genotype_file(dir / "geno.tsv", geno);
  write_phenotype_file(dir / "pheno.tsv", pheno);

  cli::TestCommand cmd;
  cmd.genotype_path = (dir / "geno.tsv").string();
  cmd.phenotype_path = (dir / "pheno.tsv").string();
  cmd.methods = {Method::kGenRF, Method::kSkat, Method::kLinear};
  cmd.output_path = (dir / "out.jsonl").string();
  std::ostringstream out, err;
  REQUIRE(cli::cmd_test(cmd, out, err) == cli::kExitOk);

  const auto x = CovariateMatrix::intercept_only(100);
  const auto w = WeightVector::uniform(10);
  const double p_genrf = genrf_test(pheno, x, similarity_matrix(geno, w)).p_value;
  const double p_skat = skat_score_test(pheno, x, ibs_kernel_matrix(geno, w)).p_value;
  const double p_lin = linear_f_test(pheno, x, geno).p_value;

  std::ifstream in(dir / "out.jsonl");
  std::vector<nlohmann::json> rows;
  for (std::string line; std::getline(in, line);) rows.push_back(nlohmann::json::parse(line));
  REQUIRE(rows.size() == 3);
  CHECK(rows[0]["method"] == "GENRF");
  CHECK(rows[0]["p_value"].get<double>() == p_genrf);
  CHECK(rows[1]["method"] == "SKAT");
  CHECK(rows[1]["p_value"].get<double>() == p_skat);
  CHECK(rows[2]["method"] == "LINEAR");
  CHECK(rows[2]["p_value"].get<double>() == p_lin);
  CHECK(rows[0]["manifest"]["command"] == "test");
  CHECK(fs::exists(dir / "out.jsonl.manifest.json"));

  // TSV to stdout carries the same records.
  cmd.output_path.reset();
  std::ostringstream tsv;
  REQUIRE(cli::cmd_test(cmd, tsv, err) == cli::kExitOk);
  CHECK(tsv.str().find("method\tgamma_hat\tstatistic\tp_value") != std::string::npos);
}

TEST_CASE("mismatched subject ids fail without writing output") {
  const fs::path dir = scratch_dir("mismatch");
  std::mt19937_64 rng(62);
  const auto geno = gen_genotypes(20, 10, 0.3, 0.0, rng);
  std::vector<std::string> ids = geno.subject_ids();
  ids[4] = "stranger";
  const auto pheno = PhenotypeVector::create(oracle::random_normal(20, rng),
                                             TraitKind::kContinuous, ids);
  write_genotype_file(dir / "geno.tsv", geno);
  write_phenotype_file(dir / "pheno.tsv", pheno);
  cli::TestCommand cmd;
  cmd.genotype_path = (dir / "geno.tsv").string();
  cmd.phenotype_path = (dir / "pheno.tsv").string();
  cmd.output_path = (dir / "out.tsv").string();
  std::ostringstream out, err;
  CHECK(cli::cmd_test(cmd, out, err) != cli::kExitOk);
  CHECK_FALSE(fs::exists(dir / "out.tsv"));
  CHECK(err.str().find("stranger") != std::string::npos);
}

TEST_CASE("simulate rejects a malformed scenario key by name") {
  const fs::path dir = scratch_dir("badkey");
  std::ofstream(dir / "bad.scenarios") << R"({"name": "x", "n_rep": 10})";
  cli::SimulateCommand cmd;
  cmd.scenario_path = (dir / "bad.scenarios").string();
  cmd.output_dir = (dir / "out").string();
  std::ostringstream out, err;
  CHECK(cli::cmd_simulate(cmd, out, err) == cli::kExitInput);
  CHECK(err.str().find("n_rep") != std::string::npos);
}

TEST_CASE("simulate output is byte-identical across thread counts") {
  const fs::path dir = scratch_dir("determinism");
  std::ofstream(dir / "null.scenarios")
      << R"({"name": "null", "n_reps": 30, "rho": 0.4, "seed": 9})";
  std::ostringstream out, err;
  cli::SimulateCommand cmd;
  cmd.scenario_path = (dir / "null.scenarios").string();
  cmd.output_dir = (dir / "one").string();
  REQUIRE(cli::cmd_simulate(cmd, out, err) == cli::kExitOk);
  cmd.output_dir = (dir / "three").string();
  cmd.threads = 3;
  REQUIRE(cli::cmd_simulate(cmd, out, err) == cli::kExitOk);
  CHECK(slurp(dir / "one" / "null.tsv") == slurp(dir / "three" / "null.tsv"));
  CHECK(slurp(dir / "one" / "null.json") == slurp(dir / "three" / "null.json"));
  CHECK(fs::exists(dir / "three" / "run_manifest.json"));
}

TEST_CASE("quadform debug command") {
  std::ostringstream out, err;
  CHECK(cli::cmd_quadform({1.0, -1.0}, 0.0, out, err) == cli::kExitOk);
  CHECK(std::abs(std::stod(out.str()) - 0.5) < 1e-9);
  std::ostringstream out2;
  CHECK(cli::cmd_quadform({0.0}, 1.0, out2, err) == cli::kExitInput);
}

TEST_CASE("method lists") {
  CHECK(cli::parse_method_list("genrf,LINEAR,genrf") ==
        std::vector<Method>{Method::kGenRF, Method::kLinear});
  CHECK_THROWS(cli::parse_method_list(""));
  CHECK_THROWS(cli::parse_method_list("GENRF,BURDEN"));
}

}
