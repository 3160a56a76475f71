#include "cli.hpp"

#include "genrf/baselines.hpp"
#include "genrf/errors.hpp"
#include "genrf/genrf.hpp"
#include "genrf/kernel.hpp"
#include "genrf/records.hpp"
#include "genrf/scenario_io.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

namespace genrf::cli {

namespace {

namespace fs = std::filesystem;

std::string join_methods(const std::vector<Method>& methods) {
  std::string s;
  for (Method m : methods) {
    if (!s.empty()) s += ',';
    s += to_string(m);
  }
  return s;
}

void write_file(const fs::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << body;
  if (!out) throw InputError("write failed for '" + path.string() + "'");
}

bool wants_jsonl(const std::string& path) {
  const auto ext = fs::path(path).extension().string();
  return ext == ".jsonl" || ext == ".json";
}

}  // namespace

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string RunManifest::reproducible_json() const {
  nlohmann::json j = {{"command", command},
                      {"inputs", inputs},
                      {"options", options},
                      {"tool_version", tool_version}};
  return j.dump();
}

std::string RunManifest::full_json() const {
  nlohmann::json j = nlohmann::json::parse(reproducible_json());
  j["timestamp"] = timestamp;
  return j.dump(2) + '\n';
}

std::vector<Method> parse_method_list(const std::string& csv) {
  std::vector<Method> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    const Method m = method_from_string(tok);
    if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
  }
  if (out.empty()) throw InputError("no methods given");
  return out;
}

int cmd_test(const TestCommand& cmd, std::ostream& out, std::ostream& err) {
  RunManifest manifest;
  manifest.command = "test";
  manifest.timestamp = utc_timestamp();
  manifest.inputs["genotypes"] = cmd.genotype_path;
  manifest.inputs["phenotype"] = cmd.phenotype_path;
  if (cmd.covariate_path) manifest.inputs["covariates"] = *cmd.covariate_path;
  if (cmd.weights_path) manifest.options["weights"] = *cmd.weights_path;
  manifest.options["methods"] = join_methods(cmd.methods);
  manifest.options["alpha"] = format_real(cmd.alpha);
  manifest.options["impute_missing"] = cmd.impute_missing ? "true" : "false";

  std::vector<ResultRecord> records;
  try {
    const GenotypeMatrix geno =
        load_genotype_file(cmd.genotype_path, GenotypeLoadOptions{cmd.impute_missing});
    const PhenotypeVector pheno = load_phenotype_file(cmd.phenotype_path);
    const CovariateMatrix covar =
        cmd.covariate_path ? load_covariate_file(*cmd.covariate_path)
                           : CovariateMatrix::intercept_only(pheno.n(), pheno.subject_ids());
    const AlignedDataset data = align(geno, pheno, covar);
    const WeightVector w = cmd.weights_path
                               ? load_weight_file(*cmd.weights_path, geno.variant_ids())
                               : WeightVector::uniform(geno.p());

    const Index n = data.geno.n();
    const Index p = data.geno.p();
    const Index q = data.covar.q();
    for (Method m : cmd.methods) {
      switch (m) {
        case Method::kGenRF:
          records.push_back(make_record(
              genrf_test(data.pheno, data.covar, similarity_matrix(data.geno, w)), n, p, q));
          break;
        case Method::kSkat:
          records.push_back(make_record(
              skat_score_test(data.pheno, data.covar, ibs_kernel_matrix(data.geno, w)), n, p, q));
          break;
        case Method::kLinear:
          records.push_back(make_record(linear_f_test(data.pheno, data.covar, data.geno), n, p, q));
          break;
      }
    }
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }

  const std::string embedded = manifest.reproducible_json();
  try {
    if (cmd.output_path) {
      const std::string body = wants_jsonl(*cmd.output_path)
                                   ? records_to_jsonl(records, embedded)
                                   : records_to_tsv(records, embedded);
      write_file(*cmd.output_path, body);
      nlohmann::json sidecar = nlohmann::json::parse(manifest.full_json());
      sidecar["out"] = *cmd.output_path;
      write_file(*cmd.output_path + ".manifest.json", sidecar.dump(2) + '\n');
    } else {
      out << records_to_tsv(records, embedded);
    }
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitOk;
}

int cmd_simulate(const SimulateCommand& cmd, std::ostream& out, std::ostream& err) {
  std::vector<StudyScenario> scenarios;
  try {
    scenarios = load_scenario_file(cmd.scenario_path);
    for (auto& s : scenarios) {
      if (cmd.seed) s.seed = *cmd.seed;
      if (cmd.alpha) s.alpha = *cmd.alpha;
      if (cmd.methods) s.methods = *cmd.methods;
      s.validate();
    }
    fs::create_directories(cmd.output_dir);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }

  RunManifest manifest;
  manifest.command = "simulate";
  manifest.timestamp = utc_timestamp();
  manifest.inputs["scenarios"] = cmd.scenario_path;
  if (cmd.seed) manifest.options["seed"] = std::to_string(*cmd.seed);
  if (cmd.alpha) manifest.options["alpha"] = format_real(*cmd.alpha);
  if (cmd.methods) manifest.options["methods"] = join_methods(*cmd.methods);
  const std::string embedded = manifest.reproducible_json();

  nlohmann::json timings = nlohmann::json::array();
  std::vector<StudyReport> reports;
  int failures = 0;
  for (const auto& s : scenarios) {
    try {
      StudyReport report = run_study(s, cmd.threads);
      const fs::path base = fs::path(cmd.output_dir) / s.name;
      write_file(base.string() + ".tsv", report_to_tsv(report, embedded));
      write_file(base.string() + ".json", report_to_json(report, embedded));
      err << s.name << ": " << report.n_reps << " replicates in " << report.wall_seconds
          << " s\n";
      timings.push_back({{"scenario", s.name},
                         {"wall_seconds", report.wall_seconds},
                         {"status", "ok"}});
      reports.push_back(std::move(report));
    } catch (const std::exception& e) {
      ++failures;
      err << s.name << ": failed: " << e.what() << '\n';
      timings.push_back({{"scenario", s.name}, {"status", "failed"}, {"error", e.what()}});
    }
  }

  nlohmann::json run = nlohmann::json::parse(manifest.full_json());
  run["out"] = cmd.output_dir;
  run["threads"] = cmd.threads;
  run["scenarios"] = timings;
  try {
    write_file(fs::path(cmd.output_dir) / "run_manifest.json", run.dump(2) + '\n');
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }

  const std::string grid = summary_grid(reports);
  if (!grid.empty()) out << grid;
  return failures == 0 ? kExitOk : kExitPartial;
}

int cmd_quadform(const std::vector<double>& lambdas, double x, std::ostream& out,
                 std::ostream& err) {
  try {
    const auto spec = MixtureSpec::create(lambdas, x);
    const TailProbability t = tail_prob_weighted_chisq(spec);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", t.value);
    out << buf;
    if (t.approximate) out << "\tapproximate";
    out << '\n';
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitOk;
}

}  // namespace genrf::cli
