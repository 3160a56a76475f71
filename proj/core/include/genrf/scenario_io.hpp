#pragma once

// Scenario configuration files and study-report rendering.
//
// A scenario file is JSON: either one scenario object, an array of them, or
// {"defaults": {...}, "scenarios": [...]} where each entry overrides the
// defaults key by key. Keys are the StudyScenario field names
// (name, n, p, maf, rho, model, n_reps, alpha, seed, methods) and, inside
// "model", the PhenotypeModel field names (family, a, b, zeta_sq,
// causal_locus, mixture_gap). Unknown keys are rejected.

#include "genrf/simulate.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace genrf {

std::vector<StudyScenario> parse_scenarios(std::string_view text,
                                           std::string_view source = "<scenarios>");
std::vector<StudyScenario> load_scenario_file(const std::filesystem::path& path);

/// Scenario echoed back in file syntax.
std::string scenario_to_json(const StudyScenario& scenario);

/// One row per method. Deterministic: wall time is not included.
std::string report_to_tsv(const StudyReport& report, std::string_view manifest_json = {});
/// Full-precision machine-readable report. Deterministic: wall time is not
/// included.
std::string report_to_json(const StudyReport& report, std::string_view manifest_json = {});

/// Method x {Power, Type I} grid over the one scenario field that varies
/// (rho, model.family, model.a, model.b, n, p or maf). Empty when fewer than
/// two reports or no varying field.
std::string summary_grid(const std::vector<StudyReport>& reports);

}  // namespace genrf
