#pragma once

// One-row result records shared by every test method, rendered as TSV or
// JSON lines.

#include "genrf/baselines.hpp"
#include "genrf/genrf.hpp"
#include "genrf/simulate.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace genrf {

struct ResultRecord {
  Method method = Method::kGenRF;
  double gamma_hat = 0.0;  // NaN for SKAT / LINEAR
  double statistic = 0.0;  // gamma_hat, Q = r'Kr, or F
  double p_value = 1.0;
  Index n = 0;
  Index p = 0;
  Index q = 0;
  int n_eigen_dropped = 0;
  std::string method_note;
};

ResultRecord make_record(const TestResult& r, Index n, Index p, Index q);
ResultRecord make_record(const SkatResult& r, Index n, Index p, Index q);
ResultRecord make_record(const LinearFTestResult& r, Index n, Index p, Index q);

/// Header comment carrying the manifest (when non-empty), a column header, then
/// one row per record. p-values are printed with 6 significant digits.
std::string records_to_tsv(const std::vector<ResultRecord>& records,
                           std::string_view manifest_json = {});

/// One JSON object per line at full precision; the manifest, when given, is
/// embedded under "manifest".
std::string records_to_jsonl(const std::vector<ResultRecord>& records,
                             std::string_view manifest_json = {});

}  // namespace genrf
