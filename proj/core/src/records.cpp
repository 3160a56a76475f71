#include "genrf/records.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <limits>

namespace genrf {

namespace {

std::string sig6(double v) {
  if (std::isnan(v)) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == '\t' || c == '\n') c = ' ';
  return s;
}

nlohmann::json nullable(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace

ResultRecord make_record(const TestResult& r, Index n, Index p, Index q) {
  return ResultRecord{Method::kGenRF, r.gamma_hat, r.gamma_hat, r.p_value, n, p, q,
                      r.n_eigen_dropped, r.method_note};
}

ResultRecord make_record(const SkatResult& r, Index n, Index p, Index q) {
  return ResultRecord{Method::kSkat, std::numeric_limits<double>::quiet_NaN(), r.q_statistic,
                      r.p_value, n, p, q, r.n_eigen_dropped, r.note};
}

ResultRecord make_record(const LinearFTestResult& r, Index n, Index p, Index q) {
  std::string note = "F(" + std::to_string(r.df_numerator) + ", " +
                     std::to_string(r.df_denominator) + ")";
  const int dropped = static_cast<int>(p) - r.df_numerator;
  if (dropped > 0) note += "; dropped " + std::to_string(dropped) + " constant/duplicate columns";
  return ResultRecord{Method::kLinear, std::numeric_limits<double>::quiet_NaN(), r.f_statistic,
                      r.p_value, n, p, q, 0, note};
}

std::string records_to_tsv(const std::vector<ResultRecord>& records,
                           std::string_view manifest_json) {
  std::string out;
  if (!manifest_json.empty()) {
    out += "# manifest\t";
    out += manifest_json;
    out += '\n';
  }
  out += "method\tgamma_hat\tstatistic\tp_value\tn\tp\tq\tn_eigen_dropped\tmethod_note\n";
  for (const auto& r : records) {
    out += std::string(to_string(r.method)) + '\t' + sig6(r.gamma_hat) + '\t' +
           sig6(r.statistic) + '\t' + sig6(r.p_value) + '\t' + std::to_string(r.n) + '\t' +
           std::to_string(r.p) + '\t' + std::to_string(r.q) + '\t' +
           std::to_string(r.n_eigen_dropped) + '\t' + sanitize(r.method_note) + '\n';
  }
  return out;
}

std::string records_to_jsonl(const std::vector<ResultRecord>& records,
                             std::string_view manifest_json) {
  nlohmann::json manifest;
  if (!manifest_json.empty()) manifest = nlohmann::json::parse(manifest_json);
  std::string out;
  for (const auto& r : records) {
    nlohmann::json j = {
        {"method", to_string(r.method)},
        {"gamma_hat", nullable(r.gamma_hat)},
        {"statistic", nullable(r.statistic)},
        {"p_value", r.p_value},
        {"n", r.n},
        {"p", r.p},
        {"q", r.q},
        {"n_eigen_dropped", r.n_eigen_dropped},
        {"method_note", r.method_note},
    };
    if (!manifest.is_null()) j["manifest"] = manifest;
    out += j.dump() + '\n';
  }
  return out;
}

}  // namespace genrf
