#include "genrf/scenario_io.hpp"

#include "genrf/errors.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace genrf {

namespace {

using json = nlohmann::json;

[[noreturn]] void fail(std::string_view source, const std::string& msg) {
  throw InputError(std::string(source) + ": " + msg);
}

template <typename T>
T get_as(const json& v, std::string_view source, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    fail(source, "key '" + key + "' has the wrong type");
  }
}

double get_number(const json& v, std::string_view source, const std::string& key) {
  if (!v.is_number()) fail(source, "key '" + key + "' must be a number");
  return v.get<double>();
}

long long get_integer(const json& v, std::string_view source, const std::string& key) {
  if (!v.is_number_integer()) fail(source, "key '" + key + "' must be an integer");
  return v.get<long long>();
}

PhenotypeModel parse_model(const json& j, std::string_view source) {
  if (!j.is_object()) fail(source, "key 'model' must be an object");
  PhenotypeModel m;
  for (const auto& [key, value] : j.items()) {
    const std::string k = "model." + key;
    if (key == "family") {
      m.family = family_from_string(get_as<std::string>(value, source, k));
    } else if (key == "a") {
      m.a = get_number(value, source, k);
    } else if (key == "b") {
      m.b = get_number(value, source, k);
    } else if (key == "zeta_sq") {
      m.zeta_sq = get_number(value, source, k);
    } else if (key == "causal_locus") {
      m.causal_locus = static_cast<int>(get_integer(value, source, k));
    } else if (key == "mixture_gap") {
      m.mixture_gap = get_number(value, source, k);
    } else {
      fail(source, "unknown scenario key '" + k + "'");
    }
  }
  return m;
}

std::vector<Method> parse_methods(const json& v, std::string_view source) {
  std::vector<std::string> names;
  if (v.is_string()) {
    std::stringstream ss(v.get<std::string>());
    std::string tok;
    while (std::getline(ss, tok, ',')) names.push_back(tok);
  } else if (v.is_array()) {
    for (const auto& e : v) names.push_back(get_as<std::string>(e, source, "methods"));
  } else {
    fail(source, "key 'methods' must be a list or comma-separated string");
  }
  std::vector<Method> out;
  for (const auto& n : names) out.push_back(method_from_string(n));
  return out;
}

StudyScenario parse_one(const json& j, std::string_view source, std::size_t index) {
  if (!j.is_object()) fail(source, "scenario " + std::to_string(index + 1) + " is not an object");
  StudyScenario s;
  s.name = "scenario" + std::to_string(index + 1);
  for (const auto& [key, value] : j.items()) {
    if (key == "name") {
      s.name = get_as<std::string>(value, source, key);
    } else if (key == "n") {
      s.n = get_integer(value, source, key);
    } else if (key == "p") {
      s.p = get_integer(value, source, key);
    } else if (key == "maf") {
      s.maf = get_number(value, source, key);
    } else if (key == "rho") {
      s.rho = get_number(value, source, key);
    } else if (key == "model") {
      s.model = parse_model(value, source);
    } else if (key == "n_reps") {
      s.n_reps = static_cast<int>(get_integer(value, source, key));
    } else if (key == "alpha") {
      s.alpha = get_number(value, source, key);
    } else if (key == "seed") {
      if (!value.is_number_integer() || (value.is_number_integer() && !value.is_number_unsigned() &&
                                         value.get<long long>() < 0))
        fail(source, "key 'seed' must be a nonnegative integer");
      s.seed = value.get<std::uint64_t>();
    } else if (key == "methods") {
      s.methods = parse_methods(value, source);
    } else {
      fail(source, "unknown scenario key '" + key + "'");
    }
  }
  if (s.name.empty() || s.name.find_first_of("/\\") != std::string::npos)
    fail(source, "scenario name '" + s.name + "' must be a plain file stem");
  try {
    s.validate();
  } catch (const InputError& e) {
    fail(source, "scenario '" + s.name + "': " + e.what());
  }
  return s;
}

json merged(const json& defaults, const json& entry) {
  if (!defaults.is_object() || !entry.is_object()) return entry;
  json out = defaults;
  for (const auto& [key, value] : entry.items()) {
    if (key == "model" && out.contains("model") && out["model"].is_object() && value.is_object()) {
      for (const auto& [mk, mv] : value.items()) out["model"][mk] = mv;
    } else {
      out[key] = value;
    }
  }
  return out;
}

json scenario_json(const StudyScenario& s) {
  json methods = json::array();
  for (Method m : s.methods) methods.push_back(to_string(m));
  return json{{"name", s.name},
              {"n", s.n},
              {"p", s.p},
              {"maf", s.maf},
              {"rho", s.rho},
              {"model",
               {{"family", to_string(s.model.family)},
                {"a", s.model.a},
                {"b", s.model.b},
                {"zeta_sq", s.model.zeta_sq},
                {"causal_locus", s.model.causal_locus},
                {"mixture_gap", s.model.mixture_gap}}},
              {"n_reps", s.n_reps},
              {"alpha", s.alpha},
              {"seed", s.seed},
              {"methods", methods}};
}

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

}  // namespace

std::vector<StudyScenario> parse_scenarios(std::string_view text, std::string_view source) {
  json root;
  try {
    root = json::parse(text.begin(), text.end(), nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    fail(source, std::string("malformed scenario file: ") + e.what());
  }

  json defaults = json::object();
  json entries;
  if (root.is_array()) {
    entries = root;
  } else if (root.is_object() && (root.contains("scenarios") || root.contains("defaults"))) {
    for (const auto& [key, value] : root.items())
      if (key != "scenarios" && key != "defaults") fail(source, "unknown top-level key '" + key + "'");
    if (root.contains("defaults")) defaults = root["defaults"];
    if (!defaults.is_object()) fail(source, "'defaults' must be an object");
    entries = root.value("scenarios", json::array());
    if (!entries.is_array()) fail(source, "'scenarios' must be a list");
  } else if (root.is_object()) {
    entries = json::array({root});
  } else {
    fail(source, "expected a scenario object or a list of scenarios");
  }
  if (entries.empty()) fail(source, "no scenarios");

  std::vector<StudyScenario> out;
  std::set<std::string> names;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    out.push_back(parse_one(merged(defaults, entries[i]), source, i));
    if (!names.insert(out.back().name).second)
      fail(source, "duplicate scenario name '" + out.back().name + "'");
  }
  return out;
}

std::vector<StudyScenario> load_scenario_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenarios(buf.str(), path.string());
}

std::string scenario_to_json(const StudyScenario& scenario) {
  return scenario_json(scenario).dump(2);
}

std::string report_to_tsv(const StudyReport& report, std::string_view manifest_json) {
  std::string out;
  if (!manifest_json.empty()) {
    out += "# manifest\t";
    out += manifest_json;
    out += '\n';
  }
  out += "# scenario\t" + scenario_json(report.scenario).dump() + '\n';
  out += "scenario\tmethod\trejections\tn_valid\trate\tstandard_error\tn_reps\tn_excluded\n";
  for (const auto& t : report.tallies) {
    out += report.scenario.name + '\t' + std::string(to_string(t.method)) + '\t' +
           std::to_string(t.rejections) + '\t' + std::to_string(t.n_valid) + '\t' +
           format_real(t.rate) + '\t' + format_real(t.standard_error) + '\t' +
           std::to_string(report.n_reps) + '\t' + std::to_string(report.n_excluded) + '\n';
  }
  return out;
}

std::string report_to_json(const StudyReport& report, std::string_view manifest_json) {
  json methods = json::array();
  for (const auto& t : report.tallies) {
    methods.push_back({{"method", to_string(t.method)},
                       {"rejections", t.rejections},
                       {"n_valid", t.n_valid},
                       {"rate", t.rate},
                       {"standard_error", t.standard_error}});
  }
  json j = {{"scenario", scenario_json(report.scenario)},
            {"n_reps", report.n_reps},
            {"n_excluded", report.n_excluded},
            {"exclusion_notes", report.exclusion_notes},
            {"methods", methods}};
  if (!manifest_json.empty()) j["manifest"] = json::parse(manifest_json);
  return j.dump(2) + '\n';
}

std::string summary_grid(const std::vector<StudyReport>& reports) {
  if (reports.size() < 2) return {};

  struct Axis {
    const char* label;
    std::function<std::string(const StudyScenario&)> value;
  };
  const std::vector<Axis> axes = {
      {"rho", [](const StudyScenario& s) { return format_real(s.rho); }},
      {"family", [](const StudyScenario& s) { return std::string(to_string(s.model.family)); }},
      {"a", [](const StudyScenario& s) { return format_real(s.model.a); }},
      {"b", [](const StudyScenario& s) { return format_real(s.model.b); }},
      {"n", [](const StudyScenario& s) { return std::to_string(s.n); }},
      {"p", [](const StudyScenario& s) { return std::to_string(s.p); }},
      {"maf", [](const StudyScenario& s) { return format_real(s.maf); }},
  };

  // The sweep axis is the first field that varies among the power scenarios
  // (or among all scenarios when none has an effect).
  std::vector<const StudyReport*> power;
  for (const auto& r : reports)
    if (!r.scenario.model.is_null()) power.push_back(&r);
  const Axis* sweep = nullptr;
  for (const auto& axis : axes) {
    std::set<std::string> seen;
    if (power.size() >= 2) {
      for (const auto* r : power) seen.insert(axis.value(r->scenario));
    } else {
      for (const auto& r : reports) seen.insert(axis.value(r.scenario));
    }
    if (seen.size() > 1) {
      sweep = &axis;
      break;
    }
  }
  if (sweep == nullptr) return {};

  std::vector<std::string> columns;
  for (const auto& r : reports) {
    const std::string v = sweep->value(r.scenario);
    if (std::find(columns.begin(), columns.end(), v) == columns.end()) columns.push_back(v);
  }

  auto cell = [&](Method m, bool null_row, const std::string& col) -> std::string {
    for (const auto& r : reports) {
      if (r.scenario.model.is_null() != null_row || sweep->value(r.scenario) != col) continue;
      const bool requested = std::find(r.scenario.methods.begin(), r.scenario.methods.end(), m) !=
                             r.scenario.methods.end();
      if (!requested) return "-";
      for (const auto& t : r.tallies)
        if (t.method == m) return fixed3(t.rate);
      return "*";  // requested but not applicable (SKAT on a binary trait)
    }
    return "-";
  };

  std::set<Method> used;
  for (const auto& r : reports)
    for (Method m : r.scenario.methods) used.insert(m);

  std::ostringstream out;
  std::size_t width = 7;
  for (const auto& c : columns) width = std::max(width, c.size() + 1);
  auto pad = [&](const std::string& s, std::size_t w) {
    return s.size() >= w ? s + ' ' : s + std::string(w - s.size(), ' ');
  };
  out << pad("Method", 8) << pad("", 8);
  for (const auto& c : columns) out << pad(c, width);
  out << "  (" << sweep->label << ")\n";
  for (Method m : kAllMethods) {
    if (!used.count(m)) continue;
    for (bool null_row : {false, true}) {
      out << pad(null_row ? "" : std::string(to_string(m)), 8)
          << pad(null_row ? "Type I" : "Power", 8);
      for (const auto& c : columns) out << pad(cell(m, null_row, c), width);
      out << '\n';
    }
  }
  return out.str();
}

}  // namespace genrf
