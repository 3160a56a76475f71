#include "genrf/model_data.hpp"

#include "genrf/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace genrf {

namespace {

std::vector<std::string> default_ids(const char* prefix, Index count) {
  std::vector<std::string> ids;
  ids.reserve(static_cast<std::size_t>(count));
  for (Index i = 0; i < count; ++i) ids.push_back(prefix + std::to_string(i + 1));
  return ids;
}

void require_unique(const std::vector<std::string>& ids, const char* what) {
  std::unordered_set<std::string> seen;
  for (const auto& id : ids) {
    if (!seen.insert(id).second)
      throw InputError(std::string("duplicate ") + what + " '" + id + "'");
  }
}

template <typename T>
std::vector<T> permute(const std::vector<T>& v, const std::vector<Index>& order) {
  std::vector<T> out;
  out.reserve(order.size());
  for (Index i : order) out.push_back(v[static_cast<std::size_t>(i)]);
  return out;
}

void check_order(const std::vector<Index>& order, Index n) {
  if (static_cast<Index>(order.size()) != n)
    throw InputError("reorder: permutation length does not match row count");
  std::vector<bool> hit(static_cast<std::size_t>(n), false);
  for (Index i : order) {
    if (i < 0 || i >= n || hit[static_cast<std::size_t>(i)])
      throw InputError("reorder: not a permutation");
    hit[static_cast<std::size_t>(i)] = true;
  }
}

// --- TSV plumbing ----------------------------------------------------------

struct Table {
  std::string source;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;
};

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find('\t', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

Table read_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  Table t;
  t.source = path.string();
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_tabs(line);
    if (t.header.empty()) {
      t.header = std::move(fields);
      continue;
    }
    if (fields.size() != t.header.size()) {
      throw InputError(t.source + ":" + std::to_string(lineno) + ": expected " +
                       std::to_string(t.header.size()) + " fields, found " +
                       std::to_string(fields.size()));
    }
    t.rows.push_back(std::move(fields));
    t.line_numbers.push_back(lineno);
  }
  if (t.header.empty()) throw InputError(t.source + ": missing header row");
  if (t.header.size() < 2)
    throw InputError(t.source + ": header needs a subject column and at least one data column");
  return t;
}

std::string cell_context(const Table& t, std::size_t row, std::size_t col) {
  return t.source + ":" + std::to_string(t.line_numbers[row]) + ": column " +
         std::to_string(col + 1) + " ('" + t.header[col] + "')";
}

std::optional<double> parse_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return v;
}

bool is_missing_token(const std::string& s) {
  return s.empty() || s == "NA" || s == "." || s == "nan" || s == "NaN";
}

std::vector<std::string> subject_column(const Table& t) {
  std::vector<std::string> ids;
  ids.reserve(t.rows.size());
  for (const auto& r : t.rows) ids.push_back(r[0]);
  return ids;
}

void write_or_throw(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << body;
  if (!out) throw InputError("write failed for '" + path.string() + "'");
}

}  // namespace

const char* to_string(TraitKind kind) {
  return kind == TraitKind::kBinary ? "binary" : "continuous";
}

std::string format_real(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

// --- GenotypeMatrix ----------------------------------------------------------

GenotypeMatrix::GenotypeMatrix(Eigen::MatrixXi values,
                               std::vector<std::string> subject_ids,
                               std::vector<std::string> variant_ids)
    : values_(std::move(values)),
      subject_ids_(std::move(subject_ids)),
      variant_ids_(std::move(variant_ids)) {}

GenotypeMatrix GenotypeMatrix::create(Eigen::MatrixXi values,
                                      std::vector<std::string> subject_ids,
                                      std::vector<std::string> variant_ids) {
  if (values.rows() < 2) throw InputError("genotype matrix needs at least 2 subjects");
  if (values.cols() < 1) throw InputError("genotype matrix needs at least 1 variant");
  for (Index i = 0; i < values.rows(); ++i) {
    for (Index k = 0; k < values.cols(); ++k) {
      const int g = values(i, k);
      if (g < 0 || g > 2) {
        throw InputError("genotype entry (" + std::to_string(i + 1) + ", " +
                         std::to_string(k + 1) + ") = " + std::to_string(g) +
                         " is not in {0,1,2}");
      }
    }
  }
  if (subject_ids.empty()) subject_ids = default_ids("S", values.rows());
  if (variant_ids.empty()) variant_ids = default_ids("V", values.cols());
  if (static_cast<Index>(subject_ids.size()) != values.rows())
    throw InputError("genotype subject id count does not match row count");
  if (static_cast<Index>(variant_ids.size()) != values.cols())
    throw InputError("genotype variant id count does not match column count");
  require_unique(subject_ids, "subject id");
  require_unique(variant_ids, "variant id");
  return GenotypeMatrix(std::move(values), std::move(subject_ids), std::move(variant_ids));
}

GenotypeMatrix GenotypeMatrix::reordered(const std::vector<Index>& order) const {
  check_order(order, n());
  Eigen::MatrixXi v(n(), p());
  for (Index i = 0; i < n(); ++i) v.row(i) = values_.row(order[static_cast<std::size_t>(i)]);
  return GenotypeMatrix(std::move(v), permute(subject_ids_, order), variant_ids_);
}

// --- PhenotypeVector -----------------------------------------------------------

PhenotypeVector::PhenotypeVector(Eigen::VectorXd values, TraitKind kind,
                                 std::vector<std::string> subject_ids,
                                 std::string trait_name)
    : values_(std::move(values)),
      kind_(kind),
      subject_ids_(std::move(subject_ids)),
      trait_name_(std::move(trait_name)) {}

PhenotypeVector PhenotypeVector::create(Eigen::VectorXd values, TraitKind kind,
                                        std::vector<std::string> subject_ids,
                                        std::string trait_name) {
  if (values.size() < 2) throw InputError("phenotype needs at least 2 subjects");
  for (Index i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]))
      throw InputError("phenotype value " + std::to_string(i + 1) + " is not finite");
    if (kind == TraitKind::kBinary && values[i] != 0.0 && values[i] != 1.0)
      throw InputError("binary phenotype value " + std::to_string(i + 1) +
                       " is not 0 or 1");
  }
  if (subject_ids.empty()) subject_ids = default_ids("S", values.size());
  if (static_cast<Index>(subject_ids.size()) != values.size())
    throw InputError("phenotype subject id count does not match value count");
  require_unique(subject_ids, "subject id");
  return PhenotypeVector(std::move(values), kind, std::move(subject_ids),
                         std::move(trait_name));
}

PhenotypeVector PhenotypeVector::reordered(const std::vector<Index>& order) const {
  check_order(order, n());
  Eigen::VectorXd v(n());
  for (Index i = 0; i < n(); ++i) v[i] = values_[order[static_cast<std::size_t>(i)]];
  return PhenotypeVector(std::move(v), kind_, permute(subject_ids_, order), trait_name_);
}

// --- CovariateMatrix -------------------------------------------------------------

CovariateMatrix::CovariateMatrix(Eigen::MatrixXd values,
                                 std::vector<std::string> column_names,
                                 std::vector<std::string> subject_ids)
    : values_(std::move(values)),
      column_names_(std::move(column_names)),
      subject_ids_(std::move(subject_ids)) {}

CovariateMatrix CovariateMatrix::create(Eigen::MatrixXd values,
                                        std::vector<std::string> column_names,
                                        std::vector<std::string> subject_ids) {
  if (values.rows() < 2) throw InputError("covariate matrix needs at least 2 subjects");
  if (values.cols() < 1) throw InputError("covariate matrix needs an intercept column");
  if (!values.allFinite()) throw InputError("covariate matrix has non-finite entries");
  if ((values.col(0).array() != 1.0).any())
    throw InputError("first covariate column must be the intercept (all ones)");
  if (values.cols() > values.rows())
    throw InputError("covariate matrix has more columns than subjects");

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(values);
  const auto& sv = svd.singularValues();
  if (sv[sv.size() - 1] < kRankTolerance * sv[0])
    throw InputError("covariate matrix is rank deficient (smallest/largest singular value " +
                     format_real(sv[sv.size() - 1] / sv[0]) + ")");

  if (column_names.empty()) {
    column_names.push_back("intercept");
    for (Index j = 1; j < values.cols(); ++j) column_names.push_back("X" + std::to_string(j));
  }
  if (subject_ids.empty()) subject_ids = default_ids("S", values.rows());
  if (static_cast<Index>(column_names.size()) != values.cols())
    throw InputError("covariate column name count does not match column count");
  if (static_cast<Index>(subject_ids.size()) != values.rows())
    throw InputError("covariate subject id count does not match row count");
  require_unique(subject_ids, "subject id");
  return CovariateMatrix(std::move(values), std::move(column_names), std::move(subject_ids));
}

CovariateMatrix CovariateMatrix::with_intercept(const Eigen::MatrixXd& values,
                                                std::vector<std::string> column_names,
                                                std::vector<std::string> subject_ids) {
  const bool has_intercept =
      values.cols() > 0 && (values.col(0).array() == 1.0).all();
  if (has_intercept) return create(values, std::move(column_names), std::move(subject_ids));

  Eigen::MatrixXd full(values.rows(), values.cols() + 1);
  full.col(0).setOnes();
  full.rightCols(values.cols()) = values;
  if (!column_names.empty()) column_names.insert(column_names.begin(), "intercept");
  return create(std::move(full), std::move(column_names), std::move(subject_ids));
}

CovariateMatrix CovariateMatrix::intercept_only(Index n, std::vector<std::string> subject_ids) {
  return create(Eigen::MatrixXd::Ones(n, 1), {"intercept"}, std::move(subject_ids));
}

CovariateMatrix CovariateMatrix::reordered(const std::vector<Index>& order) const {
  check_order(order, n());
  Eigen::MatrixXd v(n(), q());
  for (Index i = 0; i < n(); ++i) v.row(i) = values_.row(order[static_cast<std::size_t>(i)]);
  return CovariateMatrix(std::move(v), column_names_, permute(subject_ids_, order));
}

// --- WeightVector ------------------------------------------------------------------

WeightVector WeightVector::create(Eigen::VectorXd w) {
  if (w.size() < 1) throw InputError("weight vector is empty");
  bool any_positive = false;
  for (Index k = 0; k < w.size(); ++k) {
    if (!std::isfinite(w[k]) || w[k] < 0.0)
      throw InputError("weight " + std::to_string(k + 1) + " must be finite and >= 0");
    any_positive = any_positive || w[k] > 0.0;
  }
  if (!any_positive) throw InputError("at least one weight must be positive");
  return WeightVector(std::move(w));
}

WeightVector WeightVector::uniform(Index p) { return create(Eigen::VectorXd::Ones(p)); }

// --- align -------------------------------------------------------------------------

namespace {

std::vector<Index> order_against(const std::vector<std::string>& canonical,
                                 const std::vector<std::string>& other,
                                 const char* what) {
  std::unordered_map<std::string, Index> pos;
  for (std::size_t i = 0; i < other.size(); ++i) pos.emplace(other[i], static_cast<Index>(i));

  std::vector<std::string> missing;
  std::vector<Index> order;
  order.reserve(canonical.size());
  for (const auto& id : canonical) {
    auto it = pos.find(id);
    if (it == pos.end()) {
      missing.push_back(id);
    } else {
      order.push_back(it->second);
    }
  }
  std::set<std::string> canon(canonical.begin(), canonical.end());
  std::vector<std::string> extra;
  for (const auto& id : other)
    if (!canon.count(id)) extra.push_back(id);

  if (!missing.empty() || !extra.empty()) {
    std::ostringstream msg;
    msg << "subject ids differ between genotype and " << what << " data";
    if (!missing.empty()) {
      msg << "; missing from " << what << ":";
      for (const auto& id : missing) msg << ' ' << id;
    }
    if (!extra.empty()) {
      msg << "; not in genotypes:";
      for (const auto& id : extra) msg << ' ' << id;
    }
    throw InputError(msg.str());
  }
  return order;
}

}  // namespace

AlignedDataset align(const GenotypeMatrix& geno, const PhenotypeVector& pheno,
                     const CovariateMatrix& covar) {
  const auto& ids = geno.subject_ids();
  auto pheno_order = order_against(ids, pheno.subject_ids(), "phenotype");
  auto covar_order = order_against(ids, covar.subject_ids(), "covariate");
  if (geno.n() <= covar.q() + 1)
    throw InputError("need more than q + 1 = " + std::to_string(covar.q() + 1) +
                     " subjects, have " + std::to_string(geno.n()));
  return AlignedDataset{geno, pheno.reordered(pheno_order), covar.reordered(covar_order)};
}

AlignedDataset align(const AlignedDataset& data) {
  return align(data.geno, data.pheno, data.covar);
}

// --- file loading --------------------------------------------------------------------

GenotypeMatrix load_genotype_file(const std::filesystem::path& path,
                                  GenotypeLoadOptions options) {
  const Table t = read_table(path);
  const auto n = static_cast<Index>(t.rows.size());
  const auto p = static_cast<Index>(t.header.size() - 1);
  Eigen::MatrixXi values(n, p);
  std::vector<std::vector<Index>> missing(static_cast<std::size_t>(p));

  for (Index i = 0; i < n; ++i) {
    const auto& row = t.rows[static_cast<std::size_t>(i)];
    for (Index k = 0; k < p; ++k) {
      const auto col = static_cast<std::size_t>(k + 1);
      const std::string& cell = row[col];
      if (is_missing_token(cell)) {
        if (!options.impute_missing)
          throw InputError(cell_context(t, static_cast<std::size_t>(i), col) +
                           ": missing genotype (enable imputation to fill it)");
        missing[static_cast<std::size_t>(k)].push_back(i);
        values(i, k) = -1;
        continue;
      }
      int g = -1;
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), g);
      if (ec != std::errc() || ptr != cell.data() + cell.size() || g < 0 || g > 2) {
        throw InputError(cell_context(t, static_cast<std::size_t>(i), col) + ": value '" +
                         cell + "' is not a genotype in {0,1,2}");
      }
      values(i, k) = g;
    }
  }

  for (Index k = 0; k < p; ++k) {
    const auto& miss = missing[static_cast<std::size_t>(k)];
    if (miss.empty()) continue;
    const Index observed = n - static_cast<Index>(miss.size());
    if (observed == 0)
      throw InputError(t.source + ": variant '" + t.header[static_cast<std::size_t>(k + 1)] +
                       "' has no observed genotypes");
    double total = 0.0;
    for (Index i = 0; i < n; ++i)
      if (values(i, k) >= 0) total += values(i, k);
    const int fill = static_cast<int>(std::lround(total / static_cast<double>(observed)));
    for (Index i : miss) values(i, k) = fill;
  }

  std::vector<std::string> variants(t.header.begin() + 1, t.header.end());
  return GenotypeMatrix::create(std::move(values), subject_column(t), std::move(variants));
}

PhenotypeVector load_phenotype_file(const std::filesystem::path& path,
                                    std::optional<TraitKind> kind) {
  const Table t = read_table(path);
  if (t.header.size() != 2)
    throw InputError(t.source + ": phenotype file must have exactly two columns");
  const auto n = static_cast<Index>(t.rows.size());
  Eigen::VectorXd values(n);
  for (Index i = 0; i < n; ++i) {
    const auto r = static_cast<std::size_t>(i);
    auto v = parse_double(t.rows[r][1]);
    if (!v || !std::isfinite(*v))
      throw InputError(cell_context(t, r, 1) + ": '" + t.rows[r][1] + "' is not a finite number");
    values[i] = *v;
  }
  TraitKind resolved = TraitKind::kContinuous;
  if (kind) {
    resolved = *kind;
  } else if (n > 0 && ((values.array() == 0.0) || (values.array() == 1.0)).all()) {
    resolved = TraitKind::kBinary;
  }
  return PhenotypeVector::create(std::move(values), resolved, subject_column(t), t.header[1]);
}

CovariateMatrix load_covariate_file(const std::filesystem::path& path) {
  const Table t = read_table(path);
  const auto n = static_cast<Index>(t.rows.size());
  const auto q = static_cast<Index>(t.header.size() - 1);
  Eigen::MatrixXd values(n, q);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < q; ++j) {
      const auto r = static_cast<std::size_t>(i);
      const auto c = static_cast<std::size_t>(j + 1);
      auto v = parse_double(t.rows[r][c]);
      if (!v || !std::isfinite(*v))
        throw InputError(cell_context(t, r, c) + ": '" + t.rows[r][c] + "' is not a finite number");
      values(i, j) = *v;
    }
  }
  std::vector<std::string> names(t.header.begin() + 1, t.header.end());
  return CovariateMatrix::with_intercept(values, std::move(names), subject_column(t));
}

LoadedMatrix load_matrix_file(const std::filesystem::path& path, MatrixKind kind) {
  switch (kind) {
    case MatrixKind::kGenotype:
      return load_genotype_file(path);
    case MatrixKind::kPhenotype:
      return load_phenotype_file(path);
    case MatrixKind::kCovariate:
      return load_covariate_file(path);
  }
  throw InputError("unknown matrix kind");
}

WeightVector load_weight_file(const std::filesystem::path& path,
                              const std::vector<std::string>& variant_ids) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  std::map<std::string, double> by_id;
  std::string line;
  std::size_t lineno = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_tabs(line);
    const std::string where = path.string() + ":" + std::to_string(lineno);
    if (fields.size() != 2) throw InputError(where + ": expected 2 fields (variant_id, weight)");
    auto w = parse_double(fields[1]);
    if (!w) {
      if (first) {
        first = false;
        continue;  // header
      }
      throw InputError(where + ": weight '" + fields[1] + "' is not a number");
    }
    first = false;
    if (!by_id.emplace(fields[0], *w).second)
      throw InputError(where + ": duplicate variant id '" + fields[0] + "'");
  }
  Eigen::VectorXd w(static_cast<Index>(variant_ids.size()));
  for (std::size_t k = 0; k < variant_ids.size(); ++k) {
    auto it = by_id.find(variant_ids[k]);
    if (it == by_id.end())
      throw InputError(path.string() + ": no weight for variant '" + variant_ids[k] + "'");
    w[static_cast<Index>(k)] = it->second;
  }
  if (by_id.size() != variant_ids.size())
    throw InputError(path.string() + ": weight file lists variants absent from the genotypes");
  return WeightVector::create(std::move(w));
}

// --- writers -------------------------------------------------------------------------

void write_genotype_file(const std::filesystem::path& path, const GenotypeMatrix& geno) {
  std::string out = "subject_id";
  for (const auto& v : geno.variant_ids()) out += '\t' + v;
  out += '\n';
  for (Index i = 0; i < geno.n(); ++i) {
    out += geno.subject_ids()[static_cast<std::size_t>(i)];
    for (Index k = 0; k < geno.p(); ++k) {
      out += '\t';
      out += static_cast<char>('0' + geno(i, k));
    }
    out += '\n';
  }
  write_or_throw(path, out);
}

void write_phenotype_file(const std::filesystem::path& path, const PhenotypeVector& pheno) {
  std::string out = "subject_id\t" + pheno.trait_name() + '\n';
  for (Index i = 0; i < pheno.n(); ++i)
    out += pheno.subject_ids()[static_cast<std::size_t>(i)] + '\t' +
           format_real(pheno.values()[i]) + '\n';
  write_or_throw(path, out);
}

void write_covariate_file(const std::filesystem::path& path, const CovariateMatrix& covar) {
  std::string out = "subject_id";
  for (const auto& c : covar.column_names()) out += '\t' + c;
  out += '\n';
  for (Index i = 0; i < covar.n(); ++i) {
    out += covar.subject_ids()[static_cast<std::size_t>(i)];
    for (Index j = 0; j < covar.q(); ++j) out += '\t' + format_real(covar.values()(i, j));
    out += '\n';
  }
  write_or_throw(path, out);
}

}  // namespace genrf
