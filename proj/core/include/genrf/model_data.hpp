#pragma once

// Domain types shared by every module, plus tab-separated file ingestion.
//
// All types validate on construction and are immutable afterwards, so a
// single instance can be shared freely between worker threads.

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace genrf {

using Index = Eigen::Index;

enum class TraitKind { kContinuous, kBinary };

const char* to_string(TraitKind kind);

/// n x p minor-allele counts, every entry in {0, 1, 2}.
class GenotypeMatrix {
 public:
  /// Empty id vectors are replaced by generated labels ("S1".., "V1"..).
  static GenotypeMatrix create(Eigen::MatrixXi values,
                               std::vector<std::string> subject_ids = {},
                               std::vector<std::string> variant_ids = {});

  Index n() const { return values_.rows(); }
  Index p() const { return values_.cols(); }
  int operator()(Index i, Index k) const { return values_(i, k); }

  const Eigen::MatrixXi& values() const { return values_; }
  const std::vector<std::string>& subject_ids() const { return subject_ids_; }
  const std::vector<std::string>& variant_ids() const { return variant_ids_; }

  Eigen::MatrixXd as_double() const { return values_.cast<double>(); }

  /// Rows reordered so that row i of the result is row order[i] of this.
  GenotypeMatrix reordered(const std::vector<Index>& order) const;

 private:
  GenotypeMatrix(Eigen::MatrixXi values, std::vector<std::string> subject_ids,
                 std::vector<std::string> variant_ids);

  Eigen::MatrixXi values_;
  std::vector<std::string> subject_ids_;
  std::vector<std::string> variant_ids_;
};

class PhenotypeVector {
 public:
  static PhenotypeVector create(Eigen::VectorXd values,
                                TraitKind kind = TraitKind::kContinuous,
                                std::vector<std::string> subject_ids = {},
                                std::string trait_name = "trait");

  Index n() const { return values_.size(); }
  TraitKind trait_kind() const { return kind_; }
  const Eigen::VectorXd& values() const { return values_; }
  const std::vector<std::string>& subject_ids() const { return subject_ids_; }
  const std::string& trait_name() const { return trait_name_; }

  PhenotypeVector reordered(const std::vector<Index>& order) const;

 private:
  PhenotypeVector(Eigen::VectorXd values, TraitKind kind,
                  std::vector<std::string> subject_ids, std::string trait_name);

  Eigen::VectorXd values_;
  TraitKind kind_;
  std::vector<std::string> subject_ids_;
  std::string trait_name_;
};

/// n x q design whose first column is the intercept. Full column rank is
/// enforced: the smallest singular value must be at least 1e-10 times the
/// largest.
class CovariateMatrix {
 public:
  static constexpr double kRankTolerance = 1e-10;

  static CovariateMatrix create(Eigen::MatrixXd values,
                                std::vector<std::string> column_names = {},
                                std::vector<std::string> subject_ids = {});

  /// Prepends a column of ones unless the first column already is one.
  static CovariateMatrix with_intercept(const Eigen::MatrixXd& values,
                                        std::vector<std::string> column_names = {},
                                        std::vector<std::string> subject_ids = {});

  static CovariateMatrix intercept_only(Index n,
                                        std::vector<std::string> subject_ids = {});

  Index n() const { return values_.rows(); }
  Index q() const { return values_.cols(); }
  const Eigen::MatrixXd& values() const { return values_; }
  const std::vector<std::string>& column_names() const { return column_names_; }
  const std::vector<std::string>& subject_ids() const { return subject_ids_; }

  CovariateMatrix reordered(const std::vector<Index>& order) const;

 private:
  CovariateMatrix(Eigen::MatrixXd values, std::vector<std::string> column_names,
                  std::vector<std::string> subject_ids);

  Eigen::MatrixXd values_;
  std::vector<std::string> column_names_;
  std::vector<std::string> subject_ids_;
};

/// Per-variant nonnegative weights with at least one positive entry.
class WeightVector {
 public:
  static WeightVector create(Eigen::VectorXd w);
  static WeightVector uniform(Index p);

  Index size() const { return w_.size(); }
  double operator[](Index k) const { return w_[k]; }
  const Eigen::VectorXd& values() const { return w_; }
  double sum() const { return w_.sum(); }

 private:
  explicit WeightVector(Eigen::VectorXd w) : w_(std::move(w)) {}
  Eigen::VectorXd w_;
};

/// Genotypes, phenotype and covariates over one canonical subject order
/// (the genotype file's order).
struct AlignedDataset {
  GenotypeMatrix geno;
  PhenotypeVector pheno;
  CovariateMatrix covar;
};

/// Reorders phenotype and covariate rows to genotype order. Subject sets must
/// match exactly; the subject count must exceed q + 1.
AlignedDataset align(const GenotypeMatrix& geno, const PhenotypeVector& pheno,
                     const CovariateMatrix& covar);
AlignedDataset align(const AlignedDataset& data);

// ---------------------------------------------------------------------------
// Flat files

struct GenotypeLoadOptions {
  /// Replace missing calls ("NA", ".", empty) with the variant mean rounded to
  /// the nearest of {0, 1, 2}. Missing calls are rejected otherwise.
  bool impute_missing = false;
};

enum class MatrixKind { kGenotype, kPhenotype, kCovariate };

using LoadedMatrix = std::variant<GenotypeMatrix, PhenotypeVector, CovariateMatrix>;

GenotypeMatrix load_genotype_file(const std::filesystem::path& path,
                                  GenotypeLoadOptions options = {});
/// Trait kind is inferred (binary iff every value is 0 or 1) unless given.
PhenotypeVector load_phenotype_file(const std::filesystem::path& path,
                                    std::optional<TraitKind> kind = std::nullopt);
CovariateMatrix load_covariate_file(const std::filesystem::path& path);
LoadedMatrix load_matrix_file(const std::filesystem::path& path, MatrixKind kind);

/// Two-column (variant_id, weight) file; an optional header line is skipped.
/// Weights are returned in the order of `variant_ids`.
WeightVector load_weight_file(const std::filesystem::path& path,
                              const std::vector<std::string>& variant_ids);

void write_genotype_file(const std::filesystem::path& path, const GenotypeMatrix& geno);
void write_phenotype_file(const std::filesystem::path& path, const PhenotypeVector& pheno);
void write_covariate_file(const std::filesystem::path& path, const CovariateMatrix& covar);

/// Shortest round-trippable decimal rendering (at least 10 significant digits).
std::string format_real(double value);

}  // namespace genrf
