#pragma once

// Upper-tail probabilities of Q = sum_i lambda_i * chi2_1 (independent
// one-degree-of-freedom chi-squares, weights of either sign).

#include <span>
#include <string>
#include <vector>

namespace genrf {

/// Mixture weights and a threshold. At least one weight must be nonzero.
class MixtureSpec {
 public:
  static MixtureSpec create(std::vector<double> lambdas, double x);

  const std::vector<double>& lambdas() const { return lambdas_; }
  double x() const { return x_; }

 private:
  MixtureSpec(std::vector<double> lambdas, double x) : lambdas_(std::move(lambdas)), x_(x) {}
  std::vector<double> lambdas_;
  double x_;
};

struct TailProbability {
  double value = 0.0;
  /// True when the exact inversion did not converge and the moment-matching
  /// surrogate was used instead.
  bool approximate = false;
  /// Bound on |value - exact| for the inversion path (truncation plus
  /// quadrature estimate); NaN for the surrogate.
  double error_bound = 0.0;
  /// Quadrature panels used by the final pass (0 for closed-form shortcuts).
  int panels = 0;
};

struct QuadformOptions {
  /// Absolute accuracy promised on the exact path.
  double tolerance = 1e-6;
  /// A first pass is attempted at this tighter tolerance; its result is kept
  /// when it converges within `tight_panel_cap` panels.
  double tight_tolerance = 1e-10;
  int tight_panel_cap = 20000;
  /// Panel budget for the pass at `tolerance`; exceeding it triggers the
  /// moment-matching fallback.
  int panel_cap = 400000;
};

/// P(sum lambda_i chi2_1 > x) by numerical inversion of the characteristic
/// function (Imhof's integral), clamped to [0, 1].
TailProbability tail_prob_weighted_chisq(const MixtureSpec& spec,
                                         const QuadformOptions& options = {});

/// Three-cumulant scaled chi-square approximation of the same tail.
double moment_match_tail(const MixtureSpec& spec);

/// r-th cumulant of the mixture: 2^(r-1) (r-1)! sum lambda_i^r.
double mixture_cumulant(std::span<const double> lambdas, int r);

}  // namespace genrf
