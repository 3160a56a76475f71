#include "genrf/quadform.hpp"

#include "genrf/errors.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <queue>

namespace genrf {

namespace {

constexpr double kPi = std::numbers::pi;

// 15-point Kronrod rule with embedded 7-point Gauss rule (QUADPACK qk15).
constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

// sin(theta(u)) / (u rho(u)) with weights already scaled so max |l| = 1.
class ImhofIntegrand {
 public:
  ImhofIntegrand(std::vector<double> l, double x) : l_(std::move(l)), x_(x) {
    for (double v : l_) sum_ += v;
  }

  double operator()(double u) const {
    if (u == 0.0) return 0.5 * (sum_ - x_);
    double theta = -0.5 * x_ * u;
    double log_rho = 0.0;
    double prod = 1.0;
    for (double v : l_) {
      const double lu = v * u;
      theta += 0.5 * std::atan(lu);
      prod *= 1.0 + lu * lu;
      if (prod > 1e250) {
        log_rho += std::log(prod);
        prod = 1.0;
      }
    }
    log_rho = 0.25 * (log_rho + std::log(prod));
    return std::sin(theta) * std::exp(-log_rho) / u;
  }

  // 1 / (u rho(u)): absolute envelope of the integrand.
  double envelope(double u) const {
    double log_rho = 0.0;
    for (double v : l_) log_rho += std::log1p(v * v * u * u);
    return std::exp(-0.25 * log_rho) / u;
  }

  // Upper bound of |theta'| on [a, inf).
  double phase_rate(double a) const {
    double r = 0.5 * std::abs(x_);
    for (double v : l_) r += 0.5 * std::abs(v) / (1.0 + v * v * a * a);
    return r;
  }

  // sup over u >= a of |theta'(u) + x/2|.
  double phase_drift(double a) const {
    double r = 0.0;
    for (double v : l_) r += 0.5 * std::abs(v) / (1.0 + v * v * a * a);
    return r;
  }

  const std::vector<double>& weights() const { return l_; }
  double x() const { return x_; }

 private:
  std::vector<double> l_;
  double x_;
  double sum_ = 0.0;
};

struct Panel {
  double a;
  double b;
  double value;
  double error;
  bool operator<(const Panel& other) const { return error < other.error; }
};

Panel integrate_panel(const ImhofIntegrand& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  double abs_sum = std::abs(kronrod);
  std::array<double, 7> f1{}, f2{};
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kKronrodNodes[static_cast<std::size_t>(j)];
    f1[static_cast<std::size_t>(j)] = f(center - dx);
    f2[static_cast<std::size_t>(j)] = f(center + dx);
    const double pair = f1[static_cast<std::size_t>(j)] + f2[static_cast<std::size_t>(j)];
    kronrod += kKronrodWeights[static_cast<std::size_t>(j)] * pair;
    abs_sum += kKronrodWeights[static_cast<std::size_t>(j)] *
               (std::abs(f1[static_cast<std::size_t>(j)]) + std::abs(f2[static_cast<std::size_t>(j)]));
    if (j % 2 == 1) gauss += kGaussWeights[static_cast<std::size_t>(j / 2)] * pair;
  }
  const double mean = 0.5 * kronrod;
  double asc = std::abs(fc - mean) * kKronrodWeights[7];
  for (int j = 0; j < 7; ++j)
    asc += kKronrodWeights[static_cast<std::size_t>(j)] *
           (std::abs(f1[static_cast<std::size_t>(j)] - mean) +
            std::abs(f2[static_cast<std::size_t>(j)] - mean));

  const double value = kronrod * half;
  const double resasc = asc * half;
  double err = std::abs((kronrod - gauss) * half);
  if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  const double resabs = abs_sum * half;
  constexpr double kEps = std::numeric_limits<double>::epsilon();
  if (resabs > std::numeric_limits<double>::min() / (50.0 * kEps))
    err = std::max(50.0 * kEps * resabs, err);
  return Panel{a, b, value, err};
}

// Smallest U such that the truncated integral over [U, inf) contributes at most
// `target` to the probability. Two bounds are tried: Imhof's product bound over
// the k largest weights (best k), and an oscillation bound usable when x != 0.
double truncation_point(const ImhofIntegrand& f, double target) {
  std::vector<double> mags;
  for (double v : f.weights()) mags.push_back(std::abs(v));
  std::sort(mags.begin(), mags.end(), std::greater<>());

  double best = std::numeric_limits<double>::infinity();
  double log_sum = 0.0;
  for (std::size_t k = 1; k <= mags.size(); ++k) {
    log_sum += std::log(mags[k - 1]);
    const double kk = static_cast<double>(k);
    const double log_u =
        (2.0 / kk) * (std::log(2.0 / (kPi * kk)) - 0.5 * log_sum - std::log(target));
    best = std::min(best, std::exp(log_u));
  }

  const double ax = std::abs(f.x());
  if (ax > 0.0) {
    double u = 1.0;
    while (u < best && u < 1e15) {
      if (f.phase_drift(u) <= 0.25 * ax && 8.0 * f.envelope(u) / (kPi * ax) <= target) {
        best = std::min(best, u);
        break;
      }
      u *= 1.25;
    }
  }
  return std::max(best, 1e-3);
}

struct PassResult {
  double probability;
  double error_bound;
  int panels;
};

std::optional<PassResult> imhof_pass(const ImhofIntegrand& f, double tolerance, int panel_cap) {
  const double tail_target = 0.5 * tolerance;
  const double quad_target = 0.5 * tolerance * kPi;  // integral units
  const double upper = truncation_point(f, tail_target);
  if (!std::isfinite(upper)) return std::nullopt;

  // Geometric breakpoints, each split so no sub-panel spans more than half an
  // oscillation of the integrand.
  std::vector<std::pair<double, double>> spans;
  double a = 0.0;
  double b = std::min(upper, 1.0);
  double planned = 0.0;
  while (true) {
    const double rate = f.phase_rate(a);
    const double pieces = std::max(1.0, std::ceil((b - a) * rate / kPi));
    planned += pieces;
    if (planned > panel_cap) return std::nullopt;
    const int count = static_cast<int>(pieces);
    const double width = (b - a) / count;
    for (int i = 0; i < count; ++i) {
      const double lo = a + width * i;
      const double hi = (i + 1 == count) ? b : a + width * (i + 1);
      spans.emplace_back(lo, hi);
    }
    if (b >= upper) break;
    a = b;
    b = std::min(upper, 2.0 * b);
  }

  std::priority_queue<Panel> queue;
  double total_err = 0.0;
  for (const auto& [lo, hi] : spans) {
    Panel p = integrate_panel(f, lo, hi);
    total_err += p.error;
    queue.push(p);
  }
  int panels = static_cast<int>(spans.size());
  while (total_err > quad_target) {
    if (panels >= panel_cap) return std::nullopt;
    Panel worst = queue.top();
    queue.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) return std::nullopt;
    Panel left = integrate_panel(f, worst.a, mid);
    Panel right = integrate_panel(f, mid, worst.b);
    total_err += left.error + right.error - worst.error;
    queue.push(left);
    queue.push(right);
    ++panels;
  }

  std::vector<Panel> done;
  done.reserve(queue.size());
  while (!queue.empty()) {
    done.push_back(queue.top());
    queue.pop();
  }
  std::sort(done.begin(), done.end(), [](const Panel& l, const Panel& r) { return l.a < r.a; });
  double integral = 0.0;
  double err = 0.0;
  for (const Panel& p : done) {
    integral += p.value;
    err += p.error;
  }
  return PassResult{0.5 + integral / kPi, tail_target + err / kPi, panels};
}

double clamp_probability(double p, double snap) {
  if (p < snap) return 0.0;
  if (p > 1.0 - snap) return 1.0;
  return p;
}

}  // namespace

MixtureSpec MixtureSpec::create(std::vector<double> lambdas, double x) {
  if (lambdas.empty()) throw InputError("mixture spec needs at least one weight");
  bool nonzero = false;
  for (double v : lambdas) {
    if (!std::isfinite(v)) throw InputError("mixture weights must be finite");
    nonzero = nonzero || v != 0.0;
  }
  if (!nonzero) throw InputError("mixture spec needs a nonzero weight");
  if (std::isnan(x)) throw InputError("mixture threshold is NaN");
  return MixtureSpec(std::move(lambdas), x);
}

double mixture_cumulant(std::span<const double> lambdas, int r) {
  double s = 0.0;
  for (double v : lambdas) s += std::pow(v, r);
  double factor = std::ldexp(1.0, r - 1);
  for (int k = 2; k < r; ++k) factor *= k;
  return factor * s;
}

double moment_match_tail(const MixtureSpec& spec) {
  const auto& l = spec.lambdas();
  const double k1 = mixture_cumulant(l, 1);
  const double k2 = mixture_cumulant(l, 2);
  const double k3 = mixture_cumulant(l, 3);
  if (k3 < 0.0) {
    std::vector<double> neg(l.size());
    std::transform(l.begin(), l.end(), neg.begin(), [](double v) { return -v; });
    return std::clamp(1.0 - moment_match_tail(MixtureSpec::create(std::move(neg), -spec.x())),
                      0.0, 1.0);
  }
  const double skew = k3 / std::pow(k2, 1.5);
  if (skew < 1e-8) {
    const double z = (spec.x() - k1) / std::sqrt(k2);
    return std::clamp(0.5 * std::erfc(z / std::numbers::sqrt2), 0.0, 1.0);
  }
  // Match a * chi2_d + b to the first three cumulants.
  const double d = 8.0 / (skew * skew);
  const double a = std::sqrt(k2 / (2.0 * d));
  const double b = k1 - a * d;
  const double y = (spec.x() - b) / a;
  if (y <= 0.0) return 1.0;
  return std::clamp(boost::math::gamma_q(0.5 * d, 0.5 * y), 0.0, 1.0);
}

TailProbability tail_prob_weighted_chisq(const MixtureSpec& spec, const QuadformOptions& options) {
  double scale = 0.0;
  for (double v : spec.lambdas()) scale = std::max(scale, std::abs(v));
  std::vector<double> l;
  bool any_pos = false;
  bool any_neg = false;
  for (double v : spec.lambdas()) {
    if (v == 0.0) continue;
    l.push_back(v / scale);
    any_pos = any_pos || v > 0.0;
    any_neg = any_neg || v < 0.0;
  }
  const double x = spec.x() / scale;

  // Q has no mass on one side of x.
  if (!any_neg && x <= 0.0) return TailProbability{1.0, false, 0.0, 0};
  if (!any_pos && x >= 0.0) return TailProbability{0.0, false, 0.0, 0};

  const ImhofIntegrand f(std::move(l), x);
  std::optional<PassResult> pass;
  if (options.tight_tolerance < options.tolerance)
    pass = imhof_pass(f, options.tight_tolerance, options.tight_panel_cap);
  if (!pass) pass = imhof_pass(f, options.tolerance, options.panel_cap);
  if (pass && pass->error_bound <= options.tolerance) {
    return TailProbability{clamp_probability(pass->probability, pass->error_bound), false,
                           pass->error_bound, pass->panels};
  }
  return TailProbability{moment_match_tail(spec), true,
                         std::numeric_limits<double>::quiet_NaN(), 0};
}

}  // namespace genrf
