#pragma once

// Selected-port channel statistics: shifted-Rayleigh maximum within a block,
// Gumbel limit across blocks, Gumbel moments and a Gamma moment match.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "faslora/channel.hpp"
#include "faslora/quadrature.hpp"
#include "faslora/specfun.hpp"

namespace faslora {

/// delta_a = sqrt((1 - mu^2)/2 * W0((L_a - 2)^2 / (2 pi))).
inline double block_shift_delta(double mu_sq, int L_a) {
  if (L_a < 2) throw std::invalid_argument("block_shift_delta: block needs >= 2 ports");
  if (!(mu_sq >= 0.0) || !(mu_sq <= 1.0)) throw std::invalid_argument("block_shift_delta: mu^2 must be in [0, 1]");
  const double d = L_a - 2.0;
  return std::sqrt(0.5 * (1.0 - mu_sq) * lambert_w0(d * d / (2.0 * std::numbers::pi)));
}

/// CDF of the largest envelope in one block. mu^2 = 0 uses the exact
/// i.i.d. Rayleigh maximum since the shifted form divides by mu^2.
inline double single_block_cdf(double r, double mu_sq, int L_a) {
  if (!(r >= 0.0)) throw std::domain_error("single_block_cdf: r must be >= 0");
  if (mu_sq == 0.0) return std::pow(-std::expm1(-r * r), L_a);
  const double delta = block_shift_delta(mu_sq, L_a);
  if (r <= delta) return 0.0;
  const double z = r - delta;
  return -std::expm1(-z * z / mu_sq);
}

/// Max-type Gumbel: F(x) = exp(-exp(-(x - alpha)/beta)).
struct GumbelParams {
  double alpha = 0.0;
  double beta = 1.0;
  // The fit is not an extreme-value limit (A = 1, or all blocks
  // uncorrelated); callers should use the block-product CDF instead.
  bool degenerate = false;
};

/// Inverse CDF of Rayleigh(1/sqrt(2)).
inline double rayleigh_half_quantile(double q) { return std::sqrt(-std::log1p(-q)); }

inline GumbelParams gumbel_fit(const BlockModel& model) {
  model.validate();
  const double A = model.count();
  double mu_bar = 0.0, delta_bar = 0.0;
  for (const auto& b : model.blocks) {
    mu_bar += std::sqrt(b.mu_sq);
    delta_bar += block_shift_delta(b.mu_sq, b.size);
  }
  mu_bar /= A;
  delta_bar /= A;
  GumbelParams p;
  const double q0 = rayleigh_half_quantile(1.0 - 1.0 / A);
  const double q1 = rayleigh_half_quantile(1.0 - 1.0 / (A * std::numbers::e));
  p.alpha = mu_bar * q0 + delta_bar;
  p.beta = mu_bar * (q1 - q0);
  p.degenerate = model.count() == 1 || !(p.beta > 0.0);
  return p;
}

inline double gumbel_cdf(double x, const GumbelParams& p) { return std::exp(-std::exp(-(x - p.alpha) / p.beta)); }

inline double gumbel_pdf(double x, const GumbelParams& p) {
  const double z = (x - p.alpha) / p.beta;
  return std::exp(-z - std::exp(-z)) / p.beta;
}

/// E{X^n}: n-th derivative of Gamma(1 - beta t) e^{alpha t} at t = 0, via
/// Leibniz over the two factors and complete Bell polynomials in the
/// cumulants (-beta)^k psi^(k-1)(1) of the log-gamma factor.
inline double gumbel_moment(int n, const GumbelParams& p) {
  if (n < 0) throw std::domain_error("gumbel_moment: order must be >= 0");
  std::vector<double> psi(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) psi[k] = polygamma_at_one(k);
  double sum = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double bell = bell_complete(k, std::span<const double>(psi.data(), static_cast<std::size_t>(k)));
    sum += binomial(n, k) * std::pow(p.alpha, n - k) * std::pow(-p.beta, k) * bell;
  }
  return sum;
}

/// Envelope model of the selected port: the Gumbel limit when it applies,
/// otherwise the product of the independent per-block CDFs.
struct EnvelopeFit {
  BlockModel model;
  GumbelParams gumbel;

  bool uses_gumbel() const { return !gumbel.degenerate; }

  double block_product_cdf(double r) const {
    double f = 1.0;
    for (const auto& b : model.blocks) f *= single_block_cdf(r, b.mu_sq, b.size);
    return f;
  }

  double cdf(double r) const {
    if (uses_gumbel()) return gumbel_cdf(r, gumbel);
    return r <= 0.0 ? 0.0 : block_product_cdf(r);
  }

  double moment(int n, const QuadratureSpec& quad = {}) const {
    if (uses_gumbel()) return gumbel_moment(n, gumbel);
    if (n == 0) return 1.0;
    // E X^n = int_0^inf n x^{n-1} (1 - F(x)) dx; envelopes are bounded
    // by ~sqrt(ln(L) + 40) well beyond any relevant tail.
    const double hi = std::sqrt(std::log(static_cast<double>(model.ports())) + 45.0) + 2.0;
    std::vector<double> breaks = {0.0};
    for (const auto& b : model.blocks)
      if (b.mu_sq > 0.0) breaks.push_back(block_shift_delta(b.mu_sq, b.size));
    breaks.push_back(hi);
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
      total += integrate([&](double x) { return n * std::pow(x, n - 1) * (1.0 - block_product_cdf(x)); },
                         breaks[i], breaks[i + 1], quad)
                   .value;
    return total;
  }
};

inline EnvelopeFit envelope_fit(const BlockModel& model) { return {model, gumbel_fit(model)}; }

/// Gamma(shape, rate) fitted to X^power by matching mean and variance.
struct GammaParams {
  double shape = 1.0;
  double rate = 1.0;
  int power = 2;

  double mean() const { return shape / rate; }
  double variance() const { return shape / (rate * rate); }

  void validate() const {
    if (!(shape > 0.0) || !(rate > 0.0)) throw std::invalid_argument("GammaParams: shape and rate must be > 0");
  }
};

/// Fit from the n-th and 2n-th raw moments of the envelope.
inline GammaParams gamma_fit_moments(int n, double m_n, double m_2n) {
  if (n != 1 && n != 2) throw std::invalid_argument("gamma_fit: power must be 1 or 2");
  const double phi = m_n;
  const double var = m_2n - phi * phi;
  if (!(var > 0.0) || !(phi > 0.0)) throw NumericError("gamma_fit: moments give non-positive variance or mean");
  return {phi * phi / var, phi / var, n};
}

inline GammaParams gamma_fit(int n, const GumbelParams& p) {
  return gamma_fit_moments(n, gumbel_moment(n, p), gumbel_moment(2 * n, p));
}

inline GammaParams gamma_fit(int n, const EnvelopeFit& fit) {
  return gamma_fit_moments(n, fit.moment(n), fit.moment(2 * n));
}

inline double gamma_cdf(double x, const GammaParams& g) { return x <= 0.0 ? 0.0 : gamma_p(g.shape, g.rate * x); }

/// Exponential |h|^2, i.e. a single fixed antenna under Rayleigh fading.
inline GammaParams single_antenna_gamma() { return {1.0, 1.0, 2}; }

/// Sum of block shifts modeled as linear in the block count, x A + y.
struct DeltaLine {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Least-squares line through (A, sum delta) pairs from a geometry sweep.
inline DeltaLine fit_delta_line(std::span<const BlockModel> models) {
  if (models.size() < 2) throw std::invalid_argument("fit_delta_line: need at least two models");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(models.size());
  for (const auto& m : models) {
    const double a = m.count();
    double s = 0.0;
    for (const auto& b : m.blocks) s += block_shift_delta(b.mu_sq, b.size);
    sx += a;
    sy += s;
    sxx += a * a;
    sxy += a * s;
  }
  const double den = n * sxx - sx * sx;
  if (den == 0.0) throw std::invalid_argument("fit_delta_line: all models have the same block count");
  DeltaLine line;
  line.slope = (n * sxy - sx * sy) / den;
  line.intercept = (sy - line.slope * sx) / n;
  return line;
}

struct MeislerRow {
  double A = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double c1 = 0.0;  // |log alpha_A| + |beta_A|, should grow
  double c2 = 0.0;  // beta_{A+1} / beta_A, should tend to 1
  double c3 = 0.0;  // (alpha_{A+1} - alpha_A) / beta_A, should tend to 0
};

/// Normalizing-sequence diagnostics for the Gumbel limit with a common
/// mean block correlation mu_bar and sum of shifts following `line`.
inline std::vector<MeislerRow> meisler_diagnostics(std::span<const double> A_range, double mu_bar,
                                                   const DeltaLine& line) {
  if (!(mu_bar > 0.0)) throw std::invalid_argument("meisler_diagnostics: mu_bar must be > 0");
  for (std::size_t i = 0; i < A_range.size(); ++i) {
    if (!(A_range[i] >= 2.0)) throw std::invalid_argument("meisler_diagnostics: A must be >= 2");
    if (i > 0 && !(A_range[i] > A_range[i - 1]))
      throw std::invalid_argument("meisler_diagnostics: A_range must be increasing");
  }
  auto alpha = [&](double A) { return mu_bar * std::sqrt(std::log(A)) + (line.slope * A + line.intercept) / A; };
  auto beta = [&](double A) { return mu_bar * (std::sqrt(std::log(A) + 1.0) - std::sqrt(std::log(A))); };
  std::vector<MeislerRow> rows;
  for (double A : A_range) {
    MeislerRow r;
    r.A = A;
    r.alpha = alpha(A);
    r.beta = beta(A);
    r.c1 = std::fabs(std::log(r.alpha)) + std::fabs(r.beta);
    r.c2 = beta(A + 1.0) / r.beta;
    r.c3 = (alpha(A + 1.0) - r.alpha) / r.beta;
    rows.push_back(r);
  }
  return rows;
}

struct FitReport {
  double W1 = 0.0, W2 = 0.0;
  int ports = 0;
  int blocks = 0;
  GumbelParams gumbel;
  GammaParams gamma;
  double ks_gumbel = std::numeric_limits<double>::quiet_NaN();
  double ks_gamma = std::numeric_limits<double>::quiet_NaN();

  static void write_csv_header(std::ostream& os) {
    os << "W1,W2,ports,blocks,alpha,beta,degenerate,theta,omega,ks_gumbel,ks_gamma\n";
  }
  void write_csv_row(std::ostream& os) const {
    os << W1 << ',' << W2 << ',' << ports << ',' << blocks << ',' << gumbel.alpha << ',' << gumbel.beta << ','
       << (gumbel.degenerate ? 1 : 0) << ',' << gamma.shape << ',' << gamma.rate << ',' << ks_gumbel << ','
       << ks_gamma << '\n';
  }
};

}  // namespace faslora
