#pragma once

// Coverage probability of one SF class: interference distributions, the
// distance-mixed desired-signal density, a quadrature reference and the
// closed-form approximation built on a lower-bounded co-SF CDF.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "faslora/evtapprox.hpp"
#include "faslora/network.hpp"
#include "faslora/quadrature.hpp"
#include "faslora/specfun.hpp"

namespace faslora {

struct CoverageInputs {
  NetworkConfig cfg;
  int sf = 9;
  GammaParams gamma;           // fit of |h|^2 at the selected port
  double P_varsigma = 0.0;     // P_t / K0, mW
  SensitivityTable thresholds;
  double qos_floor = 0.0;      // Upsilon_n * sigma^2, mW
  SfArray nbar{};              // mean active devices per SF

  void validate() const {
    cfg.validate();
    require_sf(sf, "CoverageInputs");
    gamma.validate();
    if (!(P_varsigma > 0.0)) throw std::invalid_argument("CoverageInputs: P_varsigma must be > 0");
    if (!(qos_floor >= 0.0)) throw std::invalid_argument("CoverageInputs: qos_floor must be >= 0");
    for (double v : nbar)
      if (!(v >= 0.0)) throw std::invalid_argument("CoverageInputs: mean active counts must be >= 0");
  }

  double co_threshold() const { return thresholds.lin(sf, sf); }
};

inline CoverageInputs make_coverage_inputs(const NetworkConfig& cfg, int sf, const GammaParams& gamma,
                                           const SensitivityTable& table = {}) {
  cfg.validate();
  require_sf(sf, "make_coverage_inputs");
  CoverageInputs in;
  in.cfg = cfg;
  in.sf = sf;
  in.gamma = gamma;
  in.P_varsigma = reduced_tx_power(cfg);
  in.thresholds = table;
  in.qos_floor = qos_threshold_lin(sf) * noise_power_lin(cfg);
  for (int m = min_sf; m <= max_sf; ++m) in.nbar[m - min_sf] = mean_active(m, cfg);
  return in;
}

/// E[r^-beta] for r uniform over the annulus area.
inline double mean_inverse_pathloss(double R1, double R2, double beta) {
  const double area = R2 * R2 - R1 * R1;
  const double e = 2.0 - beta;
  if (std::fabs(e) < 1e-7) {
    // series in e about beta = 2 keeps the limit continuous
    const double l1 = std::log(R1), l2 = std::log(R2);
    return 2.0 / area * ((l2 - l1) + 0.5 * e * (l2 * l2 - l1 * l1));
  }
  return 2.0 * (std::pow(R2, e) - std::pow(R1, e)) / (e * area);
}

/// CDF of the strongest co-SF interferer power.
inline double cdf_co_sf(double x, const CoverageInputs& in) {
  if (!(x > 0.0)) throw std::domain_error("cdf_co_sf: x must be > 0");
  const double nbar = in.nbar[in.sf - min_sf];
  if (nbar == 0.0) return 1.0;
  const auto& c = in.cfg;
  const double s = 2.0 / c.beta;
  const double pu = in.P_varsigma * in.co_threshold();
  const double g = lower_incomplete_gamma_diff(s, x * std::pow(c.R2, c.beta) / pu, x * std::pow(c.R1, c.beta) / pu);
  return std::exp(-2.0 * nbar / (c.beta * (c.R2 * c.R2 - c.R1 * c.R1)) * std::pow(pu / x, s) * g);
}

/// Mean of the summed inter-SF interference.
inline double zeta_inter_sf(const CoverageInputs& in) {
  const double er = mean_inverse_pathloss(in.cfg.R1, in.cfg.R2, in.cfg.beta);
  double z = 0.0;
  for (int mt = min_sf; mt <= max_sf; ++mt) {
    if (mt == in.sf) continue;
    z += in.nbar[mt - min_sf] * in.thresholds.lin(in.sf, mt);
  }
  return z * in.P_varsigma * er;
}

/// Inter-SF interference replaced by its mean: a step closed at zeta.
inline double cdf_inter_sf(double x, const CoverageInputs& in) {
  if (!(x >= 0.0)) throw std::domain_error("cdf_inter_sf: x must be >= 0");
  return x >= zeta_inter_sf(in) ? 1.0 : 0.0;
}

/// Lower integration limit max(zeta, QoS floor).
inline double coverage_floor(const CoverageInputs& in) { return std::max(zeta_inter_sf(in), in.qos_floor); }

namespace detail {

struct S0Shape {
  double s, rho, phi1, phi2, C;
};

// S0 = P g / r^beta with g ~ Gamma(theta, rate omega) and r uniform on the
// annulus has density C x^{-s-1} [P(rho, phi2 x) - P(rho, phi1 x)], with
// s = 2/beta, rho = theta + s, phi_chi = omega R_chi^beta / P and
// C = 2/(beta (R2^2 - R1^2)) (P/omega)^s Gamma(rho)/Gamma(theta).
inline S0Shape s0_shape(const CoverageInputs& in) {
  const auto& c = in.cfg;
  S0Shape sh;
  sh.s = 2.0 / c.beta;
  sh.rho = in.gamma.shape + sh.s;
  sh.phi1 = in.gamma.rate * std::pow(c.R1, c.beta) / in.P_varsigma;
  sh.phi2 = in.gamma.rate * std::pow(c.R2, c.beta) / in.P_varsigma;
  sh.C = 2.0 / (c.beta * (c.R2 * c.R2 - c.R1 * c.R1)) * std::pow(in.P_varsigma / in.gamma.rate, sh.s) *
         std::exp(log_gamma(sh.rho) - log_gamma(in.gamma.shape));
  return sh;
}

}  // namespace detail

/// Density of the desired received power S0 (distance-mixed Gamma).
inline double pdf_s0(double x, const CoverageInputs& in) {
  if (!(x > 0.0)) throw std::domain_error("pdf_s0: x must be > 0");
  const auto sh = detail::s0_shape(in);
  const double diff = lower_incomplete_gamma_diff(sh.rho, sh.phi2 * x, sh.phi1 * x) / std::exp(log_gamma(sh.rho));
  return sh.C * std::pow(x, -sh.s - 1.0) * diff;
}

/// Same density evaluated as the explicit mixture over the distance.
inline double pdf_s0_mixture(double x, const CoverageInputs& in, const QuadratureSpec& quad = {}) {
  if (!(x > 0.0)) throw std::domain_error("pdf_s0: x must be > 0");
  const auto& c = in.cfg;
  const double th = in.gamma.shape, om = in.gamma.rate;
  const double lg = log_gamma(th);
  const double area = c.R2 * c.R2 - c.R1 * c.R1;
  auto f = [&](double u) {
    const double scale = std::pow(u, c.beta) / in.P_varsigma;
    const double y = x * scale;
    const double dens = std::exp(th * std::log(om) + (th - 1.0) * std::log(y) - om * y - lg);
    return dens * scale * 2.0 * u / area;
  };
  return integrate(f, c.R1, c.R2, quad).value;
}

/// CDF of S0: the Gamma CDF averaged over the annulus.
inline double cdf_s0(double x, const CoverageInputs& in, const QuadratureSpec& quad = {}) {
  if (!(x > 0.0)) return 0.0;
  const auto& c = in.cfg;
  const double area = c.R2 * c.R2 - c.R1 * c.R1;
  auto f = [&](double u) {
    return gamma_p(in.gamma.shape, in.gamma.rate * x * std::pow(u, c.beta) / in.P_varsigma) * 2.0 * u / area;
  };
  return integrate(f, c.R1, c.R2, quad).value;
}

/// Maximizer over x of gamma(2/beta, x R2^b/(P U)) - gamma(2/beta, x R1^b/(P U)).
/// Evaluating the incomplete-gamma factor there turns the exact CDF into
/// the lower bound exp(-D x^{-2/beta}).
inline double co_sf_bound_point(const CoverageInputs& in) {
  const auto& c = in.cfg;
  const double pu = in.P_varsigma * in.co_threshold();
  return 2.0 * pu * std::log(c.R2 / c.R1) / (std::pow(c.R2, c.beta) - std::pow(c.R1, c.beta));
}

/// D in the bound F_I1(x) >= exp(-D x^{-2/beta}).
inline double co_sf_bound_D(const CoverageInputs& in) {
  const auto& c = in.cfg;
  const double nbar = in.nbar[in.sf - min_sf];
  if (nbar == 0.0) return 0.0;
  const double s = 2.0 / c.beta;
  const double pu = in.P_varsigma * in.co_threshold();
  const double xs = co_sf_bound_point(in);
  const double g = lower_incomplete_gamma_diff(s, xs * std::pow(c.R2, c.beta) / pu, xs * std::pow(c.R1, c.beta) / pu);
  return 2.0 * nbar / (c.beta * (c.R2 * c.R2 - c.R1 * c.R1)) * std::pow(pu, s) * g;
}

inline double cdf_co_sf_bound(double x, const CoverageInputs& in) {
  if (!(x > 0.0)) throw std::domain_error("cdf_co_sf_bound: x must be > 0");
  return std::exp(-co_sf_bound_D(in) * std::pow(x, -2.0 / in.cfg.beta));
}

namespace detail {

// Range [lo, hi] outside which S0 carries less than `tail` probability on
// each side. Uses P(S0 > x) <= Q(theta, omega x R1^b / P) and
// P(S0 < x) <= P(theta, omega x R2^b / P).
inline std::pair<double, double> s0_support(const CoverageInputs& in, double tail) {
  const double th = in.gamma.shape;
  const double y_hi = bisect_log([&](double y) { return gamma_q(th, y) <= tail; }, th, th + 4000.0);
  const double y_lo = bisect_log([&](double y) { return gamma_p(th, y) >= tail; }, 1e-300, th);
  const auto sh = s0_shape(in);
  return {y_lo / sh.phi2, y_hi / sh.phi1};
}

// Integrate over [lo, hi] on a log scale, split at the given interior points.
template <class F>
double integrate_log_split(F&& f, double lo, double hi, std::vector<double> cuts, const QuadratureSpec& quad) {
  cuts.push_back(lo);
  cuts.push_back(hi);
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  double prev = lo;
  for (double c : cuts) {
    if (c <= prev || c > hi) continue;
    total += integrate_log(f, prev, c, quad).value;
    prev = c;
  }
  return total;
}

}  // namespace detail

/// Coverage by direct quadrature of F_I1(x) f_S0(x) above max(zeta, QoS floor).
inline double coverage_reference(const CoverageInputs& in, const QuadratureSpec& quad = {}) {
  in.validate();
  quad.validate();
  const auto [s_lo, s_hi] = detail::s0_support(in, quad.tail_cutoff_probability);
  const double lo = std::max(coverage_floor(in), s_lo);
  if (lo >= s_hi) return 0.0;
  const auto sh = detail::s0_shape(in);
  auto f = [&](double x) { return cdf_co_sf(x, in) * pdf_s0(x, in); };
  const std::vector<double> cuts = {in.gamma.mean() / sh.phi2, in.gamma.mean() / sh.phi1,
                                    std::sqrt(in.gamma.mean() * in.gamma.mean() / (sh.phi1 * sh.phi2))};
  return std::clamp(detail::integrate_log_split(f, lo, s_hi, cuts, quad), 0.0, 1.0);
}

/// Finite-series stand-in for the regularized lower incomplete gamma:
/// 1 - e^{-y} sum_{i<=floor(rho)} c_i y^i / i!, with c_i = 1 below floor(rho)
/// and c_floor = rho - floor(rho). Exact for integer rho.
inline double gamma_series_approx(double rho, double y) {
  if (!(rho > 0.0)) throw std::domain_error("gamma_series_approx: rho must be > 0");
  if (!(y >= 0.0)) throw std::domain_error("gamma_series_approx: y must be >= 0");
  const int n = static_cast<int>(std::floor(rho));
  double term = 1.0, sum = 0.0;
  for (int i = 0; i <= n; ++i) {
    if (i > 0) term *= y / i;
    sum += (i < n ? 1.0 : rho - n) * term;
  }
  return 1.0 - std::exp(-y) * sum;
}

/// L1 = int_{zt}^inf exp(-D x^{-s}) x^{-s-1} dx with s = 2/beta.
inline double closed_l1(double D, double zeta_t, double beta) {
  if (!(zeta_t > 0.0)) throw std::domain_error("closed_l1: floor must be > 0");
  const double u = std::pow(zeta_t, -2.0 / beta);
  if (D == 0.0) return 0.5 * beta * u;
  return 0.5 * beta / D * -std::expm1(-D * u);
}

/// L2_i = int_{zt}^inf exp(-D x^{-s} - phi x) x^{i-s-1} dx by quadrature.
/// zt = 0 is allowed when D > 0.
inline double closed_l2(int i, double D, double phi, double zeta_t, double beta, const QuadratureSpec& quad = {}) {
  const double s = 2.0 / beta;
  if (!(phi > 0.0)) throw std::domain_error("closed_l2: phi must be > 0");
  if (zeta_t <= 0.0 && D <= 0.0) throw NumericError("closed_l2: integral diverges without a floor or D > 0");
  const double lo = zeta_t > 0.0 ? zeta_t : std::pow(D / 700.0, 1.0 / s);
  const double hi = lo + (i + 80.0) / phi;
  auto f = [&](double x) { return std::exp(-D * std::pow(x, -s) - phi * x + (i - s - 1.0) * std::log(x)); };
  std::vector<double> cuts = {1.0 / phi, std::max(i - s - 1.0, 1.0) / phi};
  if (D > 0.0) cuts.push_back(std::pow(D, 1.0 / s));
  return detail::integrate_log_split(f, lo, hi, cuts, quad);
}

/// Lower piece int_0^{zt} exp(-D x^{-s} - phi x) x^{i-s-1} dx by quadrature.
inline double closed_l2_lower_quadrature(int i, double D, double phi, double zeta_t, double beta,
                                         const QuadratureSpec& quad = {}) {
  const double s = 2.0 / beta;
  const double lo = std::pow(D / 700.0, 1.0 / s);
  if (lo >= zeta_t) return 0.0;
  auto f = [&](double x) { return std::exp(-D * std::pow(x, -s) - phi * x + (i - s - 1.0) * std::log(x)); };
  return detail::integrate_log_split(f, lo, zeta_t, {std::pow(D, 1.0 / s)}, quad);
}

/// The same lower piece as the series obtained by expanding e^{-phi x}:
/// (beta/2) sum_k (-phi)^k/k! D^{beta(k+i)/2 - 1} Gamma(1 - beta(k+i)/2, D zt^{-2/beta}).
inline double closed_l2_lower_series(int i, double D, double phi, double zeta_t, double beta,
                                     const SeriesTolerance& tol = {}) {
  tol.validate();
  if (!(D > 0.0) || !(zeta_t > 0.0)) throw std::domain_error("closed_l2_lower_series: need D > 0 and floor > 0");
  const double X = D * std::pow(zeta_t, -2.0 / beta);
  double sum = 0.0;
  for (int k = 0; k < tol.max_terms; ++k) {
    const double e = 0.5 * beta * (k + i);
    const double mag = std::exp(k * std::log(phi) - log_gamma(k + 1.0) + (e - 1.0) * std::log(D));
    const double term = (k % 2 == 0 ? 1.0 : -1.0) * mag * upper_incomplete_gamma(1.0 - e, X);
    sum += term;
    if (k > phi * zeta_t && std::fabs(term) <= tol.abs_tol * std::max(1.0, std::fabs(sum)))
      return 0.5 * beta * sum;
  }
  throw NumericError("closed_l2_lower_series: no convergence within max_terms");
}

struct ClosedFormDetail {
  double value = 0.0;   // clamped to [0, 1]
  double raw = 0.0;     // before clamping
  double C = 0.0;
  double rho = 0.0;
  double D = 0.0;
  double zeta_t = 0.0;
  double theta_R1 = 0.0;
  double theta_R2 = 0.0;
};

/// Closed-form coverage Theta(R2) - Theta(R1) with
/// Theta(R) = C [L1 - sum_i c_i phi(R)^i / i! L2_i(phi(R))].
inline ClosedFormDetail coverage_closed_detail(const CoverageInputs& in, const QuadratureSpec& quad = {}) {
  in.validate();
  const auto sh = detail::s0_shape(in);
  ClosedFormDetail d;
  d.C = sh.C;
  d.rho = sh.rho;
  d.D = co_sf_bound_D(in);
  d.zeta_t = coverage_floor(in);
  const double beta = in.cfg.beta;
  const int n = static_cast<int>(std::floor(sh.rho));
  const double l1 = d.zeta_t > 0.0 ? closed_l1(d.D, d.zeta_t, beta) : 0.5 * beta / d.D;
  auto theta = [&](double phi) {
    double acc = 0.0;
    double lfact = 0.0;
    for (int i = 0; i <= n; ++i) {
      if (i > 0) lfact += std::log(static_cast<double>(i));
      const double ci = i < n ? 1.0 : sh.rho - n;
      if (ci == 0.0) continue;
      acc += ci * std::exp(i * std::log(phi) - lfact) * closed_l2(i, d.D, phi, d.zeta_t, beta, quad);
    }
    return sh.C * (l1 - acc);
  };
  d.theta_R1 = theta(sh.phi1);
  d.theta_R2 = theta(sh.phi2);
  d.raw = d.theta_R2 - d.theta_R1;
  d.value = std::clamp(d.raw, 0.0, 1.0);
  return d;
}

inline double coverage_closed(const CoverageInputs& in, const QuadratureSpec& quad = {}) {
  return coverage_closed_detail(in, quad).value;
}

}  // namespace faslora
