#pragma once

// Special functions used by the channel and coverage approximations.
//
// Everything here is a pure function of its arguments; no global state is
// touched (in particular std::lgamma is avoided because glibc writes the
// global `signgam`).

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace faslora {

struct SeriesTolerance {
  double abs_tol = 1e-14;
  int max_terms = 500;

  void validate() const {
    if (!(abs_tol > 0.0)) throw std::invalid_argument("SeriesTolerance: abs_tol must be > 0");
    if (max_terms < 1) throw std::invalid_argument("SeriesTolerance: max_terms must be >= 1");
  }
};

inline constexpr double euler_gamma = 0.57721566490153286060651209008240243;

namespace detail {

inline void require_finite(double x, const char* who) {
  if (!std::isfinite(x)) throw std::domain_error(std::string(who) + ": non-finite argument");
}

// Power series, summed in extended precision. Cancellation grows like I0(x),
// which stays below ~1e6 on the range where this branch is used.
inline double j0_series(double x) {
  const long double q = -0.25L * static_cast<long double>(x) * x;
  long double term = 1.0L;
  long double sum = 1.0L;
  for (int k = 1; k < 200; ++k) {
    term *= q / (static_cast<long double>(k) * k);
    sum += term;
    if (std::fabs(term) < 1e-22L * std::fabs(sum) + 1e-24L) break;
  }
  return static_cast<double>(sum);
}

// Hankel asymptotic expansion, truncated at the smallest term.
inline double j0_asymptotic(double x) {
  const long double ax = std::fabs(static_cast<long double>(x));
  long double p = 0.0L;
  long double q = 0.0L;
  // a_k = prod_{j=1..k} (-(2j-1)^2) / (k! 8^k); term_k = a_k / x^k
  long double term = 1.0L;
  long double prev = std::numeric_limits<long double>::infinity();
  for (int k = 0; k < 200; ++k) {
    if (k > 0) {
      const long double odd = 2.0L * k - 1.0L;
      term *= -(odd * odd) / (8.0L * k * ax);
    }
    const long double mag = std::fabs(term);
    if (mag > prev) break;
    prev = mag;
    // P collects even k with sign (-1)^{k/2}, Q odd k with sign (-1)^{(k-1)/2}
    const int r = k % 4;
    if (r == 0) p += term;
    else if (r == 1) q += term;
    else if (r == 2) p -= term;
    else q -= term;
    if (mag < 1e-22L) break;
  }
  const long double chi = ax - std::numbers::pi_v<long double> / 4.0L;
  const long double amp = std::sqrt(2.0L / (std::numbers::pi_v<long double> * ax));
  return static_cast<double>(amp * (p * std::cos(chi) - q * std::sin(chi)));
}

}  // namespace detail

/// Bessel function of the first kind, order zero.
inline double bessel_j0(double x) {
  detail::require_finite(x, "bessel_j0");
  const double ax = std::fabs(x);
  if (ax < 16.0) return detail::j0_series(ax);
  return detail::j0_asymptotic(ax);
}

/// Principal branch of the Lambert W function, W0(x) for x >= -1/e.
inline double lambert_w0(double x) {
  detail::require_finite(x, "lambert_w0");
  constexpr double inv_e = 0.36787944117144232160;
  if (x < -inv_e) {
    // allow rounding slop at the branch point itself
    if (x > -inv_e - 4.0 * std::numeric_limits<double>::epsilon()) return -1.0;
    throw std::domain_error("lambert_w0: argument below -1/e");
  }
  if (x == 0.0) return 0.0;

  double w;
  if (x < -0.25) {
    const double p = std::sqrt(2.0 * (std::numbers::e * x + 1.0));
    w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
  } else if (x < 3.0) {
    w = std::log1p(x);
    w *= 1.0 - std::log1p(w) / (2.0 + w);
  } else {
    const double l1 = std::log(x);
    const double l2 = std::log(l1);
    w = l1 - l2 + l2 / l1;
  }

  for (int it = 0; it < 50; ++it) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    const double wp1 = w + 1.0;
    if (wp1 == 0.0) break;
    const double denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
    const double step = f / denom;
    w -= step;
    if (std::fabs(step) < 1e-14 * (1.0 + std::fabs(w))) break;
  }
  return w;
}

/// log Gamma(x) for x > 0 (Lanczos, g = 7, n = 9).
inline double log_gamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("log_gamma: argument must be > 0");
  static constexpr double coef[9] = {
      0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
      771.32342877765313,   -176.61502916214059,   12.507343278686905,
      -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
  if (x < 0.5) {
    // reflection keeps accuracy near zero
    return std::log(std::numbers::pi / std::sin(std::numbers::pi * x)) - log_gamma(1.0 - x);
  }
  const double z = x - 1.0;
  double a = coef[0];
  const double t = z + 7.5;
  for (int i = 1; i < 9; ++i) a += coef[i] / (z + i);
  return 0.5 * std::log(2.0 * std::numbers::pi) + (z + 0.5) * std::log(t) - t + std::log(a);
}

namespace detail {

// Series for P(a, x); valid for x < a + 1.
inline double gamma_p_series(double a, double x) {
  double ap = a;
  double del = 1.0 / a;
  double sum = del;
  for (int n = 0; n < 10000; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * 1e-17) break;
  }
  return sum * std::exp(-x + a * std::log(x) - log_gamma(a));
}

// Continued fraction (modified Lentz) for e^{x} x^{-a} Gamma(a, x). Valid for
// any real a when x > 0; converges fast once x > a + 1 or x >~ 1.
inline double gamma_q_cf_scaled(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 100000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16) break;
  }
  return h;
}

// E1(x) = Gamma(0, x), x > 0.
inline double expint_e1(double x) {
  if (x < 1.0) {
    double sum = 0.0;
    double term = 1.0;
    for (int k = 1; k < 200; ++k) {
      term *= -x / k;
      const double add = term / k;
      sum += add;
      if (std::fabs(add) < 1e-18) break;
    }
    return -euler_gamma - std::log(x) - sum;
  }
  return std::exp(-x) * gamma_q_cf_scaled(0.0, x);
}

}  // namespace detail

/// Regularized lower incomplete gamma P(a, x) = gamma(a, x) / Gamma(a).
inline double gamma_p(double a, double x) {
  if (!(a > 0.0)) throw std::domain_error("gamma_p: shape must be > 0");
  if (!(x >= 0.0)) throw std::domain_error("gamma_p: argument must be >= 0");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < a + 1.0) return detail::gamma_p_series(a, x);
  return 1.0 - std::exp(-x + a * std::log(x) - log_gamma(a)) * detail::gamma_q_cf_scaled(a, x);
}

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x), computed
/// without cancellation in the tail.
inline double gamma_q(double a, double x) {
  if (!(a > 0.0)) throw std::domain_error("gamma_q: shape must be > 0");
  if (!(x >= 0.0)) throw std::domain_error("gamma_q: argument must be >= 0");
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return 1.0 - detail::gamma_p_series(a, x);
  return std::exp(-x + a * std::log(x) - log_gamma(a)) * detail::gamma_q_cf_scaled(a, x);
}

/// Regularized lower incomplete gamma; alias matching the analytical notation.
inline double lower_incomplete_gamma_reg(double a, double x) { return gamma_p(a, x); }

/// Non-regularized lower incomplete gamma, a > 0.
inline double lower_incomplete_gamma(double a, double x) {
  return gamma_p(a, x) * std::exp(log_gamma(a));
}

/// gamma(a, hi) - gamma(a, lo) for 0 <= lo <= hi, choosing the tail that
/// avoids cancellation.
inline double lower_incomplete_gamma_diff(double a, double hi, double lo) {
  if (hi < lo) return -lower_incomplete_gamma_diff(a, lo, hi);
  const double g = std::exp(log_gamma(a));
  if (lo > a + 1.0) return g * (gamma_q(a, lo) - gamma_q(a, hi));
  return g * (gamma_p(a, hi) - gamma_p(a, lo));
}

/// Non-regularized upper incomplete gamma Gamma(a, x) for any real a, x > 0.
inline double upper_incomplete_gamma(double a, double x) {
  if (!std::isfinite(a) || std::isnan(x)) throw std::domain_error("upper_incomplete_gamma: non-finite argument");
  if (!(x > 0.0)) {
    if (x == 0.0 && a > 0.0) return std::exp(log_gamma(a));
    throw std::domain_error("upper_incomplete_gamma: divergent for x <= 0");
  }
  if (std::isinf(x)) return 0.0;
  if (a > 0.0) return gamma_q(a, x) * std::exp(log_gamma(a));
  if (x >= 1.0) return std::exp(-x + a * std::log(x)) * detail::gamma_q_cf_scaled(a, x);

  // Small x, a <= 0: recurse downwards from a0 in (0, 1] (or from E1 when a is
  // a non-positive integer) with Gamma(a, x) = (Gamma(a+1, x) - x^a e^{-x}) / a.
  const double steps = std::ceil(-a);
  const double a0 = a + steps;
  double g;
  if (a0 == 0.0) {
    g = detail::expint_e1(x);
  } else {
    g = gamma_q(a0, x) * std::exp(log_gamma(a0));
  }
  for (double s = a0 - 1.0; s >= a - 0.5; s -= 1.0) {
    g = (g - std::exp(s * std::log(x) - x)) / s;
  }
  return g;
}

/// Riemann zeta for integer s >= 2 via Euler-Maclaurin summation.
inline double riemann_zeta_int(int s) {
  if (s < 2) throw std::domain_error("riemann_zeta_int: s must be >= 2");
  constexpr int n_terms = 10;
  long double sum = 0.0L;
  for (int k = 1; k < n_terms; ++k) sum += std::pow(static_cast<long double>(k), -s);
  const long double n = n_terms;
  // tail: N^{1-s}/(s-1) + N^{-s}/2 + sum_j B_2j/(2j)! * s(s+1)...(s+2j-2) N^{-s-2j+1}
  sum += std::pow(n, 1 - s) / (s - 1) + 0.5L * std::pow(n, -s);
  static constexpr long double b2j[] = {1.0L / 6, -1.0L / 30, 1.0L / 42, -1.0L / 30,
                                        5.0L / 66, -691.0L / 2730, 7.0L / 6};
  long double rising = s;
  long double fact = 2.0L;
  long double npow = std::pow(n, -s - 1);
  for (int j = 1; j <= 7; ++j) {
    sum += b2j[j - 1] / fact * rising * npow;
    rising *= static_cast<long double>(s + 2 * j - 1) * (s + 2 * j);
    fact *= static_cast<long double>(2 * j + 1) * (2 * j + 2);
    npow /= n * n;
  }
  return static_cast<double>(sum);
}

/// psi^(n)(1): -gamma_E for n = 0, (-1)^{n+1} n! zeta(n+1) otherwise.
inline double polygamma_at_one(int n) {
  if (n < 0) throw std::domain_error("polygamma_at_one: order must be >= 0");
  if (n == 0) return -euler_gamma;
  double fact = 1.0;
  for (int k = 2; k <= n; ++k) fact *= k;
  const double sign = (n % 2 == 1) ? 1.0 : -1.0;
  return sign * fact * riemann_zeta_int(n + 1);
}

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

/// Complete exponential Bell polynomial B_n(x_1, ..., x_n).
inline double bell_complete(int n, std::span<const double> args) {
  if (n < 0 || static_cast<std::size_t>(n) != args.size())
    throw std::invalid_argument("bell_complete: argument count must equal n");
  std::vector<double> b(static_cast<std::size_t>(n) + 1, 0.0);
  b[0] = 1.0;
  for (int m = 0; m < n; ++m) {
    double acc = 0.0;
    for (int k = 0; k <= m; ++k) acc += binomial(m, k) * b[m - k] * args[k];
    b[m + 1] = acc;
  }
  return b[n];
}

}  // namespace faslora
