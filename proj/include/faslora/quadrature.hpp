#pragma once

// Globally adaptive Gauss-Kronrod (7/15) quadrature on finite intervals.

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace faslora {

struct QuadratureSpec {
  double rel_tol = 1e-8;
  double abs_tol = 1e-12;
  int max_subdivisions = 2000;
  double tail_cutoff_probability = 1e-9;

  void validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
      throw std::invalid_argument("QuadratureSpec: tolerances must be > 0");
    if (max_subdivisions < 1) throw std::invalid_argument("QuadratureSpec: max_subdivisions must be >= 1");
    if (!(tail_cutoff_probability > 0.0) || !(tail_cutoff_probability < 1.0))
      throw std::invalid_argument("QuadratureSpec: tail_cutoff_probability must be in (0, 1)");
  }
};

/// Raised when an integral or series does not reach its requested tolerance.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct QuadratureResult {
  double value = 0.0;
  double abs_error = 0.0;
  int subdivisions = 0;
};

namespace detail {

struct GkSegment {
  double a, b, value, error;
  bool operator<(const GkSegment& o) const { return error < o.error; }
};

template <class F>
GkSegment gk15(F& f, double a, double b) {
  static constexpr double xgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
  static constexpr double wgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
  static constexpr double wg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                   0.381830050505118944950369775488975, 0.417959183673469387755102040816327};
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kron = fc * wgk[7];
  double gauss = fc * wg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * xgk[j];
    const double f1 = f(c - dx);
    const double f2 = f(c + dx);
    kron += wgk[j] * (f1 + f2);
    if (j % 2 == 1) gauss += wg[j / 2] * (f1 + f2);
  }
  kron *= h;
  gauss *= h;
  return {a, b, kron, std::fabs(kron - gauss)};
}

}  // namespace detail

/// Integrate f over [a, b]. Throws NumericError if the error estimate stays
/// above max(abs_tol, rel_tol * |I|) after max_subdivisions bisections.
template <class F>
QuadratureResult integrate(F&& f, double a, double b, const QuadratureSpec& spec = {}) {
  if (a == b) return {};
  if (!std::isfinite(a) || !std::isfinite(b)) throw std::invalid_argument("integrate: limits must be finite");
  if (b < a) {
    auto r = integrate(f, b, a, spec);
    r.value = -r.value;
    return r;
  }
  std::priority_queue<detail::GkSegment> heap;
  auto first = detail::gk15(f, a, b);
  double total = first.value;
  double err = first.error;
  heap.push(first);
  int splits = 0;
  while (err > std::max(spec.abs_tol, spec.rel_tol * std::fabs(total))) {
    if (splits >= spec.max_subdivisions) {
      std::ostringstream os;
      os << "integrate: no convergence on [" << a << ", " << b << "] after " << splits
         << " subdivisions; value " << total << ", error estimate " << err;
      throw NumericError(os.str());
    }
    const auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const auto left = detail::gk15(f, worst.a, mid);
    const auto right = detail::gk15(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++splits;
  }
  // re-sum to shed accumulated rounding from the running updates
  double sum = 0.0;
  double esum = 0.0;
  for (; !heap.empty(); heap.pop()) {
    sum += heap.top().value;
    esum += heap.top().error;
  }
  return {sum, esum, splits};
}

/// Integrate f(x) over [lo, hi] with 0 < lo < hi on a logarithmic scale,
/// i.e. integrate f(e^t) e^t dt. Suited to integrands spanning decades.
template <class F>
QuadratureResult integrate_log(F&& f, double lo, double hi, const QuadratureSpec& spec = {}) {
  if (!(lo > 0.0) || !(hi > lo)) throw std::invalid_argument("integrate_log: need 0 < lo < hi");
  auto g = [&f](double t) {
    const double x = std::exp(t);
    return f(x) * x;
  };
  return integrate(g, std::log(lo), std::log(hi), spec);
}

/// Smallest x in [lo, hi] with pred(x) true, for a monotone predicate, by
/// geometric bisection (lo > 0).
template <class Pred>
double bisect_log(Pred&& pred, double lo, double hi, int iterations = 200) {
  for (int i = 0; i < iterations && hi / lo > 1.0 + 1e-13; ++i) {
    const double mid = std::sqrt(lo * hi);
    if (pred(mid)) hi = mid;
    else lo = mid;
  }
  return hi;
}

}  // namespace faslora
