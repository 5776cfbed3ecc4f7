#include <gtest/gtest.h>

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "faslora/analytic.hpp"

using namespace faslora;

namespace {

// Gamma fit of |h|^2 for a 12x12-port, 1x1 aperture (ef 0.7).
const GammaParams fas_fit{4.94108, 1.29927, 2};

CoverageInputs fixture(int sf = 9, double N = 5000.0, const GammaParams& g = fas_fit) {
  NetworkConfig cfg;
  cfg.N = N;
  return make_coverage_inputs(cfg, sf, g);
}

std::vector<double> logspace(double a, double b, int n) {
  std::vector<double> xs;
  for (int i = 0; i < n; ++i) xs.push_back(a * std::pow(b / a, static_cast<double>(i) / (n - 1)));
  return xs;
}

}  // namespace

TEST(CoSfCdf, LimitsAndMonotonicity) {
  auto in = fixture();
  const double med = in.P_varsigma * std::pow(in.cfg.R2, -in.cfg.beta);
  double prev = 0.0;
  for (double x : logspace(1e-6 * med, 1e8 * med, 200)) {
    const double f = cdf_co_sf(x, in);
    EXPECT_GE(f, prev - 1e-15);
    EXPECT_LE(f, 1.0);
    prev = f;
  }
  EXPECT_NEAR(cdf_co_sf(1e12 * med, in), 1.0, 1e-9);
  EXPECT_THROW(cdf_co_sf(0.0, in), std::domain_error);

  auto more = fixture(9, 20000.0);
  for (double x : logspace(med, 1e4 * med, 20)) EXPECT_LE(cdf_co_sf(x, more), cdf_co_sf(x, in));

  auto none = fixture(9, 0.0);
  EXPECT_EQ(cdf_co_sf(med, none), 1.0);
}

TEST(InterSf, MeanAndStep) {
  auto in = fixture();
  const double z = zeta_inter_sf(in);
  EXPECT_GT(z, 0.0);
  EXPECT_EQ(cdf_inter_sf(0.0, in), 0.0);
  EXPECT_EQ(cdf_inter_sf(z, in), 1.0);
  EXPECT_EQ(cdf_inter_sf(2 * z, in), 1.0);
  EXPECT_EQ(cdf_inter_sf(std::nextafter(z, 0.0), in), 0.0);

  NetworkConfig only;
  only.sf_set = {9};
  EXPECT_EQ(zeta_inter_sf(make_coverage_inputs(only, 9, fas_fit)), 0.0);

  for (double b0 : {2.0}) {
    const double at = mean_inverse_pathloss(300, 3000, b0);
    EXPECT_NEAR(mean_inverse_pathloss(300, 3000, b0 + 1e-6) / at, 1.0, 1e-5);
    EXPECT_NEAR(mean_inverse_pathloss(300, 3000, b0 + 2e-8) / at, 1.0, 1e-6);
    EXPECT_NEAR(at, 2.0 * std::log(10.0) / (3000.0 * 3000.0 - 300.0 * 300.0), 1e-18);
  }
  // beta = 4: 2 (R1^-2 - R2^-2) / (2 (R2^2 - R1^2)) = 1/(R1^2 R2^2)
  EXPECT_NEAR(mean_inverse_pathloss(300, 3000, 4.0) * 300.0 * 300.0 * 3000.0 * 3000.0, 1.0, 1e-12);
}

TEST(S0Density, TwoRoutesAgree) {
  for (int sf : {7, 9, 12}) {
    auto in = fixture(sf);
    const auto [lo, hi] = detail::s0_support(in, 1e-6);
    for (double x : logspace(lo, hi, 60)) {
      const double a = pdf_s0(x, in);
      const double b = pdf_s0_mixture(x, in, {1e-12, 1e-300, 4000, 1e-9});
      EXPECT_NEAR(a / b, 1.0, 1e-6) << sf << ' ' << x;
    }
  }
  EXPECT_THROW(pdf_s0(-1.0, fixture()), std::domain_error);
}

TEST(S0Density, Normalized) {
  for (const auto& g : {fas_fit, single_antenna_gamma()}) {
    auto in = fixture(9, 5000.0, g);
    const auto [lo, hi] = detail::s0_support(in, 1e-12);
    const auto sh = detail::s0_shape(in);
    const double mass = detail::integrate_log_split([&](double x) { return pdf_s0(x, in); }, lo, hi,
                                                    {g.mean() / sh.phi2, g.mean() / sh.phi1}, {});
    EXPECT_NEAR(mass, 1.0, 1e-4);
    EXPECT_NEAR(cdf_s0(hi, in), 1.0, 1e-6);
  }
}

TEST(S0Density, ThinAnnulusIsFixedDistanceGamma) {
  NetworkConfig cfg;
  cfg.R1 = 3000.0 * (1.0 - 1e-6);
  auto in = make_coverage_inputs(cfg, 9, fas_fit);
  const double scale = std::pow(cfg.R2, cfg.beta) / in.P_varsigma;
  double worst = 0.0;
  const double mean = fas_fit.mean() / scale;
  for (double x : logspace(1e-3 * mean, 20 * mean, 400))
    worst = std::max(worst, std::fabs(cdf_s0(x, in) - gamma_cdf(x * scale, fas_fit)));
  EXPECT_LE(worst, 1e-3);
}

TEST(CoSfBound, BelowExact) {
  auto in = fixture();
  const double med = in.P_varsigma * std::pow(in.cfg.R2, -in.cfg.beta);
  for (double x : logspace(1e-4 * med, 1e8 * med, 100)) {
    const double b = cdf_co_sf_bound(x, in);
    EXPECT_GE(b, 0.0);
    EXPECT_LE(b, cdf_co_sf(x, in) * (1.0 + 1e-12));
  }
  // touching at the maximizer's image is not required, but the bound is
  // tight in the upper tail
  EXPECT_NEAR(cdf_co_sf_bound(1e10 * med, in), 1.0, 1e-6);
  EXPECT_EQ(cdf_co_sf_bound(med, fixture(9, 0.0)), 1.0);
}

TEST(Reference, EdgeCases) {
  NetworkConfig cfg;
  cfg.N = 0.0;
  auto in = make_coverage_inputs(cfg, 9, fas_fit);
  in.qos_floor = 0.0;
  EXPECT_NEAR(coverage_reference(in), 1.0, 1e-6);

  in.qos_floor = 1e10 * in.P_varsigma;
  EXPECT_EQ(coverage_reference(in), 0.0);
}

TEST(Reference, MonotoneTrends) {
  for (int sf : {7, 10, 12}) {
    double prev = 1.0;
    for (double N : {1e2, 1e3, 3e3, 1e4, 3e4, 1e5, 3e5}) {
      const double p = coverage_reference(fixture(sf, N));
      EXPECT_LE(p, prev + 1e-9) << sf << ' ' << N;
      prev = p;
    }
  }
  double prev = 1.0;
  for (double nf : {0.0, 6.0, 20.0, 40.0, 60.0}) {
    NetworkConfig cfg;
    cfg.NF_dB = nf;
    const double p = coverage_reference(make_coverage_inputs(cfg, 12, fas_fit));
    EXPECT_LE(p, prev + 1e-9) << nf;
    prev = p;
  }
}

TEST(Reference, FasBeatsSingleAntenna) {
  for (int sf = 7; sf <= 12; ++sf)
    for (double N : {1e3, 1e4, 1e5})
      EXPECT_GE(coverage_reference(fixture(sf, N)), coverage_reference(fixture(sf, N, single_antenna_gamma())))
          << sf << ' ' << N;
}

// Using max(zeta, floor) as the lower limit equals integrating the full
// support with both indicators in the integrand.
TEST(Reference, FloorEquivalence) {
  for (double N : {1e3, 1e5}) {
    auto in = fixture(12, N);
    const double z = zeta_inter_sf(in);
    const auto [lo, hi] = detail::s0_support(in, 1e-12);
    const auto sh = detail::s0_shape(in);
    auto f = [&](double x) {
      return (x >= z && x >= in.qos_floor) ? cdf_co_sf(x, in) * pdf_s0(x, in) : 0.0;
    };
    const double direct = detail::integrate_log_split(
        f, lo, hi, {z, in.qos_floor, fas_fit.mean() / sh.phi2, fas_fit.mean() / sh.phi1}, {});
    EXPECT_NEAR(direct, coverage_reference(in), 1e-6) << N;
  }
}

TEST(ClosedForm, L1MatchesQuadrature) {
  for (double beta : {2.0, 2.7, 4.0})
    for (double D : {0.0, 1e-3, 0.7, 25.0})
      for (double zt : {0.05, 1.0, 3.0}) {
        const double s = 2.0 / beta;
        const double q = integrate_log([&](double x) { return std::exp(-D * std::pow(x, -s)) * std::pow(x, -s - 1.0); },
                                       zt, zt * 1e12, {1e-12, 1e-300, 4000, 1e-9})
                             .value +
                         0.5 * beta * std::pow(zt * 1e12, -s);  // analytic tail past the cutoff
        EXPECT_NEAR(closed_l1(D, zt, beta) / q, 1.0, 1e-8) << beta << ' ' << D << ' ' << zt;
      }
  EXPECT_THROW(closed_l1(1.0, 0.0, 2.7), std::domain_error);
}

TEST(ClosedForm, LowerSeriesMatchesQuadrature) {
  for (int i : {0, 1, 3})
    for (double phi : {0.1, 1.0, 4.0}) {
      const double D = 0.8, zt = 1.5, beta = 2.7;
      const double q = closed_l2_lower_quadrature(i, D, phi, zt, beta, {1e-12, 1e-300, 4000, 1e-9});
      const double s = closed_l2_lower_series(i, D, phi, zt, beta);
      EXPECT_NEAR(s / q, 1.0, 1e-7) << i << ' ' << phi;
    }
  EXPECT_THROW(closed_l2(0, 0.0, 1.0, 0.0, 2.7), NumericError);
}

// The finite series is exact for integer rho and degrades for small
// fractional rho; the bound is asserted where it holds (rho >= 3).
TEST(ClosedForm, FiniteSeriesApproximation) {
  for (int r = 1; r <= 6; ++r)
    for (double y : logspace(1e-3, 50.0, 50))
      EXPECT_NEAR(gamma_series_approx(r, y), boost::math::gamma_p(static_cast<double>(r), y), 1e-13);
  for (double rho : {3.2, 3.5, 4.1, 4.5, 5.0, 5.7}) {
    double worst = 0.0;
    for (double y : logspace(1e-3, 50.0, 50))
      worst = std::max(worst, std::fabs(gamma_series_approx(rho, y) - boost::math::gamma_p(rho, y)));
    EXPECT_LE(worst, 0.02) << rho;
  }
}

TEST(ClosedForm, TracksReference) {
  for (int sf = 7; sf <= 12; ++sf)
    for (double N : {1e3, 1e4, 1e5}) {
      const auto in = fixture(sf, N);
      const auto d = coverage_closed_detail(in);
      EXPECT_NEAR(d.value, coverage_reference(in), 0.05) << sf << ' ' << N;
      EXPECT_GE(d.value, 0.0);
      EXPECT_LE(d.value, 1.0);
    }
}
