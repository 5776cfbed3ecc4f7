#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>
#include <sstream>
#include <vector>

#include "faslora/analytic.hpp"
#include "faslora/sim.hpp"
#include "faslora/stats.hpp"

using namespace faslora;

namespace {

// Largest |ECDF - F| over a grid; F may carry an atom at zero.
template <class F>
double max_abs_cdf_gap(std::vector<double> xs, const std::vector<double>& grid, F&& cdf) {
  std::sort(xs.begin(), xs.end());
  double worst = 0.0;
  for (double g : grid) {
    const auto k = std::upper_bound(xs.begin(), xs.end(), g) - xs.begin();
    worst = std::max(worst, std::fabs(static_cast<double>(k) / xs.size() - cdf(g)));
  }
  return worst;
}

}  // namespace

TEST(Annulus, RadiusDistribution) {
  RandomStream rng(1);
  const double R1 = 300, R2 = 3000;
  std::vector<double> r2;
  double m2 = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double r = draw_annulus_radius(rng, R1, R2);
    ASSERT_GE(r, R1);
    ASSERT_LE(r, R2);
    r2.push_back(r * r);
    m2 += r * r;
  }
  m2 /= r2.size();
  EXPECT_NEAR(m2 / (0.5 * (R1 * R1 + R2 * R2)), 1.0, 0.01);
  EXPECT_LE(ks_statistic(r2, [&](double v) { return (v - R1 * R1) / (R2 * R2 - R1 * R1); }), 0.01);
}

TEST(Realize, CoverageEvents) {
  NetworkConfig cfg;
  cfg.N = 0;
  cfg.P_t_dBm = 200;
  CoverageSimulator quiet(cfg, 9, ChannelSource::single());
  for (std::uint64_t t = 0; t < 200; ++t) {
    const auto r = quiet.realize_trial(3, t);
    EXPECT_EQ(r.i1, 0.0);
    EXPECT_EQ(r.i2_sum, 0.0);
    EXPECT_TRUE(r.covered);
  }
  CoverageSimulator blocked(NetworkConfig{}, 9, ChannelSource::single());
  blocked.set_qos_floor(1e6 * blocked.P_varsigma() / std::pow(300.0, 2.7));
  EXPECT_EQ(blocked.estimate(2000, 4).p_cov, 0.0);
}

TEST(Realize, CoveredMatchesConjunction) {
  NetworkConfig cfg;
  cfg.N = 1e5;
  CoverageSimulator sim(cfg, 10, ChannelSource::exact(FasGeometry::with_port_density(1, 1, 12)));
  for (const auto& r : sim.realizations(3000, 5)) {
    EXPECT_GE(r.s0, 0.0);
    EXPECT_GE(r.i1, 0.0);
    EXPECT_GE(r.i2_sum, 0.0);
    EXPECT_EQ(r.covered, r.s0 >= std::max({r.i1, r.i2_sum, sim.qos_floor()}));
    EXPECT_GE(r.port_index, 1);
    EXPECT_LE(r.port_index, 144);
  }
}

TEST(Determinism, IndependentOfWorkerCount) {
  NetworkConfig cfg;
  cfg.N = 3e4;
  CoverageSimulator sim(cfg, 8, ChannelSource::exact(FasGeometry::with_port_density(1, 1, 12)));
  const auto a = sim.realizations(2001, 42, 1);
  const auto b = sim.realizations(2001, 42, 4);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(std::memcmp(&a[i].s0, &b[i].s0, sizeof(double)), 0);
    EXPECT_EQ(std::memcmp(&a[i].i1, &b[i].i1, sizeof(double)), 0);
    EXPECT_EQ(std::memcmp(&a[i].i2_sum, &b[i].i2_sum, sizeof(double)), 0);
    EXPECT_EQ(a[i].port_index, b[i].port_index);
  }
  std::ostringstream x, y;
  write_trace_csv(x, a);
  write_trace_csv(y, b);
  EXPECT_EQ(x.str(), y.str());

  const auto e1 = sim.estimate(5000, 9, 1);
  const auto e4 = sim.estimate(5000, 9, 4);
  EXPECT_EQ(e1.p_cov, e4.p_cov);
  EXPECT_EQ(e1.half_ci95, e4.half_ci95);
  EXPECT_NE(sim.realizations(50, 43).front().s0, a.front().s0);
}

TEST(Estimate, ConfidenceInterval) {
  const auto e = estimate_coverage(9, NetworkConfig{}, 4000, ChannelSource::single(), 7);
  EXPECT_NEAR(e.half_ci95, 1.96 * std::sqrt(e.p_cov * (1 - e.p_cov) / 4000), 1e-15);
  EXPECT_EQ(e.trials, 4000);
  EXPECT_EQ(e.seed, 7u);
  EXPECT_THROW(estimate_coverage(9, NetworkConfig{}, 0, ChannelSource::single(), 7), std::invalid_argument);
}

TEST(Estimate, NonincreasingInN) {
  double prev = 1.0;
  for (double N : {1e3, 1e4, 1e5}) {
    NetworkConfig cfg;
    cfg.N = N;
    const auto e = estimate_coverage(9, cfg, 20000, ChannelSource::single(), 11);
    EXPECT_LE(e.p_cov, prev + e.half_ci95);
    prev = e.p_cov;
  }
}

// Single antenna: |h|^2 is exactly exponential. With the inter-SF sum
// replaced by its mean the simulated event is the one the reference
// integrates, so the two must agree to MC accuracy.
TEST(Estimate, SingleAntennaMatchesReferenceModel) {
  for (double N : {1e3, 1e4, 1e5}) {
    NetworkConfig cfg;
    cfg.N = N;
    const auto in = make_coverage_inputs(cfg, 9, single_antenna_gamma());
    const double zeta = zeta_inter_sf(in);
    CoverageSimulator sim(cfg, 9, ChannelSource::single());
    long long hits = 0;
    const auto rows = sim.realizations(50000, 13, 4);
    for (const auto& r : rows) hits += r.s0 >= std::max({r.i1, zeta, sim.qos_floor()});
    const double p = static_cast<double>(hits) / rows.size();
    EXPECT_NEAR(p, coverage_reference(in), 3 * proportion_half_ci95(p, 50000) / 1.96 + 1e-3) << N;
  }
}

TEST(Interference, CoSfMaxMatchesCdf) {
  NetworkConfig cfg;
  CoverageSimulator sim(cfg, 9, ChannelSource::single());
  const auto rows = sim.realizations(100000, 17, 4);
  std::vector<double> i1;
  for (const auto& r : rows) i1.push_back(r.i1);
  const auto in = make_coverage_inputs(cfg, 9, single_antenna_gamma());
  std::vector<double> grid;
  auto sorted = i1;
  std::sort(sorted.begin(), sorted.end());
  for (int q = 1; q < 200; ++q) grid.push_back(sorted[sorted.size() * q / 200]);
  const double gap = max_abs_cdf_gap(i1, grid, [&](double x) {
    return x > 0.0 ? cdf_co_sf(x, in) : std::exp(-in.nbar[9 - min_sf]);
  });
  EXPECT_LE(gap, 0.02);
}

// The inter-SF sum is heavy tailed (r^-beta near R1), so the tolerance is
// three standard errors of the sample mean rather than a fixed percentage.
TEST(Interference, InterSfMean) {
  NetworkConfig cfg;
  CoverageSimulator sim(cfg, 9, ChannelSource::single());
  double sum = 0.0, sq = 0.0;
  const auto rows = sim.realizations(100000, 19, 4);
  for (const auto& r : rows) {
    sum += r.i2_sum;
    sq += r.i2_sum * r.i2_sum;
  }
  const double n = static_cast<double>(rows.size());
  const double mean = sum / n;
  const double se = std::sqrt((sq / n - mean * mean) / n);
  const double zeta = zeta_inter_sf(make_coverage_inputs(cfg, 9, single_antenna_gamma()));
  EXPECT_NEAR(mean, zeta, 3 * se);

  RandomStream rng(29);
  double acc = 0.0;
  for (int i = 0; i < 1000000; ++i) acc += std::pow(draw_annulus_radius(rng, cfg.R1, cfg.R2), -cfg.beta);
  EXPECT_NEAR(acc / 1e6 / mean_inverse_pathloss(cfg.R1, cfg.R2, cfg.beta), 1.0, 0.005);
}

// S0 with Gamma-distributed gains isolates the distance mixture.
TEST(DesiredPower, GammaSampledMixture) {
  const GammaParams g{4.94108, 1.29927, 2};
  NetworkConfig cfg;
  const auto in = make_coverage_inputs(cfg, 9, g);
  std::mt19937_64 gen(23);
  std::gamma_distribution<double> gain(g.shape, 1.0 / g.rate);
  RandomStream rng(23);
  std::vector<double> s0;
  for (int i = 0; i < 100000; ++i)
    s0.push_back(in.P_varsigma * gain(gen) / std::pow(draw_annulus_radius(rng, cfg.R1, cfg.R2), cfg.beta));
  EXPECT_LE(ks_statistic(s0, [&](double x) { return cdf_s0(x, in); }), 0.02);
}
