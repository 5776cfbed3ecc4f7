#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

#include "faslora/phy.hpp"

using namespace faslora;

TEST(Css, UnitModulus) {
  for (int sf : {7, 12}) {
    const auto c = base_chirp(sf);
    ASSERT_EQ(c.size(), std::size_t{1} << sf);
    for (const auto& v : c) EXPECT_NEAR(std::abs(v), 1.0, 1e-14);
    EXPECT_NEAR(mean_power(css_modulate(sf, 3).samples), 1.0, 1e-12);
  }
  EXPECT_THROW(css_modulate(7, 128), std::invalid_argument);
  EXPECT_THROW(css_modulate(7, -1), std::invalid_argument);
  EXPECT_THROW(base_chirp(6), std::invalid_argument);
}

TEST(Dechirp, ExhaustiveArgmaxSf7) {
  for (int s = 0; s < 128; ++s) {
    const auto d = dechirp_decision(css_modulate(7, s).samples, 7);
    EXPECT_EQ(d.argmax(), static_cast<std::size_t>(s));
    EXPECT_NEAR(d.peak(), 128.0, 1e-9);
    // a pure tone: every other bin is numerically empty
    double rest = 0.0;
    for (std::size_t k = 0; k < d.magnitudes.size(); ++k)
      if (k != static_cast<std::size_t>(s)) rest = std::max(rest, d.magnitudes[k]);
    EXPECT_LT(rest, 1e-9);
  }
}

TEST(Dechirp, CoherentPeakAndLength) {
  const auto d = dechirp_decision(css_modulate(8, 25).samples, 8);
  EXPECT_EQ(d.argmax(), 25u);
  EXPECT_NEAR(d.peak(), 256.0, 1e-9);
  EXPECT_EQ(dechirp_decision(css_modulate(12, 4000).samples, 12).argmax(), 4000u);
  EXPECT_THROW(dechirp_decision(cvec(100), 7), std::invalid_argument);
}

TEST(Dechirp, Linearity) {
  auto a = css_modulate(8, 10).samples;
  const auto b = css_modulate(8, 200).samples;
  for (std::size_t n = 0; n < a.size(); ++n) a[n] = 2.0 * a[n] + b[n];
  const auto d = dechirp_decision(a, 8);
  EXPECT_NEAR(d.magnitudes[10], 512.0, 1e-9);
  EXPECT_NEAR(d.magnitudes[200], 256.0, 1e-9);
}

TEST(Window, TileAndTruncate) {
  const auto s7 = css_modulate(7, 5).samples;
  const auto w = fit_to_window(s7, 8);
  ASSERT_EQ(w.size(), 256u);
  EXPECT_EQ(w[130], s7[2]);
  const auto s9 = css_modulate(9, 5).samples;
  const auto t = fit_to_window(s9, 8);
  ASSERT_EQ(t.size(), 256u);
  EXPECT_EQ(t[255], s9[255]);
  EXPECT_THROW(fit_to_window({}, 8), std::invalid_argument);
}

TEST(CollisionDemo, PeaksAndInterSfSpread) {
  const auto r = collision_demo();
  ASSERT_EQ(r.components.size(), 5u);
  ASSERT_EQ(r.separate.size(), 5u);

  double smallest_co = 1e300, largest_inter = 0.0;
  for (std::size_t c = 0; c < r.components.size(); ++c) {
    const auto& comp = r.components[c];
    const auto& spec = r.separate[c];
    if (comp.sf == r.window_sf) {
      EXPECT_EQ(spec.argmax(), static_cast<std::size_t>(comp.symbol));
      smallest_co = std::min(smallest_co, spec.peak());
    } else {
      largest_inter = std::max(largest_inter, spec.peak());
    }
  }
  EXPECT_NEAR(smallest_co, 256.0, 1e-9);
  EXPECT_LT(largest_inter, 0.5 * smallest_co);

  // combined spectrum: the three co-SF tones stand out at their bins
  std::vector<std::size_t> order(r.combined.magnitudes.size());
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + 3, order.end(),
                    [&](auto a, auto b) { return r.combined.magnitudes[a] > r.combined.magnitudes[b]; });
  std::vector<std::size_t> top(order.begin(), order.begin() + 3);
  std::sort(top.begin(), top.end());
  EXPECT_EQ(top, (std::vector<std::size_t>{25, 125, 165}));
}

TEST(CollisionDemo, InterSfEnergyIsSpread) {
  const auto r = collision_demo();
  for (std::size_t c = 0; c < r.components.size(); ++c) {
    if (r.components[c].sf == r.window_sf) continue;
    const auto& m = r.separate[c].magnitudes;
    double energy = 0.0;
    for (double v : m) energy += v * v;
    // Parseval: total energy is N times the window power
    EXPECT_NEAR(energy, 256.0 * 256.0, 1e-6);
    const double mean = std::sqrt(energy / m.size());
    EXPECT_LT(r.separate[c].peak() / mean, 16.0) << c;  // a pure tone would reach 16
  }
}

TEST(CollisionDemo, CsvShape) {
  const auto r = collision_demo();
  std::ostringstream a, b;
  write_collision_separate_csv(a, r);
  write_collision_combined_csv(b, r);
  const std::string sa = a.str(), sb = b.str();
  EXPECT_EQ(sa.rfind("bin,component,magnitude\n", 0), 0u);
  EXPECT_EQ(std::count(sa.begin(), sa.end(), '\n'), 1 + 5 * 256);
  EXPECT_EQ(std::count(sb.begin(), sb.end(), '\n'), 1 + 256);
  EXPECT_NE(sa.find("\"inter-SF {165,9}\""), std::string::npos);
}
