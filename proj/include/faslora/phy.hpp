#pragma once

// Critically sampled chirp-spread-spectrum symbols and the dechirp + DFT
// decision statistic of a LoRa receiver.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "faslora/network.hpp"

namespace faslora {

using cvec = std::vector<std::complex<double>>;

struct CssSignal {
  int sf = 7;
  int symbol = 0;
  cvec samples;
};

struct DecisionSpectrum {
  std::vector<double> magnitudes;

  std::size_t argmax() const {
    return static_cast<std::size_t>(std::max_element(magnitudes.begin(), magnitudes.end()) - magnitudes.begin());
  }
  double peak() const { return magnitudes.empty() ? 0.0 : magnitudes[argmax()]; }
};

/// Base up-chirp e^{j pi n^2 / N}, N = 2^sf.
inline cvec base_chirp(int sf) {
  require_sf(sf, "base_chirp");
  const std::size_t N = std::size_t{1} << sf;
  cvec c(N);
  for (std::size_t n = 0; n < N; ++n) {
    // n^2 mod 2N keeps the phase argument small at large SF
    const double q = static_cast<double>((n * n) % (2 * N));
    c[n] = std::polar(1.0, std::numbers::pi * q / static_cast<double>(N));
  }
  return c;
}

/// Symbol s as the base chirp times e^{j 2 pi s n / N}; dechirping leaves a
/// pure tone at bin s.
inline CssSignal css_modulate(int sf, int symbol) {
  require_sf(sf, "css_modulate");
  const int N = 1 << sf;
  if (symbol < 0 || symbol >= N) throw std::invalid_argument("css_modulate: symbol out of range");
  CssSignal sig{sf, symbol, base_chirp(sf)};
  for (int n = 0; n < N; ++n) {
    const double q = static_cast<double>((static_cast<long long>(symbol) * n) % N);
    sig.samples[static_cast<std::size_t>(n)] *= std::polar(1.0, 2.0 * std::numbers::pi * q / N);
  }
  return sig;
}

inline DecisionSpectrum dechirp_decision(const cvec& signal, int sf) {
  require_sf(sf, "dechirp_decision");
  const std::size_t N = std::size_t{1} << sf;
  if (signal.size() != N) throw std::invalid_argument("dechirp_decision: signal length must be 2^sf");
  const auto c = base_chirp(sf);
  cvec buf(N), spec;
  for (std::size_t n = 0; n < N; ++n) buf[n] = signal[n] * std::conj(c[n]);
  Eigen::FFT<double> fft;
  fft.fwd(spec, buf);
  DecisionSpectrum d;
  d.magnitudes.resize(N);
  for (std::size_t k = 0; k < N; ++k) d.magnitudes[k] = std::abs(spec[k]);
  return d;
}

/// Fit a signal of another SF into a window of 2^window_sf samples by
/// cyclic tiling (shorter symbol) or truncation (longer symbol).
inline cvec fit_to_window(const cvec& samples, int window_sf) {
  const std::size_t N = std::size_t{1} << window_sf;
  if (samples.empty()) throw std::invalid_argument("fit_to_window: empty signal");
  cvec out(N);
  for (std::size_t n = 0; n < N; ++n) out[n] = samples[n % samples.size()];
  return out;
}

inline double mean_power(const cvec& x) {
  double s = 0.0;
  for (const auto& v : x) s += std::norm(v);
  return x.empty() ? 0.0 : s / static_cast<double>(x.size());
}

struct PhyComponent {
  std::string name;  // "desired", "co-SF", "inter-SF"
  int sf = 0;
  int symbol = 0;
};

struct CollisionDemo {
  int window_sf = 8;
  std::vector<PhyComponent> components;
  std::vector<DecisionSpectrum> separate;  // one per component, scenario (a)
  DecisionSpectrum combined;               // scenario (b)
};

/// Desired {25, 8} with co-SF {125, 8}, {165, 8} and inter-SF {125, 7},
/// {165, 9}, all at equal power, observed in the SF-8 window.
inline CollisionDemo collision_demo() {
  CollisionDemo r;
  r.window_sf = 8;
  r.components = {{"desired", 8, 25}, {"co-SF", 8, 125}, {"co-SF", 8, 165}, {"inter-SF", 7, 125}, {"inter-SF", 9, 165}};
  cvec sum(std::size_t{1} << r.window_sf, {0.0, 0.0});
  for (const auto& c : r.components) {
    const auto x = fit_to_window(css_modulate(c.sf, c.symbol).samples, r.window_sf);
    for (std::size_t n = 0; n < sum.size(); ++n) sum[n] += x[n];
    r.separate.push_back(dechirp_decision(x, r.window_sf));
  }
  r.combined = dechirp_decision(sum, r.window_sf);
  return r;
}

inline std::string component_label(const PhyComponent& c) {
  return c.name + " {" + std::to_string(c.symbol) + "," + std::to_string(c.sf) + "}";
}

/// Scenario (a): bin, component, magnitude for every component.
inline void write_collision_separate_csv(std::ostream& os, const CollisionDemo& r) {
  os << "bin,component,magnitude\n";
  for (std::size_t c = 0; c < r.components.size(); ++c) {
    const auto label = component_label(r.components[c]);
    for (std::size_t k = 0; k < r.separate[c].magnitudes.size(); ++k)
      os << k << ",\"" << label << "\"," << r.separate[c].magnitudes[k] << '\n';
  }
}

/// Scenario (b): bin, component, magnitude of the summed signal.
inline void write_collision_combined_csv(std::ostream& os, const CollisionDemo& r) {
  os << "bin,component,magnitude\n";
  for (std::size_t k = 0; k < r.combined.magnitudes.size(); ++k)
    os << k << ",combined," << r.combined.magnitudes[k] << '\n';
}

}  // namespace faslora
