#pragma once

// Monte Carlo coverage: desired device on a random annulus radius, FAS port
// selection on its channel, Poisson-thinned co-SF and inter-SF interferers.
// Every trial draws from its own stream keyed by (seed, trial index).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <thread>
#include <type_traits>
#include <vector>

#include "faslora/channel.hpp"
#include "faslora/network.hpp"
#include "faslora/rng.hpp"
#include "faslora/stats.hpp"

namespace faslora {

inline double draw_annulus_radius(RandomStream& rng, double R1, double R2) {
  return std::sqrt(R1 * R1 + rng.uniform() * (R2 * R2 - R1 * R1));
}

enum class AntennaMode { fas_exact, fas_block, single };

inline const char* to_string(AntennaMode m) {
  switch (m) {
    case AntennaMode::fas_exact: return "exact";
    case AntennaMode::fas_block: return "block";
    case AntennaMode::single: return "single";
  }
  return "?";
}

/// Where the desired device's selected-port gain comes from.
struct ChannelSource {
  AntennaMode mode = AntennaMode::single;
  SpectralRoot root;   // fas_exact
  BlockModel model;    // fas_block

  static ChannelSource single() { return {}; }

  static ChannelSource exact(const FasGeometry& geom) {
    ChannelSource s;
    s.mode = AntennaMode::fas_exact;
    s.root = spectral_root(jakes_correlation(geom));
    return s;
  }

  static ChannelSource block(const BlockModel& model) {
    model.validate();
    ChannelSource s;
    s.mode = AntennaMode::fas_block;
    s.model = model;
    return s;
  }
};

struct Realization {
  double r0 = 0.0;
  double s0 = 0.0;
  double i1 = 0.0;      // strongest co-SF interferer
  double i2_sum = 0.0;  // threshold-weighted inter-SF sum
  bool covered = false;
  int port_index = 1;
};

struct CoverageEstimate {
  double p_cov = 0.0;
  double half_ci95 = 0.0;
  long long trials = 0;
  std::uint64_t seed = 0;
};

class CoverageSimulator {
 public:
  CoverageSimulator(const NetworkConfig& cfg, int sf, ChannelSource source, const SensitivityTable& table = {})
      : cfg_(cfg), sf_(sf), source_(std::move(source)), table_(table) {
    cfg_.validate();
    require_sf(sf, "CoverageSimulator");
    P_ = reduced_tx_power(cfg_);
    qos_floor_ = qos_threshold_lin(sf) * noise_power_lin(cfg_);
    for (int m = min_sf; m <= max_sf; ++m) nbar_[m - min_sf] = mean_active(m, cfg_);
  }

  // Overrides used by experiments that isolate one interference term.
  void set_mean_active(const SfArray& nbar) { nbar_ = nbar; }
  void set_qos_floor(double floor) { qos_floor_ = floor; }

  const SfArray& mean_active_counts() const { return nbar_; }
  double qos_floor() const { return qos_floor_; }
  double P_varsigma() const { return P_; }
  int sf() const { return sf_; }

  struct Scratch {
    std::vector<std::complex<double>> h;
    Eigen::VectorXd gx, gy;
  };

  Realization realize(RandomStream& rng, Scratch& scratch) const {
    Realization out;
    const double R1 = cfg_.R1, R2 = cfg_.R2, beta = cfg_.beta;
    out.r0 = draw_annulus_radius(rng, R1, R2);

    double gain_sq = 0.0;
    switch (source_.mode) {
      case AntennaMode::single: {
        const double x = rng.normal() * detail::half_variance_scale;
        const double y = rng.normal() * detail::half_variance_scale;
        gain_sq = x * x + y * y;
        out.port_index = 1;
        break;
      }
      case AntennaMode::fas_exact:
      case AntennaMode::fas_block: {
        if (source_.mode == AntennaMode::fas_exact)
          exact_sample_into(source_.root, rng, scratch.h, scratch.gx, scratch.gy);
        else
          block_sample_into(source_.model, rng, scratch.h);
        const auto sel = select_port(std::span<const std::complex<double>>(scratch.h));
        gain_sq = sel.gain * sel.gain;
        out.port_index = sel.index;
        break;
      }
    }
    out.s0 = P_ * gain_sq / std::pow(out.r0, beta);

    const double co = table_.lin(sf_, sf_);
    const auto k_co = rng.poisson(nbar_[sf_ - min_sf]);
    for (std::uint64_t k = 0; k < k_co; ++k) {
      const double r = draw_annulus_radius(rng, R1, R2);
      out.i1 = std::max(out.i1, co * P_ * rng.exponential() / std::pow(r, beta));
    }
    for (int mt = min_sf; mt <= max_sf; ++mt) {
      if (mt == sf_) continue;
      const double ups = table_.lin(sf_, mt);
      const auto k_in = rng.poisson(nbar_[mt - min_sf]);
      for (std::uint64_t k = 0; k < k_in; ++k) {
        const double r = draw_annulus_radius(rng, R1, R2);
        out.i2_sum += ups * P_ * rng.exponential() / std::pow(r, beta);
      }
    }
    out.covered = out.s0 >= std::max({out.i1, out.i2_sum, qos_floor_});
    return out;
  }

  Realization realize_trial(std::uint64_t seed, std::uint64_t trial) const {
    RandomStream rng(seed, trial);
    Scratch scratch;
    return realize(rng, scratch);
  }

  /// All realizations for trials [0, trials), computed on `workers` threads.
  std::vector<Realization> realizations(long long trials, std::uint64_t seed, int workers = 1) const {
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    std::vector<Realization> out(static_cast<std::size_t>(trials));
    parallel_trials(trials, workers, [&](long long lo, long long hi) {
      Scratch scratch;
      for (long long t = lo; t < hi; ++t) {
        RandomStream rng(seed, static_cast<std::uint64_t>(t));
        out[static_cast<std::size_t>(t)] = realize(rng, scratch);
      }
    });
    return out;
  }

  CoverageEstimate estimate(long long trials, std::uint64_t seed, int workers = 1) const {
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    const int w = effective_workers(trials, workers);
    std::vector<long long> hits(static_cast<std::size_t>(w), 0);
    parallel_trials(trials, w, [&](long long lo, long long hi, int id) {
      Scratch scratch;
      long long c = 0;
      for (long long t = lo; t < hi; ++t) {
        RandomStream rng(seed, static_cast<std::uint64_t>(t));
        c += realize(rng, scratch).covered ? 1 : 0;
      }
      hits[static_cast<std::size_t>(id)] = c;
    });
    long long total = 0;
    for (long long h : hits) total += h;
    CoverageEstimate e;
    e.trials = trials;
    e.seed = seed;
    e.p_cov = static_cast<double>(total) / static_cast<double>(trials);
    e.half_ci95 = proportion_half_ci95(e.p_cov, trials);
    return e;
  }

 private:
  static int effective_workers(long long trials, int workers) {
    return static_cast<int>(std::clamp<long long>(workers, 1, trials));
  }

  template <class Body>
  static void parallel_trials(long long trials, int workers, Body&& body) {
    const int w = effective_workers(trials, workers);
    auto run = [&](int id) {
      const long long lo = trials * id / w;
      const long long hi = trials * (id + 1) / w;
      if constexpr (std::is_invocable_v<Body, long long, long long, int>) body(lo, hi, id);
      else body(lo, hi);
    };
    if (w == 1) {
      run(0);
      return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(w));
    for (int id = 0; id < w; ++id) pool.emplace_back(run, id);
    for (auto& t : pool) t.join();
  }

  NetworkConfig cfg_;
  int sf_;
  ChannelSource source_;
  SensitivityTable table_;
  double P_ = 0.0;
  double qos_floor_ = 0.0;
  SfArray nbar_{};
};

inline CoverageEstimate estimate_coverage(int m, const NetworkConfig& cfg, long long trials, ChannelSource source,
                                          std::uint64_t seed, int workers = 1) {
  return CoverageSimulator(cfg, m, std::move(source)).estimate(trials, seed, workers);
}

/// Per-trial trace rows: trial, r0, s0, i1, i2_sum, covered.
inline void write_trace_csv(std::ostream& os, const std::vector<Realization>& rows) {
  os << "trial,r0,s0,i1,i2_sum,covered\n";
  const auto prec = os.precision(17);
  for (std::size_t t = 0; t < rows.size(); ++t) {
    const auto& r = rows[t];
    os << t << ',' << r.r0 << ',' << r.s0 << ',' << r.i1 << ',' << r.i2_sum << ',' << (r.covered ? 1 : 0) << '\n';
  }
  os.precision(prec);
}

}  // namespace faslora
