#pragma once

// Pipelines behind the command-line modes: channel fit statistics, analytic
// coverage, Monte Carlo coverage and parameter sweeps.

#include <algorithm>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "faslora/analytic.hpp"
#include "faslora/channel.hpp"
#include "faslora/config.hpp"
#include "faslora/evtapprox.hpp"
#include "faslora/sim.hpp"
#include "faslora/stats.hpp"

namespace faslora {

inline SensitivityTable sensitivity_for(const ExperimentSpec& s) {
  return s.sensitivity_table.empty() ? SensitivityTable{} : SensitivityTable::load_csv(s.sensitivity_table);
}

struct ChannelStats {
  FitReport report;
  EnvelopeFit fit;
  std::vector<double> envelopes;  // sorted max envelopes, exact model
};

/// Fit the block/Gumbel/Gamma chain for one aperture and score it against
/// exact correlated sampling.
inline ChannelStats channel_stats(const FasGeometry& geom, double energy_fraction, long long samples,
                                  std::uint64_t seed) {
  const auto corr = jakes_correlation(geom);
  ChannelStats cs;
  cs.fit = envelope_fit(fit_block_model(corr, energy_fraction));
  const auto gamma = gamma_fit(2, cs.fit);
  RandomStream rng(seed, 0);
  cs.envelopes = exact_max_envelopes(spectral_root(corr), static_cast<std::size_t>(samples), rng);
  std::sort(cs.envelopes.begin(), cs.envelopes.end());
  std::vector<double> power(cs.envelopes.size());
  std::transform(cs.envelopes.begin(), cs.envelopes.end(), power.begin(), [](double r) { return r * r; });

  auto& rep = cs.report;
  rep.W1 = geom.W1;
  rep.W2 = geom.W2;
  rep.ports = geom.ports();
  rep.blocks = cs.fit.model.count();
  rep.gumbel = cs.fit.gumbel;
  rep.gamma = gamma;
  rep.ks_gumbel = ks_statistic(cs.envelopes, [&](double r) { return cs.fit.cdf(r); });
  rep.ks_gamma = ks_statistic(power, [&](double x) { return gamma_cdf(x, gamma); });
  return cs;
}

/// Empirical vs fitted CDFs on a grid of envelope quantiles.
inline void write_channel_cdf_csv(std::ostream& os, const ChannelStats& cs, int points = 200) {
  os << "r,empirical,envelope_fit,power,gamma_fit\n";
  const auto& e = cs.envelopes;
  const double lo = e.front(), hi = e.back();
  for (int k = 0; k < points; ++k) {
    const double r = lo + (hi - lo) * k / (points - 1);
    os << detail::format_double(r) << ',' << detail::format_double(ecdf_sorted(e, r)) << ','
       << detail::format_double(cs.fit.cdf(r)) << ',' << detail::format_double(r * r) << ','
       << detail::format_double(gamma_cdf(r * r, cs.report.gamma)) << '\n';
  }
}

/// Resolves antenna variants into channel sources and analytic gain fits,
/// caching the per-aperture work.
class AntennaResolver {
 public:
  explicit AntennaResolver(const ExperimentSpec& spec) : spec_(spec) {}

  std::pair<double, double> aperture(const AntennaSpec& a) const {
    if (!a.fas) return {0.0, 0.0};
    return a.W > 0.0 ? std::make_pair(a.W, a.W) : std::make_pair(spec_.W1, spec_.W2);
  }

  FasGeometry geometry(const AntennaSpec& a) const {
    const auto [w1, w2] = aperture(a);
    return FasGeometry::with_port_density(w1, w2, spec_.ports_per_unit);
  }

  const BlockModel& block_model(const AntennaSpec& a) {
    const auto key = aperture(a);
    auto it = models_.find(key);
    if (it == models_.end())
      it = models_.emplace(key, fit_block_model(jakes_correlation(geometry(a)), spec_.energy_fraction)).first;
    return it->second;
  }

  GammaParams gain_fit(const AntennaSpec& a) {
    if (!a.fas) return single_antenna_gamma();
    return gamma_fit(2, envelope_fit(block_model(a)));
  }

  const ChannelSource& source(const AntennaSpec& a) {
    if (!a.fas) return single_;
    const auto key = aperture(a);
    auto it = sources_.find(key);
    if (it == sources_.end()) {
      ChannelSource src = spec_.channel_mode == ChannelMode::exact ? ChannelSource::exact(geometry(a))
                                                                   : ChannelSource::block(block_model(a));
      it = sources_.emplace(key, std::move(src)).first;
    }
    return it->second;
  }

  NetworkConfig config_for(const AntennaSpec& a, NetworkConfig cfg) const {
    cfg.P_t_dBm += a.power_offset_db;
    return cfg;
  }

 private:
  const ExperimentSpec& spec_;
  std::map<std::pair<double, double>, BlockModel> models_;
  std::map<std::pair<double, double>, ChannelSource> sources_;
  ChannelSource single_ = ChannelSource::single();
};

/// Coverage rows for one operating point, one row per requested method.
inline std::vector<CoverageRow> coverage_point(const ExperimentSpec& spec, const NetworkConfig& cfg, int sf,
                                               const AntennaSpec& antenna, AntennaResolver& resolver,
                                               const SensitivityTable& table) {
  const auto acfg = resolver.config_for(antenna, cfg);
  const auto [w1, w2] = resolver.aperture(antenna);
  std::vector<CoverageRow> rows;
  std::optional<CoverageInputs> inputs;
  for (const auto& method : spec.methods) {
    CoverageRow row{sf, cfg.N, cfg.R2, w1, w2, method, 0.0, 0.0, antenna.label()};
    if (method == "montecarlo") {
      CoverageSimulator simr(acfg, sf, resolver.source(antenna), table);
      const auto est = simr.estimate(spec.trials, spec.seed, spec.workers);
      row.p_cov = est.p_cov;
      row.half_ci = est.half_ci95;
    } else {
      if (!inputs) inputs = make_coverage_inputs(acfg, sf, resolver.gain_fit(antenna), table);
      row.p_cov = method == "reference" ? coverage_reference(*inputs, spec.quad) : coverage_closed(*inputs, spec.quad);
    }
    rows.push_back(row);
  }
  return rows;
}

/// All rows of a sweep, sorted by the sweep variable, then antenna, then method.
inline std::vector<CoverageRow> run_sweep(const ExperimentSpec& spec) {
  spec.validate();
  const auto table = sensitivity_for(spec);
  AntennaResolver resolver(spec);
  std::vector<double> values = spec.sweep_values;
  std::sort(values.begin(), values.end());
  std::vector<CoverageRow> rows;
  for (double v : values) {
    NetworkConfig cfg = spec.cfg;
    int sf = spec.sf;
    std::vector<AntennaSpec> antennas = spec.antennas;
    if (spec.sweep_variable == "N") cfg.N = v;
    else if (spec.sweep_variable == "R2") cfg.R2 = v;
    else if (spec.sweep_variable == "SF") sf = static_cast<int>(v);
    else if (spec.sweep_variable == "W") antennas = {AntennaSpec{true, 0.0, v}};
    cfg.validate();
    require_sf(sf, "sweep");
    for (const auto& a : antennas) {
      auto r = coverage_point(spec, cfg, sf, a, resolver, table);
      rows.insert(rows.end(), r.begin(), r.end());
    }
  }
  return rows;
}

struct AnalyzeRow {
  CoverageRow reference;
  double closed = 0.0;
};

inline std::vector<AnalyzeRow> run_analyze(const ExperimentSpec& spec) {
  spec.validate();
  const auto table = sensitivity_for(spec);
  AntennaResolver resolver(spec);
  std::vector<AnalyzeRow> out;
  for (const auto& a : spec.antennas) {
    const auto in = make_coverage_inputs(resolver.config_for(a, spec.cfg), spec.sf, resolver.gain_fit(a), table);
    const auto [w1, w2] = resolver.aperture(a);
    AnalyzeRow row;
    row.reference = {spec.sf, spec.cfg.N, spec.cfg.R2, w1, w2, "reference", coverage_reference(in, spec.quad), 0.0,
                     a.label()};
    row.closed = coverage_closed(in, spec.quad);
    out.push_back(row);
  }
  return out;
}

inline void write_analyze_csv(std::ostream& os, const std::vector<AnalyzeRow>& rows) {
  using detail::format_double;
  os << "sf,N,R2,W1,W2,antenna,p_reference,p_closed,abs_diff\n";
  for (const auto& r : rows) {
    const auto& c = r.reference;
    os << c.sf << ',' << format_double(c.N) << ',' << format_double(c.R2) << ',' << format_double(c.W1) << ','
       << format_double(c.W2) << ',' << c.antenna << ',' << format_double(c.p_cov) << ','
       << format_double(r.closed) << ',' << format_double(std::fabs(c.p_cov - r.closed)) << '\n';
  }
}

}  // namespace faslora
