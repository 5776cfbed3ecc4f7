#pragma once

// Flat `key = value` experiment configuration. Every resolved spec can be
// written back as `# key = value` header lines and re-read unchanged.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "faslora/channel.hpp"
#include "faslora/network.hpp"
#include "faslora/quadrature.hpp"

namespace faslora {

/// Bad configuration; what() starts with the offending key.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string& key, const std::string& msg) : std::invalid_argument(key + ": " + msg), key_(key) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

inline const std::vector<std::string>& experiment_modes() {
  static const std::vector<std::string> modes = {"channel-stats", "analyze", "simulate", "sweep", "phy-demo"};
  return modes;
}

/// Antenna variant of a coverage curve: single antenna with a power offset,
/// or a square FAS aperture W x W (W <= 0 means the configured W1 x W2).
struct AntennaSpec {
  bool fas = false;
  double power_offset_db = 0.0;
  double W = 0.0;

  std::string label() const;
  static AntennaSpec parse(const std::string& token);
  bool operator==(const AntennaSpec&) const = default;
};

struct ExperimentSpec {
  std::string mode = "analyze";
  NetworkConfig cfg;
  double W1 = 1.0;
  double W2 = 1.0;
  double ports_per_unit = 12.0;
  int sf = 9;
  ChannelMode channel_mode = ChannelMode::exact;
  double energy_fraction = 0.7;
  long long trials = 10000;
  std::uint64_t seed = 1;
  int workers = 1;
  long long fit_samples = 100000;
  std::string sweep_variable;  // N | R2 | W | SF, empty when not sweeping
  std::vector<double> sweep_values;
  std::vector<std::string> methods = {"montecarlo", "reference", "closed"};
  std::vector<AntennaSpec> antennas = {AntennaSpec{true, 0.0, 0.0}};
  std::string sensitivity_table;  // CSV path, empty = embedded SX1272 table
  QuadratureSpec quad;
  bool gnuplot = false;
  std::string output_path;

  FasGeometry geometry() const { return FasGeometry::with_port_density(W1, W2, ports_per_unit); }

  void validate() const;
  bool operator==(const ExperimentSpec& o) const { return to_pairs() == o.to_pairs(); }

  /// Resolved key/value pairs in emission order.
  std::vector<std::pair<std::string, std::string>> to_pairs() const;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

/// Shortest decimal text that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  double out = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), out);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size())
    throw ConfigError(key, "expected a number, got '" + v + "'");
  return out;
}

inline long long parse_integer(const std::string& key, const std::string& v) {
  // accept 1e4-style integers too
  const double d = parse_double(key, v);
  if (d != std::floor(d) || std::fabs(d) > 9.0e15) throw ConfigError(key, "expected an integer, got '" + v + "'");
  return static_cast<long long>(d);
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw ConfigError(key, "expected true|false, got '" + v + "'");
}

template <class T>
std::string join(const std::vector<T>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    if constexpr (std::is_same_v<T, std::string>) out += xs[i];
    else if constexpr (std::is_same_v<T, AntennaSpec>) out += xs[i].label();
    else if constexpr (std::is_floating_point_v<T>) out += format_double(xs[i]);
    else out += std::to_string(xs[i]);
  }
  return out;
}

}  // namespace detail

inline std::string AntennaSpec::label() const {
  if (fas) return W > 0.0 ? "fas:" + detail::format_double(W) : "fas";
  if (power_offset_db == 0.0) return "single";
  return std::string("single") + (power_offset_db > 0 ? "+" : "") + detail::format_double(power_offset_db) + "dB";
}

inline AntennaSpec AntennaSpec::parse(const std::string& token) {
  const std::string t = detail::trim(token);
  AntennaSpec a;
  if (t == "fas") {
    a.fas = true;
    return a;
  }
  if (t.rfind("fas:", 0) == 0) {
    a.fas = true;
    a.W = detail::parse_double("antennas", t.substr(4));
    if (!(a.W > 0.0)) throw ConfigError("antennas", "FAS aperture must be > 0 in '" + t + "'");
    return a;
  }
  if (t == "single") return a;
  if (t.rfind("single", 0) == 0 && t.size() > 8 && t.substr(t.size() - 2) == "dB") {
    std::string num = t.substr(6, t.size() - 8);
    if (!num.empty() && num.front() == '+') num.erase(0, 1);  // from_chars rejects a leading '+'
    a.power_offset_db = detail::parse_double("antennas", num);
    return a;
  }
  throw ConfigError("antennas", "unknown antenna '" + t + "' (single, single+XdB, fas, fas:W)");
}

inline std::vector<std::pair<std::string, std::string>> ExperimentSpec::to_pairs() const {
  using detail::format_double;
  std::vector<std::pair<std::string, std::string>> kv = {
      {"mode", mode},
      {"R1", format_double(cfg.R1)},
      {"R2", format_double(cfg.R2)},
      {"N", format_double(cfg.N)},
      {"T_in", format_double(cfg.T_in)},
      {"BW", format_double(cfg.BW)},
      {"CR", std::to_string(cfg.CR)},
      {"L_pl", format_double(cfg.L_pl)},
      {"N_pre", format_double(cfg.N_pre)},
      {"L_hd", format_double(cfg.L_hd)},
      {"L_crc", format_double(cfg.L_crc)},
      {"f_c", format_double(cfg.f_c)},
      {"beta", format_double(cfg.beta)},
      {"P_t_dBm", format_double(cfg.P_t_dBm)},
      {"NF_dB", format_double(cfg.NF_dB)},
      {"sf_set", detail::join(cfg.sf_set)},
      {"W1", format_double(W1)},
      {"W2", format_double(W2)},
      {"ports_per_unit", format_double(ports_per_unit)},
      {"sf", std::to_string(sf)},
      {"channel_mode", to_string(channel_mode)},
      {"energy_fraction", format_double(energy_fraction)},
      {"trials", std::to_string(trials)},
      {"seed", std::to_string(seed)},
      {"workers", std::to_string(workers)},
      {"fit_samples", std::to_string(fit_samples)},
      {"sweep_variable", sweep_variable},
      {"sweep_values", detail::join(sweep_values)},
      {"methods", detail::join(methods)},
      {"antennas", detail::join(antennas)},
      {"sensitivity_table", sensitivity_table},
      {"rel_tol", format_double(quad.rel_tol)},
      {"abs_tol", format_double(quad.abs_tol)},
      {"max_subdivisions", std::to_string(quad.max_subdivisions)},
      {"tail_cutoff", format_double(quad.tail_cutoff_probability)},
      {"gnuplot", gnuplot ? "true" : "false"},
      {"output", output_path},
  };
  return kv;
}

inline void ExperimentSpec::validate() const {
  if (std::find(experiment_modes().begin(), experiment_modes().end(), mode) == experiment_modes().end())
    throw ConfigError("mode", "unknown mode '" + mode + "'");
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    const auto colon = msg.find(':');
    throw ConfigError(msg.substr(0, colon), colon == std::string::npos ? msg : detail::trim(msg.substr(colon + 1)));
  }
  if (!(W1 > 0.0)) throw ConfigError("W1", "must be > 0");
  if (!(W2 > 0.0)) throw ConfigError("W2", "must be > 0");
  if (!(ports_per_unit > 0.0)) throw ConfigError("ports_per_unit", "must be > 0");
  if (sf < min_sf || sf > max_sf) throw ConfigError("sf", "must be in 7..12");
  if (!(energy_fraction > 0.0) || !(energy_fraction <= 1.0)) throw ConfigError("energy_fraction", "must be in (0, 1]");
  if (trials < 1) throw ConfigError("trials", "must be >= 1");
  if (workers < 1) throw ConfigError("workers", "must be >= 1");
  if (fit_samples < 10) throw ConfigError("fit_samples", "must be >= 10");
  if (!sweep_variable.empty() && sweep_variable != "N" && sweep_variable != "R2" && sweep_variable != "W" &&
      sweep_variable != "SF")
    throw ConfigError("sweep_variable", "must be one of N, R2, W, SF");
  if (mode == "sweep") {
    if (sweep_variable.empty()) throw ConfigError("sweep_variable", "required in sweep mode");
    if (sweep_values.empty()) throw ConfigError("sweep_values", "must be nonempty in sweep mode");
  }
  for (const auto& m : methods)
    if (m != "montecarlo" && m != "reference" && m != "closed")
      throw ConfigError("methods", "unknown method '" + m + "'");
  if (methods.empty()) throw ConfigError("methods", "must be nonempty");
  if (antennas.empty()) throw ConfigError("antennas", "must be nonempty");
  try {
    quad.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("rel_tol", e.what());
  }
}

/// Apply one `key = value` assignment.
inline void apply_setting(ExperimentSpec& s, const std::string& key, const std::string& raw) {
  using namespace detail;
  const std::string v = trim(raw);
  auto num = [&] { return parse_double(key, v); };
  auto integer = [&] { return parse_integer(key, v); };
  static const std::map<std::string, int> known = {
      {"mode", 0}, {"R1", 1}, {"R2", 2}, {"N", 3}, {"T_in", 4}, {"BW", 5}, {"CR", 6}, {"L_pl", 7}, {"N_pre", 8},
      {"L_hd", 9}, {"L_crc", 10}, {"f_c", 11}, {"beta", 12}, {"P_t_dBm", 13}, {"NF_dB", 14}, {"sf_set", 15},
      {"W1", 16}, {"W2", 17}, {"ports_per_unit", 18}, {"sf", 19}, {"channel_mode", 20}, {"energy_fraction", 21},
      {"trials", 22}, {"seed", 23}, {"workers", 24}, {"fit_samples", 25}, {"sweep_variable", 26},
      {"sweep_values", 27}, {"methods", 28}, {"antennas", 29}, {"sensitivity_table", 30}, {"rel_tol", 31},
      {"abs_tol", 32}, {"max_subdivisions", 33}, {"tail_cutoff", 34}, {"gnuplot", 35}, {"output", 36},
      {"W", 37}, {"P_t", 13}, {"NF", 14}};
  const auto it = known.find(key);
  if (it == known.end()) throw ConfigError(key, "unknown key");
  switch (it->second) {
    case 0: s.mode = v; break;
    case 1: s.cfg.R1 = num(); break;
    case 2: s.cfg.R2 = num(); break;
    case 3: s.cfg.N = num(); break;
    case 4: s.cfg.T_in = num(); break;
    case 5: s.cfg.BW = num(); break;
    case 6: s.cfg.CR = static_cast<int>(integer()); break;
    case 7: s.cfg.L_pl = num(); break;
    case 8: s.cfg.N_pre = num(); break;
    case 9: s.cfg.L_hd = num(); break;
    case 10: s.cfg.L_crc = num(); break;
    case 11: s.cfg.f_c = num(); break;
    case 12: s.cfg.beta = num(); break;
    case 13: s.cfg.P_t_dBm = num(); break;
    case 14: s.cfg.NF_dB = num(); break;
    case 15: {
      s.cfg.sf_set.clear();
      for (const auto& t : split_list(v)) s.cfg.sf_set.push_back(static_cast<int>(parse_integer(key, t)));
      break;
    }
    case 16: s.W1 = num(); break;
    case 17: s.W2 = num(); break;
    case 18: s.ports_per_unit = num(); break;
    case 19: s.sf = static_cast<int>(integer()); break;
    case 20:
      try {
        s.channel_mode = parse_channel_mode(v);
      } catch (const std::invalid_argument&) {
        throw ConfigError(key, "expected exact|block, got '" + v + "'");
      }
      break;
    case 21: s.energy_fraction = num(); break;
    case 22: s.trials = integer(); break;
    case 23: {
      const auto n = integer();
      if (n < 0) throw ConfigError(key, "must be >= 0");
      s.seed = static_cast<std::uint64_t>(n);
      break;
    }
    case 24: s.workers = static_cast<int>(integer()); break;
    case 25: s.fit_samples = integer(); break;
    case 26: s.sweep_variable = v; break;
    case 27: {
      s.sweep_values.clear();
      for (const auto& t : split_list(v)) s.sweep_values.push_back(parse_double(key, t));
      break;
    }
    case 28: s.methods = split_list(v); break;
    case 29: {
      s.antennas.clear();
      for (const auto& t : split_list(v)) s.antennas.push_back(AntennaSpec::parse(t));
      break;
    }
    case 30: s.sensitivity_table = v; break;
    case 31: s.quad.rel_tol = num(); break;
    case 32: s.quad.abs_tol = num(); break;
    case 33: s.quad.max_subdivisions = static_cast<int>(integer()); break;
    case 34: s.quad.tail_cutoff_probability = num(); break;
    case 35: s.gnuplot = parse_bool(key, v); break;
    case 36: s.output_path = v; break;
    case 37: s.W1 = s.W2 = num(); break;
  }
}

/// Parse configuration text. Lines are `key = value`; `#` starts a comment.
/// Header lines written by write_header ("# key = value") are accepted when
/// `from_header` is set; lines starting with "# (" are informational.
inline ExperimentSpec parse_config(std::istream& in, bool from_header = false, ExperimentSpec base = {}) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (from_header) {
      const auto t = detail::trim(line);
      if (t.rfind("#", 0) != 0 || t.rfind("# (", 0) == 0) continue;
      line = t.substr(1);
    } else {
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
    }
    if (detail::trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (from_header) continue;
      throw ConfigError(detail::trim(line), "line " + std::to_string(lineno) + " is not `key = value`");
    }
    apply_setting(base, detail::trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  base.validate();
  return base;
}

inline ExperimentSpec load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  return parse_config(in);
}

/// `# key = value` lines for the resolved spec, followed by informational
/// `# (derived)` lines that parse_config skips.
inline void write_header(std::ostream& os, const ExperimentSpec& s) {
  for (const auto& [k, v] : s.to_pairs()) os << "# " << k << " = " << v << '\n';
  os << "# (derived) lambda_m = " << detail::format_double(s.cfg.wavelength()) << '\n';
  const auto g = s.geometry();
  os << "# (derived) ports = " << g.L1 << 'x' << g.L2 << '\n';
}

struct CoverageRow {
  int sf = 9;
  double N = 0.0;
  double R2 = 0.0;
  double W1 = 0.0, W2 = 0.0;
  std::string method;
  double p_cov = 0.0;
  double half_ci = 0.0;
  std::string antenna;
};

inline void write_coverage_csv_header(std::ostream& os) { os << "sf,N,R2,W1,W2,method,p_cov,half_ci,antenna\n"; }

inline void write_coverage_csv_row(std::ostream& os, const CoverageRow& r) {
  using detail::format_double;
  os << r.sf << ',' << format_double(r.N) << ',' << format_double(r.R2) << ',' << format_double(r.W1) << ','
     << format_double(r.W2) << ',' << r.method << ',' << format_double(r.p_cov) << ',' << format_double(r.half_ci)
     << ',' << r.antenna << '\n';
}

}  // namespace faslora
