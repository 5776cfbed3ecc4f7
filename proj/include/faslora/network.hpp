#pragma once

// LoRaWAN deployment and PHY bookkeeping: SF allocation, airtime, duty cycle,
// active-device counts, pathloss, noise floor and the SX1272 rejection table.
// Powers are linear milliwatts throughout; dB appears only at the edges.

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace faslora {

inline constexpr int min_sf = 7;
inline constexpr int max_sf = 12;
inline constexpr int sf_count = max_sf - min_sf + 1;
inline constexpr double speed_of_light = 3e8;

/// Per-SF values indexed by m - 7.
using SfArray = std::array<double, sf_count>;

inline double db_to_lin(double db) { return std::pow(10.0, db / 10.0); }
inline double lin_to_db(double lin) { return 10.0 * std::log10(lin); }

inline void require_sf(int m, const char* who) {
  if (m < min_sf || m > max_sf) throw std::invalid_argument(std::string(who) + ": SF must be in 7..12");
}

struct NetworkConfig {
  double R1 = 300.0;            // m
  double R2 = 3000.0;           // m
  double N = 5000.0;            // end devices
  double T_in = 400.0;          // s, mean packet inter-arrival
  double BW = 125e3;            // Hz
  int CR = 1;                   // coding rate index, 4/(4+CR)
  double L_pl = 20.0;           // payload bytes
  double N_pre = 8.0;           // preamble symbols
  double L_hd = 20.0;           // header bits
  double L_crc = 16.0;          // CRC bits
  double f_c = 915e6;           // Hz
  double beta = 2.7;            // pathloss exponent
  double P_t_dBm = 10.0;
  double NF_dB = 6.0;
  std::vector<int> sf_set = {7, 8, 9, 10, 11, 12};

  void validate() const {
    if (!(R1 > 0.0)) throw std::invalid_argument("R1: must be > 0");
    if (!(R1 < R2)) throw std::invalid_argument("R1: must be < R2");
    if (!(N >= 0.0)) throw std::invalid_argument("N: must be >= 0");
    if (!(T_in > 0.0)) throw std::invalid_argument("T_in: must be > 0");
    if (!(BW > 0.0)) throw std::invalid_argument("BW: must be > 0");
    if (CR < 1 || CR > 4) throw std::invalid_argument("CR: must be in 1..4");
    if (!(L_pl >= 0.0)) throw std::invalid_argument("L_pl: must be >= 0");
    if (!(N_pre >= 0.0)) throw std::invalid_argument("N_pre: must be >= 0");
    if (!(f_c > 0.0)) throw std::invalid_argument("f_c: must be > 0");
    if (!(beta >= 2.0)) throw std::invalid_argument("beta: must be >= 2");
    if (!std::isfinite(P_t_dBm)) throw std::invalid_argument("P_t_dBm: must be finite");
    if (!std::isfinite(NF_dB)) throw std::invalid_argument("NF_dB: must be finite");
    if (sf_set.empty()) throw std::invalid_argument("sf_set: must be nonempty");
    for (int m : sf_set)
      if (m < min_sf || m > max_sf) throw std::invalid_argument("sf_set: SF must be in 7..12");
  }

  double wavelength() const { return speed_of_light / f_c; }
  bool uses_sf(int m) const { return std::find(sf_set.begin(), sf_set.end(), m) != sf_set.end(); }
};

/// Fair-collision allocation: p(m) proportional to m / 2^m over sf_set.
inline SfArray sf_allocation_probs(const std::vector<int>& sf_set) {
  if (sf_set.empty()) throw std::invalid_argument("sf_allocation_probs: empty SF set");
  SfArray p{};
  double total = 0.0;
  for (int m : sf_set) {
    require_sf(m, "sf_allocation_probs");
    p[m - min_sf] = m / std::ldexp(1.0, m);
  }
  for (double v : p) total += v;
  for (double& v : p) v /= total;
  return p;
}

/// Packet length L_pac in bits (symbol count times m).
inline double airtime_bits(int m, const NetworkConfig& cfg) {
  require_sf(m, "airtime_bits");
  const double arg = (8.0 * cfg.L_pl - 4.0 * m + 28.0 + cfg.L_crc - cfg.L_hd) / (4.0 * m);
  const double payload_symbols = std::max(std::ceil(arg), 0.0);
  return m * ((cfg.N_pre + 4.25) + 8.0 + (4.0 + cfg.CR) * payload_symbols);
}

/// Bit rate G(m) = m BW / 2^m * 4 / (4 + CR).
inline double bitrate(int m, const NetworkConfig& cfg) {
  require_sf(m, "bitrate");
  return m * cfg.BW / std::ldexp(1.0, m) * 4.0 / (4.0 + cfg.CR);
}

inline double airtime_seconds(int m, const NetworkConfig& cfg) { return airtime_bits(m, cfg) / bitrate(m, cfg); }

inline double duty_cycle(int m, const NetworkConfig& cfg) {
  return airtime_bits(m, cfg) / (cfg.T_in * bitrate(m, cfg));
}

/// Mean number of simultaneously active devices on SF m; zero when m is not
/// part of the configured SF set.
inline double mean_active(int m, const NetworkConfig& cfg) {
  require_sf(m, "mean_active");
  if (!cfg.uses_sf(m)) return 0.0;
  const auto p = sf_allocation_probs(cfg.sf_set);
  return duty_cycle(m, cfg) * p[m - min_sf] * cfg.N;
}

inline double pathloss_constant(const NetworkConfig& cfg) {
  return std::pow(4.0 * std::numbers::pi * cfg.f_c / speed_of_light, cfg.beta);
}

inline double pathloss(double r, const NetworkConfig& cfg) {
  if (!(r > 0.0)) throw std::domain_error("pathloss: distance must be > 0");
  return pathloss_constant(cfg) * std::pow(r, cfg.beta);
}

/// P_t / K0 in mW.
inline double reduced_tx_power(const NetworkConfig& cfg) { return db_to_lin(cfg.P_t_dBm) / pathloss_constant(cfg); }

inline double noise_power_dbm(const NetworkConfig& cfg) {
  if (!(cfg.BW > 0.0)) throw std::domain_error("noise_power: bandwidth must be > 0");
  return -174.0 + cfg.NF_dB + 10.0 * std::log10(cfg.BW);
}

inline double noise_power_lin(const NetworkConfig& cfg) { return db_to_lin(noise_power_dbm(cfg)); }

inline double qos_threshold_db(int m) {
  require_sf(m, "qos_threshold");
  return -7.5 - 2.5 * (m - 7);
}

inline double qos_threshold_lin(int m) { return db_to_lin(qos_threshold_db(m)); }

/// SIR rejection thresholds. Row = interferer SF, column = desired SF.
class SensitivityTable {
 public:
  using Grid = std::array<std::array<double, sf_count>, sf_count>;

  SensitivityTable() : db_(sx1272_db()) {}
  explicit SensitivityTable(const Grid& db) : db_(db) {}

  static Grid sx1272_db() {
    return {{{1, -8, -9, -9, -9, -9},
             {-11, 1, -11, -12, -13, -13},
             {-15, -13, 1, -13, -14, -15},
             {-19, -18, -17, 1, -17, -18},
             {-22, -22, -21, -20, 1, -20},
             {-25, -25, -25, -24, -23, 1}}};
  }

  /// Threshold for desired SF m against interferer SF m_int, in dB.
  double db(int m, int m_int) const {
    require_sf(m, "SensitivityTable");
    require_sf(m_int, "SensitivityTable");
    return db_[m_int - min_sf][m - min_sf];
  }
  double lin(int m, int m_int) const { return db_to_lin(db(m, m_int)); }

  const Grid& grid_db() const { return db_; }

  /// Parse a 6x6 comma-separated dB grid (row = interferer 7..12,
  /// column = desired 7..12). Blank lines and '#' comments are skipped.
  static SensitivityTable parse_csv(std::istream& in) {
    Grid g{};
    std::string line;
    int row = 0;
    while (std::getline(in, line)) {
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      if (row >= sf_count) throw std::invalid_argument("sensitivity table: more than 6 rows");
      std::stringstream ss(line);
      std::string cell;
      int col = 0;
      while (std::getline(ss, cell, ',')) {
        if (col >= sf_count) throw std::invalid_argument("sensitivity table: more than 6 columns");
        std::size_t used = 0;
        try {
          g[row][col] = std::stod(cell, &used);
        } catch (const std::exception&) {
          throw std::invalid_argument("sensitivity table: unparsable cell '" + cell + "'");
        }
        ++col;
      }
      if (col != sf_count) throw std::invalid_argument("sensitivity table: row with wrong column count");
      ++row;
    }
    if (row != sf_count) throw std::invalid_argument("sensitivity table: expected 6 rows");
    return SensitivityTable(g);
  }

  static SensitivityTable load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("sensitivity table: cannot open " + path);
    return parse_csv(in);
  }

 private:
  Grid db_;
};

/// Embedded SX1272 table lookup (linear).
inline double sensitivity_lin(int m, int m_int) {
  static const SensitivityTable table;
  return table.lin(m, m_int);
}

struct SfProfile {
  int m = 7;
  double p = 0.0;
  double rho = 0.0;
  double airtime_bits = 0.0;
  double bitrate = 0.0;
  double mean_active = 0.0;
  double qos_threshold_lin = 0.0;
};

inline SfProfile make_sf_profile(int m, const NetworkConfig& cfg) {
  require_sf(m, "make_sf_profile");
  SfProfile s;
  s.m = m;
  s.p = cfg.uses_sf(m) ? sf_allocation_probs(cfg.sf_set)[m - min_sf] : 0.0;
  s.rho = duty_cycle(m, cfg);
  s.airtime_bits = faslora::airtime_bits(m, cfg);
  s.bitrate = faslora::bitrate(m, cfg);
  s.mean_active = faslora::mean_active(m, cfg);
  s.qos_threshold_lin = faslora::qos_threshold_lin(m);
  return s;
}

}  // namespace faslora
