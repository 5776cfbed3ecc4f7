#pragma once

// Fluid-antenna port correlation (Jakes model), exact correlated sampling,
// block-correlation model fitting and sampling, and best-port selection.
// Ports are indexed row-major and 1-based at every public interface:
// l = (l1 - 1) * L2 + l2.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <iomanip>
#include <limits>
#include <numbers>
#include <numeric>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "faslora/rng.hpp"
#include "faslora/specfun.hpp"

namespace faslora {

/// The channel description is inconsistent (non-PSD, trace mismatch, ...).
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FasGeometry {
  double W1 = 1.0;  // aperture, wavelengths
  double W2 = 1.0;
  int L1 = 12;
  int L2 = 12;

  int ports() const { return L1 * L2; }
  double aperture() const { return W1 * W2; }

  void validate() const {
    if (!(W1 > 0.0) || !(W2 > 0.0)) throw std::invalid_argument("FasGeometry: apertures must be > 0");
    if (L1 < 2 || L2 < 2) throw std::invalid_argument("FasGeometry: need at least 2 ports per dimension");
  }

  /// Geometry with a fixed number of ports per wavelength along each side.
  static FasGeometry with_port_density(double W1, double W2, double ports_per_unit) {
    FasGeometry g;
    g.W1 = W1;
    g.W2 = W2;
    g.L1 = std::max(2, static_cast<int>(std::lround(ports_per_unit * W1)));
    g.L2 = std::max(2, static_cast<int>(std::lround(ports_per_unit * W2)));
    return g;
  }
};

/// Unit-diagonal symmetric PSD port correlation matrix.
struct CorrelationMatrix {
  Eigen::MatrixXd sigma;

  int size() const { return static_cast<int>(sigma.rows()); }

  void validate(double eig_tol = -1e-8) const {
    const auto n = sigma.rows();
    if (n == 0 || sigma.cols() != n) throw ModelError("CorrelationMatrix: must be square and nonempty");
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::fabs(sigma(i, i) - 1.0) > 1e-12) throw ModelError("CorrelationMatrix: diagonal must be 1");
      for (Eigen::Index j = 0; j < i; ++j)
        if (sigma(i, j) != sigma(j, i)) throw ModelError("CorrelationMatrix: not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < eig_tol) throw ModelError("CorrelationMatrix: not positive semidefinite");
  }

  /// Eigenvalues in descending order.
  Eigen::VectorXd eigenvalues_desc() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma, Eigen::EigenvaluesOnly);
    Eigen::VectorXd ev = es.eigenvalues().reverse();
    return ev;
  }
};

inline CorrelationMatrix jakes_correlation(const FasGeometry& geom) {
  geom.validate();
  const int L = geom.ports();
  const double dx = geom.W1 / (geom.L1 - 1);
  const double dy = geom.W2 / (geom.L2 - 1);
  CorrelationMatrix out{Eigen::MatrixXd(L, L)};
  for (int a = 0; a < L; ++a) {
    const int a1 = a / geom.L2, a2 = a % geom.L2;
    out.sigma(a, a) = 1.0;
    for (int b = 0; b < a; ++b) {
      const int b1 = b / geom.L2, b2 = b % geom.L2;
      const double u = std::abs(a1 - b1) * dx;
      const double v = std::abs(a2 - b2) * dy;
      const double c = bessel_j0(2.0 * std::numbers::pi * std::sqrt(u * u + v * v));
      out.sigma(a, b) = c;
      out.sigma(b, a) = c;
    }
  }
  return out;
}

/// Factor F with F F^T = Sigma. Negative eigenvalues (numerical noise) are
/// clipped to zero and columns whose eigenvalue falls below
/// rank_cutoff * lambda_max are dropped, so F is L x r with r <= L.
struct SpectralRoot {
  Eigen::MatrixXd factor;

  int ports() const { return static_cast<int>(factor.rows()); }
  int rank() const { return static_cast<int>(factor.cols()); }
};

inline SpectralRoot spectral_root(const CorrelationMatrix& corr, double rank_cutoff = 1e-12,
                                  double eig_tol = -1e-8) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(corr.sigma);
  if (es.info() != Eigen::Success) throw ModelError("spectral_root: eigendecomposition failed");
  const Eigen::VectorXd& ev = es.eigenvalues();
  if (ev.minCoeff() < eig_tol) throw ModelError("spectral_root: correlation matrix is not positive semidefinite");
  const double lmax = ev.maxCoeff();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = ev.size() - 1; i >= 0; --i)
    if (ev(i) > rank_cutoff * lmax) keep.push_back(i);
  SpectralRoot root{Eigen::MatrixXd(corr.sigma.rows(), static_cast<Eigen::Index>(keep.size()))};
  for (std::size_t k = 0; k < keep.size(); ++k)
    root.factor.col(static_cast<Eigen::Index>(k)) = es.eigenvectors().col(keep[k]) * std::sqrt(ev(keep[k]));
  return root;
}

enum class ChannelMode { exact, block };

inline const char* to_string(ChannelMode m) { return m == ChannelMode::exact ? "exact" : "block"; }

inline ChannelMode parse_channel_mode(const std::string& s) {
  if (s == "exact") return ChannelMode::exact;
  if (s == "block") return ChannelMode::block;
  throw std::invalid_argument("channel_mode: expected exact|block, got '" + s + "'");
}

struct ChannelVector {
  std::vector<std::complex<double>> h;
  ChannelMode mode = ChannelMode::exact;
};

namespace detail {
inline constexpr double half_variance_scale = 0.70710678118654752440;  // sqrt(1/2)
}

/// One exact-model realization written into `out` (resized to L).
inline void exact_sample_into(const SpectralRoot& root, RandomStream& rng, std::vector<std::complex<double>>& out,
                              Eigen::VectorXd& gx, Eigen::VectorXd& gy) {
  const auto r = root.factor.cols();
  gx.resize(r);
  gy.resize(r);
  for (Eigen::Index i = 0; i < r; ++i) {
    gx(i) = rng.normal() * detail::half_variance_scale;
    gy(i) = rng.normal() * detail::half_variance_scale;
  }
  const Eigen::VectorXd re = root.factor * gx;
  const Eigen::VectorXd im = root.factor * gy;
  out.resize(static_cast<std::size_t>(re.size()));
  for (Eigen::Index i = 0; i < re.size(); ++i) out[static_cast<std::size_t>(i)] = {re(i), im(i)};
}

inline std::vector<ChannelVector> exact_sample(const SpectralRoot& root, std::size_t count, RandomStream& rng) {
  std::vector<ChannelVector> out(count);
  Eigen::VectorXd gx, gy;
  for (auto& cv : out) {
    exact_sample_into(root, rng, cv.h, gx, gy);
    cv.mode = ChannelMode::exact;
  }
  return out;
}

/// Max port envelope of `count` exact-model realizations, computed in
/// batches without materializing the channel vectors.
inline std::vector<double> exact_max_envelopes(const SpectralRoot& root, std::size_t count, RandomStream& rng,
                                               std::size_t batch = 2048) {
  std::vector<double> out;
  out.reserve(count);
  const auto r = root.factor.cols();
  Eigen::MatrixXd gx(r, static_cast<Eigen::Index>(batch)), gy(r, static_cast<Eigen::Index>(batch));
  while (out.size() < count) {
    const auto nb = static_cast<Eigen::Index>(std::min(batch, count - out.size()));
    for (Eigen::Index c = 0; c < nb; ++c)
      for (Eigen::Index i = 0; i < r; ++i) {
        gx(i, c) = rng.normal() * detail::half_variance_scale;
        gy(i, c) = rng.normal() * detail::half_variance_scale;
      }
    const Eigen::MatrixXd re = root.factor * gx.leftCols(nb);
    const Eigen::MatrixXd im = root.factor * gy.leftCols(nb);
    const Eigen::MatrixXd pw = re.array().square() + im.array().square();
    for (Eigen::Index c = 0; c < nb; ++c) out.push_back(std::sqrt(pw.col(c).maxCoeff()));
  }
  return out;
}

struct Block {
  double mu_sq = 0.0;
  int size = 2;
};

/// Block-diagonal approximation Blkdiag(A_1..A_A), A_a = Toeplitz(1, mu_a^2, ...).
struct BlockModel {
  std::vector<Block> blocks;

  int count() const { return static_cast<int>(blocks.size()); }
  int ports() const {
    int n = 0;
    for (const auto& b : blocks) n += b.size;
    return n;
  }

  void validate() const {
    if (blocks.empty()) throw ModelError("BlockModel: needs at least one block");
    for (const auto& b : blocks) {
      if (b.size < 1) throw ModelError("BlockModel: block size must be >= 1");
      if (!(b.mu_sq >= 0.0) || !(b.mu_sq < 1.0)) throw ModelError("BlockModel: mu^2 must be in [0, 1)");
    }
  }

  Eigen::MatrixXd implied_matrix() const {
    const int L = ports();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(L, L);
    int off = 0;
    for (const auto& b : blocks) {
      m.block(off, off, b.size, b.size).setConstant(b.mu_sq);
      for (int i = 0; i < b.size; ++i) m(off + i, off + i) = 1.0;
      off += b.size;
    }
    return m;
  }

  /// Text record: first line A, then one "L_a mu_a^2" line per block.
  std::string serialize() const {
    std::ostringstream os;
    os << std::setprecision(17) << blocks.size() << '\n';
    for (const auto& b : blocks) os << b.size << ' ' << b.mu_sq << '\n';
    return os.str();
  }

  static BlockModel parse(const std::string& text) {
    std::istringstream is(text);
    std::size_t n = 0;
    if (!(is >> n) || n == 0) throw ModelError("BlockModel: bad block count");
    BlockModel m;
    m.blocks.resize(n);
    for (auto& b : m.blocks)
      if (!(is >> b.size >> b.mu_sq)) throw ModelError("BlockModel: truncated record");
    m.validate();
    return m;
  }
};

/// Eigenvalue-energy block fit. A is the smallest number of leading
/// eigenvalues reaching `energy_fraction` of trace = L (capped at L/2 so
/// every block keeps two ports); block sizes follow the eigenvalues by
/// largest-remainder apportionment with L_a >= 2; mu_a^2 = (lambda_a - 1) /
/// (L_a - 1) clamped to [0, 1 - 1e-9]. Blocks come out by descending lambda.
inline BlockModel fit_block_model(const CorrelationMatrix& corr, double energy_fraction) {
  if (!(energy_fraction > 0.0) || !(energy_fraction <= 1.0))
    throw std::invalid_argument("fit_block_model: energy_fraction must be in (0, 1]");
  const int L = corr.size();
  if (L < 2) throw ModelError("fit_block_model: need at least 2 ports");
  const double trace = corr.sigma.trace();
  if (std::fabs(trace - L) > 1e-6 * L) throw ModelError("fit_block_model: trace does not equal port count");

  const Eigen::VectorXd lam = corr.eigenvalues_desc();
  int A = 0;
  double acc = 0.0;
  while (A < L) {
    acc += lam(A);
    ++A;
    if (acc >= energy_fraction * L * (1.0 - 1e-12)) break;
  }
  A = std::clamp(A, 1, L / 2);

  std::vector<double> lead(lam.data(), lam.data() + A);
  for (double& v : lead) v = std::max(v, 0.0);
  double lead_sum = std::accumulate(lead.begin(), lead.end(), 0.0);
  if (!(lead_sum > 0.0)) throw ModelError("fit_block_model: no positive eigenvalues");

  std::vector<double> quota(A);
  std::vector<int> sizes(A);
  for (int a = 0; a < A; ++a) {
    quota[a] = lead[a] / lead_sum * L;
    sizes[a] = std::max(2, static_cast<int>(std::floor(quota[a])));
  }
  int total = std::accumulate(sizes.begin(), sizes.end(), 0);
  while (total < L) {
    int best = 0;
    for (int a = 1; a < A; ++a)
      if (quota[a] - sizes[a] > quota[best] - sizes[best]) best = a;
    ++sizes[best];
    ++total;
  }
  while (total > L) {
    int best = -1;
    for (int a = 0; a < A; ++a)
      if (sizes[a] > 2 && (best < 0 || quota[a] - sizes[a] < quota[best] - sizes[best])) best = a;
    if (best < 0) throw ModelError("fit_block_model: cannot apportion ports");
    --sizes[best];
    --total;
  }

  BlockModel model;
  model.blocks.reserve(A);
  for (int a = 0; a < A; ++a) {
    const double mu_sq = std::clamp((lead[a] - 1.0) / (sizes[a] - 1.0), 0.0, 1.0 - 1e-9);
    model.blocks.push_back({mu_sq, sizes[a]});
  }
  return model;
}

/// One block-model realization written into `out` (resized to L).
inline void block_sample_into(const BlockModel& model, RandomStream& rng, std::vector<std::complex<double>>& out) {
  out.resize(static_cast<std::size_t>(model.ports()));
  std::size_t k = 0;
  for (const auto& b : model.blocks) {
    const double mu = std::sqrt(b.mu_sq);
    const double own = std::sqrt(1.0 - b.mu_sq);
    const double x0 = rng.normal() * detail::half_variance_scale;
    const double y0 = rng.normal() * detail::half_variance_scale;
    for (int i = 0; i < b.size; ++i) {
      const double x = rng.normal() * detail::half_variance_scale;
      const double y = rng.normal() * detail::half_variance_scale;
      out[k++] = {own * x + mu * x0, own * y + mu * y0};
    }
  }
}

inline std::vector<ChannelVector> block_sample(const BlockModel& model, std::size_t count, RandomStream& rng) {
  model.validate();
  std::vector<ChannelVector> out(count);
  for (auto& cv : out) {
    block_sample_into(model, rng, cv.h);
    cv.mode = ChannelMode::block;
  }
  return out;
}

inline std::vector<double> block_max_envelopes(const BlockModel& model, std::size_t count, RandomStream& rng) {
  model.validate();
  std::vector<double> out;
  out.reserve(count);
  std::vector<std::complex<double>> h;
  for (std::size_t i = 0; i < count; ++i) {
    block_sample_into(model, rng, h);
    double best = 0.0;
    for (const auto& v : h) best = std::max(best, std::norm(v));
    out.push_back(std::sqrt(best));
  }
  return out;
}

struct PortSelection {
  int index = 0;  // 1-based
  double gain = 0.0;  // |h| at the selected port
};

/// Port with the largest envelope; ties go to the lowest index.
inline PortSelection select_port(std::span<const std::complex<double>> h) {
  if (h.empty()) throw std::invalid_argument("select_port: empty channel vector");
  std::size_t best = 0;
  double best_env = std::abs(h[0]);
  for (std::size_t i = 1; i < h.size(); ++i) {
    const double env = std::abs(h[i]);
    if (env > best_env) {
      best_env = env;
      best = i;
    }
  }
  return {static_cast<int>(best) + 1, best_env};
}

inline PortSelection select_port(const ChannelVector& cv) { return select_port(std::span<const std::complex<double>>(cv.h)); }

}  // namespace faslora
