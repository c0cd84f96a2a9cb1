#include "mkvldp/noise.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "mkvldp/errors.hpp"
#include "mkvldp/frac_ops.hpp"
#include "mkvldp/quadrature.hpp"

namespace mkvldp {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

void philox_round(std::uint32_t c[4], const std::uint32_t k[2]) {
  const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c[0];
  const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c[2];
  const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
  const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
  const std::uint32_t out[4] = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  std::copy(out, out + 4, c);
}

// fractional Gaussian noise autocovariance at lag m for unit step
double fgn_cov(double m, double hurst) {
  const double a = 2.0 * hurst;
  if (m == 0.0) return 1.0;
  return 0.5 * (std::pow(m + 1.0, a) + std::pow(m - 1.0, a) - 2.0 * std::pow(m, a));
}

// cells near the origin where the midpoint rule misses the s^{-2 beta} mass
constexpr std::size_t kRmsCells = 32;

// int_a^b K_H(t, s)^2 ds for 0 <= a < b <= t
double cell_square_integral(double t, double a, double b, double beta, double ch) {
  auto sq = [&](double s) {
    const double phi = kernel_primitive(t, s, beta, beta);
    return ch * ch * std::pow(s, -2.0 * beta) * phi * phi;
  };
  if (a == 0.0) {
    const double expo = 1.0 / (1.0 - 2.0 * beta);
    auto sub = [&](double z) {
      const double s = b * std::pow(z, expo);
      const double phi = kernel_primitive(t, s, beta, beta);
      return std::pow(b, 1.0 - 2.0 * beta) * expo * ch * ch * phi * phi;
    };
    return gauss_graded_left(sub, 0.0, 0.5, 30, 12) +
           gauss_graded_left([&](double v) { return sub(1.0 - v); }, 0.0, 0.5, 30, 12);
  }
  if (b >= t) return gauss_graded_left([&](double v) { return sq(b - v); }, 0.0, b - a, 30, 12);
  return gauss_panel(sq, a, b, 16);
}

}  // namespace

RandomStream::RandomStream(const SeedSpec& seed) {
  key_[0] = static_cast<std::uint32_t>(seed.master_seed);
  key_[1] = static_cast<std::uint32_t>(seed.master_seed >> 32);
  ctr_[0] = 0;
  ctr_[1] = static_cast<std::uint32_t>(seed.channel);
  ctr_[2] = seed.particle;
  ctr_[3] = seed.replicate;
}

void RandomStream::refill() {
  std::uint32_t c[4] = {ctr_[0], ctr_[1], ctr_[2], ctr_[3]};
  std::uint32_t k[2] = {key_[0], key_[1]};
  for (int r = 0; r < 10; ++r) {
    if (r > 0) {
      k[0] += kWeyl0;
      k[1] += kWeyl1;
    }
    philox_round(c, k);
  }
  std::copy(c, c + 4, block_);
  ++ctr_[0];
  used_ = 0;
}

double RandomStream::uniform() {
  if (used_ > 2) refill();
  const std::uint64_t a = block_[used_] >> 5;
  const std::uint64_t b = block_[used_ + 1] >> 6;
  used_ += 2;
  const double bits = static_cast<double>((a << 26) | b);
  return (bits + 0.5) * 0x1.0p-53;
}

double RandomStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

void RandomStream::fill_normal(std::span<double> out) {
  for (double& v : out) v = normal();
}

std::vector<double> sample_bm(const TimeGrid& grid, std::size_t dim, const SeedSpec& seed) {
  if (dim == 0) throw DomainError("sample_bm needs dim >= 1");
  RandomStream rng(seed);
  std::vector<double> out(grid.steps() * dim);
  const double sd = std::sqrt(grid.step());
  for (double& v : out) v = sd * rng.normal();
  return out;
}

std::vector<double> cumulate(std::span<const double> increments, std::size_t dim) {
  if (dim == 0 || increments.size() % dim != 0) throw DomainError("cumulate: bad dimension");
  const std::size_t steps = increments.size() / dim;
  std::vector<double> out((steps + 1) * dim, 0.0);
  for (std::size_t k = 0; k < steps; ++k) {
    for (std::size_t c = 0; c < dim; ++c) out[(k + 1) * dim + c] = out[k * dim + c] + increments[k * dim + c];
  }
  return out;
}

ExactFbmSampler::ExactFbmSampler(const TimeGrid& grid, const HurstParam& hurst)
    : grid_(grid), hurst_(hurst.value()) {
  const std::size_t n = grid.steps();
  std::size_t m = 1;
  while (m < n) m <<= 1;
  size_ = 2 * m;
  std::vector<std::complex<double>> row(size_), eig;
  for (std::size_t j = 0; j <= m; ++j) row[j] = fgn_cov(static_cast<double>(j), hurst.value());
  for (std::size_t j = m + 1; j < size_; ++j) row[j] = row[size_ - j];
  Eigen::FFT<double> fft;
  fft.fwd(eig, row);
  double lmax = 0.0, lmin = 0.0;
  for (const auto& z : eig) {
    lmax = std::max(lmax, z.real());
    lmin = std::min(lmin, z.real());
  }
  if (lmin >= -1e-10 * lmax) {
    sqrt_eig_.resize(size_);
    for (std::size_t j = 0; j < size_; ++j) {
      sqrt_eig_[j] = std::sqrt(std::max(0.0, eig[j].real()) / static_cast<double>(size_));
    }
    return;
  }
  if (n > 1024) {
    throw GenerationError("circulant embedding has eigenvalue " + std::to_string(lmin) +
                          " and steps = " + std::to_string(n) + " exceeds the Cholesky limit 1024");
  }
  Eigen::MatrixXd cov(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) cov(i, j) = fgn_cov(std::abs(double(i) - double(j)), hurst.value());
  }
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw GenerationError("circulant embedding and Cholesky factorization both failed (min eigenvalue " +
                          std::to_string(lmin) + ")");
  }
  Eigen::MatrixXd low = llt.matrixL();
  chol_.resize(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) chol_[i * n + j] = low(i, j);
  }
}

void ExactFbmSampler::sample(RandomStream& rng, std::span<double> out) const {
  const std::size_t n = grid_.steps();
  if (out.size() != n + 1) throw DomainError("ExactFbmSampler::sample: output size mismatch");
  std::vector<double> incr(n);
  if (chol_.empty()) {
    std::vector<std::complex<double>> z(size_), y;
    for (std::size_t j = 0; j < size_; ++j) {
      const double a = rng.normal();
      const double b = rng.normal();
      z[j] = sqrt_eig_[j] * std::complex<double>(a, b);
    }
    Eigen::FFT<double> fft;
    fft.SetFlag(Eigen::FFT<double>::Unscaled);
    fft.inv(y, z);
    for (std::size_t k = 0; k < n; ++k) incr[k] = y[k].real();
  } else {
    std::vector<double> xi(n);
    rng.fill_normal(xi);
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j <= i; ++j) s += chol_[i * n + j] * xi[j];
      incr[i] = s;
    }
  }
  out[0] = 0.0;
  for (std::size_t k = 0; k < n; ++k) out[k + 1] = out[k] + incr[k];
  // covariance above was built for a unit step; self-similarity restores the grid step
  const double hs = std::pow(grid_.step(), hurst_);
  for (double& v : out) v *= hs;
}

VolterraFbmSampler::VolterraFbmSampler(const TimeGrid& grid, const HurstParam& hurst,
                                       std::vector<std::size_t> output_nodes)
    : grid_(grid), nodes_(std::move(output_nodes)) {
  hurst.require_above_half("VolterraFbmSampler");
  const std::size_t n = grid.steps();
  if (nodes_.empty()) {
    nodes_.resize(n + 1);
    for (std::size_t k = 0; k <= n; ++k) nodes_[k] = k;
  }
  const double h = grid.step();
  const double beta = hurst.beta();
  const double ch = kh_constant(hurst);
  weights_.resize(nodes_.size());
  for (std::size_t idx = 0; idx < nodes_.size(); ++idx) {
    const std::size_t k = nodes_[idx];
    if (k > n) throw DomainError("VolterraFbmSampler: output node beyond the grid");
    auto& w = weights_[idx];
    w.resize(k);
    if (k == 0) continue;
    const double t = grid.node(k);
    for (std::size_t j = 0; j < k; ++j) {
      const double a = static_cast<double>(j) * h;
      if (j < kRmsCells || j + 1 == k) {
        w[j] = std::sqrt(cell_square_integral(t, a, a + h, beta, ch) / h);
      } else {
        w[j] = kernel_kh(t, a + 0.5 * h, hurst);
      }
    }
  }
}

void VolterraFbmSampler::from_increments(std::span<const double> dw, std::span<double> out) const {
  if (dw.size() != grid_.steps() || out.size() != nodes_.size()) {
    throw DomainError("VolterraFbmSampler: size mismatch");
  }
  for (std::size_t idx = 0; idx < nodes_.size(); ++idx) {
    const auto& w = weights_[idx];
    double s = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * dw[j];
    out[idx] = s;
  }
}

void VolterraFbmSampler::sample(RandomStream& rng, std::span<double> out) const {
  std::vector<double> dw(grid_.steps());
  const double sd = std::sqrt(grid_.step());
  for (double& v : dw) v = sd * rng.normal();
  from_increments(dw, out);
}

std::vector<double> sample_fbm_exact(const TimeGrid& grid, const HurstParam& hurst, std::size_t dim,
                                     const SeedSpec& seed) {
  if (dim == 0) throw DomainError("sample_fbm_exact needs dim >= 1");
  const ExactFbmSampler sampler(grid, hurst);
  RandomStream rng(seed);
  const std::size_t nodes = grid.nodes();
  std::vector<double> path(nodes), out(nodes * dim);
  for (std::size_t c = 0; c < dim; ++c) {
    sampler.sample(rng, path);
    for (std::size_t k = 0; k < nodes; ++k) out[k * dim + c] = path[k];
  }
  return out;
}

std::vector<double> sample_fbm_volterra(const TimeGrid& grid, const HurstParam& hurst,
                                        std::size_t dim, const SeedSpec& seed) {
  if (dim == 0) throw DomainError("sample_fbm_volterra needs dim >= 1");
  const VolterraFbmSampler sampler(grid, hurst);
  RandomStream rng(seed);
  const std::size_t nodes = grid.nodes();
  std::vector<double> path(nodes), out(nodes * dim);
  for (std::size_t c = 0; c < dim; ++c) {
    sampler.sample(rng, path);
    for (std::size_t k = 0; k < nodes; ++k) out[k * dim + c] = path[k];
  }
  return out;
}

DrivingPaths sample_driving_paths(const TimeGrid& grid, std::size_t d1, std::size_t d2,
                                  const ExactFbmSampler* fbm, const SeedSpec& seed) {
  DrivingPaths p;
  p.d1 = d1;
  p.d2 = d2;
  if (d1 > 0) p.w1 = sample_bm(grid, d1, seed.with_channel(Channel::W1));
  if (d2 > 0) p.w2 = sample_bm(grid, d2, seed.with_channel(Channel::W2));
  if (d1 > 0 && fbm != nullptr) {
    RandomStream rng(seed.with_channel(Channel::Fbm));
    const std::size_t nodes = grid.nodes();
    std::vector<double> path(nodes);
    p.bh.assign(nodes * d1, 0.0);
    for (std::size_t c = 0; c < d1; ++c) {
      fbm->sample(rng, path);
      for (std::size_t k = 0; k < nodes; ++k) p.bh[k * d1 + c] = path[k];
    }
  }
  return p;
}

}  // namespace mkvldp
