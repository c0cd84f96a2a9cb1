#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mkvldp/grid.hpp"

namespace mkvldp {

/// Independent noise sources; each gets its own counter space.
enum class Channel : std::uint32_t {
  W1 = 1,         ///< Brownian driver of the slow/fast equations
  W2 = 2,         ///< Brownian driver of the fast equation only
  Fbm = 3,        ///< fractional Brownian driver
  FrozenW1 = 4,   ///< drivers of the frozen fast equation
  FrozenW2 = 5,
  Invariant = 6,  ///< invariant-measure estimation
  Projection = 7, ///< sliced Wasserstein directions
  Probe = 8,      ///< random probes in verification checks
  Optimizer = 9,  ///< perturbed restarts
};

/// Identifies one reproducible random stream.
struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint32_t replicate = 0;
  std::uint32_t particle = 0;
  Channel channel = Channel::W1;

  SeedSpec with_channel(Channel c) const { return {master_seed, replicate, particle, c}; }
  SeedSpec with_particle(std::uint32_t p) const { return {master_seed, replicate, p, channel}; }
  SeedSpec with_replicate(std::uint32_t r) const { return {master_seed, r, particle, channel}; }
};

/// Counter-based stream (Philox4x32-10). The key is the master seed and the
/// counter is (block, channel, particle, replicate), so any stream can be
/// produced on any thread without shared state.
class RandomStream {
 public:
  explicit RandomStream(const SeedSpec& seed);

  /// Uniform in (0, 1) with 53 random bits.
  double uniform();
  /// Standard normal (Box-Muller).
  double normal();
  void fill_normal(std::span<double> out);

 private:
  void refill();

  std::uint32_t key_[2];
  std::uint32_t ctr_[4];
  std::uint32_t block_[4];
  int used_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Brownian increments, steps x dim (cell-major), each N(0, step).
std::vector<double> sample_bm(const TimeGrid& grid, std::size_t dim, const SeedSpec& seed);

/// Running sums of cell increments, (steps + 1) x dim, starting at zero.
std::vector<double> cumulate(std::span<const double> increments, std::size_t dim);

/// Exact fBm node values by circulant embedding of fractional Gaussian noise.
/// Falls back to a Cholesky factor of the increment covariance when the
/// embedding has a negative eigenvalue and steps <= 1024.
class ExactFbmSampler {
 public:
  ExactFbmSampler(const TimeGrid& grid, const HurstParam& hurst);

  const TimeGrid& grid() const noexcept { return grid_; }
  bool uses_cholesky() const noexcept { return !chol_.empty(); }

  /// Writes steps + 1 node values, out[0] = 0.
  void sample(RandomStream& rng, std::span<double> out) const;

 private:
  TimeGrid grid_;
  double hurst_;
  std::size_t size_ = 0;          // circulant size 2M
  std::vector<double> sqrt_eig_;  // sqrt(lambda / 2M)
  std::vector<double> chol_;      // lower factor, row-major, when used
};

/// Approximate fBm through the Volterra representation B_t = sum_k K_H(t, m_k) dW_k
/// with midpoints m_k. The first cell uses the root-mean-square kernel value
/// over the cell, which keeps the variance right near the singular end.
class VolterraFbmSampler {
 public:
  /// output_nodes empty means every node 0..steps.
  VolterraFbmSampler(const TimeGrid& grid, const HurstParam& hurst,
                     std::vector<std::size_t> output_nodes = {});

  const std::vector<std::size_t>& output_nodes() const noexcept { return nodes_; }

  /// Draws steps Brownian increments from rng and writes one value per output node.
  void sample(RandomStream& rng, std::span<double> out) const;
  /// Same map applied to given Brownian increments.
  void from_increments(std::span<const double> dw, std::span<double> out) const;

 private:
  TimeGrid grid_;
  std::vector<std::size_t> nodes_;
  std::vector<std::vector<double>> weights_;  // per output node, one per cell before it
};

/// fBm node values, (steps + 1) x dim, components independent.
std::vector<double> sample_fbm_exact(const TimeGrid& grid, const HurstParam& hurst, std::size_t dim,
                                     const SeedSpec& seed);
std::vector<double> sample_fbm_volterra(const TimeGrid& grid, const HurstParam& hurst,
                                        std::size_t dim, const SeedSpec& seed);

/// Noise for one particle: Brownian increments w1 (steps x d1), w2 (steps x d2)
/// and fBm node values bh ((steps + 1) x d1), from three separate channels.
struct DrivingPaths {
  std::size_t d1 = 0;
  std::size_t d2 = 0;
  std::vector<double> w1;
  std::vector<double> w2;
  std::vector<double> bh;
};

DrivingPaths sample_driving_paths(const TimeGrid& grid, std::size_t d1, std::size_t d2,
                                  const ExactFbmSampler* fbm, const SeedSpec& seed);

}  // namespace mkvldp
