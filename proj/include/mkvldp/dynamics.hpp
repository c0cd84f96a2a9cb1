#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "mkvldp/coefficients.hpp"
#include "mkvldp/controls.hpp"
#include "mkvldp/grid.hpp"
#include "mkvldp/measure.hpp"
#include "mkvldp/noise.hpp"
#include "mkvldp/parallel.hpp"

namespace mkvldp {

/// Noise intensity epsilon (slow noise scaled by sqrt(epsilon) and
/// epsilon^H), time-scale separation varepsilon, and the block size delta of
/// the auxiliary process.
struct ScaleParams {
  double epsilon = 1.0;
  double varepsilon = 1.0;
  /// Block size; 0 means epsilon^{2/3} rounded down to a multiple of the step.
  double delta = 0.0;
  /// false: unscaled system (noise factors 1 regardless of epsilon).
  bool small_noise = true;

  void validate() const;
  double resolved_delta(const TimeGrid& grid) const;
  /// Default coupling varepsilon = epsilon^2, delta = epsilon^{2/3}.
  static ScaleParams coupled(double epsilon);
};

/// Run options shared by the particle solvers.
struct SimOptions {
  WorkerPool* pool = nullptr;
  /// Test mode: all driving noise set to zero.
  bool noise = true;
  /// Largest accepted step / varepsilon.
  double max_stiffness = 10.0;
};

/// Particle trajectories, stored step-major: value (k, p, c) at (k * N + p) * d + c.
struct EnsemblePath {
  EnsemblePath(TimeGrid grid, std::size_t particles, std::size_t dim);

  TimeGrid grid;
  std::size_t particles;
  std::size_t dim;
  ScaleParams scales;
  SeedSpec seed;
  std::vector<double> slow;
  std::vector<double> fast;  ///< empty for slow-only runs

  std::span<const double> x(std::size_t k, std::size_t p) const;
  std::span<const double> y(std::size_t k, std::size_t p) const;
  std::span<double> x(std::size_t k, std::size_t p);
  std::span<double> y(std::size_t k, std::size_t p);
  /// Empirical law of the slow component at node k.
  EmpiricalMeasure law(std::size_t k) const;
  /// Sample mean of |X_k|^p (or |Y_k|^p).
  double slow_moment(std::size_t k, double p) const;
  double fast_moment(std::size_t k, double p) const;
};

/// Euler-Maruyama particle solver for the slow-fast system. The fast equation
/// is stepped linearly implicitly (one Newton step of backward Euler with a
/// finite-difference Jacobian of b). The law at each step is the empirical
/// measure of the previous step.
EnsemblePath simulate_slow_fast(const CoefficientSet& coeffs, const TimeGrid& grid,
                                const ScaleParams& scales, std::size_t n_particles,
                                std::span<const double> x0, std::span<const double> y0,
                                const SeedSpec& seed, const SimOptions& opts = {});

/// Controlled system: adds g1 P1 hdot dt + l d(R_H hbar) to the slow equation and
/// (sigma1 P1 hdot + sigma2 P2 hdot) / sqrt(epsilon varepsilon) dt to the fast
/// one. The measure argument is replayed from the uncontrolled run `frozen_law`.
EnsemblePath simulate_controlled(const CoefficientSet& coeffs, const TimeGrid& grid,
                                 const ScaleParams& scales, const ControlPair& controls,
                                 std::size_t n_particles, std::span<const double> x0,
                                 std::span<const double> y0, const SeedSpec& seed,
                                 const EnsemblePath& frozen_law, const SimOptions& opts = {});

/// Fast equation with (x, mu) frozen and unit time scale; one trajectory,
/// (steps + 1) x d. Uses the FrozenW1 / FrozenW2 channels of `seed`.
std::vector<double> simulate_frozen_fast(const CoefficientSet& coeffs, std::span<const double> x,
                                         const EmpiricalMeasure& mu, std::span<const double> y0,
                                         const TimeGrid& grid, const SeedSpec& seed,
                                         const SimOptions& opts = {});

struct InvariantOptions {
  TimeGrid grid{20.0, 400};      ///< horizon and step of each chain
  double burn_in_fraction = 0.5;
  std::size_t n_samples = 1000;
  std::size_t chains = 16;
};

/// Thinned post-burn-in states of `chains` frozen fast chains started at 0.
/// Chain c uses particle index c of `seed`, so the same seed gives common
/// random numbers across different (x, mu).
EmpiricalMeasure estimate_invariant_measure(const CoefficientSet& coeffs, std::span<const double> x,
                                            const EmpiricalMeasure& mu,
                                            const InvariantOptions& opts, const SeedSpec& seed,
                                            const SimOptions& sim = {});

/// Monte Carlo average of f1(x, mu, .) over nu.
std::vector<double> averaged_drift(const CoefficientSet& coeffs, std::span<const double> x,
                                   const EmpiricalMeasure& mu, const EmpiricalMeasure& nu);

/// Source of f-bar: the closed form when the model has one, otherwise an
/// invariant-measure estimate with common random numbers.
class AveragedDrift {
 public:
  enum class Mode { Auto, Analytic, Estimated };

  AveragedDrift(const CoefficientSet& coeffs, Mode mode = Mode::Auto, InvariantOptions inv = {},
                std::uint64_t seed = 0);

  bool analytic() const noexcept { return analytic_; }
  const CoefficientSet& coefficients() const noexcept { return *coeffs_; }

  void operator()(std::span<const double> x, const EmpiricalMeasure& mu, std::span<double> out) const;
  /// Invariant measure estimate at (x, mu) (throws for analytic mode).
  EmpiricalMeasure invariant(std::span<const double> x, const EmpiricalMeasure& mu) const;

 private:
  std::shared_ptr<const CoefficientSet> coeffs_;  // owned copy, so temporaries are safe
  bool analytic_;
  InvariantOptions inv_;
  std::uint64_t seed_;
};

/// Particle system for the averaged equation dX = f-bar dt + g1 dW1 + l dB^H.
/// Without a closed form, each step estimates one invariant measure at the
/// ensemble barycenter and averages f1(X_p, mu, .) over it for every particle.
EnsemblePath simulate_averaged(const AveragedDrift& drift, const TimeGrid& grid,
                               std::size_t n_particles, std::span<const double> x0,
                               const SeedSpec& seed, const SimOptions& opts = {});

/// RK4 for dX = f-bar(X, delta_X) dt; (steps + 1) x d.
std::vector<double> solve_limit_ode(const AveragedDrift& drift, const TimeGrid& grid,
                                    std::span<const double> x0);

/// Auxiliary fast process: coefficients frozen at the block start (X and its
/// law taken from `controlled_run`), same W1 / W2 streams as that run, no
/// control term. Returns the fast component only, stored like EnsemblePath::fast.
std::vector<double> simulate_auxiliary(const CoefficientSet& coeffs, const TimeGrid& grid,
                                       const ScaleParams& scales, const EnsemblePath& controlled_run,
                                       const SimOptions& opts = {});

/// Ensemble average of int_0^T |Y_t - Ybar_t|^2 dt (left Riemann sum).
double auxiliary_error(const EnsemblePath& controlled_run, const std::vector<double>& auxiliary);

}  // namespace mkvldp
