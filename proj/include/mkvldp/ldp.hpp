#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mkvldp/controls.hpp"
#include "mkvldp/dynamics.hpp"
#include "mkvldp/optimize.hpp"

namespace mkvldp {

/// Skeleton path and the limit path whose point mass freezes its measure argument.
struct SkeletonPath {
  std::vector<double> x;      ///< (steps + 1) x d
  std::vector<double> limit;  ///< (steps + 1) x d
};

/// dX = f-bar(X, delta_{X0}) dt + g1(X, delta_{X0}) P1 hdot dt + l(delta_{X0}) d(R_H hbar),
/// dX0 = f-bar(X0, delta_{X0}) dt, both started at x0 and stepped jointly by RK4.
/// Control terms are constant on each cell; the R_H hbar increments are exact
/// for the cell averages of hbar.
SkeletonPath solve_skeleton(const AveragedDrift& drift, const TimeGrid& grid,
                            const ControlPair& controls, std::span<const double> x0);

/// Endpoint constraint G(X(T)) = 0, either X(T) = target or a user functional.
struct EndpointConstraint {
  std::vector<double> target;
  std::function<void(std::span<const double> xt, std::span<double> out)> functional;
  std::size_t rows = 0;

  static EndpointConstraint point(std::vector<double> a);
  static EndpointConstraint terminal(std::function<void(std::span<const double>, std::span<double>)> g,
                                     std::size_t rows);

  std::size_t size() const { return functional ? rows : target.size(); }
  void residual(std::span<const double> xt, std::span<double> out) const;
  /// Scale of the violation tolerance: 1 + |target| (1 for functionals).
  double scale() const;
};

enum class GradientMode { Adjoint, FiniteDifference };

struct RateOptions {
  double initial_penalty = 10.0;
  double penalty_growth = 10.0;
  std::size_t rounds = 6;
  /// Accepted endpoint violation, relative to EndpointConstraint::scale().
  double tolerance = 1e-4;
  GradientMode gradient = GradientMode::Adjoint;
  /// Extra runs from perturbed starts; the first run always starts at zero.
  std::size_t restarts = 0;
  double restart_scale = 0.5;
  std::uint64_t seed = 0;
  LbfgsOptions inner{};
  WorkerPool* pool = nullptr;
};

struct RateResult {
  RateResult(TimeGrid grid, std::size_t d1, std::size_t d2) : controls(grid, d1, d2) {}

  double value = 0.0;  ///< energy_h + energy_hbar of the returned controls
  double energy_h = 0.0;
  double energy_hbar = 0.0;
  ControlPair controls;
  SkeletonPath skeleton;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  double violation = 0.0;
  std::vector<double> penalty_trace;
  std::vector<double> restart_values;  ///< final energy per start, for spotting several minima
  std::size_t best_start = 0;
  bool converged = false;
  std::string status;
};

/// Minimizes (1/2) int |hdot|^2 + (1/2) ||hbar||_H^2 over cell-constant controls
/// subject to the skeleton endpoint constraint, by quadratic-penalty continuation
/// with L-BFGS inner solves in whitened coordinates (hbar = L^{-T} z for the
/// Cholesky factor L of the cell Gram matrix). A result with converged = false
/// carries the best iterate and the reason.
RateResult rate_function(const AveragedDrift& drift, const TimeGrid& grid,
                         const EndpointConstraint& constraint, std::span<const double> x0,
                         const RateOptions& opts = {});

/// Slow-component event at the terminal time.
using TerminalEvent = std::function<bool(std::span<const double> xt)>;
/// Functional of one slow path, (steps + 1) x d.
using PathFunctional = std::function<double(std::span<const double> path)>;

struct MonteCarloOptions {
  /// Particles per interacting ensemble; n_mc is split into such batches.
  std::size_t batch = 10000;
  SimOptions sim{};
};

struct RareEventRow {
  double epsilon = 0.0;
  double varepsilon = 0.0;
  std::size_t hits = 0;
  std::size_t trials = 0;
  double p_hat = 0.0;
  double ci_lower = 0.0;
  double ci_upper = 0.0;
  double eps_log_p = 0.0;    ///< epsilon log p
  double eps2h_log_p = 0.0;  ///< epsilon^{2H} log p
  bool usable = false;       ///< at least 10 hits
  std::string flag;
};

/// Plain Monte Carlo estimate of P(X_T in F) for each scale, with Wilson 95% intervals.
std::vector<RareEventRow> estimate_rare_event(const CoefficientSet& coeffs, const TimeGrid& grid,
                                              const std::vector<ScaleParams>& scales,
                                              std::span<const double> x0, std::span<const double> y0,
                                              const TerminalEvent& event, std::size_t n_mc,
                                              const SeedSpec& seed, const MonteCarloOptions& opts = {});

struct LaplaceRow {
  double epsilon = 0.0;
  double varepsilon = 0.0;
  double value_eps = 0.0;    ///< -eps log E exp(-rho / eps)
  double value_eps2h = 0.0;  ///< same with speed eps^{2H}
  double rho_min = 0.0;
  double rho_max = 0.0;
  bool degenerate = false;  ///< every sample gave the same rho
  std::string flag;
};

/// Laplace functionals at both speeds. rho is clamped to [-bound, bound] and the
/// exponential average is taken in log-sum-exp form.
std::vector<LaplaceRow> laplace_functional(const CoefficientSet& coeffs, const TimeGrid& grid,
                                           const std::vector<ScaleParams>& scales,
                                           std::span<const double> x0, std::span<const double> y0,
                                           const PathFunctional& rho, double bound, std::size_t n_mc,
                                           const SeedSpec& seed, const MonteCarloOptions& opts = {});

}  // namespace mkvldp
