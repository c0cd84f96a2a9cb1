#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "mkvldp/controls.hpp"
#include "mkvldp/dynamics.hpp"

namespace mkvldp {

enum class Verdict { Pass, Fail, Inconclusive };
const char* to_string(Verdict v);

using NamedValues = std::vector<std::pair<std::string, double>>;

struct CheckReport {
  std::string check;
  std::string model;
  NamedValues parameters;
  NamedValues fitted;
  Verdict verdict = Verdict::Inconclusive;
  std::string notes;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  double fitted_value(const std::string& name) const;
};

/// Sampling boxes for the (H1) probes. Measures are Gaussian clouds with a
/// random center in the x box.
struct ProbeSpec {
  double x_box = 3.0;  ///< coordinates uniform in [-x_box, x_box]
  double y_box = 3.0;
  std::size_t probes = 200;
  std::size_t cloud_size = 32;
  double cloud_spread = 1.0;
};

/// Largest observed Lipschitz ratios for the three Lipschitz conditions and the
/// smallest observed dissipativity constant, against the declared C and alpha.
CheckReport check_assumption_h1(const CoefficientSet& coeffs, const ProbeSpec& probes, std::uint64_t seed);

struct EnsembleSpec {
  std::vector<double> x0;  ///< empty: zeros
  std::vector<double> y0;
  std::size_t particles = 200;
  std::size_t replicates = 1;
  std::uint64_t seed = 0;
  SimOptions sim{};
};

/// sup_t of the fourth moments of X and Y for each fast time scale in
/// `varepsilons` (unscaled noise). Pass: all finite and max / min <= 1.5 for each.
CheckReport check_moment_bounds(const CoefficientSet& coeffs, const TimeGrid& grid,
                                const std::vector<double>& varepsilons, const EnsembleSpec& ens);

/// Log-log slope of E|X_{t+u} - X_t|^2 over u = T/256 .. T/16. Pass: slope in
/// [min_slope, max_slope] and R^2 >= 0.95.
CheckReport check_increment_scaling(const CoefficientSet& coeffs, const TimeGrid& grid,
                                    const ScaleParams& scales, const EnsembleSpec& ens,
                                    double min_slope = 0.9, double max_slope = 1e300);

struct AuxiliaryPoint {
  double epsilon;
  double ratio;  ///< varepsilon / epsilon
  double delta;
};

/// Fits E int |Y - Ybar|^2 = a (varepsilon / epsilon) + b delta + c over the
/// points. Pass: a, b >= 0, every residual below 30% of the fit, and for each
/// pair of points where both drivers halve the error drops by `halving_factor`.
CheckReport check_auxiliary_error(const CoefficientSet& coeffs, const TimeGrid& grid,
                                  const std::vector<AuxiliaryPoint>& points, const ControlPair& controls,
                                  const EnsembleSpec& ens, double halving_factor = 1.5);

/// sup_t E|X^eps - Xbar0|^2 along `epsilons` with varepsilon = eps^2. Pass:
/// strictly decreasing and the last value below `floor`.
CheckReport check_averaging(const CoefficientSet& coeffs, const AveragedDrift& limit_drift,
                            const TimeGrid& grid, const std::vector<double>& epsilons,
                            const EnsembleSpec& ens, double floor = 0.05);

/// Max of |f-bar(x1, mu1) - f-bar(x2, mu2)| / (|x1 - x2| + W2(mu1, mu2)) over
/// random probes. Pass: at most 2 C.
CheckReport check_fbar_lipschitz(const AveragedDrift& drift, const ProbeSpec& probes, std::uint64_t seed);

/// sup_t |X^{h + p / n} - X^h| for n = 1, 2, 4, .., 64. Pass: nonincreasing,
/// strictly decreasing while above 1e-12, last value below 1e-3.
CheckReport check_skeleton_continuity(const AveragedDrift& drift, const TimeGrid& grid,
                                      const ControlPair& base, const ControlPair& perturbation,
                                      std::span<const double> x0);

/// Runs named checks on the pool, reports in input order.
using CheckTask = std::function<CheckReport()>;
std::vector<CheckReport> run_suite(const std::vector<CheckTask>& tasks, WorkerPool* pool = nullptr);

struct SuiteOptions {
  std::vector<std::string> only;  ///< empty: every check
  std::uint64_t seed = 0;
  std::size_t particles = 200;
  WorkerPool* pool = nullptr;
};

/// Standard suite for one model: h1, moments, increments, auxiliary, averaging,
/// fbar_lipschitz, skeleton.
std::vector<CheckReport> default_suite(const CoefficientSet& coeffs, const SuiteOptions& opts);
std::vector<std::string> default_suite_checks();

}  // namespace mkvldp
