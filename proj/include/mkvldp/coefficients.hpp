#pragma once

#include <functional>
#include <span>
#include <string>

#include "mkvldp/grid.hpp"
#include "mkvldp/measure.hpp"

namespace mkvldp {

struct Dims {
  std::size_t d = 1;   ///< slow and fast state dimension
  std::size_t d1 = 1;  ///< W^1 and B^H dimension
  std::size_t d2 = 1;  ///< W^2 dimension, may be 0
};

/// (x, mu, y) -> out; out has d entries (drifts) or d x d1 / d x d2 row-major (diffusions).
using StateFn = std::function<void(std::span<const double> x, const EmpiricalMeasure& mu,
                                   std::span<const double> y, std::span<double> out)>;
/// (x, mu) -> out
using SlowFn = std::function<void(std::span<const double> x, const EmpiricalMeasure& mu,
                                  std::span<double> out)>;
/// mu -> out (d x d1 row-major)
using LawFn = std::function<void(const EmpiricalMeasure& mu, std::span<double> out)>;

/// Model coefficients of the slow-fast system.
///
///   dX = f1(X, L_X, Y) dt + g1(X, L_X) dW1 + l(L_X) dB^H
///   dY = b(X, L_X, Y) / eps dt + sigma1(X, L_X, Y) / sqrt(eps) dW1 + sigma2(X, L_X, Y) / sqrt(eps) dW2
///
/// Unset g1, l, sigma1 or sigma2 mean the term is absent. The declared
/// constants are claims checked by check_assumption_h1.
struct CoefficientSet {
  std::string id = "custom";
  Dims dims;
  HurstParam hurst{0.75};
  StateFn f1;
  SlowFn g1;
  LawFn l;
  StateFn b;
  StateFn sigma1;
  StateFn sigma2;
  double lipschitz_c = 1.0;
  double dissipativity_alpha = 1.0;
  /// Optional closed form of the averaged drift f-bar(x, mu).
  SlowFn fbar;

  /// Throws DomainError when required pieces are missing or dimensions are zero.
  void validate() const;
};

}  // namespace mkvldp
