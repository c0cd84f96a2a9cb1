#pragma once

#include <functional>
#include <span>
#include <vector>

namespace mkvldp {

/// f(x, grad) returns the objective and writes its gradient.
using Objective = std::function<double(std::span<const double> x, std::span<double> grad)>;

struct LbfgsOptions {
  std::size_t memory = 10;
  std::size_t max_iterations = 500;
  double gradient_tolerance = 1e-9;  ///< on |grad|_inf / max(1, |f|)
  double step_tolerance = 1e-14;     ///< relative change of f
};

struct LbfgsResult {
  double value = 0.0;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  double gradient_norm = 0.0;
  bool converged = false;
};

/// Limited-memory BFGS with a backtracking Armijo line search. x is updated in place.
LbfgsResult lbfgs_minimize(const Objective& f, std::vector<double>& x, const LbfgsOptions& opts = {});

}  // namespace mkvldp
