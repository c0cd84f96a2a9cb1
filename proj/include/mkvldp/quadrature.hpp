#pragma once

#include <cstddef>
#include <vector>

namespace mkvldp {

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Rule with m points, cached per m (thread-safe).
const GaussRule& gauss_legendre(std::size_t m);

/// Integral of f over [a, b] with one m-point Gauss-Legendre panel.
template <class F>
double gauss_panel(const F& f, double a, double b, std::size_t m = 20) {
  const GaussRule& rule = gauss_legendre(m);
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double s = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) s += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return s * half;
}

/// Integral over [a, b] with panels graded geometrically toward a (ratio 1/2,
/// `levels` panels, the innermost reaching a).
template <class F>
double gauss_graded_left(const F& f, double a, double b, std::size_t levels = 40, std::size_t m = 20) {
  double s = 0.0;
  double hi = b;
  for (std::size_t l = 0; l < levels; ++l) {
    const double lo = (l + 1 == levels) ? a : a + 0.5 * (hi - a);
    s += gauss_panel(f, lo, hi, m);
    hi = lo;
  }
  return s;
}

}  // namespace mkvldp
