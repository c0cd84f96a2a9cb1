#pragma once

#include <vector>

#include "mkvldp/grid.hpp"

namespace mkvldp {

/// R_H(t, s) = (t^{2H} + s^{2H} - |t - s|^{2H}) / 2.
double covariance_rh(double t, double s, const HurstParam& hurst);

/// Phi_p(t, s) = int_s^t u^p (u - s)^{beta - 1} du for 0 <= s <= t, beta in (0, 1/2).
double kernel_primitive(double t, double s, double p, double beta);

/// Normalizing constant c_H of K_H, fixed so that int_0^1 K_H(1, r)^2 dr = 1.
double kh_constant(const HurstParam& hurst);

/// K_H(t, s) = c_H s^{1/2 - H} int_s^t u^{H - 1/2} (u - s)^{H - 3/2} du, 0 < s < t.
double kernel_kh(double t, double s, const HurstParam& hurst);

/// dK_H/dr (r, u) = c_H (r / u)^{H - 1/2} (r - u)^{H - 3/2}, 0 < u < r.
double kernel_kh_dr(double r, double u, const HurstParam& hurst);

/// Left Riemann-Liouville integral of order alpha in (0, 1), exact for the
/// piecewise-linear interpolant of f.
GridFunction rl_integral_left(const GridFunction& f, double alpha);

/// Left fractional derivative of order alpha in (0, 1) through the Weyl form,
/// exact for the piecewise-linear interpolant of f. Requires f(0) = 0; the
/// Weyl integrand must be integrable, which holds for Hoelder-continuous f of
/// order above alpha.
GridFunction rl_derivative_left(const GridFunction& f, double alpha);

/// Adjoint K_H^* applied to phi on [0, T]. The result is pointwise with origin
/// exponent 1/2 - H.
GridFunction apply_kh_star(const GridFunction& phi, const HurstParam& hurst);

/// (K_H f)(t) = int_0^t K_H(t, s) f(s) ds at every node.
GridFunction apply_kh(const GridFunction& f, const HurstParam& hurst);

/// R_H phi = K_H (K_H^* phi), a continuous path vanishing at 0.
GridFunction apply_rh(const GridFunction& phi, const HurstParam& hurst);

/// Inverse of K_H for absolutely continuous g with g(0) = 0, H > 1/2.
GridFunction apply_kh_inverse(const GridFunction& g, const HurstParam& hurst);

/// <phi, psi>_H = H(2H - 1) int int |t - s|^{2H - 2} <phi(s), psi(t)> ds dt.
/// Pointwise inputs are replaced by their cell averages first. Exactly symmetric.
double rkhs_inner(const GridFunction& phi, const GridFunction& psi, const HurstParam& hurst);

/// int_0^T <f(s), g(s)> ds, honouring origin exponents.
double l2_inner(const GridFunction& f, const GridFunction& g);

/// gamma(m) = <1_{cell i}, 1_{cell i+m}>_H for m = 0 .. steps - 1.
std::vector<double> cell_gram(const TimeGrid& grid, const HurstParam& hurst);

/// Dense Gram matrix of the cell indicators, row-major steps x steps.
std::vector<double> cell_gram_matrix(const TimeGrid& grid, const HurstParam& hurst);

}  // namespace mkvldp
