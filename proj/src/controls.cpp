#include "mkvldp/controls.hpp"

#include <cmath>

#include "mkvldp/errors.hpp"
#include "mkvldp/frac_ops.hpp"

namespace mkvldp {

ControlPair::ControlPair(TimeGrid g, std::size_t dim1, std::size_t dim2)
    : grid(g), d1(dim1), d2(dim2), hdot(g.steps() * (dim1 + dim2), 0.0),
      hbar(g, dim1, Sampling::CellConstant) {
  if (dim1 == 0) throw DomainError("control pair needs d1 > 0");
}

double ControlPair::energy_h() const {
  double s = 0.0;
  for (double v : hdot) s += v * v;
  return 0.5 * s * grid.step();
}

double ControlPair::energy_hbar(const HurstParam& hurst) const {
  return 0.5 * rkhs_inner(hbar, hbar, hurst);
}

bool ControlPair::within(double n_bound, const HurstParam& hurst) const {
  // small slack for rounding in the Gram sums
  const double tol = 1e-12 * std::max(1.0, n_bound);
  return energy_h() <= 0.5 * n_bound + tol && energy_hbar(hurst) <= 0.5 * n_bound + tol;
}

std::vector<double> ControlPair::rh_increments(const HurstParam& hurst) const {
  if (!(hbar.grid() == grid) || hbar.dim() != d1) {
    throw DomainError("hbar must live on the control grid with d1 components");
  }
  hurst.require_above_half("rh_increments");
  const std::size_t n = grid.steps();
  std::vector<double> out(n * d1, 0.0);
  if (is_zero()) return out;
  const GridFunction cells = hbar.to_cell_constant();
  const auto gamma = cell_gram(grid, hurst);
  // increment over cell i is <1_{cell i}, hbar>_H = sum_j gamma(|i - j|) hbar_j
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double g = gamma[i > j ? i - j : j - i];
      for (std::size_t c = 0; c < d1; ++c) out[i * d1 + c] += g * cells.at(j, c);
    }
  }
  return out;
}

bool ControlPair::is_zero() const {
  for (double v : hdot) {
    if (v != 0.0) return false;
  }
  for (double v : hbar.data()) {
    if (v != 0.0) return false;
  }
  return true;
}

}  // namespace mkvldp
