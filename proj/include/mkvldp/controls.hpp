#pragma once

#include <vector>

#include "mkvldp/grid.hpp"

namespace mkvldp {

/// Control pair (h, hbar): hdot is constant on each cell with d1 + d2
/// components (first d1 act on W^1, the rest on W^2); hbar is an element of
/// the fBm reproducing kernel space with d1 components.
struct ControlPair {
  ControlPair(TimeGrid grid, std::size_t d1, std::size_t d2);

  TimeGrid grid;
  std::size_t d1;
  std::size_t d2;
  std::vector<double> hdot;  ///< steps x (d1 + d2)
  GridFunction hbar;         ///< cell-constant by default, pointwise allowed

  double hdot_at(std::size_t cell, std::size_t c) const { return hdot[cell * (d1 + d2) + c]; }

  /// (1/2) int |hdot|^2 dt
  double energy_h() const;
  /// (1/2) ||hbar||_H^2
  double energy_hbar(const HurstParam& hurst) const;
  /// Membership in S_N: each energy at most N / 2.
  bool within(double n_bound, const HurstParam& hurst) const;

  /// Increments of R_H hbar over each cell, steps x d1.
  std::vector<double> rh_increments(const HurstParam& hurst) const;

  bool is_zero() const;
};

}  // namespace mkvldp
