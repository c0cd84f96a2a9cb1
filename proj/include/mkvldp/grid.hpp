#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace mkvldp {

/// Hurst index of a fractional Brownian motion, 0 < H < 1.
class HurstParam {
 public:
  explicit HurstParam(double h);

  double value() const noexcept { return h_; }
  /// H - 1/2, the exponent shift appearing throughout the H > 1/2 kernels.
  double beta() const noexcept { return h_ - 0.5; }

  /// Throws UnsupportedBranch unless H > 1/2.
  void require_above_half(const char* operation) const;

  friend bool operator==(const HurstParam&, const HurstParam&) = default;

 private:
  double h_;
};

/// Uniform grid t_k = k T / n on [0, T].
class TimeGrid {
 public:
  TimeGrid(double horizon, std::size_t steps);

  double horizon() const noexcept { return horizon_; }
  std::size_t steps() const noexcept { return steps_; }
  std::size_t nodes() const noexcept { return steps_ + 1; }
  double step() const noexcept { return horizon_ / static_cast<double>(steps_); }
  double node(std::size_t k) const noexcept {
    return horizon_ * static_cast<double>(k) / static_cast<double>(steps_);
  }

  /// Number of steps per block of length delta; throws unless delta is a
  /// positive integer multiple of the step (relative tolerance 1e-9).
  std::size_t block_stride(double delta) const;
  /// Node index of floor(t_k / delta) * delta.
  std::size_t block_floor_index(std::size_t k, double delta) const;
  /// floor(t / delta) * delta.
  static double block_floor(double t, double delta);
  /// Largest multiple of the step not exceeding delta (at least one step).
  double round_down_to_step(double delta) const;

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

 private:
  double horizon_;
  std::size_t steps_;
};

enum class Sampling {
  Pointwise,     ///< one sample per node, piecewise-linear in between
  CellConstant,  ///< one value per cell [t_k, t_{k+1})
};

/// R^m-valued function on a TimeGrid.
///
/// Values are stored sample-major (sample i, component c at i * dim + c).
/// A pointwise function may carry an origin exponent g <= 0: the represented
/// function is t^g v(t) where v is the stored piecewise-linear part. This is
/// how K_H^* outputs keep their t^{1/2-H} blow-up at the origin exact.
class GridFunction {
 public:
  GridFunction(TimeGrid grid, std::size_t dim, Sampling kind);
  GridFunction(TimeGrid grid, std::size_t dim, Sampling kind, std::vector<double> values);

  static GridFunction sample(TimeGrid grid, std::size_t dim,
                             const std::function<void(double, std::span<double>)>& fn);
  static GridFunction sample_scalar(TimeGrid grid, const std::function<double(double)>& fn);
  /// Cell-constant indicator of [0, t) rounded to the nearest node.
  static GridFunction indicator(TimeGrid grid, double t, std::size_t dim = 1);

  const TimeGrid& grid() const noexcept { return grid_; }
  std::size_t dim() const noexcept { return dim_; }
  Sampling kind() const noexcept { return kind_; }
  std::size_t samples() const noexcept;

  double origin_exponent() const noexcept { return origin_exponent_; }
  void set_origin_exponent(double g);

  double& at(std::size_t i, std::size_t c) { return values_[i * dim_ + c]; }
  double at(std::size_t i, std::size_t c) const { return values_[i * dim_ + c]; }
  /// Function value at sample i including the origin factor (infinite at 0 if g < 0).
  double value(std::size_t i, std::size_t c) const;

  std::span<double> row(std::size_t i) { return {values_.data() + i * dim_, dim_}; }
  std::span<const double> row(std::size_t i) const { return {values_.data() + i * dim_, dim_}; }
  const std::vector<double>& data() const noexcept { return values_; }
  std::vector<double>& data() noexcept { return values_; }

  /// Cell averages of the piecewise-linear interpolant (identity for cell-constant data).
  GridFunction to_cell_constant() const;

  bool same_layout(const GridFunction& other) const noexcept;

 private:
  TimeGrid grid_;
  std::size_t dim_;
  Sampling kind_;
  double origin_exponent_ = 0.0;
  std::vector<double> values_;
};

}  // namespace mkvldp
