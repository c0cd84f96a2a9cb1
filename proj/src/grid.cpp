#include "mkvldp/grid.hpp"

#include <cmath>
#include <string>

#include "mkvldp/errors.hpp"

namespace mkvldp {

HurstParam::HurstParam(double h) : h_(h) {
  if (!(h > 0.0 && h < 1.0)) {
    throw DomainError("Hurst parameter must lie in (0, 1), got " + std::to_string(h));
  }
}

void HurstParam::require_above_half(const char* operation) const {
  if (!(h_ > 0.5)) {
    throw UnsupportedBranch(std::string(operation) + " requires H > 1/2, got H = " +
                            std::to_string(h_));
  }
}

TimeGrid::TimeGrid(double horizon, std::size_t steps) : horizon_(horizon), steps_(steps) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw DomainError("time horizon must be positive and finite");
  }
  if (steps == 0) {
    throw DomainError("time grid needs at least one step");
  }
}

std::size_t TimeGrid::block_stride(double delta) const {
  const double ratio = delta / step();
  const double rounded = std::round(ratio);
  if (!(delta > 0.0) || rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
    throw DomainError("block size " + std::to_string(delta) +
                      " is not a positive multiple of the grid step " + std::to_string(step()));
  }
  return static_cast<std::size_t>(rounded);
}

std::size_t TimeGrid::block_floor_index(std::size_t k, double delta) const {
  const std::size_t stride = block_stride(delta);
  return (k / stride) * stride;
}

double TimeGrid::block_floor(double t, double delta) { return std::floor(t / delta) * delta; }

double TimeGrid::round_down_to_step(double delta) const {
  const double m = std::floor(delta / step() * (1.0 + 1e-12));
  return std::max(1.0, m) * step();
}

GridFunction::GridFunction(TimeGrid grid, std::size_t dim, Sampling kind)
    : grid_(grid), dim_(dim), kind_(kind) {
  if (dim == 0) throw DomainError("grid function dimension must be positive");
  values_.assign(samples() * dim_, 0.0);
}

GridFunction::GridFunction(TimeGrid grid, std::size_t dim, Sampling kind, std::vector<double> values)
    : grid_(grid), dim_(dim), kind_(kind), values_(std::move(values)) {
  if (dim == 0) throw DomainError("grid function dimension must be positive");
  if (values_.size() != samples() * dim_) {
    throw DomainError("grid function expects " + std::to_string(samples() * dim_) +
                      " values, got " + std::to_string(values_.size()));
  }
}

GridFunction GridFunction::sample(TimeGrid grid, std::size_t dim,
                                  const std::function<void(double, std::span<double>)>& fn) {
  GridFunction out(grid, dim, Sampling::Pointwise);
  for (std::size_t k = 0; k < grid.nodes(); ++k) fn(grid.node(k), out.row(k));
  return out;
}

GridFunction GridFunction::sample_scalar(TimeGrid grid, const std::function<double(double)>& fn) {
  GridFunction out(grid, 1, Sampling::Pointwise);
  for (std::size_t k = 0; k < grid.nodes(); ++k) out.at(k, 0) = fn(grid.node(k));
  return out;
}

GridFunction GridFunction::indicator(TimeGrid grid, double t, std::size_t dim) {
  GridFunction out(grid, dim, Sampling::CellConstant);
  const auto cells = static_cast<std::size_t>(std::llround(t / grid.step()));
  for (std::size_t k = 0; k < std::min(cells, grid.steps()); ++k) {
    for (std::size_t c = 0; c < dim; ++c) out.at(k, c) = 1.0;
  }
  return out;
}

std::size_t GridFunction::samples() const noexcept {
  return kind_ == Sampling::Pointwise ? grid_.nodes() : grid_.steps();
}

void GridFunction::set_origin_exponent(double g) {
  if (kind_ != Sampling::Pointwise) throw DomainError("origin exponent needs pointwise sampling");
  if (!(g <= 0.0 && g > -1.0)) throw DomainError("origin exponent must lie in (-1, 0]");
  origin_exponent_ = g;
}

double GridFunction::value(std::size_t i, std::size_t c) const {
  const double v = at(i, c);
  if (origin_exponent_ == 0.0) return v;
  const double t = kind_ == Sampling::Pointwise ? grid_.node(i) : grid_.node(i) + 0.5 * grid_.step();
  return std::pow(t, origin_exponent_) * v;
}

GridFunction GridFunction::to_cell_constant() const {
  if (kind_ == Sampling::CellConstant) return *this;
  GridFunction out(grid_, dim_, Sampling::CellConstant);
  const double h = grid_.step();
  const double g = origin_exponent_;
  for (std::size_t k = 0; k < grid_.steps(); ++k) {
    double w0 = 0.5;
    double w1 = 0.5;
    if (g != 0.0) {
      // exact cell average of t^g times the linear interpolant
      const double a = grid_.node(k);
      const double b = grid_.node(k + 1);
      const double m0 = (std::pow(b, g + 1.0) - std::pow(a, g + 1.0)) / (g + 1.0);
      const double m1 = (std::pow(b, g + 2.0) - std::pow(a, g + 2.0)) / (g + 2.0);
      w0 = (b * m0 - m1) / (h * h);
      w1 = (m1 - a * m0) / (h * h);
    }
    for (std::size_t c = 0; c < dim_; ++c) out.at(k, c) = w0 * at(k, c) + w1 * at(k + 1, c);
  }
  return out;
}

bool GridFunction::same_layout(const GridFunction& other) const noexcept {
  return grid_ == other.grid_ && dim_ == other.dim_ && kind_ == other.kind_;
}

}  // namespace mkvldp
