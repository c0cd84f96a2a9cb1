#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace mkvldp {

/// Uniformly weighted point cloud in R^d, stored point-major. Immutable.
class EmpiricalMeasure {
 public:
  EmpiricalMeasure(std::size_t dim, std::vector<double> points);
  static EmpiricalMeasure dirac(std::span<const double> x);

  std::size_t size() const noexcept { return points_.size() / dim_; }
  std::size_t dim() const noexcept { return dim_; }
  std::span<const double> point(std::size_t i) const { return {points_.data() + i * dim_, dim_}; }
  const std::vector<double>& points() const noexcept { return points_; }

  std::span<const double> mean() const noexcept { return mean_; }
  /// mu(|.|^2)
  double second_moment() const noexcept { return second_moment_; }

 private:
  std::size_t dim_;
  std::vector<double> points_;
  std::vector<double> mean_;
  double second_moment_ = 0.0;
};

/// mu(|.|^p), p >= 1 (no root taken).
double moment_p(const EmpiricalMeasure& mu, double p);

enum class W2Method { Auto, Exact1D, Hungarian, Sliced };
const char* to_string(W2Method m);

struct W2Result {
  double value = 0.0;
  W2Method method = W2Method::Auto;
};

/// Wasserstein-2 distance. Auto picks Exact1D for d = 1, Hungarian for d > 1
/// with equal sizes up to 64 points, Sliced otherwise. The sliced value is the
/// root mean square of 1-D distances over `projections` seeded directions.
W2Result wasserstein2(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                      W2Method method = W2Method::Auto, std::uint64_t seed = 0,
                      std::size_t projections = 64);

/// Minimum-cost perfect matching for a square cost matrix (row-major);
/// returns the column assigned to each row.
std::vector<std::size_t> hungarian_assignment(std::span<const double> cost, std::size_t n);

}  // namespace mkvldp
