#include "mkvldp/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mkvldp/errors.hpp"
#include "mkvldp/noise.hpp"

namespace mkvldp {

EmpiricalMeasure::EmpiricalMeasure(std::size_t dim, std::vector<double> points)
    : dim_(dim), points_(std::move(points)) {
  if (dim == 0) throw DomainError("measure dimension must be positive");
  if (points_.empty() || points_.size() % dim != 0) {
    throw DomainError("measure needs a positive whole number of points");
  }
  mean_.assign(dim, 0.0);
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const double v = points_[i];
    if (!std::isfinite(v)) throw DomainError("measure support must be finite");
    mean_[i % dim] += v;
    second_moment_ += v * v;
  }
  const double n = static_cast<double>(size());
  for (double& m : mean_) m /= n;
  second_moment_ /= n;
}

EmpiricalMeasure EmpiricalMeasure::dirac(std::span<const double> x) {
  return EmpiricalMeasure(x.size(), std::vector<double>(x.begin(), x.end()));
}

double moment_p(const EmpiricalMeasure& mu, double p) {
  if (!(p >= 1.0)) throw DomainError("moment_p needs p >= 1");
  double s = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    double r2 = 0.0;
    for (double v : mu.point(i)) r2 += v * v;
    s += p == 2.0 ? r2 : std::pow(r2, 0.5 * p);
  }
  return s / static_cast<double>(mu.size());
}

const char* to_string(W2Method m) {
  switch (m) {
    case W2Method::Auto: return "auto";
    case W2Method::Exact1D: return "exact_1d";
    case W2Method::Hungarian: return "hungarian";
    case W2Method::Sliced: return "sliced";
  }
  return "unknown";
}

namespace {

// squared W2 between two sorted 1-D samples of any sizes (quantile coupling)
double w2_sq_sorted(const std::vector<double>& a, const std::vector<double>& b) {
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double u = 0.0;
  double s = 0.0;
  while (i < a.size() && j < b.size()) {
    const double ua = static_cast<double>(i + 1) / na;
    const double ub = static_cast<double>(j + 1) / nb;
    const double next = std::min(ua, ub);
    const double diff = a[i] - b[j];
    s += (next - u) * diff * diff;
    u = next;
    if (ua <= next) ++i;
    if (ub <= next) ++j;
  }
  return s;
}

std::vector<double> sorted_projection(const EmpiricalMeasure& mu, std::span<const double> dir) {
  std::vector<double> out(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    double s = 0.0;
    const auto p = mu.point(i);
    for (std::size_t c = 0; c < dir.size(); ++c) s += p[c] * dir[c];
    out[i] = s;
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::vector<std::size_t> hungarian_assignment(std::span<const double> cost, std::size_t n) {
  if (cost.size() != n * n) throw DomainError("hungarian_assignment: cost matrix is not n x n");
  const double inf = std::numeric_limits<double>::infinity();
  // potentials u (rows), v (columns); p[j] = row matched to column j, 1-based
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> assign(n);
  for (std::size_t j = 1; j <= n; ++j) assign[p[j] - 1] = j - 1;
  return assign;
}

W2Result wasserstein2(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, W2Method method,
                      std::uint64_t seed, std::size_t projections) {
  if (mu.dim() != nu.dim()) {
    throw DomainError("wasserstein2: dimension mismatch (" + std::to_string(mu.dim()) + " vs " +
                      std::to_string(nu.dim()) + ")");
  }
  const std::size_t d = mu.dim();
  const bool same_size = mu.size() == nu.size();
  if (method == W2Method::Auto) {
    if (d == 1) {
      method = W2Method::Exact1D;
    } else if (same_size && mu.size() <= 64) {
      method = W2Method::Hungarian;
    } else {
      method = W2Method::Sliced;
    }
  }
  if (d > 1 && !same_size) throw DomainError("wasserstein2: d > 1 needs equal sample sizes");

  W2Result r;
  r.method = method;
  switch (method) {
    case W2Method::Exact1D: {
      if (d != 1) throw DomainError("wasserstein2: exact 1-D method needs d = 1");
      std::vector<double> a = mu.points(), b = nu.points();
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      r.value = std::sqrt(w2_sq_sorted(a, b));
      break;
    }
    case W2Method::Hungarian: {
      if (!same_size) throw DomainError("wasserstein2: assignment needs equal sample sizes");
      const std::size_t n = mu.size();
      std::vector<double> cost(n * n);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          double s = 0.0;
          for (std::size_t c = 0; c < d; ++c) {
            const double diff = mu.point(i)[c] - nu.point(j)[c];
            s += diff * diff;
          }
          cost[i * n + j] = s;
        }
      }
      const auto assign = hungarian_assignment(cost, n);
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += cost[i * n + assign[i]];
      r.value = std::sqrt(s / static_cast<double>(n));
      break;
    }
    case W2Method::Sliced: {
      if (projections == 0) throw DomainError("wasserstein2: need at least one projection");
      RandomStream rng(SeedSpec{seed, 0, 0, Channel::Projection});
      std::vector<double> dir(d);
      double s = 0.0;
      for (std::size_t k = 0; k < projections; ++k) {
        double norm = 0.0;
        do {
          for (double& x : dir) x = rng.normal();
          norm = 0.0;
          for (double x : dir) norm += x * x;
        } while (norm == 0.0);
        for (double& x : dir) x /= std::sqrt(norm);
        s += w2_sq_sorted(sorted_projection(mu, dir), sorted_projection(nu, dir));
      }
      r.value = std::sqrt(s / static_cast<double>(projections));
      break;
    }
    case W2Method::Auto:
      break;
  }
  return r;
}

}  // namespace mkvldp
