#include "mkvldp/frac_ops.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <string>

#include "mkvldp/errors.hpp"
#include "mkvldp/quadrature.hpp"

namespace mkvldp {

namespace {

void require_order(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw DomainError("fractional order must lie in (0, 1), got " + std::to_string(alpha));
  }
}

void require_pointwise(const GridFunction& f, const char* op) {
  if (f.kind() != Sampling::Pointwise) throw DomainError(std::string(op) + " needs pointwise samples");
  if (f.origin_exponent() != 0.0) throw DomainError(std::string(op) + " needs a regular function");
}

// Weights of int_lo^{lo+1} u^e v(u) du against the two nodal values of a
// linear v, plus the three weights of a product of two linear functions.
struct CellWeights {
  double left = 0.0;   // int u^e (lo + 1 - u)
  double right = 0.0;  // int u^e (u - lo)
  double q00 = 0.0;    // int u^e (lo + 1 - u)^2
  double q01 = 0.0;    // int u^e (lo + 1 - u)(u - lo)
  double q11 = 0.0;    // int u^e (u - lo)^2
};

CellWeights cell_weights(double e, double lo) {
  CellWeights w;
  const double hi = lo + 1.0;
  if (lo < 32.0) {
    double m[3];
    for (int k = 0; k < 3; ++k) {
      const double p = e + 1.0 + k;
      m[k] = (std::pow(hi, p) - (lo > 0.0 ? std::pow(lo, p) : 0.0)) / p;
    }
    w.left = hi * m[0] - m[1];
    w.right = m[1] - lo * m[0];
    w.q00 = hi * hi * m[0] - 2.0 * hi * m[1] + m[2];
    w.q01 = -hi * lo * m[0] + (hi + lo) * m[1] - m[2];
    w.q11 = lo * lo * m[0] - 2.0 * lo * m[1] + m[2];
    return w;
  }
  const GaussRule& rule = gauss_legendre(10);
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double x = 0.5 * (rule.nodes[i] + 1.0);
    const double we = 0.5 * rule.weights[i] * std::pow(lo + x, e);
    w.left += we * (1.0 - x);
    w.right += we * x;
    w.q00 += we * (1.0 - x) * (1.0 - x);
    w.q01 += we * (1.0 - x) * x;
    w.q11 += we * x * x;
  }
  return w;
}

// Part of Phi_p over [s, t'] with s < t' <= 2s: expansion of u^p about t'.
double primitive_near(double tp, double s, double p, double beta) {
  const double len = tp - s;
  const double x = len / tp;
  double coef = 1.0;
  double beta_fn = 1.0 / beta;
  double sum = 0.0;
  for (int k = 0; k < 200; ++k) {
    const double term = coef * beta_fn;
    sum += term;
    if (k > p + 1.0 && std::abs(term) <= 1e-17 * std::abs(sum)) break;
    coef *= (p - k) / (k + 1.0) * (-x);
    beta_fn *= (k + 1.0) / (k + 1.0 + beta);
  }
  return std::pow(tp, p) * std::pow(len, beta) * sum;
}

// Part of Phi_p over [2s, t]: expansion of (1 - s/u)^{beta - 1}.
double primitive_far(double t, double s, double p, double beta) {
  const double q = p + beta;
  const double tq = std::pow(t, q);
  const double sq = std::pow(2.0 * s, q);
  const double r = s / t;
  double c = 1.0;
  double rk = 1.0;
  double half = 1.0;
  double sum = 0.0;
  for (int k = 0; k < 200; ++k) {
    const double term = c * (tq * rk - sq * half) / (q - k);
    sum += term;
    if (k > q + 1.0 && std::abs(c) * std::max(tq * rk, sq * half) <= 1e-17 * std::abs(sum)) break;
    c *= (k + 1.0 - beta) / (k + 1.0);
    rk *= r;
    half *= 0.5;
  }
  return sum;
}

double gram_lag(double m, double two_h) {
  if (m == 0.0) return 1.0;
  if (m < 8.0) {
    return 0.5 * (std::pow(m + 1.0, two_h) + std::pow(m - 1.0, two_h) - 2.0 * std::pow(m, two_h));
  }
  const double x2 = 1.0 / (m * m);
  double b = two_h * (two_h - 1.0) / 2.0;
  double xk = x2;
  double sum = 0.0;
  for (int k = 2; k < 80; k += 2) {
    const double term = b * xk;
    sum += term;
    if (std::abs(term) <= 1e-18 * std::abs(sum)) break;
    b *= (two_h - k) * (two_h - k - 1.0) / ((k + 1.0) * (k + 2.0));
    xk *= x2;
  }
  return std::pow(m, two_h) * sum;
}

// Weyl-form derivative of the piecewise-linear interpolant of f (unit step),
// without the f(0) = 0 check. Returns values without the h^{-alpha} / Gamma factor.
std::vector<double> weyl_core(const std::vector<double>& f, std::size_t stride, std::size_t comp,
                              std::size_t steps, double alpha) {
  std::vector<double> p(steps + 1, 0.0), q(steps + 1, 0.0);
  for (std::size_t m = 2; m <= steps; ++m) {
    const double md = static_cast<double>(m);
    p[m] = (std::pow(md - 1.0, -alpha) - std::pow(md, -alpha)) / alpha;
    q[m] = (std::pow(md, 1.0 - alpha) - std::pow(md - 1.0, 1.0 - alpha)) / (1.0 - alpha);
  }
  auto at = [&](std::size_t i) { return f[i * stride + comp]; };
  std::vector<double> out(steps + 1, 0.0);
  for (std::size_t k = 1; k <= steps; ++k) {
    const double fk = at(k);
    double sum = 0.0;
    for (std::size_t j = 0; j + 2 <= k; ++j) {
      const std::size_t m = k - j;
      const double md = static_cast<double>(m);
      const double a = fk + (md - 1.0) * at(j) - md * at(j + 1);
      sum += a * p[m] + (at(j + 1) - at(j)) * q[m];
    }
    sum += (fk - at(k - 1)) / (1.0 - alpha);
    out[k] = fk * std::pow(static_cast<double>(k), -alpha) + alpha * sum;
  }
  return out;
}

}  // namespace

double covariance_rh(double t, double s, const HurstParam& hurst) {
  const double a = 2.0 * hurst.value();
  return 0.5 * (std::pow(std::abs(t), a) + std::pow(std::abs(s), a) - std::pow(std::abs(t - s), a));
}

double kernel_primitive(double t, double s, double p, double beta) {
  if (!(s >= 0.0 && t >= s)) throw DomainError("kernel primitive needs 0 <= s <= t");
  if (t == s) return 0.0;
  const double q = p + beta;
  if (s == 0.0) return std::pow(t, q) / q;
  if (t <= 2.0 * s) return primitive_near(t, s, p, beta);
  return primitive_near(2.0 * s, s, p, beta) + primitive_far(t, s, p, beta);
}

double kh_constant(const HurstParam& hurst) {
  hurst.require_above_half("kh_constant");
  static std::mutex mutex;
  static std::map<double, double> cache;
  {
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(hurst.value());
    if (it != cache.end()) return it->second;
  }
  const double beta = hurst.beta();
  const double expo = 1.0 / (1.0 - 2.0 * beta);
  // r = z^expo removes the r^{-2 beta} endpoint singularity
  auto integrand = [&](double z) {
    const double phi = kernel_primitive(1.0, std::pow(z, expo), beta, beta);
    return expo * phi * phi;
  };
  const double lower = gauss_graded_left(integrand, 0.0, 0.5);
  const double upper = gauss_graded_left([&](double w) { return integrand(1.0 - w); }, 0.0, 0.5);
  const double c = 1.0 / std::sqrt(lower + upper);
  std::lock_guard<std::mutex> lock(mutex);
  cache.emplace(hurst.value(), c);
  return c;
}

double kernel_kh(double t, double s, const HurstParam& hurst) {
  hurst.require_above_half("kernel_kh");
  if (!(s > 0.0 && s < t)) throw DomainError("kernel_kh needs 0 < s < t");
  const double beta = hurst.beta();
  return kh_constant(hurst) * std::pow(s, -beta) * kernel_primitive(t, s, beta, beta);
}

double kernel_kh_dr(double r, double u, const HurstParam& hurst) {
  hurst.require_above_half("kernel_kh_dr");
  if (!(u > 0.0 && u < r)) throw DomainError("kernel_kh_dr needs 0 < u < r");
  const double beta = hurst.beta();
  return kh_constant(hurst) * std::pow(r / u, beta) * std::pow(r - u, beta - 1.0);
}

GridFunction rl_integral_left(const GridFunction& f, double alpha) {
  require_order(alpha);
  require_pointwise(f, "rl_integral_left");
  const std::size_t n = f.grid().steps();
  const std::size_t d = f.dim();
  std::vector<double> wl(n + 1), wr(n + 1);
  for (std::size_t m = 1; m <= n; ++m) {
    const CellWeights w = cell_weights(alpha - 1.0, static_cast<double>(m - 1));
    wl[m] = w.right;  // node t_j sits at distance m
    wr[m] = w.left;   // node t_{j+1} sits at distance m - 1
  }
  const double scale = std::pow(f.grid().step(), alpha) / std::tgamma(alpha);
  GridFunction out(f.grid(), d, Sampling::Pointwise);
  for (std::size_t k = 1; k <= n; ++k) {
    for (std::size_t c = 0; c < d; ++c) {
      double s = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        const std::size_t m = k - j;
        s += wl[m] * f.at(j, c) + wr[m] * f.at(j + 1, c);
      }
      out.at(k, c) = scale * s;
    }
  }
  return out;
}

GridFunction rl_derivative_left(const GridFunction& f, double alpha) {
  require_order(alpha);
  require_pointwise(f, "rl_derivative_left");
  const std::size_t n = f.grid().steps();
  const std::size_t d = f.dim();
  double fmax = 0.0;
  for (double v : f.data()) fmax = std::max(fmax, std::abs(v));
  for (std::size_t c = 0; c < d; ++c) {
    if (std::abs(f.at(0, c)) > 1e-12 * (1.0 + fmax)) {
      throw DomainError("rl_derivative_left needs f(0) = 0 for the Weyl form");
    }
  }
  const double h = f.grid().step();
  const double scale = std::pow(h, -alpha) / std::tgamma(1.0 - alpha);
  GridFunction out(f.grid(), d, Sampling::Pointwise);
  std::vector<double> r(n + 1);
  for (std::size_t c = 0; c < d; ++c) {
    // Subtract a t^alpha (fitted with b t on the first two nodes) and add back
    // D^alpha t^alpha = Gamma(1 + alpha). Images of I^alpha start like t^alpha,
    // which the piecewise-linear weights resolve with an O(1) error at the
    // first nodes. For f regular at 0, a is O(h^{2 - alpha}).
    double a = 0.0;
    if (n >= 2) a = (f.at(2, c) - 2.0 * f.at(1, c)) / (std::pow(h, alpha) * (std::pow(2.0, alpha) - 2.0));
    for (std::size_t k = 0; k <= n; ++k) r[k] = f.at(k, c) - a * std::pow(f.grid().node(k), alpha);
    const auto core = weyl_core(r, 1, 0, n, alpha);
    const double lead = a * std::tgamma(1.0 + alpha);
    out.at(0, c) = lead;
    for (std::size_t k = 1; k <= n; ++k) out.at(k, c) = scale * core[k] + lead;
  }
  return out;
}

GridFunction apply_kh_star(const GridFunction& phi, const HurstParam& hurst) {
  hurst.require_above_half("apply_kh_star");
  const TimeGrid& grid = phi.grid();
  const std::size_t n = grid.steps();
  const std::size_t d = phi.dim();
  const double beta = hurst.beta();
  const double ch = kh_constant(hurst);
  const double horizon = grid.horizon();
  GridFunction out(grid, d, Sampling::Pointwise);

  if (phi.kind() == Sampling::CellConstant) {
    // phi = sum of jumps; each jump at t_j contributes -Phi(t_j, s) times its size
    std::vector<std::size_t> jumps;
    for (std::size_t j = 1; j < n; ++j) {
      for (std::size_t c = 0; c < d; ++c) {
        if (phi.at(j - 1, c) != phi.at(j, c)) {
          jumps.push_back(j);
          break;
        }
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double s = grid.node(i);
      const double top = kernel_primitive(horizon, s, beta, beta);
      for (std::size_t c = 0; c < d; ++c) out.at(i, c) = phi.at(n - 1, c) * top;
      for (auto it = std::upper_bound(jumps.begin(), jumps.end(), i); it != jumps.end(); ++it) {
        const std::size_t j = *it;
        const double pj = kernel_primitive(grid.node(j), s, beta, beta);
        for (std::size_t c = 0; c < d; ++c) out.at(i, c) += (phi.at(j - 1, c) - phi.at(j, c)) * pj;
      }
      for (std::size_t c = 0; c < d; ++c) out.at(i, c) *= ch;
    }
  } else {
    require_pointwise(phi, "apply_kh_star");
    const double h = grid.step();
    std::vector<double> p0(n + 1), p1(n + 1);
    for (std::size_t i = 0; i < n; ++i) {
      const double s = grid.node(i);
      for (std::size_t j = i; j <= n; ++j) {
        const double t = grid.node(j);
        p0[j] = kernel_primitive(t, s, beta, beta);
        p1[j] = kernel_primitive(t, s, beta + 1.0, beta);
      }
      for (std::size_t c = 0; c < d; ++c) {
        const double fi = phi.at(i, c);
        double acc = p0[n] * fi;
        for (std::size_t j = i; j < n; ++j) {
          const double slope = (phi.at(j + 1, c) - phi.at(j, c)) / h;
          const double d0 = p0[j + 1] - p0[j];
          const double d1 = p1[j + 1] - p1[j];
          acc += (phi.at(j, c) - fi) * d0 + slope * (d1 - grid.node(j) * d0);
        }
        out.at(i, c) = ch * acc;
      }
    }
  }
  out.set_origin_exponent(-beta);
  return out;
}

GridFunction apply_kh(const GridFunction& f, const HurstParam& hurst) {
  hurst.require_above_half("apply_kh");
  const TimeGrid& grid = f.grid();
  const std::size_t n = grid.steps();
  const std::size_t d = f.dim();
  const double beta = hurst.beta();
  const double ch = kh_constant(hurst);
  const double h = grid.step();
  const bool cells = f.kind() == Sampling::CellConstant;
  const double e = f.origin_exponent() - beta;
  const double wscale = std::pow(h, e + 1.0);
  std::vector<CellWeights> weights(n);
  for (std::size_t j = 0; j < n; ++j) weights[j] = cell_weights(e, static_cast<double>(j));

  GridFunction out(grid, d, Sampling::Pointwise);
  std::vector<double> prim(n + 1);
  for (std::size_t k = 1; k <= n; ++k) {
    const double t = grid.node(k);
    for (std::size_t j = 0; j < k; ++j) prim[j] = kernel_primitive(t, grid.node(j), beta, beta);
    prim[k] = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      double acc = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        const double v0 = f.at(j, c);
        const double v1 = cells ? v0 : f.at(j + 1, c);
        acc += weights[j].left * prim[j] * v0 + weights[j].right * prim[j + 1] * v1;
      }
      out.at(k, c) = ch * wscale * acc;
    }
  }
  return out;
}

GridFunction apply_rh(const GridFunction& phi, const HurstParam& hurst) {
  return apply_kh(apply_kh_star(phi, hurst), hurst);
}

GridFunction apply_kh_inverse(const GridFunction& g, const HurstParam& hurst) {
  hurst.require_above_half("apply_kh_inverse");
  require_pointwise(g, "apply_kh_inverse");
  const TimeGrid& grid = g.grid();
  const std::size_t n = grid.steps();
  const std::size_t d = g.dim();
  if (n < 2) throw DomainError("apply_kh_inverse needs at least two steps");
  double gmax = 0.0;
  for (double v : g.data()) gmax = std::max(gmax, std::abs(v));
  for (std::size_t c = 0; c < d; ++c) {
    if (std::abs(g.at(0, c)) > 1e-12 * (1.0 + gmax)) throw DomainError("apply_kh_inverse needs g(0) = 0");
  }
  const double beta = hurst.beta();
  const double h = grid.step();
  const double ch = kh_constant(hurst);
  const double gb = std::tgamma(beta);
  const double g1b = std::tgamma(1.0 - beta);
  const double dscale = std::pow(h, -beta) / g1b;

  // F = s^{-beta} g'. Assuming g' = s^beta w with w constant per cell gives
  // the cell values of F; nodal values by averaging neighbours.
  GridFunction out(grid, d, Sampling::Pointwise);
  std::vector<double> w(n), fn(n + 1);
  for (std::size_t c = 0; c < d; ++c) {
    for (std::size_t j = 0; j < n; ++j) {
      const double jd = static_cast<double>(j);
      const double mass = std::pow(h, beta + 1.0) *
                          (std::pow(jd + 1.0, beta + 1.0) - std::pow(jd, beta + 1.0)) / (beta + 1.0);
      w[j] = (g.at(j + 1, c) - g.at(j, c)) / mass;
    }
    fn[0] = 1.5 * w[0] - 0.5 * w[1];
    for (std::size_t k = 1; k < n; ++k) fn[k] = 0.5 * (w[k - 1] + w[k]);
    fn[n] = 1.5 * w[n - 1] - 0.5 * w[n - 2];
    const double f0 = fn[0];
    for (double& v : fn) v -= f0;
    const auto core = weyl_core(fn, 1, 0, n, beta);
    for (std::size_t k = 0; k <= n; ++k) {
      const double tb = std::pow(grid.node(k), beta);
      out.at(k, c) = (tb * dscale * core[k] + f0 / g1b) / (ch * gb);
    }
  }
  return out;
}

std::vector<double> cell_gram(const TimeGrid& grid, const HurstParam& hurst) {
  hurst.require_above_half("cell_gram");
  const std::size_t n = grid.steps();
  const double two_h = 2.0 * hurst.value();
  const double scale = std::pow(grid.step(), two_h);
  std::vector<double> gamma(n);
  for (std::size_t m = 0; m < n; ++m) gamma[m] = scale * gram_lag(static_cast<double>(m), two_h);
  return gamma;
}

std::vector<double> cell_gram_matrix(const TimeGrid& grid, const HurstParam& hurst) {
  const auto gamma = cell_gram(grid, hurst);
  const std::size_t n = gamma.size();
  std::vector<double> g(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) g[i * n + j] = gamma[i > j ? i - j : j - i];
  }
  return g;
}

double rkhs_inner(const GridFunction& phi, const GridFunction& psi, const HurstParam& hurst) {
  hurst.require_above_half("rkhs_inner");
  if (!(phi.grid() == psi.grid()) || phi.dim() != psi.dim()) {
    throw DomainError("rkhs_inner needs functions on the same grid and dimension");
  }
  const GridFunction a = phi.to_cell_constant();
  const GridFunction b = psi.to_cell_constant();
  const auto gamma = cell_gram(phi.grid(), hurst);
  const std::size_t n = gamma.size();
  const std::size_t d = phi.dim();
  double total = 0.0;
  for (std::size_t c = 0; c < d; ++c) {
    double diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) diag += a.at(i, c) * b.at(i, c);
    total += gamma[0] * diag;
    for (std::size_t m = 1; m < n; ++m) {
      double s = 0.0;
      for (std::size_t i = 0; i + m < n; ++i) s += a.at(i, c) * b.at(i + m, c) + a.at(i + m, c) * b.at(i, c);
      total += gamma[m] * s;
    }
  }
  return total;
}

double l2_inner(const GridFunction& f, const GridFunction& g) {
  if (!(f.grid() == g.grid()) || f.dim() != g.dim()) {
    throw DomainError("l2_inner needs functions on the same grid and dimension");
  }
  const TimeGrid& grid = f.grid();
  const std::size_t n = grid.steps();
  const std::size_t d = f.dim();
  const double h = grid.step();
  const bool fc = f.kind() == Sampling::CellConstant;
  const bool gc = g.kind() == Sampling::CellConstant;
  if (fc && gc) {
    double s = 0.0;
    for (std::size_t i = 0; i < n * d; ++i) s += f.data()[i] * g.data()[i];
    return h * s;
  }
  if (fc || gc) {
    const GridFunction& cf = fc ? f : g;
    const GridFunction& pf = fc ? g : f;
    const double e = pf.origin_exponent();
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const CellWeights w = cell_weights(e, static_cast<double>(j));
      for (std::size_t c = 0; c < d; ++c) s += cf.at(j, c) * (w.left * pf.at(j, c) + w.right * pf.at(j + 1, c));
    }
    return std::pow(h, e + 1.0) * s;
  }
  const double e = f.origin_exponent() + g.origin_exponent();
  double s = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const CellWeights w = cell_weights(e, static_cast<double>(j));
    for (std::size_t c = 0; c < d; ++c) {
      const double f0 = f.at(j, c), f1 = f.at(j + 1, c), g0 = g.at(j, c), g1 = g.at(j + 1, c);
      s += w.q00 * f0 * g0 + w.q01 * (f0 * g1 + f1 * g0) + w.q11 * f1 * g1;
    }
  }
  return std::pow(h, e + 1.0) * s;
}

}  // namespace mkvldp
