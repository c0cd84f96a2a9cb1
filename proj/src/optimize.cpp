#include "mkvldp/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace mkvldp {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double inf_norm(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

LbfgsResult lbfgs_minimize(const Objective& f, std::vector<double>& x, const LbfgsOptions& opts) {
  const std::size_t n = x.size();
  LbfgsResult res;
  std::vector<double> g(n), xn(n), gn(n), dir(n), alpha(opts.memory);
  double fx = f(x, g);
  ++res.evaluations;
  std::deque<std::vector<double>> s_hist, y_hist;
  std::deque<double> rho_hist;

  for (res.iterations = 0; res.iterations < opts.max_iterations; ++res.iterations) {
    res.gradient_norm = inf_norm(g);
    if (res.gradient_norm <= opts.gradient_tolerance * std::max(1.0, std::abs(fx))) {
      res.converged = true;
      break;
    }
    // two-loop recursion
    for (std::size_t i = 0; i < n; ++i) dir[i] = -g[i];
    const std::size_t m = s_hist.size();
    for (std::size_t j = m; j-- > 0;) {
      alpha[j] = rho_hist[j] * dot(s_hist[j], dir);
      for (std::size_t i = 0; i < n; ++i) dir[i] -= alpha[j] * y_hist[j][i];
    }
    if (m > 0) {
      const double gamma = dot(s_hist[m - 1], y_hist[m - 1]) / dot(y_hist[m - 1], y_hist[m - 1]);
      for (double& v : dir) v *= gamma;
    }
    for (std::size_t j = 0; j < m; ++j) {
      const double beta = rho_hist[j] * dot(y_hist[j], dir);
      for (std::size_t i = 0; i < n; ++i) dir[i] += (alpha[j] - beta) * s_hist[j][i];
    }
    double slope = dot(g, dir);
    if (!(slope < 0.0)) {
      // not a descent direction; restart from steepest descent
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      for (std::size_t i = 0; i < n; ++i) dir[i] = -g[i];
      slope = dot(g, dir);
    }
    double step = m == 0 ? std::min(1.0, 1.0 / std::max(1e-300, inf_norm(g))) : 1.0;
    double fn = 0.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t i = 0; i < n; ++i) xn[i] = x[i] + step * dir[i];
      fn = f(xn, gn);
      ++res.evaluations;
      if (std::isfinite(fn) && fn <= fx + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    std::vector<double> s(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = xn[i] - x[i];
      y[i] = gn[i] - g[i];
    }
    const double sy = dot(s, y);
    const double change = std::abs(fx - fn);
    x.swap(xn);
    g.swap(gn);
    fx = fn;
    if (sy > 1e-12 * std::sqrt(dot(s, s) * dot(y, y))) {
      if (s_hist.size() == opts.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
    }
    if (change <= opts.step_tolerance * std::max(1.0, std::abs(fx))) {
      res.gradient_norm = inf_norm(g);
      res.converged = true;
      ++res.iterations;
      break;
    }
  }
  res.value = fx;
  res.gradient_norm = inf_norm(g);
  return res;
}

}  // namespace mkvldp
