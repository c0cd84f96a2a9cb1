#include "mkvldp/ldp.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mkvldp/errors.hpp"
#include "mkvldp/frac_ops.hpp"
#include "mkvldp/stats.hpp"

namespace mkvldp {

EndpointConstraint EndpointConstraint::point(std::vector<double> a) {
  if (a.empty()) throw DomainError("endpoint target must not be empty");
  EndpointConstraint c;
  c.target = std::move(a);
  return c;
}

EndpointConstraint EndpointConstraint::terminal(
    std::function<void(std::span<const double>, std::span<double>)> g, std::size_t rows) {
  if (!g || rows == 0) throw DomainError("terminal functional needs a callable and at least one row");
  EndpointConstraint c;
  c.functional = std::move(g);
  c.rows = rows;
  return c;
}

void EndpointConstraint::residual(std::span<const double> xt, std::span<double> out) const {
  if (functional) {
    functional(xt, out);
    return;
  }
  if (xt.size() != target.size()) throw DomainError("endpoint target has the wrong dimension");
  for (std::size_t i = 0; i < target.size(); ++i) out[i] = xt[i] - target[i];
}

double EndpointConstraint::scale() const {
  if (functional) return 1.0;
  double s = 0.0;
  for (double v : target) s += v * v;
  return 1.0 + std::sqrt(s);
}

namespace {

// Joint RK4 for (X, X0). h and r are per-step rates of P1 hdot and of the
// R_H hbar increments, or null when the channel is off.
class Skeleton {
 public:
  Skeleton(const AveragedDrift& drift, const TimeGrid& grid, std::span<const double> x0)
      : drift_(drift), c_(drift.coefficients()), grid_(grid), x0_(x0.begin(), x0.end()) {
    d_ = c_.dims.d;
    d1_ = c_.dims.d1;
    if (x0.size() != d_) throw DomainError("initial state must have dimension d");
    work_.resize(d_ * d1_);
  }

  std::size_t d() const { return d_; }
  std::size_t d1() const { return d1_; }
  bool has_g() const { return static_cast<bool>(c_.g1); }
  bool has_l() const { return static_cast<bool>(c_.l); }

  void field(std::span<const double> x, std::span<const double> x0, const double* h, const double* r,
             std::span<double> fx, std::span<double> f0) const {
    const EmpiricalMeasure mu = EmpiricalMeasure::dirac(x0);
    drift_(x, mu, fx);
    drift_(x0, mu, f0);
    if (h != nullptr) {
      c_.g1(x, mu, work_);
      for (std::size_t i = 0; i < d_; ++i) {
        for (std::size_t j = 0; j < d1_; ++j) fx[i] += work_[i * d1_ + j] * h[j];
      }
    }
    if (r != nullptr) {
      c_.l(mu, work_);
      for (std::size_t i = 0; i < d_; ++i) {
        for (std::size_t j = 0; j < d1_; ++j) fx[i] += work_[i * d1_ + j] * r[j];
      }
    }
  }

  void step(std::span<const double> x, std::span<const double> x0, const double* h, const double* r,
            std::span<double> xn, std::span<double> x0n) const {
    const std::size_t d = d_;
    const double dt = grid_.step();
    std::vector<double> k(8 * d), sx(d), s0(d);
    std::span<double> k1x(k.data(), d), k1o(k.data() + d, d), k2x(k.data() + 2 * d, d),
        k2o(k.data() + 3 * d, d), k3x(k.data() + 4 * d, d), k3o(k.data() + 5 * d, d),
        k4x(k.data() + 6 * d, d), k4o(k.data() + 7 * d, d);
    field(x, x0, h, r, k1x, k1o);
    for (std::size_t i = 0; i < d; ++i) {
      sx[i] = x[i] + 0.5 * dt * k1x[i];
      s0[i] = x0[i] + 0.5 * dt * k1o[i];
    }
    field(sx, s0, h, r, k2x, k2o);
    for (std::size_t i = 0; i < d; ++i) {
      sx[i] = x[i] + 0.5 * dt * k2x[i];
      s0[i] = x0[i] + 0.5 * dt * k2o[i];
    }
    field(sx, s0, h, r, k3x, k3o);
    for (std::size_t i = 0; i < d; ++i) {
      sx[i] = x[i] + dt * k3x[i];
      s0[i] = x0[i] + dt * k3o[i];
    }
    field(sx, s0, h, r, k4x, k4o);
    for (std::size_t i = 0; i < d; ++i) {
      xn[i] = x[i] + dt / 6.0 * (k1x[i] + 2.0 * k2x[i] + 2.0 * k3x[i] + k4x[i]);
      x0n[i] = x0[i] + dt / 6.0 * (k1o[i] + 2.0 * k2o[i] + 2.0 * k3o[i] + k4o[i]);
    }
  }

  SkeletonPath run(const std::vector<double>& h, const std::vector<double>& r) const {
    const std::size_t n = grid_.steps();
    SkeletonPath p;
    p.x.assign(grid_.nodes() * d_, 0.0);
    p.limit.assign(grid_.nodes() * d_, 0.0);
    std::copy(x0_.begin(), x0_.end(), p.x.begin());
    std::copy(x0_.begin(), x0_.end(), p.limit.begin());
    for (std::size_t k = 0; k < n; ++k) {
      step(std::span<const double>(p.x.data() + k * d_, d_), std::span<const double>(p.limit.data() + k * d_, d_),
           h.empty() ? nullptr : h.data() + k * d1_, r.empty() ? nullptr : r.data() + k * d1_,
           std::span<double>(p.x.data() + (k + 1) * d_, d_), std::span<double>(p.limit.data() + (k + 1) * d_, d_));
      for (std::size_t i = 0; i < d_; ++i) {
        if (!std::isfinite(p.x[(k + 1) * d_ + i])) throw BlowUpError("skeleton equation", k + 1, 0, i);
        if (!std::isfinite(p.limit[(k + 1) * d_ + i])) throw BlowUpError("limit equation", k + 1, 0, i);
      }
    }
    return p;
  }

  const TimeGrid& grid() const { return grid_; }
  const HurstParam& hurst() const { return c_.hurst; }

 private:
  const AveragedDrift& drift_;
  const CoefficientSet& c_;
  TimeGrid grid_;
  std::vector<double> x0_;
  std::size_t d_ = 1;
  std::size_t d1_ = 1;
  mutable std::vector<double> work_;
};

bool all_zero(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double a) { return a == 0.0; });
}

// Penalized energy in whitened coordinates v = [u | z]:
// hdot = u / sqrt(dt) on P1, R_H hbar increments = L z per channel.
class RateProblem {
 public:
  RateProblem(const Skeleton& sk, const EndpointConstraint& con, GradientMode mode)
      : sk_(sk), con_(con), mode_(mode) {
    const TimeGrid& grid = sk.grid();
    n_ = grid.steps();
    d1_ = sk.d1();
    nu_ = sk.has_g() ? n_ * d1_ : 0;
    nz_ = sk.has_l() ? n_ * d1_ : 0;
    if (nu_ + nz_ == 0) throw DomainError("rate function needs g1 or l: no control reaches the slow equation");
    if (nz_ > 0) {
      const auto gram = cell_gram_matrix(grid, sk.hurst());
      Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> gm(gram.data(), n_, n_);
      Eigen::LLT<Eigen::MatrixXd> llt(gm);
      if (llt.info() != Eigen::Success) throw DomainError("cell Gram matrix is not positive definite");
      chol_ = llt.matrixL();
    }
  }

  std::size_t size() const { return nu_ + nz_; }
  double penalty = 1.0;

  void rates(std::span<const double> v, std::vector<double>& h, std::vector<double>& r) const {
    const double dt = sk_.grid().step();
    h.clear();
    r.clear();
    if (nu_ > 0) {
      h.resize(nu_);
      for (std::size_t i = 0; i < nu_; ++i) h[i] = v[i] / std::sqrt(dt);
    }
    if (nz_ > 0) {
      r.assign(nz_, 0.0);
      for (std::size_t c = 0; c < d1_; ++c) {
        Eigen::Map<const Eigen::VectorXd> z(v.data() + nu_ + c * n_, n_);
        const Eigen::VectorXd inc = chol_.triangularView<Eigen::Lower>() * z;
        for (std::size_t k = 0; k < n_; ++k) r[k * d1_ + c] = inc(k) / dt;
      }
    }
  }

  /// Controls for the whitened vector.
  ControlPair controls(std::span<const double> v, std::size_t d2) const {
    ControlPair cp(sk_.grid(), d1_, d2);
    const double dt = sk_.grid().step();
    for (std::size_t k = 0; k < n_ && nu_ > 0; ++k) {
      for (std::size_t c = 0; c < d1_; ++c) cp.hdot[k * (d1_ + d2) + c] = v[k * d1_ + c] / std::sqrt(dt);
    }
    for (std::size_t c = 0; c < d1_ && nz_ > 0; ++c) {
      Eigen::Map<const Eigen::VectorXd> z(v.data() + nu_ + c * n_, n_);
      const Eigen::VectorXd hb = chol_.transpose().triangularView<Eigen::Upper>().solve(z);
      for (std::size_t k = 0; k < n_; ++k) cp.hbar.at(k, c) = hb(k);
    }
    return cp;
  }

  double violation(std::span<const double> v) const {
    std::vector<double> h, r;
    rates(v, h, r);
    const auto p = sk_.run(h, r);
    std::vector<double> res(con_.size());
    con_.residual(std::span<const double>(p.x.data() + n_ * sk_.d(), sk_.d()), res);
    double s = 0.0;
    for (double e : res) s += e * e;
    return std::sqrt(s);
  }

  double value(std::span<const double> v) const {
    std::vector<double> h, r;
    rates(v, h, r);
    return objective_from(v, sk_.run(h, r));
  }

  double operator()(std::span<const double> v, std::span<double> grad) const {
    if (mode_ == GradientMode::FiniteDifference) return fd_gradient(v, grad);
    return adjoint_gradient(v, grad);
  }

 private:
  double objective_from(std::span<const double> v, const SkeletonPath& p) const {
    std::vector<double> res(con_.size());
    con_.residual(std::span<const double>(p.x.data() + n_ * sk_.d(), sk_.d()), res);
    double e = 0.0, c = 0.0;
    for (double a : v) e += a * a;
    for (double a : res) c += a * a;
    return 0.5 * e + 0.5 * penalty * c;
  }

  double fd_gradient(std::span<const double> v, std::span<double> grad) const {
    std::vector<double> w(v.begin(), v.end());
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double e = 1e-6 * std::max(1.0, std::abs(w[i]));
      const double keep = w[i];
      w[i] = keep + e;
      const double fp = value(w);
      w[i] = keep - e;
      const double fm = value(w);
      w[i] = keep;
      grad[i] = (fp - fm) / (2.0 * e);
    }
    return value(v);
  }

  double adjoint_gradient(std::span<const double> v, std::span<double> grad) const {
    const std::size_t d = sk_.d();
    const double dt = sk_.grid().step();
    std::vector<double> h, r;
    rates(v, h, r);
    const SkeletonPath p = sk_.run(h, r);
    const double f = objective_from(v, p);

    // lambda = d(penalty term) / d X_T
    const std::size_t m = con_.size();
    std::vector<double> xt(p.x.begin() + static_cast<std::ptrdiff_t>(n_ * d), p.x.end());
    std::vector<double> res(m), rp(m), rm(m), lambda(d, 0.0);
    con_.residual(xt, res);
    if (con_.functional) {
      for (std::size_t j = 0; j < d; ++j) {
        const double e = 1e-6 * std::max(1.0, std::abs(xt[j]));
        const double keep = xt[j];
        xt[j] = keep + e;
        con_.residual(xt, rp);
        xt[j] = keep - e;
        con_.residual(xt, rm);
        xt[j] = keep;
        for (std::size_t i = 0; i < m; ++i) lambda[j] += penalty * res[i] * (rp[i] - rm[i]) / (2.0 * e);
      }
    } else {
      for (std::size_t j = 0; j < d; ++j) lambda[j] = penalty * res[j];
    }

    // backward sweep with central-difference Jacobians of each RK4 step
    std::vector<double> gh(h.size(), 0.0), gr(r.size(), 0.0);
    std::vector<double> xs(d), xp(d), xm(d), op(d), om(d), hk(d1_), rk(d1_), nl(d);
    for (std::size_t k = n_; k-- > 0;) {
      std::span<const double> x0k(p.limit.data() + k * d, d);
      std::copy(p.x.begin() + static_cast<std::ptrdiff_t>(k * d), p.x.begin() + static_cast<std::ptrdiff_t>((k + 1) * d), xs.begin());
      const double* hptr = nullptr;
      const double* rptr = nullptr;
      if (!h.empty()) {
        std::copy(h.begin() + static_cast<std::ptrdiff_t>(k * d1_), h.begin() + static_cast<std::ptrdiff_t>((k + 1) * d1_), hk.begin());
        hptr = hk.data();
      }
      if (!r.empty()) {
        std::copy(r.begin() + static_cast<std::ptrdiff_t>(k * d1_), r.begin() + static_cast<std::ptrdiff_t>((k + 1) * d1_), rk.begin());
        rptr = rk.data();
      }
      auto column = [&](std::vector<double>& var, std::size_t j) {
        const double e = 1e-6 * std::max(1.0, std::abs(var[j]));
        const double keep = var[j];
        var[j] = keep + e;
        sk_.step(xs, x0k, hptr, rptr, xp, op);
        var[j] = keep - e;
        sk_.step(xs, x0k, hptr, rptr, xm, om);
        var[j] = keep;
        double s = 0.0;
        for (std::size_t i = 0; i < d; ++i) s += lambda[i] * (xp[i] - xm[i]) / (2.0 * e);
        return s;
      };
      for (std::size_t j = 0; j < d1_; ++j) {
        if (hptr != nullptr) gh[k * d1_ + j] = column(hk, j);
        if (rptr != nullptr) gr[k * d1_ + j] = column(rk, j);
      }
      for (std::size_t j = 0; j < d; ++j) nl[j] = column(xs, j);
      lambda.swap(nl);
    }

    for (std::size_t i = 0; i < v.size(); ++i) grad[i] = v[i];
    for (std::size_t i = 0; i < nu_; ++i) grad[i] += gh[i] / std::sqrt(dt);
    for (std::size_t c = 0; c < d1_ && nz_ > 0; ++c) {
      Eigen::VectorXd g(n_);
      for (std::size_t k = 0; k < n_; ++k) g(k) = gr[k * d1_ + c] / dt;
      const Eigen::VectorXd gz = chol_.transpose().triangularView<Eigen::Upper>() * g;
      for (std::size_t k = 0; k < n_; ++k) grad[nu_ + c * n_ + k] += gz(k);
    }
    return f;
  }

  const Skeleton& sk_;
  const EndpointConstraint& con_;
  GradientMode mode_;
  std::size_t n_ = 0, d1_ = 0, nu_ = 0, nz_ = 0;
  Eigen::MatrixXd chol_;
};

}  // namespace

SkeletonPath solve_skeleton(const AveragedDrift& drift, const TimeGrid& grid,
                            const ControlPair& controls, std::span<const double> x0) {
  const CoefficientSet& c = drift.coefficients();
  if (!(controls.grid == grid) || controls.d1 != c.dims.d1 || controls.d2 != c.dims.d2) {
    throw DomainError("control grid or dimensions do not match the skeleton");
  }
  Skeleton sk(drift, grid, x0);
  const std::size_t n = grid.steps();
  const std::size_t d1 = c.dims.d1;
  std::vector<double> h, r;
  if (c.g1) {
    h.resize(n * d1);
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t j = 0; j < d1; ++j) h[k * d1 + j] = controls.hdot_at(k, j);
    }
    if (all_zero(h)) h.clear();
  }
  if (c.l && !all_zero(controls.hbar.data())) {
    r = controls.rh_increments(c.hurst);
    for (double& v : r) v /= grid.step();
  }
  return sk.run(h, r);
}

RateResult rate_function(const AveragedDrift& drift, const TimeGrid& grid,
                         const EndpointConstraint& constraint, std::span<const double> x0,
                         const RateOptions& opts) {
  const CoefficientSet& coeffs = drift.coefficients();
  if (constraint.size() == 0) throw DomainError("endpoint constraint is empty");
  if (!constraint.functional && constraint.target.size() != coeffs.dims.d) {
    throw DomainError("endpoint target must have dimension d");
  }
  if (coeffs.l) coeffs.hurst.require_above_half("rate_function");
  if (!(opts.initial_penalty > 0.0) || !(opts.penalty_growth > 1.0) || opts.rounds == 0) {
    throw DomainError("penalty schedule needs a positive start, growth above 1 and one round or more");
  }
  const std::size_t starts = opts.restarts + 1;

  struct Run {
    std::vector<double> v;
    double violation = std::numeric_limits<double>::infinity();
    double energy = 0.0;
    std::size_t iterations = 0, evaluations = 0;
    std::vector<double> trace;
    bool feasible = false;
    bool inner_ok = true;
  };
  std::vector<Run> runs(starts);
  const double tol = opts.tolerance * constraint.scale();

  parallel_for(opts.pool, starts, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t s = lo; s < hi; ++s) {
      Skeleton sk(drift, grid, x0);
      RateProblem prob(sk, constraint, opts.gradient);
      Run& run = runs[s];
      run.v.assign(prob.size(), 0.0);
      if (s > 0) {
        SeedSpec seed{opts.seed, static_cast<std::uint32_t>(s), 0, Channel::Optimizer};
        RandomStream rng(seed);
        for (double& a : run.v) a = opts.restart_scale * rng.normal();
      }
      double mu = opts.initial_penalty;
      for (std::size_t round = 0; round < opts.rounds; ++round, mu *= opts.penalty_growth) {
        prob.penalty = mu;
        run.trace.push_back(mu);
        const auto r = lbfgs_minimize([&prob](std::span<const double> v, std::span<double> g) { return prob(v, g); },
                                      run.v, opts.inner);
        run.iterations += r.iterations;
        run.evaluations += r.evaluations;
        run.inner_ok = r.converged;
        run.violation = prob.violation(run.v);
        if (run.violation <= tol) break;
      }
      run.feasible = run.violation <= tol;
      double e = 0.0;
      for (double a : run.v) e += a * a;
      run.energy = 0.5 * e;
    }
  });

  std::size_t best = 0;
  for (std::size_t s = 1; s < starts; ++s) {
    const Run& a = runs[s];
    const Run& b = runs[best];
    const bool better = a.feasible != b.feasible ? a.feasible
                                                 : (a.feasible ? a.energy < b.energy : a.violation < b.violation);
    if (better) best = s;
  }

  Skeleton sk(drift, grid, x0);
  RateProblem prob(sk, constraint, opts.gradient);
  const Run& run = runs[best];
  RateResult out(grid, coeffs.dims.d1, coeffs.dims.d2);
  out.controls = prob.controls(run.v, coeffs.dims.d2);
  out.skeleton = solve_skeleton(drift, grid, out.controls, x0);
  out.energy_h = out.controls.energy_h();
  out.energy_hbar = coeffs.l ? out.controls.energy_hbar(coeffs.hurst) : 0.0;
  out.value = out.energy_h + out.energy_hbar;
  out.iterations = run.iterations;
  out.evaluations = run.evaluations;
  out.violation = run.violation;
  out.penalty_trace = run.trace;
  out.best_start = best;
  for (const Run& r : runs) out.restart_values.push_back(r.energy);
  out.converged = run.feasible;
  if (run.feasible) {
    out.status = run.inner_ok ? "ok" : "ok (inner solver hit its iteration limit)";
  } else {
    out.status = "endpoint violation " + std::to_string(run.violation) + " above tolerance " +
                 std::to_string(tol) + " after " + std::to_string(run.trace.size()) + " penalty rounds";
  }
  return out;
}

namespace {

// Runs the slow-fast system in batches and hands every particle's slow path to visit(path).
void for_each_path(const CoefficientSet& coeffs, const TimeGrid& grid, const ScaleParams& scales,
                   std::span<const double> x0, std::span<const double> y0, std::size_t n_mc,
                   const SeedSpec& seed, const MonteCarloOptions& opts,
                   const std::function<void(std::span<const double>)>& visit) {
  if (n_mc == 0) throw DomainError("need at least one Monte Carlo sample");
  const std::size_t batch = std::max<std::size_t>(2, opts.batch);
  const std::size_t d = coeffs.dims.d;
  std::vector<double> path(grid.nodes() * d);
  std::size_t done = 0;
  for (std::uint32_t b = 0; done < n_mc; ++b) {
    std::size_t m = std::min(batch, n_mc - done);
    const bool pad = m < 2;  // an ensemble needs two particles
    const auto e = simulate_slow_fast(coeffs, grid, scales, pad ? 2 : m, x0, y0, seed.with_replicate(b), opts.sim);
    for (std::size_t p = 0; p < m; ++p) {
      for (std::size_t k = 0; k < grid.nodes(); ++k) {
        const auto x = e.x(k, p);
        std::copy(x.begin(), x.end(), path.begin() + static_cast<std::ptrdiff_t>(k * d));
      }
      visit(path);
    }
    done += m;
  }
}

}  // namespace

std::vector<RareEventRow> estimate_rare_event(const CoefficientSet& coeffs, const TimeGrid& grid,
                                              const std::vector<ScaleParams>& scales,
                                              std::span<const double> x0, std::span<const double> y0,
                                              const TerminalEvent& event, std::size_t n_mc,
                                              const SeedSpec& seed, const MonteCarloOptions& opts) {
  if (!event) throw DomainError("rare-event estimate needs an event predicate");
  const std::size_t d = coeffs.dims.d;
  const double two_h = 2.0 * coeffs.hurst.value();
  std::vector<RareEventRow> rows;
  for (const ScaleParams& sc : scales) {
    RareEventRow row;
    row.epsilon = sc.epsilon;
    row.varepsilon = sc.varepsilon;
    for_each_path(coeffs, grid, sc, x0, y0, n_mc, seed, opts, [&](std::span<const double> path) {
      if (event(path.subspan(grid.steps() * d, d))) ++row.hits;
    });
    row.trials = n_mc;
    row.p_hat = static_cast<double>(row.hits) / static_cast<double>(n_mc);
    const Interval ci = wilson_interval(row.hits, n_mc);
    row.ci_lower = ci.lower;
    row.ci_upper = ci.upper;
    if (row.hits == 0) {
      row.flag = "no hits";
      row.eps_log_p = row.eps2h_log_p = std::numeric_limits<double>::quiet_NaN();
    } else {
      const double lp = std::log(row.p_hat);
      row.eps_log_p = sc.epsilon * lp;
      row.eps2h_log_p = std::pow(sc.epsilon, two_h) * lp;
      row.usable = row.hits >= 10;
      if (!row.usable) row.flag = "fewer than 10 hits";
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<LaplaceRow> laplace_functional(const CoefficientSet& coeffs, const TimeGrid& grid,
                                           const std::vector<ScaleParams>& scales,
                                           std::span<const double> x0, std::span<const double> y0,
                                           const PathFunctional& rho, double bound, std::size_t n_mc,
                                           const SeedSpec& seed, const MonteCarloOptions& opts) {
  if (!rho) throw DomainError("Laplace functional needs rho");
  if (!(bound > 0.0) || !std::isfinite(bound)) throw DomainError("rho bound must be positive and finite");
  const double two_h = 2.0 * coeffs.hurst.value();
  std::vector<LaplaceRow> rows;
  for (const ScaleParams& sc : scales) {
    std::vector<double> vals;
    vals.reserve(n_mc);
    for_each_path(coeffs, grid, sc, x0, y0, n_mc, seed, opts, [&](std::span<const double> path) {
      const double v = rho(path);
      if (std::isnan(v)) throw DomainError("rho returned NaN");
      vals.push_back(std::clamp(v, -bound, bound));
    });
    LaplaceRow row;
    row.epsilon = sc.epsilon;
    row.varepsilon = sc.varepsilon;
    row.rho_min = *std::min_element(vals.begin(), vals.end());
    row.rho_max = *std::max_element(vals.begin(), vals.end());
    row.degenerate = row.rho_min == row.rho_max;
    if (row.degenerate) row.flag = "all samples equal";
    auto value = [&](double speed) {
      // -speed log mean exp(-rho / speed), shifted by the smallest rho
      double s = 0.0;
      for (double v : vals) s += std::exp(-(v - row.rho_min) / speed);
      return row.rho_min - speed * (std::log(s) - std::log(static_cast<double>(vals.size())));
    };
    row.value_eps = value(sc.epsilon);
    row.value_eps2h = value(std::pow(sc.epsilon, two_h));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace mkvldp
