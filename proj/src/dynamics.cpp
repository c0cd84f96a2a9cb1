#include "mkvldp/dynamics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "mkvldp/errors.hpp"

namespace mkvldp {

void ScaleParams::validate() const {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw DomainError("epsilon must lie in (0, 1]");
  if (!(varepsilon > 0.0 && varepsilon <= 1.0)) throw DomainError("varepsilon must lie in (0, 1]");
  if (delta < 0.0 || !std::isfinite(delta)) throw DomainError("block size delta must be >= 0");
}

double ScaleParams::resolved_delta(const TimeGrid& grid) const {
  if (delta > 0.0) return delta;
  return grid.round_down_to_step(std::pow(epsilon, 2.0 / 3.0));
}

ScaleParams ScaleParams::coupled(double epsilon) {
  ScaleParams s;
  s.epsilon = epsilon;
  s.varepsilon = epsilon * epsilon;
  s.delta = 0.0;
  s.validate();
  return s;
}

EnsemblePath::EnsemblePath(TimeGrid g, std::size_t n, std::size_t d)
    : grid(g), particles(n), dim(d) {
  slow.assign(grid.nodes() * n * d, 0.0);
}

std::span<const double> EnsemblePath::x(std::size_t k, std::size_t p) const {
  return {slow.data() + (k * particles + p) * dim, dim};
}
std::span<const double> EnsemblePath::y(std::size_t k, std::size_t p) const {
  return {fast.data() + (k * particles + p) * dim, dim};
}
std::span<double> EnsemblePath::x(std::size_t k, std::size_t p) {
  return {slow.data() + (k * particles + p) * dim, dim};
}
std::span<double> EnsemblePath::y(std::size_t k, std::size_t p) {
  return {fast.data() + (k * particles + p) * dim, dim};
}

EmpiricalMeasure EnsemblePath::law(std::size_t k) const {
  if (k >= grid.nodes()) throw DomainError("law requested past the last node");
  const auto first = slow.begin() + static_cast<std::ptrdiff_t>(k * particles * dim);
  return EmpiricalMeasure(dim, std::vector<double>(first, first + static_cast<std::ptrdiff_t>(particles * dim)));
}

namespace {

double moment_at(const std::vector<double>& data, std::size_t k, std::size_t n, std::size_t d, double p) {
  if (data.empty()) throw DomainError("path component not stored");
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double r2 = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      const double v = data[(k * n + i) * d + c];
      r2 += v * v;
    }
    s += std::pow(r2, 0.5 * p);
  }
  return s / static_cast<double>(n);
}

void require_finite(std::span<const double> v, const char* where, std::size_t k, std::size_t p) {
  for (std::size_t c = 0; c < v.size(); ++c) {
    if (!std::isfinite(v[c])) throw BlowUpError(where, k, p, c);
  }
}

// out += M v, M is rows x cols row-major
void add_matvec(std::span<const double> m, std::span<const double> v, double scale, std::span<double> out) {
  const std::size_t rows = out.size();
  const std::size_t cols = v.size();
  for (std::size_t i = 0; i < rows; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < cols; ++j) s += m[i * cols + j] * v[j];
    out[i] += scale * s;
  }
}

// Fast-equation coefficients frozen at (x, mu) for one step.
struct FastStepper {
  const CoefficientSet& c;
  std::vector<double> b0, b1, jac, yp, sig;

  explicit FastStepper(const CoefficientSet& coeffs) : c(coeffs) {
    const std::size_t d = c.dims.d;
    b0.resize(d);
    b1.resize(d);
    jac.resize(d * d);
    yp.resize(d);
    sig.resize(d * std::max(c.dims.d1, c.dims.d2));
  }

  // y <- y + (I - r J)^{-1} (r b(y) + extra), J = db/dy by forward differences.
  // `extra` already holds the noise and control contributions.
  void step(std::span<const double> x, const EmpiricalMeasure& mu, std::span<double> y, double r,
            std::span<const double> extra) {
    const std::size_t d = y.size();
    c.b(x, mu, y, b0);
    std::copy(y.begin(), y.end(), yp.begin());
    for (std::size_t j = 0; j < d; ++j) {
      const double e = 1e-6 * std::max(1.0, std::abs(y[j]));
      yp[j] = y[j] + e;
      c.b(x, mu, yp, b1);
      yp[j] = y[j];
      for (std::size_t i = 0; i < d; ++i) jac[i * d + j] = (b1[i] - b0[i]) / e;
    }
    // implicit only along dissipative directions; an expanding drift stays explicit
    if (d == 1) {
      y[0] += (r * b0[0] + extra[0]) / (1.0 - r * std::min(jac[0], 0.0));
      return;
    }
    Eigen::MatrixXd js(d, d);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) js(i, j) = 0.5 * (jac[i * d + j] + jac[j * d + i]);
    }
    if (Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(js, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff() > 0.0) {
      for (std::size_t i = 0; i < d; ++i) y[i] += r * b0[i] + extra[i];
      return;
    }
    Eigen::MatrixXd a(d, d);
    Eigen::VectorXd rhs(d);
    for (std::size_t i = 0; i < d; ++i) {
      rhs(i) = r * b0[i] + extra[i];
      for (std::size_t j = 0; j < d; ++j) a(i, j) = (i == j ? 1.0 : 0.0) - r * jac[i * d + j];
    }
    const Eigen::VectorXd dy = a.partialPivLu().solve(rhs);
    for (std::size_t i = 0; i < d; ++i) y[i] += dy(i);
  }

  // extra += scale * (sigma1 dw1 + sigma2 dw2)
  void add_noise(std::span<const double> x, const EmpiricalMeasure& mu, std::span<const double> y,
                 std::span<const double> dw1, std::span<const double> dw2, double scale,
                 std::span<double> extra) {
    const std::size_t d = c.dims.d;
    if (c.sigma1) {
      std::span<double> s(sig.data(), d * c.dims.d1);
      c.sigma1(x, mu, y, s);
      add_matvec(s, dw1, scale, extra);
    }
    if (c.sigma2) {
      std::span<double> s(sig.data(), d * c.dims.d2);
      c.sigma2(x, mu, y, s);
      add_matvec(s, dw2, scale, extra);
    }
  }
};

void check_start(const CoefficientSet& coeffs, std::span<const double> x0, std::span<const double> y0,
                 std::size_t n_particles) {
  coeffs.validate();
  if (x0.size() != coeffs.dims.d || y0.size() != coeffs.dims.d) {
    throw DomainError("initial states must have dimension d = " + std::to_string(coeffs.dims.d));
  }
  if (n_particles < 2) throw DomainError("need at least two particles");
}

double stiffness(const TimeGrid& grid, const ScaleParams& scales, const SimOptions& opts) {
  const double r = grid.step() / scales.varepsilon;
  if (r > opts.max_stiffness) {
    throw ResolutionError("step / varepsilon = " + std::to_string(r) + " exceeds " +
                          std::to_string(opts.max_stiffness) + "; refine the grid");
  }
  return r;
}

struct NoiseBank {
  std::vector<DrivingPaths> paths;
};

NoiseBank draw_noise(const CoefficientSet& coeffs, const TimeGrid& grid, std::size_t n,
                     const SeedSpec& seed, const SimOptions& opts, bool with_fbm) {
  NoiseBank bank;
  bank.paths.resize(n);
  if (!opts.noise) return bank;
  std::unique_ptr<ExactFbmSampler> fbm;
  if (with_fbm && coeffs.l) fbm = std::make_unique<ExactFbmSampler>(grid, coeffs.hurst);
  parallel_for(opts.pool, n, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t p = lo; p < hi; ++p) {
      bank.paths[p] = sample_driving_paths(grid, coeffs.dims.d1, coeffs.dims.d2, fbm.get(),
                                           seed.with_particle(static_cast<std::uint32_t>(p)));
    }
  });
  return bank;
}

struct SlowFastRun {
  const CoefficientSet& coeffs;
  const TimeGrid& grid;
  const ScaleParams& scales;
  const SimOptions& opts;
  const ControlPair* controls = nullptr;
  const EnsemblePath* frozen_law = nullptr;

  EnsemblePath run(std::size_t n, std::span<const double> x0, std::span<const double> y0,
                   const SeedSpec& seed) {
    check_start(coeffs, x0, y0, n);
    scales.validate();
    const double r = stiffness(grid, scales, opts);
    const std::size_t d = coeffs.dims.d;
    const std::size_t d1 = coeffs.dims.d1;
    const std::size_t d2 = coeffs.dims.d2;
    const double dt = grid.step();
    const double eps = scales.small_noise ? scales.epsilon : 1.0;
    const double sqrt_eps = std::sqrt(eps);
    const double eps_h = std::pow(eps, coeffs.hurst.value());
    const double inv_sqrt_ve = 1.0 / std::sqrt(scales.varepsilon);

    // control terms, only when nonzero so that zero controls replay the free run bit for bit
    bool use_hdot = false;
    std::vector<double> rh_inc;
    if (controls != nullptr) {
      if (!(controls->grid == grid) || controls->d1 != d1 || controls->d2 != d2) {
        throw DomainError("control grid or dimensions do not match the simulation");
      }
      for (double v : controls->hdot) use_hdot = use_hdot || v != 0.0;
      bool use_hbar = false;
      for (double v : controls->hbar.data()) use_hbar = use_hbar || v != 0.0;
      if (use_hbar && coeffs.l) rh_inc = controls->rh_increments(coeffs.hurst);
      if (frozen_law == nullptr) throw DomainError("controlled run needs the uncontrolled law trajectory");
      if (!(frozen_law->grid == grid) || frozen_law->dim != d) {
        throw DomainError("frozen law trajectory does not match the simulation grid");
      }
    }
    const double fast_ctrl = 1.0 / std::sqrt(eps * scales.varepsilon);

    EnsemblePath out(grid, n, d);
    out.scales = scales;
    out.seed = seed;
    out.fast.assign(out.slow.size(), 0.0);
    for (std::size_t p = 0; p < n; ++p) {
      std::copy(x0.begin(), x0.end(), out.x(0, p).begin());
      std::copy(y0.begin(), y0.end(), out.y(0, p).begin());
    }
    const NoiseBank bank = draw_noise(coeffs, grid, n, seed, opts, true);
    const std::vector<double> zeros(std::max(d1, d2), 0.0);

    for (std::size_t k = 0; k < grid.steps(); ++k) {
      const EmpiricalMeasure mu = frozen_law != nullptr ? frozen_law->law(k) : out.law(k);
      parallel_for(opts.pool, n, [&](std::size_t lo, std::size_t hi) {
        FastStepper fs(coeffs);
        std::vector<double> drift(d), mat(d * d1), extra(d), hv(d1 + d2);
        for (std::size_t p = lo; p < hi; ++p) {
          const auto x = out.x(k, p);
          const auto y = out.y(k, p);
          auto xn = out.x(k + 1, p);
          auto yn = out.y(k + 1, p);
          const DrivingPaths& np = bank.paths[p];
          std::span<const double> dw1 = opts.noise ? std::span<const double>(np.w1.data() + k * d1, d1)
                                                   : std::span<const double>(zeros.data(), d1);
          std::span<const double> dw2 = opts.noise ? std::span<const double>(np.w2.data() + k * d2, d2)
                                                   : std::span<const double>(zeros.data(), d2);
          // slow
          coeffs.f1(x, mu, y, drift);
          for (std::size_t c = 0; c < d; ++c) xn[c] = x[c] + drift[c] * dt;
          if (coeffs.g1) {
            coeffs.g1(x, mu, mat);
            if (opts.noise) add_matvec(mat, dw1, sqrt_eps, xn);
            if (use_hdot) {
              for (std::size_t c = 0; c < d1; ++c) hv[c] = controls->hdot_at(k, c) * dt;
              add_matvec(mat, std::span<const double>(hv.data(), d1), 1.0, xn);
            }
          }
          if (coeffs.l && (opts.noise || !rh_inc.empty())) {
            coeffs.l(mu, mat);
            if (opts.noise && !np.bh.empty()) {
              for (std::size_t c = 0; c < d1; ++c) hv[c] = np.bh[(k + 1) * d1 + c] - np.bh[k * d1 + c];
              add_matvec(mat, std::span<const double>(hv.data(), d1), eps_h, xn);
            }
            if (!rh_inc.empty()) add_matvec(mat, std::span<const double>(rh_inc.data() + k * d1, d1), 1.0, xn);
          }
          // fast
          std::copy(y.begin(), y.end(), yn.begin());
          std::fill(extra.begin(), extra.end(), 0.0);
          if (opts.noise) fs.add_noise(x, mu, y, dw1, dw2, inv_sqrt_ve, extra);
          if (use_hdot) {
            for (std::size_t c = 0; c < d1 + d2; ++c) hv[c] = controls->hdot_at(k, c) * dt;
            fs.add_noise(x, mu, y, std::span<const double>(hv.data(), d1),
                         std::span<const double>(hv.data() + d1, d2), fast_ctrl, extra);
          }
          fs.step(x, mu, yn, r, extra);
          require_finite(xn, "slow component", k + 1, p);
          require_finite(yn, "fast component", k + 1, p);
        }
      });
    }
    return out;
  }
};

}  // namespace

double EnsemblePath::slow_moment(std::size_t k, double p) const { return moment_at(slow, k, particles, dim, p); }
double EnsemblePath::fast_moment(std::size_t k, double p) const { return moment_at(fast, k, particles, dim, p); }

EnsemblePath simulate_slow_fast(const CoefficientSet& coeffs, const TimeGrid& grid,
                                const ScaleParams& scales, std::size_t n_particles,
                                std::span<const double> x0, std::span<const double> y0,
                                const SeedSpec& seed, const SimOptions& opts) {
  SlowFastRun run{coeffs, grid, scales, opts};
  return run.run(n_particles, x0, y0, seed);
}

EnsemblePath simulate_controlled(const CoefficientSet& coeffs, const TimeGrid& grid,
                                 const ScaleParams& scales, const ControlPair& controls,
                                 std::size_t n_particles, std::span<const double> x0,
                                 std::span<const double> y0, const SeedSpec& seed,
                                 const EnsemblePath& frozen_law, const SimOptions& opts) {
  SlowFastRun run{coeffs, grid, scales, opts, &controls, &frozen_law};
  return run.run(n_particles, x0, y0, seed);
}

std::vector<double> simulate_frozen_fast(const CoefficientSet& coeffs, std::span<const double> x,
                                         const EmpiricalMeasure& mu, std::span<const double> y0,
                                         const TimeGrid& grid, const SeedSpec& seed,
                                         const SimOptions& opts) {
  coeffs.validate();
  const std::size_t d = coeffs.dims.d;
  const std::size_t d1 = coeffs.dims.d1;
  const std::size_t d2 = coeffs.dims.d2;
  if (x.size() != d || y0.size() != d) throw DomainError("frozen state must have dimension d");
  const double dt = grid.step();
  std::vector<double> path(grid.nodes() * d);
  std::copy(y0.begin(), y0.end(), path.begin());
  RandomStream r1(seed.with_channel(Channel::FrozenW1));
  RandomStream r2(seed.with_channel(Channel::FrozenW2));
  const double sd = std::sqrt(dt);
  FastStepper fs(coeffs);
  std::vector<double> dw1(d1, 0.0), dw2(d2, 0.0), extra(d);
  for (std::size_t k = 0; k < grid.steps(); ++k) {
    std::span<const double> y(path.data() + k * d, d);
    std::span<double> yn(path.data() + (k + 1) * d, d);
    std::copy(y.begin(), y.end(), yn.begin());
    std::fill(extra.begin(), extra.end(), 0.0);
    if (opts.noise) {
      r1.fill_normal(dw1);
      r2.fill_normal(dw2);
      for (double& v : dw1) v *= sd;
      for (double& v : dw2) v *= sd;
      fs.add_noise(x, mu, y, dw1, dw2, 1.0, extra);
    }
    fs.step(x, mu, yn, dt, extra);
    require_finite(yn, "frozen fast process", k + 1, seed.particle);
  }
  return path;
}

EmpiricalMeasure estimate_invariant_measure(const CoefficientSet& coeffs, std::span<const double> x,
                                            const EmpiricalMeasure& mu,
                                            const InvariantOptions& opts, const SeedSpec& seed,
                                            const SimOptions& sim) {
  if (!(opts.burn_in_fraction >= 0.0 && opts.burn_in_fraction < 1.0)) {
    throw DomainError("burn-in must be a fraction of the horizon in [0, 1)");
  }
  if (opts.n_samples == 0 || opts.chains == 0) throw DomainError("need at least one sample and one chain");
  const std::size_t d = coeffs.dims.d;
  const std::size_t chains = std::min(opts.chains, opts.n_samples);
  const auto first = static_cast<std::size_t>(std::ceil(opts.burn_in_fraction * static_cast<double>(opts.grid.steps())));
  const std::size_t last = opts.grid.steps();
  if (first > last) throw DomainError("burn-in exceeds the horizon");
  std::vector<double> points(opts.n_samples * d);
  std::vector<double> y0(d, 0.0);
  SimOptions inner = sim;
  inner.pool = nullptr;
  parallel_for(sim.pool, chains, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t c = lo; c < hi; ++c) {
      const std::size_t begin = opts.n_samples * c / chains;
      const std::size_t end = opts.n_samples * (c + 1) / chains;
      const auto path = simulate_frozen_fast(coeffs, x, mu, y0, opts.grid,
                                             seed.with_particle(static_cast<std::uint32_t>(c)), inner);
      const std::size_t m = end - begin;
      const std::size_t span = last - first;
      for (std::size_t i = 0; i < m; ++i) {
        // evenly thinned nodes in (first, last]
        const std::size_t k = first + (span == 0 ? 0 : ((i + 1) * span) / m);
        for (std::size_t j = 0; j < d; ++j) points[(begin + i) * d + j] = path[k * d + j];
      }
    }
  });
  return EmpiricalMeasure(d, std::move(points));
}

std::vector<double> averaged_drift(const CoefficientSet& coeffs, std::span<const double> x,
                                   const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
  if (nu.size() == 0) throw DomainError("averaged drift needs a nonempty invariant measure");
  const std::size_t d = coeffs.dims.d;
  std::vector<double> acc(d, 0.0), tmp(d);
  for (std::size_t i = 0; i < nu.size(); ++i) {
    coeffs.f1(x, mu, nu.point(i), tmp);
    for (std::size_t c = 0; c < d; ++c) acc[c] += tmp[c];
  }
  for (double& v : acc) v /= static_cast<double>(nu.size());
  return acc;
}

AveragedDrift::AveragedDrift(const CoefficientSet& coeffs, Mode mode, InvariantOptions inv,
                             std::uint64_t seed)
    : coeffs_(std::make_shared<const CoefficientSet>(coeffs)), inv_(inv), seed_(seed) {
  coeffs.validate();
  if (mode == Mode::Analytic && !coeffs.fbar) {
    throw DomainError("model '" + coeffs.id + "' has no closed-form averaged drift");
  }
  analytic_ = mode == Mode::Analytic || (mode == Mode::Auto && static_cast<bool>(coeffs.fbar));
}

EmpiricalMeasure AveragedDrift::invariant(std::span<const double> x, const EmpiricalMeasure& mu) const {
  SeedSpec s;
  s.master_seed = seed_;
  s.channel = Channel::Invariant;
  return estimate_invariant_measure(*coeffs_, x, mu, inv_, s);
}

void AveragedDrift::operator()(std::span<const double> x, const EmpiricalMeasure& mu,
                               std::span<double> out) const {
  if (analytic_) {
    coeffs_->fbar(x, mu, out);
    return;
  }
  const auto v = averaged_drift(*coeffs_, x, mu, invariant(x, mu));
  std::copy(v.begin(), v.end(), out.begin());
}

EnsemblePath simulate_averaged(const AveragedDrift& drift, const TimeGrid& grid,
                               std::size_t n_particles, std::span<const double> x0,
                               const SeedSpec& seed, const SimOptions& opts) {
  const CoefficientSet& coeffs = drift.coefficients();
  check_start(coeffs, x0, x0, n_particles);
  const std::size_t d = coeffs.dims.d;
  const std::size_t d1 = coeffs.dims.d1;
  const double dt = grid.step();
  EnsemblePath out(grid, n_particles, d);
  out.seed = seed;
  out.scales.small_noise = false;
  for (std::size_t p = 0; p < n_particles; ++p) std::copy(x0.begin(), x0.end(), out.x(0, p).begin());
  const NoiseBank bank = draw_noise(coeffs, grid, n_particles, seed, opts, true);

  for (std::size_t k = 0; k < grid.steps(); ++k) {
    const EmpiricalMeasure mu = out.law(k);
    std::unique_ptr<EmpiricalMeasure> nu;
    if (!drift.analytic()) {
      // one invariant measure per step, at the barycenter
      nu = std::make_unique<EmpiricalMeasure>(drift.invariant(mu.mean(), mu));
    }
    parallel_for(opts.pool, n_particles, [&](std::size_t lo, std::size_t hi) {
      std::vector<double> f(d), mat(d * d1), inc(d1);
      for (std::size_t p = lo; p < hi; ++p) {
        const auto x = out.x(k, p);
        auto xn = out.x(k + 1, p);
        if (nu) {
          const auto v = averaged_drift(coeffs, x, mu, *nu);
          std::copy(v.begin(), v.end(), f.begin());
        } else {
          drift(x, mu, f);
        }
        for (std::size_t c = 0; c < d; ++c) xn[c] = x[c] + f[c] * dt;
        const DrivingPaths& np = bank.paths[p];
        if (opts.noise && coeffs.g1) {
          coeffs.g1(x, mu, mat);
          add_matvec(mat, std::span<const double>(np.w1.data() + k * d1, d1), 1.0, xn);
        }
        if (opts.noise && coeffs.l && !np.bh.empty()) {
          coeffs.l(mu, mat);
          for (std::size_t c = 0; c < d1; ++c) inc[c] = np.bh[(k + 1) * d1 + c] - np.bh[k * d1 + c];
          add_matvec(mat, inc, 1.0, xn);
        }
        require_finite(xn, "averaged equation", k + 1, p);
      }
    });
  }
  return out;
}

std::vector<double> solve_limit_ode(const AveragedDrift& drift, const TimeGrid& grid,
                                    std::span<const double> x0) {
  const std::size_t d = drift.coefficients().dims.d;
  if (x0.size() != d) throw DomainError("initial state must have dimension d");
  const double dt = grid.step();
  std::vector<double> path(grid.nodes() * d);
  std::copy(x0.begin(), x0.end(), path.begin());
  std::vector<double> k1(d), k2(d), k3(d), k4(d), tmp(d);
  auto eval = [&](std::span<const double> x, std::span<double> out) {
    drift(x, EmpiricalMeasure::dirac(x), out);
  };
  for (std::size_t k = 0; k < grid.steps(); ++k) {
    std::span<const double> x(path.data() + k * d, d);
    eval(x, k1);
    for (std::size_t c = 0; c < d; ++c) tmp[c] = x[c] + 0.5 * dt * k1[c];
    eval(tmp, k2);
    for (std::size_t c = 0; c < d; ++c) tmp[c] = x[c] + 0.5 * dt * k2[c];
    eval(tmp, k3);
    for (std::size_t c = 0; c < d; ++c) tmp[c] = x[c] + dt * k3[c];
    eval(tmp, k4);
    std::span<double> xn(path.data() + (k + 1) * d, d);
    for (std::size_t c = 0; c < d; ++c) xn[c] = x[c] + dt / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
    require_finite(xn, "limit equation", k + 1, 0);
  }
  return path;
}

std::vector<double> simulate_auxiliary(const CoefficientSet& coeffs, const TimeGrid& grid,
                                       const ScaleParams& scales, const EnsemblePath& run,
                                       const SimOptions& opts) {
  coeffs.validate();
  if (!(run.grid == grid) || run.fast.empty() || run.dim != coeffs.dims.d) {
    throw DomainError("auxiliary process needs a slow-fast run on the same grid");
  }
  scales.validate();
  const double r = stiffness(grid, scales, opts);
  const std::size_t stride = grid.block_stride(scales.resolved_delta(grid));
  const std::size_t n = run.particles;
  const std::size_t d = coeffs.dims.d;
  const std::size_t d1 = coeffs.dims.d1;
  const std::size_t d2 = coeffs.dims.d2;
  const double inv_sqrt_ve = 1.0 / std::sqrt(scales.varepsilon);
  std::vector<double> ybar(run.fast.size());
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t c = 0; c < d; ++c) ybar[p * d + c] = run.fast[p * d + c];
  }
  // same W1 / W2 increments as the run, no fBm needed
  const NoiseBank bank = draw_noise(coeffs, grid, n, run.seed, opts, false);
  std::unique_ptr<EmpiricalMeasure> mu;
  std::size_t mu_block = static_cast<std::size_t>(-1);
  for (std::size_t k = 0; k < grid.steps(); ++k) {
    const std::size_t kb = (k / stride) * stride;
    if (kb != mu_block) {
      mu = std::make_unique<EmpiricalMeasure>(run.law(kb));
      mu_block = kb;
    }
    parallel_for(opts.pool, n, [&](std::size_t lo, std::size_t hi) {
      FastStepper fs(coeffs);
      std::vector<double> extra(d);
      for (std::size_t p = lo; p < hi; ++p) {
        const auto x = run.x(kb, p);
        std::span<const double> y(ybar.data() + (k * n + p) * d, d);
        std::span<double> yn(ybar.data() + ((k + 1) * n + p) * d, d);
        std::copy(y.begin(), y.end(), yn.begin());
        std::fill(extra.begin(), extra.end(), 0.0);
        if (opts.noise) {
          const DrivingPaths& np = bank.paths[p];
          fs.add_noise(x, *mu, y, std::span<const double>(np.w1.data() + k * d1, d1),
                       std::span<const double>(np.w2.data() + k * d2, d2), inv_sqrt_ve, extra);
        }
        fs.step(x, *mu, yn, r, extra);
        require_finite(yn, "auxiliary process", k + 1, p);
      }
    });
  }
  return ybar;
}

double auxiliary_error(const EnsemblePath& run, const std::vector<double>& aux) {
  if (aux.size() != run.fast.size()) throw DomainError("auxiliary path does not match the run");
  const std::size_t n = run.particles;
  const std::size_t d = run.dim;
  double total = 0.0;
  for (std::size_t k = 0; k < run.grid.steps(); ++k) {
    for (std::size_t i = 0; i < n * d; ++i) {
      const double e = run.fast[k * n * d + i] - aux[k * n * d + i];
      total += e * e;
    }
  }
  return total * run.grid.step() / static_cast<double>(n);
}

}  // namespace mkvldp
