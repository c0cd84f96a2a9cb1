#include "mkvldp/lemma.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mkvldp/errors.hpp"
#include "mkvldp/ldp.hpp"
#include "mkvldp/measure.hpp"
#include "mkvldp/stats.hpp"

namespace mkvldp {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

double CheckReport::fitted_value(const std::string& name) const {
  for (const auto& [k, v] : fitted) {
    if (k == name) return v;
  }
  throw DomainError("report '" + check + "' has no fitted value '" + name + "'");
}

namespace {

double norm(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

struct Probe {
  std::vector<double> x, y;
  EmpiricalMeasure mu;
};

Probe draw_probe(RandomStream& rng, std::size_t d, const ProbeSpec& spec) {
  std::vector<double> x(d), y(d), c(d), pts(spec.cloud_size * d);
  for (auto& v : x) v = spec.x_box * (2.0 * rng.uniform() - 1.0);
  for (auto& v : y) v = spec.y_box * (2.0 * rng.uniform() - 1.0);
  for (auto& v : c) v = spec.x_box * (2.0 * rng.uniform() - 1.0);
  for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = c[i % d] + spec.cloud_spread * rng.normal();
  return {std::move(x), std::move(y), EmpiricalMeasure(d, std::move(pts))};
}

std::vector<double> state_eval(const StateFn& f, const Probe& p, std::size_t size) {
  std::vector<double> out(size, 0.0);
  if (f) f(p.x, p.mu, p.y, out);
  return out;
}

EnsembleSpec normalized(const EnsembleSpec& ens, std::size_t d) {
  EnsembleSpec e = ens;
  if (e.x0.empty()) e.x0.assign(d, 0.0);
  if (e.y0.empty()) e.y0.assign(d, 0.0);
  if (e.replicates == 0) e.replicates = 1;
  return e;
}

}  // namespace

CheckReport check_assumption_h1(const CoefficientSet& coeffs, const ProbeSpec& spec, std::uint64_t seed) {
  coeffs.validate();
  CheckReport rep;
  rep.check = "h1";
  rep.model = coeffs.id;
  rep.parameters = {{"probes", static_cast<double>(spec.probes)},
                    {"x_box", spec.x_box},
                    {"y_box", spec.y_box},
                    {"cloud_size", static_cast<double>(spec.cloud_size)},
                    {"declared_C", coeffs.lipschitz_c},
                    {"declared_alpha", coeffs.dissipativity_alpha}};
  rep.columns = {"probe", "kind", "ratio_01", "ratio_01a", "ratio_01b", "observed_alpha"};
  const std::size_t d = coeffs.dims.d, d1 = coeffs.dims.d1, d2 = coeffs.dims.d2;
  RandomStream rng(SeedSpec{seed, 0, 0, Channel::Probe});
  double r01 = 0.0, r01a = 0.0, r01b = 0.0;
  double alpha_min = std::numeric_limits<double>::infinity();
  double worst_slack = -std::numeric_limits<double>::infinity();
  std::string witness;
  for (std::size_t i = 0; i < spec.probes; ++i) {
    Probe p1 = draw_probe(rng, d, spec);
    Probe p2 = draw_probe(rng, d, spec);
    // kinds: 0 all arguments differ, 1 only x, 2 only y, 3 only mu
    const int kind = static_cast<int>(i % 4);
    if (kind == 1 || kind == 3) p2.y = p1.y;
    if (kind == 2 || kind == 3) p2.x = p1.x;
    if (kind == 1 || kind == 2) p2.mu = p1.mu;
    const double dx = norm(p1.x, p2.x);
    const double dy = norm(p1.y, p2.y);
    const double w2 = kind == 1 || kind == 2 ? 0.0 : wasserstein2(p1.mu, p2.mu).value;

    double num = norm(state_eval(coeffs.f1, p1, d), state_eval(coeffs.f1, p2, d)) +
                 norm(state_eval(coeffs.b, p1, d), state_eval(coeffs.b, p2, d)) +
                 norm(state_eval(coeffs.sigma1, p1, d * d1), state_eval(coeffs.sigma1, p2, d * d1)) +
                 norm(state_eval(coeffs.sigma2, p1, d * d2), state_eval(coeffs.sigma2, p2, d * d2));
    const double q01 = num / (dx + dy + w2);
    double q01a = 0.0, q01b = 0.0;
    if (coeffs.g1 && dx + w2 > 0.0) {
      std::vector<double> a(d * d1), b(d * d1);
      coeffs.g1(p1.x, p1.mu, a);
      coeffs.g1(p2.x, p2.mu, b);
      q01a = norm(a, b) / (dx + w2);
    }
    if (coeffs.l && w2 > 0.0) {
      std::vector<double> a(d * d1), b(d * d1);
      coeffs.l(p1.mu, a);
      coeffs.l(p2.mu, b);
      q01b = norm(a, b) / w2;
    }
    // dissipativity at (x1, mu1) with y1, y2
    Probe q2 = p1;
    q2.y = p2.y;
    if (kind != 2) {
      // fresh y so every probe tests the fast direction
      for (auto& v : q2.y) v = spec.y_box * (2.0 * rng.uniform() - 1.0);
    }
    const auto b1 = state_eval(coeffs.b, p1, d);
    const auto b2 = state_eval(coeffs.b, q2, d);
    double inner = 0.0;
    for (std::size_t c = 0; c < d; ++c) inner += (b1[c] - b2[c]) * (p1.y[c] - q2.y[c]);
    const double s1 = norm(state_eval(coeffs.sigma1, p1, d * d1), state_eval(coeffs.sigma1, q2, d * d1));
    const double s2 = norm(state_eval(coeffs.sigma2, p1, d * d2), state_eval(coeffs.sigma2, q2, d * d2));
    const double dyy = norm(p1.y, q2.y);
    const double lhs = 4.0 * inner + 6.0 * s1 * s1 + 6.0 * s2 * s2;
    const double alpha_obs = dyy > 0.0 ? -lhs / (dyy * dyy) : std::numeric_limits<double>::infinity();
    const double slack = lhs + coeffs.dissipativity_alpha * dyy * dyy;
    if (slack > worst_slack) {
      worst_slack = slack;
      witness = "x = " + fmt(p1.x[0]) + ", y1 = " + fmt(p1.y[0]) + ", y2 = " + fmt(q2.y[0]);
    }
    r01 = std::max(r01, q01);
    r01a = std::max(r01a, q01a);
    r01b = std::max(r01b, q01b);
    alpha_min = std::min(alpha_min, alpha_obs);
    rep.rows.push_back({static_cast<double>(i), static_cast<double>(kind), q01, q01a, q01b, alpha_obs});
  }
  rep.fitted = {{"max_ratio_01", r01},         {"max_ratio_01a", r01a},   {"max_ratio_01b", r01b},
                {"min_observed_alpha", alpha_min}, {"worst_slack", worst_slack}};
  const double c_tol = coeffs.lipschitz_c * (1.0 + 1e-9);
  const bool lip_ok = r01 <= c_tol && r01a <= c_tol && r01b <= c_tol;
  const bool diss_ok = alpha_min >= coeffs.dissipativity_alpha * (1.0 - 1e-9);
  rep.verdict = lip_ok && diss_ok ? Verdict::Pass : Verdict::Fail;
  if (!lip_ok) rep.notes += "Lipschitz ratio above declared C; ";
  if (!diss_ok) rep.notes += "dissipativity violated, witness " + witness + " (slack " + fmt(worst_slack) + "); ";
  if (rep.notes.empty()) rep.notes = "all probes within declared constants";
  return rep;
}

CheckReport check_moment_bounds(const CoefficientSet& coeffs, const TimeGrid& grid,
                                const std::vector<double>& varepsilons, const EnsembleSpec& ens_in) {
  const EnsembleSpec ens = normalized(ens_in, coeffs.dims.d);
  CheckReport rep;
  rep.check = "moments";
  rep.model = coeffs.id;
  rep.parameters = {{"T", grid.horizon()},
                    {"steps", static_cast<double>(grid.steps())},
                    {"particles", static_cast<double>(ens.particles)},
                    {"replicates", static_cast<double>(ens.replicates)}};
  rep.columns = {"varepsilon", "sup_EX4", "sup_EY4"};
  if (varepsilons.empty()) throw DomainError("moment check needs a varepsilon grid");
  try {
    for (double ve : varepsilons) {
      ScaleParams sc;
      sc.varepsilon = ve;
      sc.small_noise = false;
      std::vector<double> mx(grid.nodes(), 0.0), my(grid.nodes(), 0.0);
      for (std::uint32_t r = 0; r < ens.replicates; ++r) {
        const auto e = simulate_slow_fast(coeffs, grid, sc, ens.particles, ens.x0, ens.y0,
                                          SeedSpec{ens.seed, r}, ens.sim);
        for (std::size_t k = 0; k < grid.nodes(); ++k) {
          mx[k] += e.slow_moment(k, 4.0) / ens.replicates;
          my[k] += e.fast_moment(k, 4.0) / ens.replicates;
        }
      }
      rep.rows.push_back({ve, *std::max_element(mx.begin(), mx.end()), *std::max_element(my.begin(), my.end())});
    }
  } catch (const BlowUpError& e) {
    rep.verdict = Verdict::Fail;
    rep.notes = std::string("blow-up: ") + e.what();
    return rep;
  }
  double lo_x = 1e300, hi_x = 0.0, lo_y = 1e300, hi_y = 0.0;
  bool finite = true;
  for (const auto& row : rep.rows) {
    finite = finite && std::isfinite(row[1]) && std::isfinite(row[2]);
    lo_x = std::min(lo_x, row[1]);
    hi_x = std::max(hi_x, row[1]);
    lo_y = std::min(lo_y, row[2]);
    hi_y = std::max(hi_y, row[2]);
  }
  // band = max / min; identical zero moments count as band 1
  auto band = [](double lo, double hi) { return hi == 0.0 ? 1.0 : (lo > 0.0 ? hi / lo : 1e300); };
  const double bx = band(lo_x, hi_x), by = band(lo_y, hi_y);
  rep.fitted = {{"band_x", bx}, {"band_y", by}, {"sup_EX4", hi_x}, {"sup_EY4", hi_y}};
  const bool ok = finite && bx <= 1.5 && by <= 1.5;
  rep.verdict = ok ? Verdict::Pass : Verdict::Fail;
  rep.notes = ok ? "fourth moments within the 50% band" : "fourth moments not finite or outside the 50% band";
  return rep;
}

CheckReport check_increment_scaling(const CoefficientSet& coeffs, const TimeGrid& grid,
                                    const ScaleParams& scales, const EnsembleSpec& ens_in,
                                    double min_slope, double max_slope) {
  const EnsembleSpec ens = normalized(ens_in, coeffs.dims.d);
  if (grid.steps() % 256 != 0) throw DomainError("increment check needs a step count divisible by 256");
  CheckReport rep;
  rep.check = "increments";
  rep.model = coeffs.id;
  rep.parameters = {{"T", grid.horizon()},
                    {"steps", static_cast<double>(grid.steps())},
                    {"epsilon", scales.epsilon},
                    {"varepsilon", scales.varepsilon},
                    {"particles", static_cast<double>(ens.particles)},
                    {"min_slope", min_slope}};
  rep.columns = {"u", "mean_sq_increment"};
  const std::size_t n = grid.steps();
  const std::size_t d = coeffs.dims.d;
  std::vector<double> msd(5, 0.0), count(5, 0.0);
  try {
    for (std::uint32_t r = 0; r < ens.replicates; ++r) {
      const auto e = simulate_slow_fast(coeffs, grid, scales, ens.particles, ens.x0, ens.y0,
                                        SeedSpec{ens.seed, r}, ens.sim);
      for (std::size_t j = 0; j < 5; ++j) {
        const std::size_t lag = (n / 256) << j;
        for (std::size_t k = 0; k + lag <= n; ++k) {
          for (std::size_t p = 0; p < ens.particles; ++p) {
            const auto a = e.x(k, p);
            const auto b = e.x(k + lag, p);
            double s = 0.0;
            for (std::size_t c = 0; c < d; ++c) s += (b[c] - a[c]) * (b[c] - a[c]);
            msd[j] += s;
            count[j] += 1.0;
          }
        }
      }
    }
  } catch (const BlowUpError& e) {
    rep.verdict = Verdict::Fail;
    rep.notes = std::string("blow-up: ") + e.what();
    return rep;
  }
  std::vector<double> lu, lm;
  for (std::size_t j = 0; j < 5; ++j) {
    const double u = grid.horizon() / 256.0 * static_cast<double>(1u << j);
    msd[j] /= count[j];
    rep.rows.push_back({u, msd[j]});
    if (msd[j] > 0.0) {
      lu.push_back(std::log(u));
      lm.push_back(std::log(msd[j]));
    }
  }
  if (lu.size() < 2) {
    rep.verdict = Verdict::Inconclusive;
    rep.notes = "increments vanish";
    return rep;
  }
  const LineFit fit = fit_line(lu, lm);
  rep.fitted = {{"slope", fit.slope}, {"r_squared", fit.r_squared}, {"intercept", fit.intercept}};
  const bool ok = fit.slope >= min_slope && fit.slope <= max_slope && fit.r_squared >= 0.95;
  rep.verdict = ok ? Verdict::Pass : Verdict::Fail;
  rep.notes = "log-log slope " + fmt(fit.slope) + ", R^2 " + fmt(fit.r_squared);
  return rep;
}

CheckReport check_auxiliary_error(const CoefficientSet& coeffs, const TimeGrid& grid,
                                  const std::vector<AuxiliaryPoint>& points, const ControlPair& controls,
                                  const EnsembleSpec& ens_in, double halving_factor) {
  const EnsembleSpec ens = normalized(ens_in, coeffs.dims.d);
  CheckReport rep;
  rep.check = "auxiliary";
  rep.model = coeffs.id;
  rep.parameters = {{"T", grid.horizon()},
                    {"steps", static_cast<double>(grid.steps())},
                    {"particles", static_cast<double>(ens.particles)},
                    {"replicates", static_cast<double>(ens.replicates)},
                    {"halving_factor", halving_factor}};
  rep.columns = {"epsilon", "ratio", "delta", "error", "fit"};
  std::vector<double> err(points.size(), 0.0);
  try {
    // controlled runs depend on (epsilon, ratio) only
    for (std::size_t i = 0; i < points.size(); ++i) {
      bool done = false;
      for (std::size_t j = 0; j < i && !done; ++j) {
        done = points[j].epsilon == points[i].epsilon && points[j].ratio == points[i].ratio &&
               points[j].delta == points[i].delta;
        if (done) err[i] = err[j];
      }
      if (done) continue;
      ScaleParams sc;
      sc.epsilon = points[i].epsilon;
      sc.varepsilon = points[i].ratio * points[i].epsilon;
      sc.delta = points[i].delta;
      for (std::uint32_t r = 0; r < ens.replicates; ++r) {
        const SeedSpec seed{ens.seed, r};
        const auto free_run = simulate_slow_fast(coeffs, grid, sc, ens.particles, ens.x0, ens.y0, seed, ens.sim);
        const auto run = simulate_controlled(coeffs, grid, sc, controls, ens.particles, ens.x0, ens.y0, seed,
                                             free_run, ens.sim);
        const auto aux = simulate_auxiliary(coeffs, grid, sc, run, ens.sim);
        err[i] += auxiliary_error(run, aux) / ens.replicates;
      }
    }
  } catch (const BlowUpError& e) {
    rep.verdict = Verdict::Fail;
    rep.notes = std::string("blow-up: ") + e.what();
    return rep;
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!std::isfinite(err[i])) {
      rep.verdict = Verdict::Fail;
      rep.notes = "non-finite error at point " + std::to_string(i);
      return rep;
    }
  }
  if (*std::max_element(err.begin(), err.end()) == 0.0) {
    for (std::size_t i = 0; i < points.size(); ++i) {
      rep.rows.push_back({points[i].epsilon, points[i].ratio, points[i].delta, 0.0, 0.0});
    }
    rep.fitted = {{"a", 0.0}, {"b", 0.0}, {"c", 0.0}, {"max_relative_residual", 0.0}};
    rep.verdict = Verdict::Pass;
    rep.notes = "errors vanish: frozen and unfrozen coefficients agree";
    return rep;
  }
  if (points.size() < 3) {
    rep.verdict = Verdict::Inconclusive;
    rep.notes = "need three or more points to fit a, b, c";
    for (std::size_t i = 0; i < points.size(); ++i) {
      rep.rows.push_back({points[i].epsilon, points[i].ratio, points[i].delta, err[i], 0.0});
    }
    return rep;
  }
  Eigen::MatrixXd a(points.size(), 3);
  Eigen::VectorXd y(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    a(i, 0) = points[i].ratio;
    a(i, 1) = points[i].delta;
    a(i, 2) = 1.0;
    y(i) = err[i];
  }
  const Eigen::Vector3d coef = a.colPivHouseholderQr().solve(y);
  double worst = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double fit = a.row(i).dot(coef);
    worst = std::max(worst, std::abs(err[i] - fit) / std::abs(fit));
    rep.rows.push_back({points[i].epsilon, points[i].ratio, points[i].delta, err[i], fit});
  }
  double halving = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = 0; j < points.size(); ++j) {
      const bool pair = points[i].epsilon == points[j].epsilon &&
                        std::abs(points[j].ratio - 0.5 * points[i].ratio) <= 1e-12 * points[i].ratio &&
                        std::abs(points[j].delta - 0.5 * points[i].delta) <= 1e-12 * points[i].delta;
      if (pair) halving = std::min(halving, err[i] / err[j]);
    }
  }
  rep.fitted = {{"a", coef(0)}, {"b", coef(1)}, {"c", coef(2)}, {"max_relative_residual", worst}};
  if (std::isfinite(halving)) rep.fitted.emplace_back("halving_reduction", halving);
  const bool signs = coef(0) >= 0.0 && coef(1) >= 0.0;
  const bool resid = worst < 0.3;
  const bool halves = !std::isfinite(halving) || halving >= halving_factor;
  rep.verdict = signs && resid && halves ? Verdict::Pass : Verdict::Fail;
  rep.notes = "a = " + fmt(coef(0)) + ", b = " + fmt(coef(1)) + ", c = " + fmt(coef(2)) +
              ", worst residual " + fmt(worst);
  if (std::isfinite(halving)) rep.notes += ", halving reduction " + fmt(halving);
  else rep.notes += ", no halving pair in the grid";
  return rep;
}

CheckReport check_averaging(const CoefficientSet& coeffs, const AveragedDrift& limit_drift,
                            const TimeGrid& grid, const std::vector<double>& epsilons,
                            const EnsembleSpec& ens_in, double floor) {
  const EnsembleSpec ens = normalized(ens_in, coeffs.dims.d);
  CheckReport rep;
  rep.check = "averaging";
  rep.model = coeffs.id;
  rep.parameters = {{"T", grid.horizon()},
                    {"steps", static_cast<double>(grid.steps())},
                    {"particles", static_cast<double>(ens.particles)},
                    {"replicates", static_cast<double>(ens.replicates)},
                    {"floor", floor},
                    {"analytic_fbar", limit_drift.analytic() ? 1.0 : 0.0}};
  rep.columns = {"epsilon", "varepsilon", "sup_mean_sq_error"};
  const std::size_t d = coeffs.dims.d;
  try {
    const auto limit = solve_limit_ode(limit_drift, grid, ens.x0);
    for (double eps : epsilons) {
      ScaleParams sc;
      sc.epsilon = eps;
      sc.varepsilon = eps * eps;
      std::vector<double> mse(grid.nodes(), 0.0);
      for (std::uint32_t r = 0; r < ens.replicates; ++r) {
        const auto e = simulate_slow_fast(coeffs, grid, sc, ens.particles, ens.x0, ens.y0, SeedSpec{ens.seed, r}, ens.sim);
        for (std::size_t k = 0; k < grid.nodes(); ++k) {
          double s = 0.0;
          for (std::size_t p = 0; p < ens.particles; ++p) {
            const auto x = e.x(k, p);
            for (std::size_t c = 0; c < d; ++c) s += (x[c] - limit[k * d + c]) * (x[c] - limit[k * d + c]);
          }
          mse[k] += s / static_cast<double>(ens.particles * ens.replicates);
        }
      }
      rep.rows.push_back({eps, sc.varepsilon, *std::max_element(mse.begin(), mse.end())});
    }
  } catch (const BlowUpError& e) {
    rep.verdict = Verdict::Fail;
    rep.notes = std::string("blow-up: ") + e.what();
    return rep;
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < rep.rows.size(); ++i) decreasing = decreasing && rep.rows[i][2] < rep.rows[i - 1][2];
  const double last = rep.rows.empty() ? 0.0 : rep.rows.back()[2];
  rep.fitted = {{"final_error", last}, {"decreasing", decreasing ? 1.0 : 0.0}};
  rep.verdict = decreasing && last < floor ? Verdict::Pass : Verdict::Fail;
  rep.notes = std::string(decreasing ? "errors strictly decreasing" : "errors not monotone") + ", final " + fmt(last);
  return rep;
}

CheckReport check_fbar_lipschitz(const AveragedDrift& drift, const ProbeSpec& spec, std::uint64_t seed) {
  const CoefficientSet& coeffs = drift.coefficients();
  CheckReport rep;
  rep.check = "fbar_lipschitz";
  rep.model = coeffs.id;
  rep.parameters = {{"probes", static_cast<double>(spec.probes)},
                    {"declared_C", coeffs.lipschitz_c},
                    {"analytic_fbar", drift.analytic() ? 1.0 : 0.0}};
  rep.columns = {"probe", "dx", "w2", "ratio"};
  const std::size_t d = coeffs.dims.d;
  RandomStream rng(SeedSpec{seed, 1, 0, Channel::Probe});
  std::vector<double> f1(d), f2(d);
  double worst = 0.0;
  for (std::size_t i = 0; i < spec.probes; ++i) {
    Probe p1 = draw_probe(rng, d, spec);
    Probe p2 = draw_probe(rng, d, spec);
    if (i % 2 == 1) p2.mu = p1.mu;
    const double dx = norm(p1.x, p2.x);
    const double w2 = i % 2 == 1 ? 0.0 : wasserstein2(p1.mu, p2.mu).value;
    drift(p1.x, p1.mu, f1);
    drift(p2.x, p2.mu, f2);
    const double ratio = norm(f1, f2) / (dx + w2);
    worst = std::max(worst, ratio);
    rep.rows.push_back({static_cast<double>(i), dx, w2, ratio});
  }
  rep.fitted = {{"max_ratio", worst}};
  rep.verdict = worst <= 2.0 * coeffs.lipschitz_c ? Verdict::Pass : Verdict::Fail;
  rep.notes = "max ratio " + fmt(worst) + " against 2C = " + fmt(2.0 * coeffs.lipschitz_c);
  return rep;
}

CheckReport check_skeleton_continuity(const AveragedDrift& drift, const TimeGrid& grid,
                                      const ControlPair& base, const ControlPair& perturbation,
                                      std::span<const double> x0) {
  const CoefficientSet& coeffs = drift.coefficients();
  if (!(base.grid == perturbation.grid) || base.d1 != perturbation.d1 || base.d2 != perturbation.d2 ||
      !base.hbar.same_layout(perturbation.hbar)) {
    throw DomainError("base control and perturbation must share the layout");
  }
  CheckReport rep;
  rep.check = "skeleton";
  rep.model = coeffs.id;
  rep.parameters = {{"T", grid.horizon()}, {"steps", static_cast<double>(grid.steps())}};
  rep.columns = {"n", "sup_distance"};
  const std::size_t d = coeffs.dims.d;
  const auto ref = solve_skeleton(drift, grid, base, x0);
  std::vector<double> dist;
  for (std::size_t n = 1; n <= 64; n *= 2) {
    ControlPair c = base;
    for (std::size_t i = 0; i < c.hdot.size(); ++i) c.hdot[i] += perturbation.hdot[i] / static_cast<double>(n);
    for (std::size_t i = 0; i < c.hbar.data().size(); ++i) {
      c.hbar.data()[i] += perturbation.hbar.data()[i] / static_cast<double>(n);
    }
    const auto sk = solve_skeleton(drift, grid, c, x0);
    double m = 0.0;
    for (std::size_t i = 0; i < grid.nodes() * d; ++i) m = std::max(m, std::abs(sk.x[i] - ref.x[i]));
    dist.push_back(m);
    rep.rows.push_back({static_cast<double>(n), m});
  }
  bool monotone = true;
  for (std::size_t i = 1; i < dist.size(); ++i) {
    monotone = monotone && (dist[i] < dist[i - 1] || (dist[i] <= 1e-12 && dist[i - 1] <= 1e-12));
  }
  rep.fitted = {{"final_distance", dist.back()}, {"monotone", monotone ? 1.0 : 0.0}};
  rep.verdict = monotone && dist.back() < 1e-3 ? Verdict::Pass : Verdict::Fail;
  rep.notes = "distance at n = 64: " + fmt(dist.back());
  return rep;
}

std::vector<CheckReport> run_suite(const std::vector<CheckTask>& tasks, WorkerPool* pool) {
  std::vector<CheckReport> out(tasks.size());
  parallel_for(pool, tasks.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      try {
        out[i] = tasks[i]();
      } catch (const std::exception& e) {
        out[i].check = "task " + std::to_string(i);
        out[i].verdict = Verdict::Fail;
        out[i].notes = std::string("error: ") + e.what();
      }
    }
  });
  return out;
}

std::vector<std::string> default_suite_checks() {
  return {"h1", "moments", "increments", "auxiliary", "averaging", "fbar_lipschitz", "skeleton"};
}

std::vector<CheckReport> default_suite(const CoefficientSet& coeffs, const SuiteOptions& opts) {
  for (const auto& name : opts.only) {
    const auto all = default_suite_checks();
    if (std::find(all.begin(), all.end(), name) == all.end()) throw DomainError("unknown check '" + name + "'");
  }
  auto wanted = [&](const char* name) {
    return opts.only.empty() || std::find(opts.only.begin(), opts.only.end(), name) != opts.only.end();
  };
  const std::size_t d = coeffs.dims.d;
  EnsembleSpec ens;
  ens.particles = opts.particles;
  ens.seed = opts.seed;
  ens.x0.assign(d, 1.0);
  ens.y0.assign(d, 0.0);

  std::vector<CheckTask> tasks;
  std::vector<std::string> names;
  auto add = [&](const char* name, CheckTask t) {
    if (!wanted(name)) return;
    names.emplace_back(name);
    tasks.push_back([name, t = std::move(t)] {
      CheckReport r = t();
      r.check = name;
      return r;
    });
  };
  add("h1", [&] { return check_assumption_h1(coeffs, ProbeSpec{}, opts.seed); });
  add("moments", [&] { return check_moment_bounds(coeffs, TimeGrid(1.0, 256), {0.1, 0.05, 0.01}, ens); });
  add("increments", [&] {
    ScaleParams sc;
    sc.varepsilon = 0.01;
    sc.small_noise = false;
    return check_increment_scaling(coeffs, TimeGrid(1.0, 1024), sc, ens);
  });
  add("auxiliary", [&] {
    const TimeGrid grid(1.0, 512);
    ControlPair cp(grid, coeffs.dims.d1, coeffs.dims.d2);
    // constant control on the last noise channel
    const std::size_t w = coeffs.dims.d1 + coeffs.dims.d2;
    for (std::size_t k = 0; k < grid.steps(); ++k) cp.hdot[k * w + w - 1] = 0.5;
    std::vector<AuxiliaryPoint> pts;
    for (double ratio : {0.02, 0.04, 0.08}) {
      for (double delta : {1.0 / 32, 1.0 / 16, 1.0 / 8, 1.0 / 4}) pts.push_back({0.125, ratio, delta});
    }
    return check_auxiliary_error(coeffs, grid, pts, cp, ens);
  });
  add("averaging", [&] {
    AveragedDrift fbar(coeffs, AveragedDrift::Mode::Auto, InvariantOptions{}, opts.seed);
    return check_averaging(coeffs, fbar, TimeGrid(1.0, 256), {0.2, 0.1, 0.05, 0.02}, ens);
  });
  add("fbar_lipschitz", [&] {
    AveragedDrift fbar(coeffs, AveragedDrift::Mode::Auto, InvariantOptions{}, opts.seed);
    ProbeSpec spec;
    spec.probes = fbar.analytic() ? 200 : 20;
    return check_fbar_lipschitz(fbar, spec, opts.seed);
  });
  add("skeleton", [&] {
    const TimeGrid grid(1.0, 128);
    AveragedDrift fbar(coeffs, AveragedDrift::Mode::Auto, InvariantOptions{}, opts.seed);
    ControlPair base(grid, coeffs.dims.d1, coeffs.dims.d2);
    ControlPair pert = base;
    for (std::size_t k = 0; k < grid.steps(); ++k) {
      const double t = grid.node(k) + 0.5 * grid.step();
      for (std::size_t c = 0; c < coeffs.dims.d1; ++c) {
        base.hdot[k * (coeffs.dims.d1 + coeffs.dims.d2) + c] = 0.5;
        pert.hdot[k * (coeffs.dims.d1 + coeffs.dims.d2) + c] = 0.05 * std::sin(2.0 * M_PI * t);
        pert.hbar.at(k, c) = 0.05;
      }
    }
    return check_skeleton_continuity(fbar, grid, base, pert, ens.x0);
  });
  auto reports = run_suite(tasks, opts.pool);
  for (std::size_t i = 0; i < reports.size(); ++i) {
    if (reports[i].model.empty()) reports[i].model = coeffs.id;
    reports[i].check = names[i];
  }
  return reports;
}

}  // namespace mkvldp
