#include <cmath>

#include <boost/numeric/odeint.hpp>

#include "doctest.h"
#include "mkvldp/controls.hpp"
#include "mkvldp/dynamics.hpp"
#include "mkvldp/errors.hpp"
#include "mkvldp/frac_ops.hpp"
#include "mkvldp/models.hpp"
#include "mkvldp/stats.hpp"

using namespace mkvldp;

namespace {

// E[X], E[Y] of the linear model solve m_x' = m_y, m_y' = (m_x - m_y) / ve
std::pair<double, double> linear_mean_oracle(double ve, double t) {
  using state = std::array<double, 2>;
  state m = {1.0, 0.0};
  boost::numeric::odeint::integrate_adaptive(
      boost::numeric::odeint::make_controlled<boost::numeric::odeint::runge_kutta_dopri5<state>>(1e-12, 1e-12),
      [ve](const state& s, state& ds, double) {
        ds[0] = s[1];
        ds[1] = (s[0] - s[1]) / ve;
      },
      m, 0.0, t, 1e-4);
  return {m[0], m[1]};
}

}  // namespace

TEST_CASE("scale parameters") {
  ScaleParams s;
  s.epsilon = 0.125;
  const TimeGrid g(1.0, 64);
  CHECK(s.resolved_delta(g) == doctest::Approx(0.25));
  s.epsilon = 0.1;
  CHECK(s.resolved_delta(g) == doctest::Approx(std::floor(std::pow(0.1, 2.0 / 3.0) * 64) / 64));
  const auto c = ScaleParams::coupled(0.1);
  CHECK(c.varepsilon == doctest::Approx(0.01));
  ScaleParams bad;
  bad.epsilon = 0.0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("controls: energies and R_H increments") {
  const TimeGrid g(1.0, 64);
  const HurstParam hp(0.75);
  ControlPair cp(g, 1, 1);
  CHECK(cp.is_zero());
  for (std::size_t k = 0; k < g.steps(); ++k) cp.hdot[k * 2] = 2.0;
  CHECK(cp.energy_h() == doctest::Approx(2.0));
  for (auto& v : cp.hbar.data()) v = 1.0;
  CHECK(cp.energy_hbar(hp) == doctest::Approx(0.5));
  CHECK(cp.within(4.0, hp));
  CHECK_FALSE(cp.within(3.9, hp));
  // R_H 1_[0,T] (t) = R_H(T, t); increments sum to T^{2H}
  const auto inc = cp.rh_increments(hp);
  double sum = 0, half = 0;
  for (std::size_t k = 0; k < inc.size(); ++k) {
    sum += inc[k];
    if (k < 32) half += inc[k];
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(half == doctest::Approx(covariance_rh(1.0, 0.5, hp)).epsilon(1e-10));
}

TEST_CASE("linear model means against the moment ODE") {
  const auto model = builtin_model("linear");
  const TimeGrid g(1.0, 1024);
  ScaleParams s;
  s.varepsilon = 0.05;
  s.small_noise = false;
  const double x0[1] = {1.0}, y0[1] = {0.0};
  const std::size_t n = 2000;
  WorkerPool pool(2);
  const auto e = simulate_slow_fast(model, g, s, n, x0, y0, SeedSpec{7}, SimOptions{&pool});
  std::vector<double> xs(n), ys(n);
  for (std::size_t p = 0; p < n; ++p) {
    xs[p] = e.x(g.steps(), p)[0];
    ys[p] = e.y(g.steps(), p)[0];
  }
  const auto [mx, my] = linear_mean_oracle(0.05, 1.0);
  const auto vx = mean_var(xs), vy = mean_var(ys);
  CHECK(std::abs(vx.mean - mx) < 3.5 * vx.std_error());
  CHECK(std::abs(vy.mean - my) < 3.5 * vy.std_error());
}

TEST_CASE("results do not depend on the thread count") {
  const auto model = builtin_model("mean_field");
  const TimeGrid g(1.0, 64);
  ScaleParams s = ScaleParams::coupled(0.3);
  const double x0[1] = {1.0}, y0[1] = {0.0};
  WorkerPool one(1), many(4);
  const auto a = simulate_slow_fast(model, g, s, 50, x0, y0, SeedSpec{3}, SimOptions{&one});
  const auto b = simulate_slow_fast(model, g, s, 50, x0, y0, SeedSpec{3}, SimOptions{&many});
  CHECK(a.slow == b.slow);
  CHECK(a.fast == b.fast);
  const auto c = simulate_slow_fast(model, g, s, 50, x0, y0, SeedSpec{4}, SimOptions{&many});
  CHECK(a.slow != c.slow);
}

TEST_CASE("controlled runs") {
  const auto model = builtin_model("linear");
  const TimeGrid g(1.0, 128);
  ScaleParams s;
  s.varepsilon = 0.05;
  const double x0[1] = {1.0}, y0[1] = {0.0};
  const auto free = simulate_slow_fast(model, g, s, 20, x0, y0, SeedSpec{7});
  const ControlPair zero(g, 1, 1);
  const auto replay = simulate_controlled(model, g, s, zero, 20, x0, y0, SeedSpec{7}, free);
  CHECK(replay.slow == free.slow);
  CHECK(replay.fast == free.fast);

  // deterministic fBm channel: X_T - x0 = (R_H 1)(T) = T^{2H}
  const auto pf = builtin_model("pure_fbm");
  ControlPair cq(g, 1, 0);
  for (auto& v : cq.hbar.data()) v = 1.0;
  SimOptions off;
  off.noise = false;
  const auto base = simulate_slow_fast(pf, g, s, 2, x0, y0, SeedSpec{1}, off);
  const auto ctl = simulate_controlled(pf, g, s, cq, 2, x0, y0, SeedSpec{1}, base, off);
  CHECK(ctl.x(g.steps(), 0)[0] - 1.0 == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("zero model stays put") {
  const auto z = builtin_model("zero");
  const TimeGrid g(1.0, 16);
  const double x0[1] = {0.5}, y0[1] = {0.2};
  const auto e = simulate_slow_fast(z, g, ScaleParams{}, 4, x0, y0, SeedSpec{1});
  for (std::size_t k = 0; k < g.nodes(); ++k) {
    CHECK(e.x(k, 3)[0] == 0.5);
    CHECK(e.y(k, 3)[0] == 0.2);
  }
}

TEST_CASE("step restriction and blow-up") {
  const auto model = builtin_model("linear");
  const double x0[1] = {1.0}, y0[1] = {0.0};
  ScaleParams s;
  s.varepsilon = 1e-4;
  CHECK_THROWS_AS(simulate_slow_fast(model, TimeGrid(1.0, 64), s, 4, x0, y0, SeedSpec{1}), ResolutionError);

  const auto nc = builtin_model("negative_control");
  ScaleParams u;
  u.varepsilon = 0.1;
  u.small_noise = false;
  bool exploded = false;
  try {
    const auto e = simulate_slow_fast(nc, TimeGrid(1.0, 256), u, 20, x0, y0, SeedSpec{1});
    exploded = e.fast_moment(256, 2.0) > 1e6;
  } catch (const BlowUpError&) {
    exploded = true;
  }
  CHECK(exploded);
}

TEST_CASE("averaged dynamics") {
  const auto ou = builtin_model("ou_averaged");
  const AveragedDrift drift(ou);
  CHECK(drift.analytic());
  const double x0[1] = {1.0};
  const TimeGrid g(1.0, 256);
  const auto lim = solve_limit_ode(drift, g, x0);
  CHECK(lim[256] == doctest::Approx(std::exp(-1.0)).epsilon(1e-10));

  // frozen fast chain of ou_averaged is N(x, 1)
  const AveragedDrift est(ou, AveragedDrift::Mode::Estimated, InvariantOptions{TimeGrid(50.0, 2000), 0.2, 2000, 8}, 5);
  CHECK_FALSE(est.analytic());
  const double x[1] = {0.7};
  const auto nu = est.invariant(x, EmpiricalMeasure::dirac(x));
  std::vector<double> pts(nu.points());
  const auto mv = mean_var(pts);
  CHECK(mv.mean == doctest::Approx(0.7).epsilon(0.15));
  CHECK(mv.variance == doctest::Approx(1.0).epsilon(0.15));
  double out[1];
  est(x, EmpiricalMeasure::dirac(x), out);
  CHECK(out[0] == doctest::Approx(-mv.mean).epsilon(1e-12));

  const auto paths = simulate_averaged(drift, g, 400, x0, SeedSpec{2});
  std::vector<double> xt(400);
  for (std::size_t p = 0; p < 400; ++p) xt[p] = paths.x(256, p)[0];
  const auto m = mean_var(xt);
  // dX = -X dt + dW + dB^H: mean exp(-1)
  CHECK(std::abs(m.mean - std::exp(-1.0)) < 3.5 * m.std_error());
  CHECK_THROWS_AS(AveragedDrift(builtin_model("negative_control"), AveragedDrift::Mode::Analytic), DomainError);
}

TEST_CASE("auxiliary process") {
  const auto model = builtin_model("aux_ou");
  const TimeGrid g(1.0, 128);
  ScaleParams s;
  s.epsilon = 0.125;
  s.varepsilon = 0.0125;
  s.delta = 0.25;
  const double x0[1] = {1.0}, y0[1] = {0.0};
  const auto free = simulate_slow_fast(model, g, s, 40, x0, y0, SeedSpec{2});
  ControlPair cp(g, 1, 1);
  const auto run = simulate_controlled(model, g, s, cp, 40, x0, y0, SeedSpec{2}, free);
  const auto aux = simulate_auxiliary(model, g, s, run);
  CHECK(aux.size() == run.fast.size());
  const double err = auxiliary_error(run, aux);
  CHECK(err > 0.0);
  CHECK(std::isfinite(err));
  // a block of one step freezes nothing
  s.delta = g.step();
  const auto run1 = simulate_controlled(model, g, s, cp, 40, x0, y0, SeedSpec{2}, free);
  CHECK(auxiliary_error(run1, simulate_auxiliary(model, g, s, run1)) < 1e-3 * err);
}
