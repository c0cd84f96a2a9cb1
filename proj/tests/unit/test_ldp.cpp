#include <cmath>

#include <boost/math/distributions/normal.hpp>

#include "doctest.h"
#include "mkvldp/errors.hpp"
#include "mkvldp/ldp.hpp"
#include "mkvldp/models.hpp"

using namespace mkvldp;

namespace {
const double kX0[1] = {0.0};
}

TEST_CASE("rate function closed forms on a coarse grid") {
  const TimeGrid g(1.0, 64);
  const double h = 0.75;
  struct Case {
    const char* model;
    double denom;  // I(a) = a^2 / (2 denom)
  };
  for (const Case c : {Case{"linear_gaussian", 1.0}, Case{"pure_fbm", 1.0}, Case{"mixed_gaussian", 2.0}}) {
    const auto coeffs = builtin_model(c.model, h);
    const AveragedDrift drift(coeffs);
    for (double a : {0.5, 2.0}) {
      const auto r = rate_function(drift, g, EndpointConstraint::point({a}), kX0);
      CHECK(r.converged);
      CHECK(r.value == doctest::Approx(a * a / (2 * c.denom)).epsilon(0.02));
      CHECK(r.skeleton.x[64] == doctest::Approx(a).epsilon(1e-3));
    }
  }
}

TEST_CASE("rate on a longer horizon separates the two speeds") {
  // T = 2: Brownian part a^2 / (2T), fractional part a^2 / (2 T^{2H})
  const TimeGrid g(2.0, 64);
  const auto lg = rate_function(AveragedDrift(builtin_model("linear_gaussian")), g, EndpointConstraint::point({1.0}), kX0);
  const auto pf = rate_function(AveragedDrift(builtin_model("pure_fbm")), g, EndpointConstraint::point({1.0}), kX0);
  CHECK(lg.value == doctest::Approx(1.0 / 4.0).epsilon(0.02));
  CHECK(pf.value == doctest::Approx(1.0 / (2 * std::pow(2.0, 1.5))).epsilon(0.02));
}

TEST_CASE("zero target costs nothing") {
  const TimeGrid g(1.0, 32);
  const auto r = rate_function(AveragedDrift(builtin_model("mixed_gaussian")), g, EndpointConstraint::point({0.0}), kX0);
  CHECK(r.converged);
  CHECK(r.value == 0.0);
  CHECK(r.controls.is_zero());
}

TEST_CASE("adjoint and finite-difference gradients agree") {
  const TimeGrid g(1.0, 16);
  const AveragedDrift drift(builtin_model("mean_field"));
  const double x1[1] = {0.3};
  RateOptions fd;
  fd.gradient = GradientMode::FiniteDifference;
  const auto a = rate_function(drift, g, EndpointConstraint::point({1.0}), x1);
  const auto b = rate_function(drift, g, EndpointConstraint::point({1.0}), x1, fd);
  CHECK(a.value == doctest::Approx(b.value).epsilon(1e-6));
  CHECK(a.value > 0.0);
}

TEST_CASE("restarts and infeasible reporting") {
  const TimeGrid g(1.0, 32);
  const AveragedDrift drift(builtin_model("linear_gaussian"));
  RateOptions r;
  r.restarts = 2;
  r.seed = 9;
  WorkerPool pool(2);
  r.pool = &pool;
  const auto res = rate_function(drift, g, EndpointConstraint::point({1.0}), kX0, r);
  CHECK(res.restart_values.size() == 3);
  CHECK(res.value == doctest::Approx(0.5).epsilon(0.02));

  RateOptions starved;
  starved.rounds = 1;
  starved.inner.max_iterations = 1;
  const auto bad = rate_function(drift, g, EndpointConstraint::point({5.0}), kX0, starved);
  CHECK_FALSE(bad.converged);
  CHECK_FALSE(bad.status.empty());

  // functional constraint 2 X_T - 2 = 0
  const auto fn = EndpointConstraint::terminal([](std::span<const double> x, std::span<double> o) { o[0] = 2 * x[0] - 2; }, 1);
  const auto rf = rate_function(drift, g, fn, kX0);
  CHECK(rf.value == doctest::Approx(0.5).epsilon(0.02));

  // X_T^2 = 1 has a zero gradient at the zero control: stuck, and reported as such
  const auto sq = EndpointConstraint::terminal([](std::span<const double> x, std::span<double> o) { o[0] = x[0] * x[0] - 1; }, 1);
  const auto rs = rate_function(drift, g, sq, kX0);
  CHECK_FALSE(rs.converged);
  CHECK(rs.violation > 0.5);
}

TEST_CASE("skeleton with zero controls is the limit path") {
  const TimeGrid g(1.0, 64);
  const AveragedDrift drift(builtin_model("ou_averaged"));
  const double x0[1] = {1.0};
  const auto sk = solve_skeleton(drift, g, ControlPair(g, 1, 1), x0);
  for (std::size_t k = 0; k < g.nodes(); ++k) CHECK(sk.x[k] == sk.limit[k]);
  CHECK(sk.x[64] == doctest::Approx(std::exp(-1.0)).epsilon(1e-8));
}

TEST_CASE("rare events") {
  const auto model = builtin_model("linear_gaussian");
  const TimeGrid g(1.0, 32);
  const double y0[1] = {0.0};
  std::vector<ScaleParams> scales = {ScaleParams::coupled(0.25)};
  MonteCarloOptions mc;
  mc.batch = 2000;

  const auto all = estimate_rare_event(model, g, scales, kX0, y0, [](std::span<const double>) { return true; }, 4000,
                                       SeedSpec{1}, mc);
  CHECK(all[0].p_hat == 1.0);
  CHECK(all[0].trials == 4000);

  const auto none = estimate_rare_event(model, g, scales, kX0, y0, [](std::span<const double>) { return false; }, 1000,
                                        SeedSpec{1}, mc);
  CHECK(none[0].hits == 0);
  CHECK_FALSE(none[0].usable);
  CHECK_FALSE(none[0].flag.empty());

  // X_T = sqrt(eps) W_T, so P(X_T >= 1) = P(Z >= 2)
  const auto tail = estimate_rare_event(model, g, scales, kX0, y0, [](std::span<const double> x) { return x[0] >= 1.0; },
                                        20000, SeedSpec{2}, mc);
  const double p = boost::math::cdf(boost::math::complement(boost::math::normal(), 2.0));
  CHECK(tail[0].ci_lower < p);
  CHECK(tail[0].ci_upper > p);
  CHECK(tail[0].eps_log_p == doctest::Approx(0.25 * std::log(tail[0].p_hat)));
}

TEST_CASE("Laplace functional") {
  const auto model = builtin_model("linear_gaussian");
  const TimeGrid g(1.0, 16);
  const double y0[1] = {0.0};
  std::vector<ScaleParams> scales = {ScaleParams::coupled(0.5)};
  const auto flat = laplace_functional(model, g, scales, kX0, y0, [](std::span<const double>) { return 0.3; }, 1.0, 500,
                                       SeedSpec{1});
  CHECK(flat[0].value_eps == doctest::Approx(0.3));
  CHECK(flat[0].value_eps2h == doctest::Approx(0.3));
  CHECK(flat[0].degenerate);
  const auto clamp = laplace_functional(model, g, scales, kX0, y0, [](std::span<const double>) { return 5.0; }, 1.0, 100,
                                        SeedSpec{1});
  CHECK(clamp[0].value_eps == doctest::Approx(1.0));
}
