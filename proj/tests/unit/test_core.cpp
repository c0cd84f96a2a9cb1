#include <atomic>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>

#include "doctest.h"
#include "mkvldp/errors.hpp"
#include "mkvldp/grid.hpp"
#include "mkvldp/optimize.hpp"
#include "mkvldp/parallel.hpp"
#include "mkvldp/quadrature.hpp"
#include "mkvldp/stats.hpp"

using namespace mkvldp;

TEST_CASE("hurst parameter range") {
  CHECK_THROWS_AS(HurstParam(0.0), DomainError);
  CHECK_THROWS_AS(HurstParam(1.0), DomainError);
  CHECK(HurstParam(0.75).beta() == doctest::Approx(0.25));
  CHECK_THROWS_AS(HurstParam(0.4).require_above_half("op"), UnsupportedBranch);
  CHECK_NOTHROW(HurstParam(0.6).require_above_half("op"));
}

TEST_CASE("time grid") {
  const TimeGrid g(2.0, 8);
  CHECK(g.nodes() == 9);
  CHECK(g.step() == 0.25);
  CHECK(g.node(8) == 2.0);
  CHECK(g.block_stride(0.5) == 2);
  CHECK(g.block_floor_index(5, 0.5) == 4);
  CHECK_THROWS_AS(g.block_stride(0.3), DomainError);
  CHECK(g.round_down_to_step(0.6) == 0.5);
  CHECK(g.round_down_to_step(0.1) == 0.25);
  CHECK(TimeGrid::block_floor(0.74, 0.25) == 0.5);
  CHECK_THROWS_AS(TimeGrid(0.0, 4), DomainError);
  CHECK_THROWS_AS(TimeGrid(1.0, 0), DomainError);
}

TEST_CASE("grid function cell averages") {
  const TimeGrid g(1.0, 4);
  auto f = GridFunction::sample_scalar(g, [](double t) { return 3.0 * t; });
  const auto c = f.to_cell_constant();
  for (std::size_t k = 0; k < 4; ++k) CHECK(c.at(k, 0) == doctest::Approx(3.0 * (k + 0.5) / 4.0));
  const auto ind = GridFunction::indicator(g, 0.5);
  CHECK(ind.at(1, 0) == 1.0);
  CHECK(ind.at(2, 0) == 0.0);
  CHECK_THROWS_AS(GridFunction(g, 1, Sampling::Pointwise, {1.0, 2.0}), DomainError);

  // t^g * 1 averaged over a cell, against the exact integral
  GridFunction one = GridFunction::sample_scalar(g, [](double) { return 1.0; });
  one.set_origin_exponent(-0.25);
  const auto avg = one.to_cell_constant();
  const double exact = (std::pow(0.5, 0.75) - std::pow(0.25, 0.75)) / 0.75 / 0.25;
  CHECK(avg.at(1, 0) == doctest::Approx(exact).epsilon(1e-12));
}

TEST_CASE("worker pool covers the range and reports errors") {
  for (std::size_t threads : {1, 3, 8}) {
    WorkerPool pool(threads);
    std::vector<int> hit(1000, 0);
    pool.parallel_for(hit.size(), [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) hit[i] += 1;
    });
    CHECK(std::accumulate(hit.begin(), hit.end(), 0) == 1000);
    CHECK(*std::min_element(hit.begin(), hit.end()) == 1);
    CHECK_THROWS_AS(pool.parallel_for(100,
                                      [](std::size_t b, std::size_t) {
                                        if (b == 0) throw std::runtime_error("boom");
                                      }),
                    std::runtime_error);
  }
  std::size_t calls = 0;
  parallel_for(nullptr, 5, [&](std::size_t b, std::size_t e) { calls += e - b; });
  CHECK(calls == 5);
}

TEST_CASE("gauss-legendre exactness") {
  // degree 2m - 1 polynomials are integrated exactly
  const double v = gauss_panel([](double x) { return std::pow(x, 9) + x * x; }, 0.0, 2.0, 5);
  CHECK(v == doctest::Approx(std::pow(2.0, 10) / 10.0 + 8.0 / 3.0).epsilon(1e-13));
  const double s = gauss_graded_left([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0);
  CHECK(std::abs(s - 2.0) < 1e-6);
}

TEST_CASE("statistics helpers") {
  const std::vector<double> x = {1, 2, 3, 4};
  const auto mv = mean_var(x);
  CHECK(mv.mean == 2.5);
  CHECK(mv.variance == doctest::Approx(5.0 / 3.0));
  CHECK(mv.std_error() == doctest::Approx(std::sqrt(5.0 / 12.0)));

  const std::vector<double> t = {0, 1, 2, 3};
  const std::vector<double> y = {1, 3, 5, 7};
  const auto fit = fit_line(t, y);
  CHECK(fit.slope == doctest::Approx(2.0));
  CHECK(fit.intercept == doctest::Approx(1.0));
  CHECK(fit.r_squared == doctest::Approx(1.0));

  boost::math::normal z;
  for (double q : {-1.0, 0.0, 1.5, 3.09, 6.0}) {
    CHECK(normal_upper_tail(q) == doctest::Approx(boost::math::cdf(boost::math::complement(z, q))).epsilon(1e-10));
  }

  // Wilson interval from the textbook formula
  const double n = 50, k = 7, zz = 1.959963984540054, p = k / n;
  const double centre = (p + zz * zz / (2 * n)) / (1 + zz * zz / n);
  const double half = zz / (1 + zz * zz / n) * std::sqrt(p * (1 - p) / n + zz * zz / (4 * n * n));
  const auto w = wilson_interval(7, 50);
  CHECK(w.lower == doctest::Approx(centre - half));
  CHECK(w.upper == doctest::Approx(centre + half));
  CHECK(wilson_interval(0, 10).lower == 0.0);

  CHECK(kolmogorov_q(1.3581) == doctest::Approx(0.05).epsilon(1e-3));
  std::vector<double> a, b;
  for (int i = 0; i < 200; ++i) {
    a.push_back(i);
    b.push_back(i + 0.5);
  }
  CHECK(ks_two_sample(a, a).p_value == doctest::Approx(1.0));
  CHECK(ks_two_sample(a, b).p_value > 0.5);
  for (auto& v : b) v += 100;
  CHECK(ks_two_sample(a, b).p_value < 1e-6);
}

TEST_CASE("lbfgs finds the Rosenbrock minimum") {
  const Objective rosen = [](std::span<const double> x, std::span<double> g) {
    const double a = 1 - x[0], b = x[1] - x[0] * x[0];
    g[0] = -2 * a - 400 * x[0] * b;
    g[1] = 200 * b;
    return a * a + 100 * b * b;
  };
  std::vector<double> x = {-1.2, 1.0};
  const auto r = lbfgs_minimize(rosen, x);
  CHECK(r.converged);
  CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(x[1] == doctest::Approx(1.0).epsilon(1e-5));

  // separable quadratic with known minimizer
  const Objective quad = [](std::span<const double> x, std::span<double> g) {
    double f = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double w = static_cast<double>(i + 1);
      f += 0.5 * w * (x[i] - 1.0 / w) * (x[i] - 1.0 / w);
      g[i] = w * (x[i] - 1.0 / w);
    }
    return f;
  };
  std::vector<double> z(20, 0.0);
  lbfgs_minimize(quad, z);
  for (std::size_t i = 0; i < z.size(); ++i) CHECK(z[i] == doctest::Approx(1.0 / (i + 1)).epsilon(1e-7));
}
