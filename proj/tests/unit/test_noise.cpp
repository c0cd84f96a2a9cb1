#include <cmath>
#include <cstring>

#include "doctest.h"
#include "mkvldp/errors.hpp"
#include "mkvldp/frac_ops.hpp"
#include "mkvldp/noise.hpp"
#include "mkvldp/stats.hpp"

using namespace mkvldp;

TEST_CASE("streams are reproducible and separated") {
  const SeedSpec s{42, 1, 2, Channel::W1};
  RandomStream a(s), b(s), c(s.with_channel(Channel::W2)), d(s.with_particle(3));
  std::vector<double> va(100), vb(100), vc(100), vd(100);
  a.fill_normal(va);
  b.fill_normal(vb);
  c.fill_normal(vc);
  d.fill_normal(vd);
  CHECK(std::memcmp(va.data(), vb.data(), va.size() * sizeof(double)) == 0);
  CHECK(va != vc);
  CHECK(va != vd);
  RandomStream u(SeedSpec{1});
  for (int i = 0; i < 10000; ++i) {
    const double x = u.uniform();
    REQUIRE(x > 0.0);
    REQUIRE(x < 1.0);
  }
}

TEST_CASE("normal draws have unit variance") {
  RandomStream r(SeedSpec{9});
  std::vector<double> x(200000);
  r.fill_normal(x);
  const auto mv = mean_var(x);
  CHECK(std::abs(mv.mean) < 3 * mv.std_error());
  CHECK(std::abs(mv.variance - 1.0) < 3 * std::sqrt(2.0 / x.size()));
}

TEST_CASE("Brownian increments") {
  const TimeGrid g(2.0, 100000);
  const auto dw = sample_bm(g, 1, SeedSpec{3, 0, 0, Channel::W1});
  REQUIRE(dw.size() == g.steps());
  const auto mv = mean_var(dw);
  const double se = g.step() * std::sqrt(2.0 / dw.size());
  CHECK(std::abs(mv.variance - g.step()) < 3 * se);
  double c = 0;
  for (std::size_t i = 0; i + 1 < dw.size(); ++i) c += dw[i] * dw[i + 1];
  CHECK(std::abs(c / (dw.size() - 1) / mv.variance) < 0.02);
  const auto path = cumulate(dw, 1);
  CHECK(path.size() == g.nodes());
  CHECK(path[0] == 0.0);
  CHECK(path[2] == dw[0] + dw[1]);
}

TEST_CASE("exact fBm increments and self-similarity") {
  const std::size_t paths = 20000;
  for (double h : {0.6, 0.75, 0.9}) {
    const HurstParam hp(h);
    const TimeGrid g(1.0, 16);
    ExactFbmSampler s(g, hp);
    CHECK_FALSE(s.uses_cholesky());
    std::vector<double> path(g.nodes()), inc(paths), end(paths), quarter(paths);
    for (std::size_t p = 0; p < paths; ++p) {
      RandomStream r(SeedSpec{11, 0, static_cast<std::uint32_t>(p), Channel::Fbm});
      s.sample(r, path);
      REQUIRE(path[0] == 0.0);
      inc[p] = (path[12] - path[4]) * (path[12] - path[4]);
      end[p] = path[16];
      quarter[p] = path[4];
    }
    const auto mi = mean_var(inc);
    CHECK(std::abs(mi.mean - std::pow(0.5, 2 * h)) < 3 * mi.std_error());
    // B_{t/4} / (1/4)^H has the law of B_t: compare variances
    const double ve = mean_var(end).variance;
    const double vq = mean_var(quarter).variance / std::pow(0.25, 2 * h);
    CHECK(std::abs(vq / ve - 1.0) < 3 * 2 * std::sqrt(2.0 / paths));
  }
}

TEST_CASE("H = 1/2 gives Brownian covariance") {
  const TimeGrid g(1.0, 8);
  ExactFbmSampler s(g, HurstParam(0.5));
  const std::size_t paths = 40000;
  std::vector<double> path(g.nodes());
  double c = 0;
  for (std::size_t p = 0; p < paths; ++p) {
    RandomStream r(SeedSpec{5, 0, static_cast<std::uint32_t>(p), Channel::Fbm});
    s.sample(r, path);
    c += path[2] * path[6];
  }
  CHECK(std::abs(c / paths - 0.25) < 0.015);
}

TEST_CASE("Volterra generator") {
  const TimeGrid g(1.0, 1024);
  const HurstParam hp(0.75);
  VolterraFbmSampler v(g, hp, {1024});
  std::vector<double> zero(g.steps(), 0.0), out(1);
  v.from_increments(zero, out);
  CHECK(out[0] == 0.0);
  // deterministic variance: sum of squared weights times the step
  double var = 0;
  for (std::size_t j = 0; j < g.steps(); ++j) {
    zero.assign(g.steps(), 0.0);
    zero[j] = 1.0;
    v.from_increments(zero, out);
    var += out[0] * out[0] * g.step();
  }
  CHECK(var == doctest::Approx(1.0).epsilon(0.03));
  CHECK_THROWS_AS(VolterraFbmSampler(g, HurstParam(0.4)), UnsupportedBranch);
  const auto two = sample_fbm_volterra(TimeGrid(1.0, 64), hp, 2, SeedSpec{1});
  CHECK(two.size() == 65 * 2);
  CHECK(two[0] == 0.0);
  CHECK(two[1] == 0.0);
}

TEST_CASE("driving paths layout") {
  const TimeGrid g(1.0, 32);
  ExactFbmSampler fbm(g, HurstParam(0.7));
  const auto dp = sample_driving_paths(g, 2, 1, &fbm, SeedSpec{4});
  CHECK(dp.w1.size() == 64);
  CHECK(dp.w2.size() == 32);
  CHECK(dp.bh.size() == 33 * 2);
  CHECK(dp.bh[0] == 0.0);
  const auto no_fbm = sample_driving_paths(g, 2, 0, nullptr, SeedSpec{4});
  CHECK(no_fbm.w2.empty());
  CHECK(no_fbm.bh.empty());
  CHECK(no_fbm.w1 == dp.w1);
  const auto exact = sample_fbm_exact(g, HurstParam(0.7), 2, SeedSpec{4});
  CHECK(exact.size() == 33 * 2);
}
