#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "mkvldp/lemma.hpp"
#include "mkvldp/models.hpp"

using namespace mkvldp;

TEST_CASE("(H1) probes") {
  const auto ok = check_assumption_h1(builtin_model("mean_field"), ProbeSpec{}, 1);
  CHECK(ok.verdict == Verdict::Pass);
  CHECK(ok.fitted_value("max_ratio_01") <= 3.0);
  const auto bad = check_assumption_h1(builtin_model("negative_control"), ProbeSpec{}, 1);
  CHECK(bad.verdict == Verdict::Fail);
  CHECK(bad.fitted_value("min_observed_alpha") < 0.0);
  CHECK_FALSE(bad.notes.empty());
}

TEST_CASE("moment bounds") {
  EnsembleSpec e;
  e.x0 = {1.0};
  e.y0 = {0.0};
  e.particles = 200;
  const TimeGrid g(1.0, 128);
  const auto lin = check_moment_bounds(builtin_model("linear"), g, {0.1, 0.05}, e);
  CHECK(lin.verdict == Verdict::Pass);
  const auto nc = check_moment_bounds(builtin_model("negative_control"), g, {0.1, 0.05}, e);
  CHECK(nc.verdict == Verdict::Fail);
}

TEST_CASE("increment scaling") {
  EnsembleSpec e;
  e.x0 = {0.0};
  e.y0 = {0.0};
  e.particles = 400;
  const TimeGrid g(1.0, 512);
  ScaleParams s;
  s.varepsilon = 0.01;
  s.small_noise = false;
  const auto bm = check_increment_scaling(builtin_model("linear_gaussian"), g, s, e);
  CHECK(bm.verdict == Verdict::Pass);
  CHECK(bm.fitted_value("slope") == doctest::Approx(1.0).epsilon(0.1));
  const auto fbm = check_increment_scaling(builtin_model("pure_fbm"), g, s, e, 1.35, 1.65);
  CHECK(fbm.fitted_value("slope") == doctest::Approx(1.5).epsilon(0.1));
  CHECK_THROWS(check_increment_scaling(builtin_model("linear_gaussian"), TimeGrid(1.0, 100), s, e));
}

TEST_CASE("f-bar Lipschitz and skeleton continuity") {
  const AveragedDrift mf(builtin_model("mean_field"));
  const auto lip = check_fbar_lipschitz(mf, ProbeSpec{}, 2);
  CHECK(lip.verdict == Verdict::Pass);
  CHECK(lip.fitted_value("max_ratio") <= 1.0 + 1e-9);

  const TimeGrid g(1.0, 64);
  ControlPair base(g, 1, 1), pert(g, 1, 1);
  for (std::size_t k = 0; k < g.steps(); ++k) {
    base.hdot[2 * k] = 0.5;
    pert.hdot[2 * k] = 0.05 * std::sin(2 * M_PI * g.node(k));
    pert.hbar.at(k, 0) = 0.05;
  }
  const double x0[1] = {1.0};
  const auto sk = check_skeleton_continuity(mf, g, base, pert, x0);
  CHECK(sk.verdict == Verdict::Pass);
  CHECK(sk.rows.size() == 7);
}

TEST_CASE("suite plumbing") {
  const std::vector<CheckTask> tasks = {
      [] {
        CheckReport r;
        r.check = "ok";
        r.verdict = Verdict::Pass;
        return r;
      },
      []() -> CheckReport { throw std::runtime_error("broken"); },
  };
  WorkerPool pool(2);
  const auto out = run_suite(tasks, &pool);
  REQUIRE(out.size() == 2);
  CHECK(out[0].verdict == Verdict::Pass);
  CHECK(out[1].verdict == Verdict::Fail);
  CHECK(out[1].notes.find("broken") != std::string::npos);

  SuiteOptions only;
  only.only = {"h1", "fbar_lipschitz"};
  const auto two = default_suite(builtin_model("aux_ou"), only);
  REQUIRE(two.size() == 2);
  CHECK(two[0].check == "h1");
  CHECK(two[1].check == "fbar_lipschitz");
  only.only = {"bogus"};
  CHECK_THROWS(default_suite(builtin_model("aux_ou"), only));
  CHECK(std::string(to_string(Verdict::Inconclusive)) == "inconclusive");
}
