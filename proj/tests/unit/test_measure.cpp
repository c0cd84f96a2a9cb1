#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "mkvldp/errors.hpp"
#include "mkvldp/measure.hpp"

using namespace mkvldp;

namespace {

// brute force over all permutations
double w2_brute(const std::vector<double>& a, const std::vector<double>& b, std::size_t d) {
  const std::size_t n = a.size() / d;
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = 1e300;
  do {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < d; ++c) s += std::pow(a[i * d + c] - b[perm[i] * d + c], 2);
    }
    best = std::min(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return std::sqrt(best / n);
}

}  // namespace

TEST_CASE("empirical measure basics") {
  const EmpiricalMeasure mu(2, {1, 2, 3, 4});
  CHECK(mu.size() == 2);
  CHECK(mu.mean()[0] == 2.0);
  CHECK(mu.mean()[1] == 3.0);
  CHECK(mu.second_moment() == doctest::Approx((1 + 4 + 9 + 16) / 2.0));
  CHECK(moment_p(mu, 2.0) == doctest::Approx(mu.second_moment()));
  CHECK(moment_p(EmpiricalMeasure(1, {2.0, -2.0}), 4.0) == doctest::Approx(16.0));
  CHECK_THROWS_AS(EmpiricalMeasure(1, {}), DomainError);
  CHECK_THROWS_AS(EmpiricalMeasure(1, {NAN}), DomainError);
  CHECK_THROWS_AS(EmpiricalMeasure(2, {1.0, 2.0, 3.0}), DomainError);
  const double x[2] = {0.5, -1.0};
  CHECK(EmpiricalMeasure::dirac(x).size() == 1);
}

TEST_CASE("one-dimensional W2") {
  const EmpiricalMeasure a(1, {0.0, 1.0, 2.0});
  const EmpiricalMeasure b(1, {2.5, 0.5, 1.5});
  const auto r = wasserstein2(a, b);
  CHECK(r.method == W2Method::Exact1D);
  CHECK(r.value == doctest::Approx(0.5));
  CHECK(wasserstein2(a, a).value == 0.0);
  // unequal sizes: quantile coupling of {0, 1} against {0, 0.5, 1}
  const double q = wasserstein2(EmpiricalMeasure(1, {0.0, 1.0}), EmpiricalMeasure(1, {0.0, 0.5, 1.0})).value;
  CHECK(q == doctest::Approx(std::sqrt((1.0 / 6.0) * 0.25 * 2.0)));
}

TEST_CASE("Hungarian W2 against brute force") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n01;
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> a(12), b(12);
    for (auto& v : a) v = n01(rng);
    for (auto& v : b) v = n01(rng) + 0.5;
    const auto r = wasserstein2(EmpiricalMeasure(2, a), EmpiricalMeasure(2, b));
    CHECK(r.method == W2Method::Hungarian);
    CHECK(r.value == doctest::Approx(w2_brute(a, b, 2)).epsilon(1e-12));
  }
}

TEST_CASE("sliced W2") {
  std::vector<double> a(200), b(200);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n01;
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = n01(rng);
    b[i] = a[i] + (i % 2 == 0 ? 1.0 : 0.0);
  }
  const EmpiricalMeasure mu(2, a), nu(2, b);
  const auto s = wasserstein2(mu, nu, W2Method::Sliced, 3, 256);
  // a translation by v projects to |<theta, v>|; its mean square is |v|^2 / d
  CHECK(s.value == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(0.1));
  CHECK(s.value == wasserstein2(mu, nu, W2Method::Sliced, 3, 256).value);
  CHECK(wasserstein2(mu, nu).method == W2Method::Sliced);
  CHECK_THROWS_AS(wasserstein2(mu, EmpiricalMeasure(1, {0.0})), DomainError);
}

TEST_CASE("assignment is a permutation with minimal cost") {
  const std::vector<double> cost = {4, 1, 3, 2, 0, 5, 3, 2, 2};
  const auto a = hungarian_assignment(cost, 3);
  double total = 0;
  for (std::size_t i = 0; i < 3; ++i) total += cost[i * 3 + a[i]];
  CHECK(total == 5.0);
}
