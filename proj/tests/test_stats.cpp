#include <cmath>
#include <vector>

#include "doctest.h"
#include "knudsen/chain.hpp"
#include "knudsen/stats.hpp"
#include "knudsen/verify.hpp"

using namespace knudsen;

TEST_CASE("two-sample KS statistic on hand-enumerable inputs") {
  std::vector<double> a = {1, 2, 3, 4};
  std::vector<double> b = {1.5, 2.5, 3.5, 4.5};
  // CDF gaps: 0.25 at every half-integer
  CHECK_THROWS_AS(ks_two_sample(a, b), InsufficientSamples);
  std::vector<double> a5, b5;
  for (int rep = 0; rep < 5; ++rep)
    for (int i = 0; i < 4; ++i) {
      a5.push_back(a[i]);
      b5.push_back(b[i]);
    }
  const KsResult r = ks_two_sample(a5, b5);
  CHECK(r.statistic == doctest::Approx(0.25).epsilon(1e-12));

  // identical samples: D = 0, p = 1
  const KsResult same = ks_two_sample(a5, a5);
  CHECK(same.statistic == 0.0);
  CHECK(same.p_value == doctest::Approx(1.0));

  // disjoint supports: D = 1
  std::vector<double> zeros(25, 0.0), ones(25, 1.0);
  CHECK(ks_two_sample(zeros, ones).statistic == doctest::Approx(1.0));

  // symmetry in the arguments
  const KsResult ab = ks_two_sample(a5, b5);
  const KsResult ba = ks_two_sample(b5, a5);
  CHECK(ab.statistic == ba.statistic);
  CHECK(ab.p_value == ba.p_value);
}

TEST_CASE("kolmogorov survival function") {
  // table values of Q(lambda)
  CHECK(kolmogorov_sf(0.5) == doctest::Approx(0.9639).epsilon(1e-3));
  CHECK(kolmogorov_sf(1.0) == doctest::Approx(0.2700).epsilon(1e-3));
  CHECK(kolmogorov_sf(1.36) == doctest::Approx(0.0491).epsilon(2e-2));
  CHECK(kolmogorov_sf(2.0) == doctest::Approx(6.7e-4).epsilon(2e-2));
  // the two series branches agree across the switch at 1.18 up to the local
  // slope (~ -0.58) times the lambda gap
  CHECK(kolmogorov_sf(1.1799) == doctest::Approx(0.1235120497).epsilon(1e-7));
  CHECK(kolmogorov_sf(1.1801) == doctest::Approx(0.1233955916).epsilon(1e-7));
}

TEST_CASE("KS power sanity on shifted samples") {
  SplitMix64 rng(3);
  const double eps = 1e-2;
  const int n = 100000;
  std::vector<double> t(n), shifted(n);
  for (int i = 0; i < n; ++i) {
    t[i] = annulus_chord(eps, sample_theta(rng), Side::Inner).delta_alpha;
    shifted[i] = t[i] + 0.01;
  }
  CHECK(ks_two_sample(t, shifted).p_value < 1e-6);
}

TEST_CASE("moment estimates and CI scaling") {
  SplitMix64 rng(5);
  std::vector<double> x1(20000), x2(40000);
  for (auto& v : x1) v = rng.normal();
  for (auto& v : x2) v = rng.normal();
  const MomentEstimate m1 = moment_estimate(x1);
  const MomentEstimate m2 = moment_estimate(x2);
  CHECK(std::fabs(m1.mean) < 3.0 / std::sqrt(20000.0));
  CHECK(m1.variance == doctest::Approx(1.0).epsilon(0.05));
  // doubling n shrinks the CI width by ~1/sqrt(2), within 10%
  CHECK(m1.ci95_mean / m2.ci95_mean == doctest::Approx(std::sqrt(2.0)).epsilon(0.1));
  CHECK(m1.ci95_var / m2.ci95_var == doctest::Approx(std::sqrt(2.0)).epsilon(0.1));
}

TEST_CASE("moment accumulator merging is exact for chunked order") {
  SplitMix64 rng(9);
  std::vector<double> xs(10000);
  for (auto& v : xs) v = rng.uniform01() * 3.0 - 1.0;
  MomentAccumulator whole;
  for (double v : xs) whole.add(v);
  MomentAccumulator a, b, merged;
  for (int i = 0; i < 5000; ++i) a.add(xs[i]);
  for (int i = 5000; i < 10000; ++i) b.add(xs[i]);
  merged.merge(a);
  merged.merge(b);
  CHECK(merged.n == whole.n);
  CHECK(merged.mean == doctest::Approx(whole.mean).epsilon(1e-12));
  CHECK(merged.variance() == doctest::Approx(whole.variance()).epsilon(1e-10));
  CHECK(merged.fourth_central() == doctest::Approx(whole.fourth_central()).epsilon(1e-8));
}

TEST_CASE("chord second-moment quadrature") {
  // trapezoid oracle at 1e6 nodes
  auto trapezoid = [](double eps, int n) {
    const double kPi = 3.14159265358979323846;
    const double h = (kPi / 2) / n;
    double sum = 0.0;
    const double w = eps * (2.0 - eps);
    for (int i = 0; i <= n; ++i) {
      const double t = i * h;
      const double c = std::cos(t), s = std::sin(t);
      const double D = std::sqrt(c * c + w * s * s) + (1.0 - eps) * c;
      const double x = s * w / D;
      const double v = x * x * c;
      sum += (i == 0 || i == n) ? 0.5 * v : v;
    }
    return sum * h;
  };
  for (double eps : {1e-2, 1e-3}) {
    const double q = quadrature_Ex2(eps);
    CHECK(std::fabs(q / trapezoid(eps, 1000000) - 1.0) <= 1e-9);
  }

  // ratio to the asymptotic scale approaches 1 from below
  double prev = 0.0;
  for (double eps : {1e-3, 1e-4, 1e-5, 1e-6}) {
    const double ratio = quadrature_Ex2(eps) / (0.5 * eps * eps * std::log(1.0 / eps));
    CHECK(ratio > prev);
    CHECK(ratio < 1.0);
    prev = ratio;
  }
  CHECK(prev == doctest::Approx(1.0).epsilon(0.10));

  // vanishes as eps -> 0
  CHECK(quadrature_Ex2(1e-6) < 1e-10);
  CHECK_THROWS_AS(quadrature_Ex2(0.7), OutOfRange);
}

TEST_CASE("monte carlo agrees with quadrature at eps = 1e-2") {
  const double eps = 1e-2;
  SplitMix64 rng(11);
  MomentAccumulator acc;
  const int n = 2000000;
  for (int i = 0; i < n; ++i) {
    const ChordSolution sol = annulus_chord(eps, sample_theta(rng), Side::Inner);
    acc.add(sol.x * sol.x);
  }
  const double se = std::sqrt(acc.variance() / n);
  CHECK(std::fabs(acc.mean - quadrature_Ex2(eps)) <= 4.0 * se);
}

TEST_CASE("one-sample KS against the normal CDF") {
  SplitMix64 rng(13);
  std::vector<double> z(20000);
  for (auto& v : z) v = rng.normal();
  CHECK(ks_one_sample(z, [](double x) { return normal_cdf(x); }).p_value > 0.01);
  // wrong scale is detected
  std::vector<double> z2 = z;
  for (auto& v : z2) v *= 1.2;
  CHECK(ks_one_sample(z2, [](double x) { return normal_cdf(x); }).p_value < 1e-6);
}
