#include <cmath>

#include "doctest.h"
#include "knudsen/sde.hpp"
#include "knudsen/stats.hpp"
#include "knudsen/verify.hpp"

using namespace knudsen;

namespace {

struct ZeroNoise {
  double normal() { return 0.0; }
};

// classical RK4 for dX = b(X) dt, used as the drift oracle
double rk4_drift(const std::function<double(double)>& b, double x0, double t_end, double dt) {
  double x = x0;
  const std::uint64_t m = static_cast<std::uint64_t>(std::llround(t_end / dt));
  for (std::uint64_t k = 0; k < m; ++k) {
    const double k1 = b(x);
    const double k2 = b(x + 0.5 * dt * k1);
    const double k3 = b(x + 0.5 * dt * k2);
    const double k4 = b(x + dt * k3);
    x += dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return x;
}

}  // namespace

TEST_CASE("brownian reduction: constant width gives a pure random walk") {
  const DiffusionSpec spec = DiffusionSpec::brownian(0.7);
  SplitMix64 rng = SplitMix64::stream(5, 0);
  const SdePath path = euler_maruyama(spec, 1.0, 1e-3, rng);
  REQUIRE(path.values.size() == 1001);
  // replay the same stream: the path is exactly the cumulative sum
  SplitMix64 rng2 = SplitMix64::stream(5, 0);
  double x = 0.7;
  const double sdt = std::sqrt(1e-3);
  for (std::size_t k = 1; k < path.values.size(); ++k) {
    x += sdt * rng2.normal();
    CHECK(path.values[k] == x);
  }
}

TEST_CASE("zero-noise drift solves the width ODE (Gudermannian check)") {
  // h(x) = 2 + sin x gives drift cos x; from 0 the solution at t=1 is
  // asin(tanh 1)
  FourierSeries f;
  f.c0 = 1.5;
  f.sin_coef = {0.5};
  FourierSeries g;
  g.c0 = 0.5;
  g.sin_coef = {0.5};
  const TubeProfile profile = TubeProfile::perturbed(0.01, f, g);
  const DiffusionSpec spec = DiffusionSpec::from_profile(profile, 0.0);
  CHECK(spec.h(0.3) == doctest::Approx(2.0 + std::sin(0.3)).epsilon(1e-14));

  const double ref = std::asin(std::tanh(1.0));
  CHECK(rk4_drift(spec.h_prime, 0.0, 1.0, 1e-4) == doctest::Approx(ref).epsilon(1e-10));

  ZeroNoise zn;
  const SdePath path = euler_maruyama(spec, 1.0, 1e-5, zn);
  CHECK(std::fabs(path.values.back() - ref) < 1e-4);
}

TEST_CASE("strong self-convergence order 1/2") {
  // halving dt with the same Brownian increments changes X(t_end) by O(sqrt(dt))
  const TubeProfile profile = default_perturbed_profile(0.01);
  const DiffusionSpec spec = DiffusionSpec::from_profile(profile, 0.0);
  const double t_end = 1.0;
  double prev_err = -1.0;
  for (double dt : {1e-2, 1e-3, 1e-4}) {
    // coarse path with increments aggregated from a fine path sharing noise
    SplitMix64 rng = SplitMix64::stream(10, 1);
    const std::uint64_t m = static_cast<std::uint64_t>(std::llround(t_end / dt));
    double x_fine = 0.0, x_coarse = 0.0;
    const double fine_dt = dt / 2.0, sfdt = std::sqrt(fine_dt);
    for (std::uint64_t k = 0; k < m; ++k) {
      const double z1 = rng.normal(), z2 = rng.normal();
      // two fine steps
      x_fine += spec.h_prime(x_fine) * fine_dt + std::sqrt(spec.h(x_fine)) * sfdt * z1;
      x_fine += spec.h_prime(x_fine) * fine_dt + std::sqrt(spec.h(x_fine)) * sfdt * z2;
      // one coarse step with the summed increment
      x_coarse += spec.h_prime(x_coarse) * dt +
                  std::sqrt(spec.h(x_coarse)) * sfdt * (z1 + z2);
    }
    const double err = std::fabs(x_fine - x_coarse);
    if (prev_err > 0.0) CHECK(err < prev_err);  // shrinks along the dt ladder
    prev_err = err;
  }
  CHECK(prev_err < 5e-2);
}

TEST_CASE("periodicity equivariance") {
  const TubeProfile profile = default_perturbed_profile(0.01);
  const double two_pi = 6.283185307179586476925287;
  DiffusionSpec a = DiffusionSpec::from_profile(profile, 0.4);
  DiffusionSpec b = DiffusionSpec::from_profile(profile, 0.4 + two_pi);
  SplitMix64 r1 = SplitMix64::stream(3, 7), r2 = SplitMix64::stream(3, 7);
  const SdePath pa = euler_maruyama(a, 0.5, 1e-3, r1);
  const SdePath pb = euler_maruyama(b, 0.5, 1e-3, r2);
  for (std::size_t k = 0; k < pa.values.size(); k += 50)
    CHECK(pb.values[k] - pa.values[k] == doctest::Approx(two_pi).epsilon(1e-9));
}

TEST_CASE("ensemble marginals: brownian variance and normality") {
  const DiffusionSpec spec = DiffusionSpec::brownian(0.0);
  const auto marg = sde_ensemble(spec, {1.0}, 10000, 99, 1e-3);
  REQUIRE(marg.size() == 1);
  const MomentEstimate m = moment_estimate(marg[0]);
  CHECK(std::fabs(m.mean) <= 3.0 * std::sqrt(1.0 / 10000.0));
  CHECK(std::fabs(m.variance - 1.0) <= 3.0 * std::sqrt(2.0 / 10000.0));
  const KsResult ks = ks_one_sample(marg[0], [](double x) { return normal_cdf(x); });
  CHECK(ks.p_value > 0.01);
}

TEST_CASE("ensemble reproducibility across thread counts") {
  const TubeProfile profile = default_perturbed_profile(0.01);
  const DiffusionSpec spec = DiffusionSpec::from_profile(profile, 0.0);
  setenv("KNUDSEN_THREADS", "1", 1);
  const auto a = sde_ensemble(spec, {0.25, 0.5}, 200, 7, 1e-3);
  setenv("KNUDSEN_THREADS", "8", 1);
  const auto b = sde_ensemble(spec, {0.25, 0.5}, 200, 7, 1e-3);
  unsetenv("KNUDSEN_THREADS");
  for (std::size_t g = 0; g < a.size(); ++g)
    for (std::size_t p = 0; p < a[g].size(); ++p) CHECK(a[g][p] == b[g][p]);
}

TEST_CASE("small-time variance matches h(x0) t") {
  const TubeProfile profile = default_perturbed_profile(0.01);
  const DiffusionSpec spec = DiffusionSpec::from_profile(profile, 0.0);
  const double t = 0.02;
  const auto marg = sde_ensemble(spec, {t}, 20000, 123, 1e-5);
  const MomentEstimate m = moment_estimate(marg[0]);
  const double expect = spec.h(0.0) * t;  // h(0) = 2.5
  CHECK(m.variance == doctest::Approx(expect).epsilon(0.05));
}
