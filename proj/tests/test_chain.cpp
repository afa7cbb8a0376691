#include <cmath>
#include <vector>

#include "doctest.h"
#include "knudsen/chain.hpp"
#include "knudsen/stats.hpp"
#include "knudsen/verify.hpp"

using namespace knudsen;

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kHalfPi = 1.5707963267948966;
}  // namespace

TEST_CASE("theta sampling: inverse CDF of the cosine law") {
  // F(theta) = (1 + sin theta)/2, so U = 0.85 maps to asin(0.7)
  SplitMix64 rng(1);
  CHECK(std::asin(2.0 * 0.5 - 1.0) == 0.0);
  CHECK(std::asin(2.0 * 0.85 - 1.0) == doctest::Approx(0.775397).epsilon(1e-5));

  // empirical CDF sanity at a few quantiles
  const int n = 200000;
  int below0 = 0, below_q = 0;
  const double q = std::asin(0.5);  // F = 0.75
  for (int i = 0; i < n; ++i) {
    const double t = sample_theta(rng);
    CHECK(std::fabs(t) < kHalfPi);
    if (t < 0) ++below0;
    if (t < q) ++below_q;
  }
  CHECK(below0 / double(n) == doctest::Approx(0.5).epsilon(0.01));
  CHECK(below_q / double(n) == doctest::Approx(0.75).epsilon(0.01));
}

TEST_CASE("stay probability is epsilon, and matches the tangency computation") {
  CHECK(stay_probability_annulus(0.1) == 0.1);
  CHECK(stay_probability_annulus(0.01) == 0.01);
  // 1 - (1 + (2e - e^2)/(1-e)^2)^{-1/2} evaluated numerically
  const double eps = 0.3;
  const double v = 1.0 - 1.0 / std::sqrt(1.0 + (2 * eps - eps * eps) / ((1 - eps) * (1 - eps)));
  CHECK(v == doctest::Approx(eps).epsilon(1e-12));
}

TEST_CASE("annulus stepping: side recursion and radial edge case") {
  const double eps = 0.1;
  SplitMix64 rng(7);
  ChainState st{kHalfPi, Side::Inner, 0};
  for (int i = 0; i < 200; ++i) {
    const StepResult r = step_annulus(st, eps, rng);
    if (st.side == Side::Inner) {
      CHECK(r.state.side == Side::Outer);  // inner always jumps to outer
      CHECK(r.jump.kind == JumpKind::T);
    }
    CHECK(std::fabs(r.jump.value) < kPi);
    st = r.state;
  }

  // empirical outer->outer fraction over 1e6 outer launches: eps within 3 sigma
  const int n = 1000000;
  int stays = 0;
  for (int i = 0; i < n; ++i) {
    ChainState o{0.0, Side::Outer, 0};
    if (step_annulus(o, eps, rng).state.side == Side::Outer) ++stays;
  }
  const double sigma = std::sqrt(eps * (1 - eps) / n);
  CHECK(std::fabs(stays / double(n) - eps) <= 3 * sigma);
}

TEST_CASE("jump support: exact endpoint and claimed bounds") {
  const double eps = 0.01;
  const double exact_T = std::acos(1.0 - eps);  // tangential jump from the inner circle
  SplitMix64 rng(3);
  double mx = 0.0;
  for (int i = 0; i < 300000; ++i) {
    const double v = annulus_chord(eps, sample_theta(rng), Side::Inner).delta_alpha;
    mx = std::max(mx, std::fabs(v));
  }
  CHECK(mx <= exact_T + 1e-14);
  CHECK(mx >= 0.95 * exact_T);

  const TubeProfile ann = TubeProfile::annulus(eps);
  double mxs = 0.0;
  for (int i = 0; i < 50000; ++i) mxs = std::max(mxs, std::fabs(sample_S(ann, kHalfPi, rng)));
  CHECK(mxs <= 2.0 * exact_T + 1e-14);
  CHECK(mxs >= 1.5 * exact_T);
}

TEST_CASE("jump symmetry and alpha independence in the annulus") {
  const double eps = 0.01;
  SplitMix64 rng(9);
  const int n = 50000;
  std::vector<double> t1(n), t2(n), neg(n);
  for (int i = 0; i < n; ++i) {
    t1[i] = annulus_chord(eps, sample_theta(rng), Side::Inner).delta_alpha;
    t2[i] = annulus_chord(eps, sample_theta(rng), Side::Inner).delta_alpha;
    neg[i] = -t1[i];
  }
  CHECK(ks_two_sample(t1, neg).p_value > 0.01);  // symmetric about 0
  CHECK(ks_two_sample(t1, t2).p_value > 0.01);   // same law regardless of harvest window
}

TEST_CASE("stationary side occupation") {
  const double eps = 0.1;
  const StationaryDistribution mu = StationaryDistribution::annulus(eps);
  CHECK(mu.mu0 == doctest::Approx(1.0 / 1.9));
  CHECK(mu.mu0 + mu.mu1 == doctest::Approx(1.0));

  SplitMix64 rng(13);
  const TubeProfile ann = TubeProfile::annulus(eps);
  ChainState st = make_initial_state(0.0, ann, true, rng);
  const int n = 1000000;
  int outer = 0;
  for (int i = 0; i < n; ++i) {
    if (st.side == Side::Outer) ++outer;
    st = step_annulus(st, eps, rng).state;
  }
  // occupation fraction of the outer side ~ 1/(2 - eps); allow a generous
  // band since successive indicators are correlated
  CHECK(outer / double(n) == doctest::Approx(mu.mu0).epsilon(0.01));
}

TEST_CASE("successive stay indicators are uncorrelated") {
  const double eps = 0.05;
  SplitMix64 rng(17);
  ChainState st{0.0, Side::Outer, 0};
  std::vector<int> lam;
  const TubeProfile ann = TubeProfile::annulus(eps);
  for (int i = 0; i < 400000; ++i) {
    const StepResult r = step_annulus(st, eps, rng);
    if (st.side == Side::Outer) lam.push_back(r.state.side == Side::Outer ? 1 : 0);
    st = r.state;
  }
  double mean = 0.0;
  for (int v : lam) mean += v;
  mean /= lam.size();
  double cov = 0.0;
  for (std::size_t i = 0; i + 1 < lam.size(); ++i)
    cov += (lam[i] - mean) * (lam[i + 1] - mean);
  cov /= (lam.size() - 1);
  const double corr = cov / (mean * (1 - mean));
  CHECK(std::fabs(corr) <= 3.0 / std::sqrt(double(lam.size())));
}

TEST_CASE("general stepping reproduces the annulus law") {
  const double eps = 0.01;
  const TubeProfile ann = TubeProfile::annulus(eps);
  SplitMix64 rng(21);
  ChainState st{0.3, Side::Inner, 0};
  for (int i = 0; i < 300; ++i) {
    const double theta = sample_theta(rng);
    const ChordSolution ref = annulus_chord(eps, theta, st.side);
    const StepResult r = step_general_with_theta(st, ann, theta);
    CHECK(r.state.side == ref.hit_side);
    CHECK(r.jump.value == doctest::Approx(ref.delta_alpha).epsilon(1e-9));
    CHECK(r.chord_length == doctest::Approx(ref.chord_length).epsilon(1e-9));
    st = r.state;
  }
}

TEST_CASE("perturbed stepping: maximal jump bound and stay probability envelope") {
  const TubeProfile pert = default_perturbed_profile(1e-3);
  SplitMix64 rng(25);
  ChainState st = make_initial_state(0.0, pert, true, rng);
  double mx = 0.0;
  int stays = 0, outer_steps = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const StepResult r = step_general(st, pert, rng);
    mx = std::max(mx, std::fabs(r.jump.value));
    if (st.side == Side::Outer) {
      ++outer_steps;
      if (r.state.side == Side::Outer) ++stays;
    }
    st = r.state;
  }
  CHECK(mx <= 12.0 * std::sqrt(1e-3));
  const double phat = stays / double(outer_steps);
  CHECK(phat >= 0.5e-3 / 2.0);  // loose at this sample size; the envelope test runs bigger
  CHECK(phat <= 1e-3 * 10.0);
}

TEST_CASE("stay band matches the closed form on the annulus") {
  const double eps = 0.01;
  const TubeProfile ann = TubeProfile::annulus(eps);
  const StayBand band = stay_band(ann, 1.0);
  CHECK(band.theta_plus == doctest::Approx(std::asin(1 - eps)).epsilon(1e-12));
  CHECK(band.theta_minus == doctest::Approx(-std::asin(1 - eps)).epsilon(1e-12));

  // perturbed band via bisection: the stay probability it implies matches a
  // rejection estimate
  const TubeProfile pert = default_perturbed_profile(1e-3);
  const double a = 2.0;
  const StayBand pb = stay_band(pert, a);
  const double p_band = 0.5 * (1.0 - std::sin(pb.theta_plus)) + 0.5 * (1.0 + std::sin(pb.theta_minus));
  SplitMix64 rng(31);
  int stays = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    ChainState st{a, Side::Outer, 0};
    if (step_general(st, pert, rng).jump.kind == JumpKind::S) ++stays;
  }
  const double phat = stays / double(n);
  CHECK(std::fabs(phat - p_band) <= 4.0 * std::sqrt(p_band * (1 - p_band) / n));
}

TEST_CASE("conditional samplers agree with chain harvesting") {
  const double eps = 0.01;
  const TubeProfile ann = TubeProfile::annulus(eps);
  SplitMix64 rng(37);
  const int n = 40000;
  std::vector<double> direct(n), chained;
  for (int i = 0; i < n; ++i) direct[i] = sample_S(ann, kHalfPi, rng);
  ChainState st{0.0, Side::Outer, 0};
  while (chained.size() < static_cast<std::size_t>(n)) {
    const StepResult r = step_annulus(st, eps, rng);
    if (st.side == Side::Outer && r.jump.kind == JumpKind::S) chained.push_back(r.jump.value);
    st = r.state;
  }
  CHECK(ks_two_sample(direct, chained).p_value > 0.001);
}

TEST_CASE("simulate_chain is reproducible and respects n_steps") {
  const TubeProfile ann = TubeProfile::annulus(0.05);
  SplitMix64 r1 = SplitMix64::stream(99, 0), r2 = SplitMix64::stream(99, 0);
  ChainState init{0.0, Side::Inner, 0};
  const auto a = simulate_chain(init, 1000, ann, r1);
  const auto b = simulate_chain(init, 1000, ann, r2);
  REQUIRE(a.size() == 1000);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].state.alpha == b[i].state.alpha);
    CHECK(a[i].chord_length == b[i].chord_length);
  }
  CHECK(simulate_chain(init, 0, ann, r1).empty());
}

TEST_CASE("perturbed drift has the expected sign and scale") {
  // at a point where the tube widens with alpha, conditional jumps from the
  // inner boundary drift toward the wide side
  const double eps = 1e-2;
  const TubeProfile pert = default_perturbed_profile(eps);
  const double a = 0.0;  // h'(0) h(0) = 0.5 * 2.5 = 1.25
  SplitMix64 rng(43);
  MomentAccumulator acc;
  const int n = 1000000;
  for (int i = 0; i < n; ++i) acc.add(sample_T(pert, a, rng));
  const double scale = 0.5 * eps * eps * std::log(1.0 / eps);
  const double est = acc.mean / scale;
  const double se = std::sqrt(acc.variance() / n) / scale;
  CHECK(est > 0.0);
  CHECK(est == doctest::Approx(1.25).epsilon(0.6));
  CHECK(se < 0.25);
}
