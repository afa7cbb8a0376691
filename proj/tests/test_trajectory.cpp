#include <cmath>

#include "doctest.h"
#include "knudsen/trajectory.hpp"

using namespace knudsen;

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kHalfPi = 1.5707963267948966;
}  // namespace

TEST_CASE("time scale consistency identity") {
  for (double eps : {1e-1, 1e-2, 1e-3, 1e-4}) {
    const TimeScale ts = TimeScale::from_epsilon(eps);
    CHECK(ts.zeta_factor * ts.sigma2 == doctest::Approx(kHalfPi * eps).epsilon(1e-14));
    CHECK(ts.sigma2 > 0.0);
  }
  // physical horizon for s = 1 at eps = 0.01
  CHECK(TimeScale::from_epsilon(0.01).zeta(1.0) == doctest::Approx(68.2188).epsilon(1e-4));
}

TEST_CASE("event times accumulate chord lengths") {
  const TubeProfile ann = TubeProfile::annulus(0.05);
  SplitMix64 rng(12);
  ChainState init{0.0, Side::Inner, 0};
  const Trajectory traj = build_trajectory(ann, init, 5000, rng, 12);
  REQUIRE(traj.events.size() == 5001);
  CHECK(traj.events.front().time == 0.0);
  double sum = 0.0;
  for (std::size_t i = 1; i < traj.events.size(); ++i) {
    CHECK(traj.events[i].time > traj.events[i - 1].time);
    sum += (traj.events[i].position - traj.events[i - 1].position).norm();
    CHECK(traj.events[i].time == doctest::Approx(sum).epsilon(1e-12));
    // inner <-> outer flights take at least eps
    if (traj.events[i].side != traj.events[i - 1].side)
      CHECK(traj.events[i].time - traj.events[i - 1].time >= 0.05 * (1.0 - 1e-12));
  }
}

TEST_CASE("reflection counting") {
  const TubeProfile ann = TubeProfile::annulus(0.05);
  SplitMix64 rng(5);
  const Trajectory traj = build_trajectory(ann, {0.0, Side::Inner, 0}, 2000, rng, 5);
  CHECK(reflections_before(traj, 0.0) == 0);
  const double t1 = traj.events[1].time;
  CHECK(reflections_before(traj, std::nextafter(t1, 0.0)) == 0);
  CHECK(reflections_before(traj, t1) == 1);
  // N(T_n) = n
  for (std::size_t n : {10ul, 500ul, 1999ul})
    CHECK(reflections_before(traj, traj.events[n].time) == n);
  CHECK_THROWS_AS(reflections_before(traj, traj.events.back().time + 1.0), InsufficientTrajectory);
}

TEST_CASE("interpolated positions") {
  const TubeProfile ann = TubeProfile::annulus(0.1);
  SplitMix64 rng(8);
  const Trajectory traj = build_trajectory(ann, {kHalfPi, Side::Inner, 0}, 500, rng, 8);

  // event times reproduce the stored point exactly
  for (std::size_t n : {0ul, 3ul, 77ul}) {
    const PolarPoint p = position_at(traj, traj.events[n].time);
    CHECK(p.beta == doctest::Approx(traj.events[n].alpha).epsilon(1e-12));
    CHECK(p.r == doctest::Approx(traj.events[n].position.norm()).epsilon(1e-12));
  }

  // beta matches alpha at events and is continuous across a chord
  const double tm = 0.5 * (traj.events[10].time + traj.events[11].time);
  const PolarPoint mid = position_at(traj, tm);
  const Vec2 expect = 0.5 * (traj.events[10].position + traj.events[11].position);
  CHECK(mid.r == doctest::Approx(expect.norm()).epsilon(1e-12));
  CHECK(mid.beta ==
        doctest::Approx(traj.events[10].alpha +
                        std::remainder(std::atan2(expect.y(), expect.x()) - traj.events[10].alpha,
                                       2 * kPi))
            .epsilon(1e-12));
  CHECK_THROWS_AS(position_at(traj, -1.0), OutOfRange);
}

TEST_CASE("radial chord keeps beta constant") {
  // theta = 0 from the inner circle: the flight is along the radius
  const double eps = 0.1;
  const TubeProfile ann = TubeProfile::annulus(eps);
  Trajectory traj;
  traj.profile = ann;
  const BoundaryPoint a = eval_boundary(ann, 1.0, Side::Inner);
  const BoundaryPoint b = eval_boundary(ann, 1.0, Side::Outer);
  traj.events.push_back({0.0, 1.0, Side::Inner, a.position, JumpKind::T, 0.0});
  traj.events.push_back({eps, 1.0, Side::Outer, b.position, JumpKind::T, 0.0});
  for (double t : {0.0, 0.03, 0.07, eps})
    CHECK(position_at(traj, t).beta == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("rescaled angular marginals use the left limit") {
  const double eps = 0.05;
  const TubeProfile ann = TubeProfile::annulus(eps);
  SplitMix64 rng(77);
  const TimeScale ts = TimeScale::from_epsilon(eps);
  const Trajectory traj = build_trajectory(ann, {0.25, Side::Inner, 0}, 40000, rng, 77);
  const std::vector<double> grid = {0.0, 0.01, 0.02};
  const std::vector<double> vals = rescaled_beta(traj, ts, grid);
  CHECK(vals[0] == 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const std::uint64_t n = reflections_before(traj, ts.zeta(grid[i]));
    CHECK(vals[i] == traj.events[n].alpha - 0.25);
  }
}

TEST_CASE("flight time estimator") {
  const double eps = 1e-3;
  SplitMix64 rng(31);
  std::vector<double> inner(200000), outer(200000);
  for (auto& v : inner) v = annulus_chord(eps, sample_theta(rng), Side::Inner).chord_length;
  for (auto& v : outer) v = annulus_chord(eps, sample_theta(rng), Side::Outer).chord_length;
  const MomentEstimate mi = mean_flight_time(inner);
  const MomentEstimate mo = mean_flight_time(outer);
  // E(flight | side)/eps approaches pi/2 from opposite sides
  CHECK(mi.mean / eps == doctest::Approx(kHalfPi).epsilon(0.03));
  CHECK(mo.mean / eps == doctest::Approx(kHalfPi).epsilon(0.03));
  CHECK(mi.mean / eps < kHalfPi);
  CHECK(mo.mean / eps > kHalfPi);
  CHECK(mi.ci95_mean > 0.0);

  std::vector<double> tiny(100, eps);
  CHECK_THROWS_AS(mean_flight_time(tiny), InsufficientSamples);
}
