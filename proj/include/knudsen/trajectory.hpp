#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "knudsen/chain.hpp"
#include "knudsen/geometry.hpp"
#include "knudsen/stats.hpp"

namespace knudsen {

struct ReflectionEvent {
  double time = 0.0;  // path length at unit speed; first reflection at t = 0
  double alpha = 0.0;
  Side side = Side::Outer;
  Vec2 position = Vec2::Zero();
  JumpKind jump = JumpKind::T;  // jump that produced this event (T for the initial one)
  double theta = 0.0;
};

// Normalizations of the diffusive limit: sigma2 rescales step counts,
// zeta_factor rescales physical time. They satisfy zeta_factor*sigma2 =
// (pi/2)*eps.
struct TimeScale {
  double epsilon = 0.0;
  double sigma2 = 0.0;
  double zeta_factor = 0.0;

  static TimeScale from_epsilon(double eps) {
    const double L = std::log(1.0 / eps);
    return {eps, 0.5 * eps * eps * L, 3.14159265358979323846 / (eps * L)};
  }

  double zeta(double s) const { return zeta_factor * s; }
};

struct Trajectory {
  TubeProfile profile;
  std::uint64_t seed = 0;
  std::vector<ReflectionEvent> events;
};

Trajectory build_trajectory(const TubeProfile& profile, ChainState init, std::uint64_t n_steps,
                            SplitMix64& rng, std::uint64_t seed_label = 0);

// N(t): number of reflections by time t (right-continuous step function,
// N(0) = 0 since the first reflection is at t = 0).
std::uint64_t reflections_before(const Trajectory& traj, double t);

struct PolarPoint {
  double r = 0.0;
  double beta = 0.0;  // unwrapped
};

// Position along the chord interpolated in Cartesian coordinates; beta is the
// polar angle of that point, unwrapped to match alpha at event times.
PolarPoint position_at(const Trajectory& traj, double t);

// s -> beta(zeta(eps, s)) - beta(0) sampled with the left-limit convention
// (value at the last reflection at or before the rescaled time).
std::vector<double> rescaled_beta(const Trajectory& traj, const TimeScale& scale,
                                  std::span<const double> s_grid);

// Flight-time estimator: E[chord | side]/eps with confidence intervals.
MomentEstimate mean_flight_time(std::span<const double> chord_samples);

}  // namespace knudsen
