#include "knudsen/trajectory.hpp"

#include <algorithm>
#include <cmath>

#include "knudsen/errors.hpp"

namespace knudsen {

Trajectory build_trajectory(const TubeProfile& profile, ChainState init, std::uint64_t n_steps,
                            SplitMix64& rng, std::uint64_t seed_label) {
  Trajectory traj;
  traj.profile = profile;
  traj.seed = seed_label;
  traj.events.reserve(n_steps + 1);

  const BoundaryPoint p0 = eval_boundary(profile, init.alpha, init.side);
  traj.events.push_back({0.0, init.alpha, init.side, p0.position, JumpKind::T, 0.0});

  ChainState st = init;
  double t = 0.0;
  for (std::uint64_t k = 0; k < n_steps; ++k) {
    const StepResult r = step(st, profile, rng);
    t += r.chord_length;
    const BoundaryPoint bp = eval_boundary(profile, r.state.alpha, r.state.side);
    traj.events.push_back({t, r.state.alpha, r.state.side, bp.position, r.jump.kind, r.jump.theta});
    st = r.state;
  }
  return traj;
}

std::uint64_t reflections_before(const Trajectory& traj, double t) {
  if (t < 0.0) throw OutOfRange("reflections_before: t < 0");
  if (traj.events.empty() || traj.events.back().time <= t)
    throw InsufficientTrajectory("reflections_before: trajectory too short");
  // last index with time <= t
  auto it = std::upper_bound(traj.events.begin(), traj.events.end(), t,
                             [](double v, const ReflectionEvent& e) { return v < e.time; });
  return static_cast<std::uint64_t>(it - traj.events.begin()) - 1;
}

PolarPoint position_at(const Trajectory& traj, double t) {
  if (t < 0.0 || traj.events.empty() || t > traj.events.back().time)
    throw OutOfRange("position_at: t outside [0, T_last]");
  auto it = std::upper_bound(traj.events.begin(), traj.events.end(), t,
                             [](double v, const ReflectionEvent& e) { return v < e.time; });
  const std::size_t n = static_cast<std::size_t>(it - traj.events.begin()) - 1;
  const ReflectionEvent& e0 = traj.events[n];
  if (t == e0.time || n + 1 == traj.events.size()) return {e0.position.norm(), e0.alpha};
  const ReflectionEvent& e1 = traj.events[n + 1];
  const double u = (t - e0.time) / (e1.time - e0.time);
  const Vec2 q = e0.position + u * (e1.position - e0.position);
  const double raw = std::atan2(q.y(), q.x());
  const double beta = e0.alpha + std::remainder(raw - e0.alpha, 2.0 * 3.14159265358979323846);
  return {q.norm(), beta};
}

std::vector<double> rescaled_beta(const Trajectory& traj, const TimeScale& scale,
                                  std::span<const double> s_grid) {
  std::vector<double> out;
  out.reserve(s_grid.size());
  const double beta0 = traj.events.front().alpha;
  for (double s : s_grid) {
    const std::uint64_t n = reflections_before(traj, scale.zeta(s));
    out.push_back(traj.events[n].alpha - beta0);
  }
  return out;
}

MomentEstimate mean_flight_time(std::span<const double> chord_samples) {
  if (chord_samples.size() < 10'000)
    throw InsufficientSamples("mean_flight_time: need at least 1e4 samples");
  return moment_estimate(chord_samples);
}

}  // namespace knudsen
