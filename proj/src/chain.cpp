#include "knudsen/chain.hpp"

#include <cmath>

#include "knudsen/errors.hpp"

namespace knudsen {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr int kMaxResamples = 256;
}  // namespace

double sample_theta(SplitMix64& rng, StepCounters* counters) {
  for (int i = 0; i < kMaxResamples; ++i) {
    const double u = 2.0 * rng.uniform01() - 1.0;
    if (u > -1.0 && u < 1.0) return std::asin(u);
    if (counters) ++counters->degenerate_resamples;
  }
  throw DegenerateTangent("sample_theta: resample limit hit");
}

double stay_probability_annulus(double eps) { return eps; }

StepResult step_annulus(const ChainState& state, double epsilon, SplitMix64& rng,
                        StepCounters* counters) {
  const double theta = sample_theta(rng, counters);
  const ChordSolution sol = annulus_chord(epsilon, theta, state.side);
  StepResult r;
  r.state.alpha = state.alpha + sol.delta_alpha;
  r.state.side = sol.hit_side;
  r.state.step_index = state.step_index + 1;
  r.jump.theta = theta;
  r.jump.value = sol.delta_alpha;
  r.jump.kind = state.side == Side::Inner ? JumpKind::T
               : sol.hit_side == Side::Inner ? JumpKind::R
                                             : JumpKind::S;
  r.chord_length = sol.chord_length;
  return r;
}

StepResult step_general_with_theta(const ChainState& state, const TubeProfile& profile,
                                   double theta) {
  const BoundaryPoint from = eval_boundary(profile, state.alpha, state.side);
  const Vec2 dir = launch_direction(profile, state.alpha, state.side, theta);
  const BoundaryPoint hit = ray_intersect(profile, from, dir);

  StepResult r;
  r.state.alpha = hit.alpha;
  r.state.side = hit.side;
  r.state.step_index = state.step_index + 1;
  r.jump.theta = theta;
  r.jump.value = hit.alpha - state.alpha;
  r.jump.kind = state.side == Side::Inner ? JumpKind::T
               : hit.side == Side::Inner  ? JumpKind::R
                                          : JumpKind::S;
  r.chord_length = (hit.position - from.position).norm();
  return r;
}

StepResult step_general(const ChainState& state, const TubeProfile& profile, SplitMix64& rng,
                        StepCounters* counters) {
  for (int attempt = 0; attempt < kMaxResamples; ++attempt) {
    const double theta = sample_theta(rng, counters);
    try {
      return step_general_with_theta(state, profile, theta);
    } catch (const TangentRay&) {
      if (counters) ++counters->tangent_resamples;
    }
  }
  throw TangentRay("step_general: resample limit hit");
}

StepResult step(const ChainState& state, const TubeProfile& profile, SplitMix64& rng,
                StepCounters* counters) {
  return profile.is_annulus() ? step_annulus(state, profile.epsilon, rng, counters)
                              : step_general(state, profile, rng, counters);
}

ChainState make_initial_state(double alpha0, const TubeProfile& profile, bool stationary_start,
                              SplitMix64& rng) {
  ChainState st;
  st.alpha = alpha0;
  st.side = Side::Outer;
  if (stationary_start) {
    const StationaryDistribution mu = StationaryDistribution::annulus(profile.epsilon);
    st.side = rng.uniform01() < mu.mu1 ? Side::Inner : Side::Outer;
  }
  return st;
}

std::vector<ChainRecord> simulate_chain(ChainState init, std::uint64_t n_steps,
                                        const TubeProfile& profile, SplitMix64& rng,
                                        StepCounters* counters) {
  std::vector<ChainRecord> out;
  out.reserve(n_steps);
  ChainState st = init;
  for (std::uint64_t k = 0; k < n_steps; ++k) {
    const StepResult r = step(st, profile, rng, counters);
    out.push_back({r.state, r.jump, r.chord_length});
    st = r.state;
  }
  return out;
}

double sample_T(const TubeProfile& profile, double alpha, SplitMix64& rng) {
  if (profile.is_annulus()) {
    const double theta = sample_theta(rng);
    return annulus_chord(profile.epsilon, theta, Side::Inner).delta_alpha;
  }
  ChainState st{alpha, Side::Inner, 0};
  return step_general(st, profile, rng).jump.value;
}

double sample_R(const TubeProfile& profile, double alpha, SplitMix64& rng) {
  ChainState st{alpha, Side::Outer, 0};
  for (int i = 0; i < kMaxResamples; ++i) {
    const StepResult r = profile.is_annulus() ? step_annulus(st, profile.epsilon, rng)
                                              : step_general(st, profile, rng);
    if (r.jump.kind == JumpKind::R) return r.jump.value;
  }
  throw InsufficientSamples("sample_R: rejection limit hit");
}

StayBand stay_band(const TubeProfile& profile, double alpha) {
  if (profile.is_annulus()) {
    const double edge = std::asin(1.0 - profile.epsilon);
    return {-edge, edge};
  }
  // the set of angles reaching the inner boundary is a single interval by
  // convexity; locate its endpoints by bisection on the hit side
  auto hits_inner = [&](double theta) {
    try {
      return step_general_with_theta({alpha, Side::Outer, 0}, profile, theta).state.side ==
             Side::Inner;
    } catch (const TangentRay&) {
      return true;  // tangent counts as the boundary of the hit interval
    }
  };
  if (!hits_inner(0.0))
    throw NoRootFound("stay_band: radial ray misses the inner boundary");
  StayBand band;
  double lo = 0.0, hi = kPi / 2.0 - 1e-12;
  for (int i = 0; i < 100 && hi - lo > 1e-13; ++i) {
    const double mid = 0.5 * (lo + hi);
    (hits_inner(mid) ? lo : hi) = mid;
  }
  band.theta_plus = 0.5 * (lo + hi);
  lo = 0.0;
  hi = kPi / 2.0 - 1e-12;
  for (int i = 0; i < 100 && hi - lo > 1e-13; ++i) {
    const double mid = 0.5 * (lo + hi);
    (hits_inner(-mid) ? lo : hi) = mid;
  }
  band.theta_minus = -0.5 * (lo + hi);
  return band;
}

double sample_S(const TubeProfile& profile, double alpha, SplitMix64& rng) {
  return sample_S(profile, alpha, stay_band(profile, alpha), rng);
}

double sample_S(const TubeProfile& profile, double alpha, const StayBand& band, SplitMix64& rng) {
  // cosine-law mass of the two grazing tails
  const double m_plus = 0.5 * (1.0 - std::sin(band.theta_plus));
  const double m_minus = 0.5 * (1.0 + std::sin(band.theta_minus));
  for (int i = 0; i < kMaxResamples; ++i) {
    double theta;
    if (rng.uniform01() * (m_plus + m_minus) < m_plus) {
      const double s = std::sin(band.theta_plus) + rng.uniform01() * (1.0 - std::sin(band.theta_plus));
      theta = std::asin(std::min(s, 1.0 - 1e-16));
    } else {
      const double s = -1.0 + rng.uniform01() * (std::sin(band.theta_minus) + 1.0);
      theta = std::asin(std::max(s, -1.0 + 1e-16));
    }
    if (profile.is_annulus()) {
      const ChordSolution sol = annulus_chord(profile.epsilon, theta, Side::Outer);
      if (sol.hit_side == Side::Outer) return sol.delta_alpha;
      continue;  // band-edge rounding: redraw
    }
    try {
      const StepResult r = step_general_with_theta({alpha, Side::Outer, 0}, profile, theta);
      if (r.jump.kind == JumpKind::S) return r.jump.value;
    } catch (const TangentRay&) {
    }
  }
  throw InsufficientSamples("sample_S: resample limit hit");
}

}  // namespace knudsen
