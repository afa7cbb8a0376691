#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "knudsen/geometry.hpp"
#include "knudsen/rng.hpp"

namespace knudsen {

struct ChainState {
  double alpha = 0.0;
  Side side = Side::Outer;
  std::uint64_t step_index = 0;
};

enum class JumpKind : int { T = 0, R = 1, S = 2 };

inline const char* jump_kind_name(JumpKind k) {
  switch (k) {
    case JumpKind::T: return "T";
    case JumpKind::R: return "R";
    default: return "S";
  }
}

struct JumpSample {
  JumpKind kind = JumpKind::T;
  double value = 0.0;  // angular increment
  double theta = 0.0;  // reflection angle used
};

// invariant side law of the inner/outer indicator chain in the annulus
struct StationaryDistribution {
  double mu0 = 0.0;  // P(side = Outer)
  double mu1 = 0.0;  // P(side = Inner)

  static StationaryDistribution annulus(double eps) {
    return {1.0 / (2.0 - eps), (1.0 - eps) / (2.0 - eps)};
  }
};

struct StepResult {
  ChainState state;
  JumpSample jump;
  double chord_length = 0.0;
};

struct StepCounters {
  std::uint64_t degenerate_resamples = 0;
  std::uint64_t tangent_resamples = 0;
};

// Lambertian reflection angle: density cos(theta)/2 on (-pi/2, pi/2),
// sampled by inverse CDF. The measure-zero endpoint is resampled.
double sample_theta(SplitMix64& rng, StepCounters* counters = nullptr);

// P(next reflection stays on the outer circle) in the exact annulus;
// equals epsilon in closed form.
double stay_probability_annulus(double eps);

StepResult step_annulus(const ChainState& state, double epsilon, SplitMix64& rng,
                        StepCounters* counters = nullptr);

// One reflection with a prescribed angle, via ray tracing. Throws TangentRay
// for grazing angles (caller resamples).
StepResult step_general_with_theta(const ChainState& state, const TubeProfile& profile,
                                   double theta);

StepResult step_general(const ChainState& state, const TubeProfile& profile, SplitMix64& rng,
                        StepCounters* counters = nullptr);

// Dispatches on profile.mode.
StepResult step(const ChainState& state, const TubeProfile& profile, SplitMix64& rng,
                StepCounters* counters = nullptr);

struct ChainRecord {
  ChainState state;  // state after the jump
  JumpSample jump;
  double chord_length = 0.0;
};

// Draws init.side from the stationary side law when stationary_start is set.
ChainState make_initial_state(double alpha0, const TubeProfile& profile, bool stationary_start,
                              SplitMix64& rng);

std::vector<ChainRecord> simulate_chain(ChainState init, std::uint64_t n_steps,
                                        const TubeProfile& profile, SplitMix64& rng,
                                        StepCounters* counters = nullptr);

// Conditional one-jump samplers at a fixed angular position.
// T: launched from the inner boundary (always lands on the outer one).
double sample_T(const TubeProfile& profile, double alpha, SplitMix64& rng);
// R: launched from the outer boundary, conditioned on reaching the inner one
// (rejection; the complementary event has probability ~ eps).
double sample_R(const TubeProfile& profile, double alpha, SplitMix64& rng);
// S: launched from the outer boundary, conditioned on staying outer. Sampled
// directly from the two grazing tails of the cosine law (the event is too
// rare for rejection at small eps). The band variant lets callers hoist the
// band search out of sampling loops.
struct StayBand;
double sample_S(const TubeProfile& profile, double alpha, SplitMix64& rng);
double sample_S(const TubeProfile& profile, double alpha, const StayBand& band, SplitMix64& rng);

// Angular band of reflection angles that miss the inner boundary: the ray
// from Gamma^0(alpha) stays on the outer boundary iff theta > theta_plus or
// theta < theta_minus.
struct StayBand {
  double theta_minus = 0.0;
  double theta_plus = 0.0;
};
StayBand stay_band(const TubeProfile& profile, double alpha);

}  // namespace knudsen
