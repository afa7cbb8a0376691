#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "knudsen/geometry.hpp"
#include "knudsen/rng.hpp"

namespace knudsen {

// Coefficients of the limiting diffusion dX = h'(X) dt + sqrt(h(X)) dW.
// h >= 1 everywhere, so the noise term never degenerates.
struct DiffusionSpec {
  std::function<double(double)> h;
  std::function<double(double)> h_prime;
  double x0 = 0.0;

  static DiffusionSpec brownian(double x0 = 0.0) {
    return {[](double) { return 1.0; }, [](double) { return 0.0; }, x0};
  }

  static DiffusionSpec from_profile(const TubeProfile& profile, double x0 = 0.0) {
    return {[profile](double x) { return profile.h(x); },
            [profile](double x) { return profile.h_prime(x); }, x0};
  }
};

struct SdePath {
  std::vector<double> times;
  std::vector<double> values;
  std::uint64_t seed = 0;
};

// Euler-Maruyama: X_{k+1} = X_k + h'(X_k) dt + sqrt(h(X_k) dt) Z_k.
// Noise needs a `double normal()`; pass a zero-noise stub to integrate the
// drift ODE alone.
template <class Noise>
SdePath euler_maruyama(const DiffusionSpec& spec, double t_end, double dt, Noise& noise,
                       std::uint64_t seed_label = 0) {
  SdePath path;
  path.seed = seed_label;
  const std::uint64_t m = static_cast<std::uint64_t>(std::ceil(t_end / dt - 1e-9));
  path.times.reserve(m + 1);
  path.values.reserve(m + 1);
  double x = spec.x0;
  path.times.push_back(0.0);
  path.values.push_back(x);
  const double sdt = std::sqrt(dt);
  for (std::uint64_t k = 0; k < m; ++k) {
    x += spec.h_prime(x) * dt + std::sqrt(spec.h(x)) * sdt * noise.normal();
    path.times.push_back(static_cast<double>(k + 1) * dt);
    path.values.push_back(x);
  }
  return path;
}

// Marginal samples of n_paths independent paths at each grid time; result is
// indexed [grid point][path]. Per-path seeded streams keep the ensemble
// reproducible and order-independent.
std::vector<std::vector<double>> sde_ensemble(const DiffusionSpec& spec,
                                              const std::vector<double>& t_grid, int n_paths,
                                              std::uint64_t master_seed, double dt = 1e-4);

}  // namespace knudsen
