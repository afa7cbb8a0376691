#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "knudsen/chain.hpp"
#include "knudsen/geometry.hpp"
#include "knudsen/sde.hpp"
#include "knudsen/stats.hpp"
#include "knudsen/trajectory.hpp"

namespace knudsen {

// Documented default perturbed tube: f = 1.5 + 0.5 sin a, g = 0.5 + 0.5 cos a,
// so h = 2 + 0.5 (sin a + cos a) and h' = 0.5 (cos a - sin a).
TubeProfile default_perturbed_profile(double eps);

struct LemmaParams {
  std::uint64_t seed = 42;
  double epsilon = 1e-3;
  std::vector<double> ladder;  // epsilon ladder for the asymptotic checks
  std::uint64_t n = 0;         // sample budget; 0 picks the per-check default
  int bins = 16;               // alpha bins for the alpha-dependent checks
  int paths = 0;               // path budget; 0 picks the per-check default
  double t_horizon = 1.0;
  bool has_profile = false;
  TubeProfile profile;  // required by the perturbed-tube checks

  const TubeProfile& perturbed_profile() const;
};

struct SubCheck {
  std::string name;
  double target = 0.0;
  double estimate = 0.0;
  double tolerance = 0.0;  // absolute tolerance actually applied
  double ci = 0.0;         // 95% half-width of the estimate where meaningful
  bool pass = false;
};

struct LemmaReport {
  std::string lemma_id;
  std::uint64_t seed = 0;
  double epsilon = 0.0;
  std::uint64_t n = 0;
  double target = 0.0;     // headline numbers (worst sub-check)
  double estimate = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  double runtime_ms = 0.0;
  std::string note;
  std::vector<SubCheck> checks;
};

// One named statistical check. Known ids: remain, support, variance2,
// estimparam, numberbounce, t_equals_r, probreste, maxdep, estimt_mean,
// estimt_var, estimr, estims, normparam, nbrjumps, delta_a.
LemmaReport verify_lemma(const std::string& lemma_id, const LemmaParams& params);

const std::vector<std::string>& lemma_ids();

// Rescaled angular marginals beta(zeta(eps,s)) - beta(0) for n_paths
// independent trajectories started at alpha0 (side drawn from the annulus
// stationary law). Result is [s index][path index].
std::vector<std::vector<double>> billiard_marginals(const TubeProfile& profile, double alpha0,
                                                    const std::vector<double>& s_grid, int n_paths,
                                                    std::uint64_t master_seed);

struct MarginalComparison {
  double s = 0.0;
  double mean_billiard = 0.0, ci_mean_billiard = 0.0;
  double mean_ref = 0.0, ci_mean_ref = 0.0;
  double var_billiard = 0.0, var_ref = 0.0;
  double ks_stat = 0.0, ks_p = 0.0;
  bool mean_pass = false, var_pass = false, ks_pass = false;
};

struct InvarianceReport {
  double epsilon = 0.0;
  int n_paths = 0;
  std::uint64_t seed = 0;
  double alpha0 = 0.0;
  bool annulus_reference = false;  // exact Brownian law instead of an SDE ensemble
  bool pass = false;
  std::vector<MarginalComparison> rows;
  std::vector<double> s_grid;
  std::vector<std::vector<double>> billiard;   // [s][path]
  std::vector<std::vector<double>> reference;  // [s][path] (empty per-s for annulus mode)
};

struct InvarianceOptions {
  double var_tol = 0.25;        // relative window on the variance ratio
  double ks_p_floor = 0.001;
  double mean_window = 0.0;     // >0: hard window on |mean|; otherwise CI overlap
  double var_low = 0.0;         // >0 with var_high: absolute variance window (annulus)
  double var_high = 0.0;
  double dt = 1e-4;
  double alpha0 = 0.0;
};

// Billiard ensemble against the limiting law: exact Brownian marginals for
// the annulus, an Euler-Maruyama ensemble otherwise.
InvarianceReport compare_invariance(const TubeProfile& profile, const std::vector<double>& s_grid,
                                    int n_paths, std::uint64_t master_seed,
                                    const InvarianceOptions& opts = {});

}  // namespace knudsen
