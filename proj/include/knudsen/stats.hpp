#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "knudsen/parallel.hpp"

namespace knudsen {

struct MomentEstimate {
  double mean = 0.0;
  double variance = 0.0;
  std::uint64_t n = 0;
  double ci95_mean = 0.0;  // half-width
  double ci95_var = 0.0;   // half-width, normal approximation
};

MomentEstimate moment_estimate(std::span<const double> samples);
MomentEstimate moment_estimate(const MomentAccumulator& acc);

struct KsResult {
  double statistic = 0.0;
  std::uint64_t n1 = 0;
  std::uint64_t n2 = 0;
  double p_value = 1.0;
};

// Survival function of the Kolmogorov distribution, Q(lambda).
double kolmogorov_sf(double lambda);

// Two-sample test; p-value from the asymptotic Kolmogorov distribution with
// effective sample size n1*n2/(n1+n2). Inputs are copied and sorted.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

// One-sample test against a reference CDF.
KsResult ks_one_sample(std::vector<double> a, const std::function<double(double)>& cdf);

double normal_cdf(double x);

// E[x(Theta)^2] for the annulus chord launched from the inner circle:
// the integral of sin^2 cos^3 (-1+eps+sqrt(1+(2-eps) eps tan^2))^2 over
// (0, pi/2), evaluated adaptively to ~1e-12 relative accuracy.
double quadrature_Ex2(double epsilon);

}  // namespace knudsen
