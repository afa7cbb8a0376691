#include "knudsen/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "knudsen/errors.hpp"

namespace knudsen {

MomentEstimate moment_estimate(const MomentAccumulator& acc) {
  MomentEstimate e;
  e.n = acc.n;
  e.mean = acc.mean;
  e.variance = acc.variance();
  if (acc.n > 1) {
    const double n = static_cast<double>(acc.n);
    e.ci95_mean = 1.96 * std::sqrt(e.variance / n);
    const double var_of_var = std::max(0.0, acc.fourth_central() - e.variance * e.variance);
    e.ci95_var = 1.96 * std::sqrt(var_of_var / n);
  }
  return e;
}

MomentEstimate moment_estimate(std::span<const double> samples) {
  MomentAccumulator acc;
  for (double x : samples) acc.add(x);
  return moment_estimate(acc);
}

double kolmogorov_sf(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.18) {
    // dual theta-series, fast for small lambda
    const double pi2 = 9.869604401089358;  // pi^2
    const double v = pi2 / (8.0 * lambda * lambda);
    const double cdf = std::sqrt(2.0 * 3.14159265358979323846) / lambda *
                       (std::exp(-v) + std::exp(-9.0 * v) + std::exp(-25.0 * v) +
                        std::exp(-49.0 * v));
    return 1.0 - cdf;
  }
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += sign * term;
    if (term < 1e-300) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.size() < 20 || b.size() < 20)
    throw InsufficientSamples("ks_two_sample: need at least 20 samples per side");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const std::size_t na = a.size(), nb = b.size();
  // empirical CDF gap from integer counts: exactly zero on identical input
  std::size_t ia = 0, ib = 0;
  double dmax = 0.0;
  while (ia < na && ib < nb) {
    if (a[ia] < b[ib]) {
      ++ia;
    } else if (a[ia] > b[ib]) {
      ++ib;
    } else {
      const double x = a[ia];
      while (ia < na && a[ia] == x) ++ia;
      while (ib < nb && b[ib] == x) ++ib;
    }
    const double diff = static_cast<double>(ia) / static_cast<double>(na) -
                        static_cast<double>(ib) / static_cast<double>(nb);
    dmax = std::max(dmax, std::fabs(diff));
  }
  KsResult r;
  r.statistic = dmax;
  r.n1 = na;
  r.n2 = nb;
  const double neff = static_cast<double>(na) * static_cast<double>(nb) /
                      static_cast<double>(na + nb);
  r.p_value = kolmogorov_sf(std::sqrt(neff) * dmax);
  return r;
}

KsResult ks_one_sample(std::vector<double> a, const std::function<double(double)>& cdf) {
  if (a.size() < 20) throw InsufficientSamples("ks_one_sample: need at least 20 samples");
  std::sort(a.begin(), a.end());
  const std::size_t n = a.size();
  double dmax = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double F = cdf(a[i]);
    dmax = std::max(dmax, std::fabs(F - static_cast<double>(i) / static_cast<double>(n)));
    dmax = std::max(dmax, std::fabs(static_cast<double>(i + 1) / static_cast<double>(n) - F));
  }
  KsResult r;
  r.statistic = dmax;
  r.n1 = n;
  r.n2 = 0;
  r.p_value = kolmogorov_sf(std::sqrt(static_cast<double>(n)) * dmax);
  return r;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / 1.4142135623730950488); }

namespace {

// squared chord abscissa: integrand of E[x(Theta)^2], written in the
// cancellation-free form x = sin * w / D
double ex2_integrand(double theta, double eps) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const double w = eps * (2.0 - eps);
  const double D = std::sqrt(c * c + w * s * s) + (1.0 - eps) * c;
  const double x = s * w / D;
  return x * x * c;
}

struct Simpson {
  double eps;
  int evals = 0;

  double f(double t) {
    ++evals;
    return ex2_integrand(t, eps);
  }

  double recurse(double a, double b, double fa, double fm, double fb, double whole, double tol,
                 int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::fabs(delta) <= 15.0 * tol)
      return left + right + delta / 15.0;
    return recurse(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           recurse(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
  }

  double integrate(double a, double b, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return recurse(a, b, fa, fm, fb, whole, tol, depth);
  }
};

}  // namespace

double quadrature_Ex2(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 0.5))
    throw OutOfRange("quadrature_Ex2: epsilon outside (0, 0.5)");
  constexpr double kPi = 3.14159265358979323846;
  // split at the boundary layers so the adaptive pass converges quickly
  const double t2 = kPi / 2.0;
  const double t1 = t2 - std::sqrt(epsilon);
  const double t0 = t2 - std::min(0.5, 16.0 * std::sqrt(epsilon));
  Simpson s{epsilon};
  const double scale = 0.5 * epsilon * epsilon * std::log(1.0 / epsilon);
  const double tol = 1e-13 * scale;
  double v = 0.0;
  v += s.integrate(0.0, t0, tol, 48);
  v += s.integrate(t0, t1, tol, 48);
  v += s.integrate(t1, t2, tol, 48);
  return v;
}

}  // namespace knudsen
