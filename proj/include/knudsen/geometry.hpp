#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "knudsen/errors.hpp"

namespace knudsen {

using Vec2 = Eigen::Vector2d;

enum class Side : int { Outer = 0, Inner = 1 };

inline int side_index(Side s) { return static_cast<int>(s); }
inline Side other_side(Side s) { return s == Side::Outer ? Side::Inner : Side::Outer; }

// Finite trigonometric sum c0 + sum_k (a_k cos k*alpha + b_k sin k*alpha).
// 2pi-periodic and C^inf by construction.
struct FourierSeries {
  double c0 = 0.0;
  std::vector<double> cos_coef;  // a_1..a_K
  std::vector<double> sin_coef;  // b_1..b_K

  static FourierSeries constant(double c) { return FourierSeries{c, {}, {}}; }

  int max_harmonic() const {
    return static_cast<int>(std::max(cos_coef.size(), sin_coef.size()));
  }

  double eval(double alpha) const {
    double v = c0;
    for_each_harmonic(alpha, [&](int k, double ck, double sk) {
      v += a(k) * ck + b(k) * sk;
    });
    return v;
  }

  double deriv(double alpha) const {
    double v = 0.0;
    for_each_harmonic(alpha, [&](int k, double ck, double sk) {
      v += k * (b(k) * ck - a(k) * sk);
    });
    return v;
  }

  double deriv2(double alpha) const {
    double v = 0.0;
    for_each_harmonic(alpha, [&](int k, double ck, double sk) {
      v -= k * k * (a(k) * ck + b(k) * sk);
    });
    return v;
  }

  // One pass for value, first and second derivative.
  void eval_all(double alpha, double& v, double& d1, double& d2) const {
    v = c0;
    d1 = 0.0;
    d2 = 0.0;
    for_each_harmonic(alpha, [&](int k, double ck, double sk) {
      const double ak = a(k), bk = b(k);
      v += ak * ck + bk * sk;
      d1 += k * (bk * ck - ak * sk);
      d2 -= k * k * (ak * ck + bk * sk);
    });
  }

 private:
  double a(int k) const { return k <= static_cast<int>(cos_coef.size()) ? cos_coef[k - 1] : 0.0; }
  double b(int k) const { return k <= static_cast<int>(sin_coef.size()) ? sin_coef[k - 1] : 0.0; }

  template <class F>
  void for_each_harmonic(double alpha, F&& f) const {
    const int kmax = max_harmonic();
    if (kmax == 0) return;
    const double c1 = std::cos(alpha), s1 = std::sin(alpha);
    double ck = c1, sk = s1;
    for (int k = 1; k <= kmax; ++k) {
      f(k, ck, sk);
      const double cn = ck * c1 - sk * s1;  // angle-addition recurrence
      sk = sk * c1 + ck * s1;
      ck = cn;
    }
  }
};

// Thin tube between the curves (1 + eps*g(a)) e^{ia} (outer) and
// (1 - eps*f(a)) e^{ia} (inner). ExactAnnulus fixes f == 1, g == 0 so the
// tube is the annulus with radii 1-eps and 1.
struct TubeProfile {
  enum class Mode { ExactAnnulus, Perturbed };
  static constexpr int kMaxHarmonic = 8;

  Mode mode = Mode::ExactAnnulus;
  double epsilon = 0.0;
  FourierSeries f;  // inner width, dimensionless, range [1, 2]
  FourierSeries g;  // outer width, dimensionless, range [0, 1]

  static TubeProfile annulus(double eps) {
    TubeProfile p;
    p.mode = Mode::ExactAnnulus;
    p.epsilon = eps;
    p.f = FourierSeries::constant(1.0);
    p.g = FourierSeries::constant(0.0);
    return p;
  }

  static TubeProfile perturbed(double eps, FourierSeries f_, FourierSeries g_) {
    TubeProfile p;
    p.mode = Mode::Perturbed;
    p.epsilon = eps;
    p.f = std::move(f_);
    p.g = std::move(g_);
    return p;
  }

  bool is_annulus() const { return mode == Mode::ExactAnnulus; }

  double f_eps(double a) const { return epsilon * f.eval(a); }
  double g_eps(double a) const { return epsilon * g.eval(a); }
  double f_eps_d(double a) const { return epsilon * f.deriv(a); }
  double g_eps_d(double a) const { return epsilon * g.deriv(a); }
  double f_eps_dd(double a) const { return epsilon * f.deriv2(a); }
  double g_eps_dd(double a) const { return epsilon * g.deriv2(a); }

  // limit width h = f + g and its derivative (dimensionless)
  double h(double a) const { return f.eval(a) + g.eval(a); }
  double h_prime(double a) const { return f.deriv(a) + g.deriv(a); }

  // radial coordinate of the boundary: 1 + g_eps (outer), 1 - f_eps (inner)
  double radius(double a, Side s) const {
    return s == Side::Outer ? 1.0 + g_eps(a) : 1.0 - f_eps(a);
  }
};

struct BoundaryPoint {
  double alpha = 0.0;  // unwrapped angular parameter
  Side side = Side::Outer;
  Vec2 position = Vec2::Zero();
  double radius = 0.0;
};

// One closed-form annulus flight. Coordinates are in the frame where the
// launch point sits at angle pi/2 and the abscissa x grows with alpha, so
// delta_alpha = atan2(x, y) and positive theta gives positive delta_alpha.
struct ChordSolution {
  double a = 0.0;  // cot(theta)
  Side hit_side = Side::Outer;
  double x = 0.0;
  double y = 0.0;
  double delta_alpha = 0.0;
  double chord_length = 0.0;
};

struct ValidationCheck {
  std::string name;
  bool pass = false;
  double value = 0.0;  // extremal value the check looked at
  std::string detail;
};

struct ValidationReport {
  bool pass = false;
  std::vector<ValidationCheck> checks;
  double g_prime_sup = 0.0;  // sup |g'| on the grid (limit function)
  double kappa_min = 0.0;    // min curvature over both boundaries
};

BoundaryPoint eval_boundary(const TubeProfile& profile, double alpha, Side side);

// Signed curvature of the outer/inner boundary curve at parameter alpha.
double curvature(const TubeProfile& profile, double alpha, Side side);

// Angle between the inward normal and the radial direction; positive where
// the tube widens with increasing alpha.
double normal_tilt(const TubeProfile& profile, double alpha, Side side);

// Unit normal pointing from the boundary into the tube interior.
Vec2 inward_normal(const TubeProfile& profile, double alpha, Side side);

// Launch direction for a reflection angle theta measured from the inward
// normal. Theta is signed so that positive values deflect the ray toward
// increasing alpha on either boundary.
Vec2 launch_direction(const TubeProfile& profile, double alpha, Side side, double theta);

ValidationReport validate_profile(const TubeProfile& profile);

// Closed-form flight in the exact annulus D(eps, 1).
// start_side Inner always lands on Outer; from Outer the ray reaches the
// inner circle iff cot^2(theta) >= (2 eps - eps^2) / (1 - eps)^2.
inline ChordSolution annulus_chord(double epsilon, double theta, Side start_side) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  if (!(std::fabs(theta) < 1.5707963267948966) || c <= 0.0)
    throw DegenerateTangent("annulus_chord: |theta| = pi/2");
  const double w = epsilon * (2.0 - epsilon);  // 1 - (1-eps)^2
  ChordSolution sol;
  sol.a = c / s;  // +-inf at theta = 0
  if (start_side == Side::Inner) {
    // launch (0, 1-eps); x = s*w/D is the cancellation-free form of the
    // quadratic-root solution of x^2 + (ax + 1 - eps)^2 = 1
    const double D = std::sqrt(c * c + w * s * s) + (1.0 - epsilon) * c;
    const double chord = w / D;
    sol.hit_side = Side::Outer;
    sol.chord_length = chord;
    sol.x = s * chord;
    sol.y = (1.0 - epsilon) + c * chord;
    sol.delta_alpha = std::atan2(sol.x, sol.y);
  } else {
    const double disc = ((1.0 - epsilon) - s) * ((1.0 - epsilon) + s);
    if (disc >= 0.0) {
      // reaches the inner circle; first root of t^2 - 2 t cos + w = 0
      const double chord = w / (c + std::sqrt(disc));
      sol.hit_side = Side::Inner;
      sol.chord_length = chord;
      sol.x = chord * s;
      sol.y = 1.0 - chord * c;
      sol.delta_alpha = std::atan2(sol.x, sol.y);
    } else {
      // stays on the outer circle; second root t = 2 cos
      sol.hit_side = Side::Outer;
      sol.chord_length = 2.0 * c;
      sol.x = std::sin(2.0 * theta);
      sol.y = -std::cos(2.0 * theta);
      sol.delta_alpha = std::atan2(sol.x, sol.y);
    }
  }
  return sol;
}

// First intersection of the ray start + t*direction (t > delta_min) with
// either boundary. direction must point into the tube interior.
BoundaryPoint ray_intersect(const TubeProfile& profile, const BoundaryPoint& start,
                            const Vec2& direction);

}  // namespace knudsen
