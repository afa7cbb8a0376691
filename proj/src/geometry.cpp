#include "knudsen/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace knudsen {

namespace {

constexpr double kPi = 3.14159265358979323846;

// wrap v into (base - pi, base + pi]
double unwrap_near(double v, double base) {
  double d = std::remainder(v - base, 2.0 * kPi);
  return base + d;
}

}  // namespace

BoundaryPoint eval_boundary(const TubeProfile& profile, double alpha, Side side) {
  BoundaryPoint bp;
  bp.alpha = alpha;
  bp.side = side;
  bp.radius = profile.radius(alpha, side);
  bp.position = bp.radius * Vec2(std::cos(alpha), std::sin(alpha));
  return bp;
}

double curvature(const TubeProfile& profile, double alpha, Side side) {
  if (side == Side::Outer) {
    double g, gd, gdd;
    profile.g.eval_all(alpha, g, gd, gdd);
    g *= profile.epsilon;
    gd *= profile.epsilon;
    gdd *= profile.epsilon;
    const double r = 1.0 + g;
    return (r * (r - gdd) + 2.0 * gd * gd) / std::pow(r * r + gd * gd, 1.5);
  }
  double f, fd, fdd;
  profile.f.eval_all(alpha, f, fd, fdd);
  f *= profile.epsilon;
  fd *= profile.epsilon;
  fdd *= profile.epsilon;
  const double r = 1.0 - f;
  return (r * (r + fdd) + 2.0 * fd * fd) / std::pow(r * r + fd * fd, 1.5);
}

double normal_tilt(const TubeProfile& profile, double alpha, Side side) {
  if (side == Side::Outer) {
    const double g = profile.g_eps(alpha);
    const double gd = profile.g_eps_d(alpha);
    return std::asin(gd / std::sqrt((1.0 + g) * (1.0 + g) + gd * gd));
  }
  const double f = profile.f_eps(alpha);
  const double fd = profile.f_eps_d(alpha);
  return std::asin(fd / std::sqrt((1.0 - f) * (1.0 - f) + fd * fd));
}

Vec2 inward_normal(const TubeProfile& profile, double alpha, Side side) {
  const double gamma = normal_tilt(profile, alpha, side);
  // outer: -e^{i(alpha - gamma)}; inner: +e^{i(alpha + gamma)}
  const double ang = side == Side::Outer ? alpha - gamma + kPi : alpha + gamma;
  return Vec2(std::cos(ang), std::sin(ang));
}

Vec2 launch_direction(const TubeProfile& profile, double alpha, Side side, double theta) {
  const Vec2 n = inward_normal(profile, alpha, side);
  // rotate by +theta on the inner boundary, -theta on the outer one, so that
  // positive theta always points toward increasing alpha
  const double rot = side == Side::Inner ? theta : -theta;
  const double c = std::cos(rot), s = std::sin(rot);
  return Vec2(c * n.x() - s * n.y(), s * n.x() + c * n.y());
}

ValidationReport validate_profile(const TubeProfile& profile) {
  constexpr int kGrid = 4096;
  ValidationReport rep;
  double fmin = 1e300, fmax = -1e300, gmin = 1e300, gmax = -1e300;
  double kmin = 1e300;
  double gdsup = 0.0;
  for (int i = 0; i < kGrid; ++i) {
    const double a = 2.0 * kPi * i / kGrid;
    fmin = std::min(fmin, profile.f.eval(a));
    fmax = std::max(fmax, profile.f.eval(a));
    gmin = std::min(gmin, profile.g.eval(a));
    gmax = std::max(gmax, profile.g.eval(a));
    kmin = std::min({kmin, curvature(profile, a, Side::Outer), curvature(profile, a, Side::Inner)});
    gdsup = std::max(gdsup, std::fabs(profile.g.deriv(a)));
  }
  rep.g_prime_sup = gdsup;
  rep.kappa_min = kmin;

  auto add = [&rep](const std::string& name, bool pass, double value, std::string detail = "") {
    rep.checks.push_back({name, pass, value, std::move(detail)});
  };
  const double tol = 1e-12;
  add("f_range_low", fmin >= 1.0 - tol, fmin, "min f, needs >= 1");
  add("f_range_high", fmax <= 2.0 + tol, fmax, "max f, needs <= 2");
  add("g_range_low", gmin >= -tol, gmin, "min g, needs >= 0");
  add("g_range_high", gmax <= 1.0 + tol, gmax, "max g, needs <= 1");
  add("curvature_positive", kmin > 0.0, kmin, "min curvature over both boundaries");
  const double eps_cap = profile.is_annulus() ? 0.5 : 0.01;
  add("epsilon_range", profile.epsilon > 0.0 && profile.epsilon <= eps_cap, profile.epsilon,
      profile.is_annulus() ? "needs 0 < eps < 0.5" : "needs 0 < eps <= 0.01");
  add("harmonics", profile.f.max_harmonic() <= TubeProfile::kMaxHarmonic &&
                       profile.g.max_harmonic() <= TubeProfile::kMaxHarmonic,
      std::max(profile.f.max_harmonic(), profile.g.max_harmonic()), "harmonic count cap");

  rep.pass = std::all_of(rep.checks.begin(), rep.checks.end(),
                         [](const ValidationCheck& c) { return c.pass; });
  return rep;
}

namespace {

// phi_out > 0 outside the outer curve, phi_in > 0 inside the inner hole.
struct LevelFuncs {
  const TubeProfile& profile;
  Vec2 p, d;

  void eval(double t, double& phi_out, double& phi_in) const {
    const Vec2 q = p + t * d;
    const double r2 = q.squaredNorm();
    const double beta = std::atan2(q.y(), q.x());
    const double ro = 1.0 + profile.g_eps(beta);
    const double ri = 1.0 - profile.f_eps(beta);
    phi_out = r2 - ro * ro;
    phi_in = ri * ri - r2;
  }

  double eval_one(double t, Side s) const {
    double po, pi;
    eval(t, po, pi);
    return s == Side::Outer ? po : pi;
  }

  double deriv_one(double t, Side s) const {
    const Vec2 q = p + t * d;
    const double r2 = q.squaredNorm();
    const double beta = std::atan2(q.y(), q.x());
    const double dbeta = (q.x() * d.y() - q.y() * d.x()) / r2;
    if (s == Side::Outer) {
      const double ro = 1.0 + profile.g_eps(beta);
      return 2.0 * q.dot(d) - 2.0 * ro * profile.g_eps_d(beta) * dbeta;
    }
    const double ri = 1.0 - profile.f_eps(beta);
    return -2.0 * q.dot(d) - 2.0 * ri * profile.f_eps_d(beta) * dbeta;
  }
};

// bisect phi (sign change lo->hi) down to the requested bracket width, then
// polish with a few Newton steps that must stay inside the bracket
double refine_root(const LevelFuncs& lf, Side s, double lo, double hi, double flo) {
  double fhi = lf.eval_one(hi, s);
  (void)fhi;
  while (hi - lo > 1e-14) {
    const double mid = 0.5 * (lo + hi);
    const double fm = lf.eval_one(mid, s);
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  double t = 0.5 * (lo + hi);
  for (int i = 0; i < 3; ++i) {
    const double fv = lf.eval_one(t, s);
    const double dv = lf.deriv_one(t, s);
    if (dv == 0.0) break;
    double tn = t - fv / dv;
    if (tn < lo || tn > hi) break;
    t = tn;
  }
  return t;
}

}  // namespace

BoundaryPoint ray_intersect(const TubeProfile& profile, const BoundaryPoint& start,
                            const Vec2& direction) {
  const double eps = profile.epsilon;
  const double delta_min = 1e-3 * eps;
  const double step = eps / 8.0;
  const double t_max = 4.0;

  LevelFuncs lf{profile, start.position, direction};

  double t_prev = delta_min;
  double out_prev, in_prev;
  lf.eval(t_prev, out_prev, in_prev);
  if (out_prev >= 0.0 || in_prev >= 0.0)
    throw TangentRay("ray_intersect: ray grazes the boundary at launch");

  // previous two inner-level values for the graze guard
  double in_prev2 = in_prev;
  double t_prev2 = t_prev;

  double root_t = -1.0;
  Side root_side = Side::Outer;

  for (double t = delta_min + step; t_prev < t_max; t += step) {
    double out_v, in_v;
    lf.eval(t, out_v, in_v);

    if (in_v >= 0.0) {
      root_side = Side::Inner;
      root_t = refine_root(lf, Side::Inner, t_prev, t, in_prev);
      break;
    }
    if (out_v >= 0.0) {
      root_side = Side::Outer;
      root_t = refine_root(lf, Side::Outer, t_prev, t, out_prev);
      break;
    }

    // A near-tangent pass over the inner boundary can enter and leave within
    // one marching step. Detect a local maximum of phi_in close to zero and
    // look for the hidden sign change around it.
    if (in_prev > in_prev2 && in_prev >= in_v && in_prev > -4.0 * step * step) {
      double a = t_prev2, b = t;
      // locate the maximum via bisection on the derivative
      for (int i = 0; i < 80 && b - a > 1e-15; ++i) {
        const double mid = 0.5 * (a + b);
        if (lf.deriv_one(mid, Side::Inner) > 0.0)
          a = mid;
        else
          b = mid;
      }
      const double t_top = 0.5 * (a + b);
      const double top = lf.eval_one(t_top, Side::Inner);
      if (top > 1e-12) {
        root_side = Side::Inner;
        root_t = refine_root(lf, Side::Inner, t_prev2, t_top, lf.eval_one(t_prev2, Side::Inner));
        break;
      }
      if (top >= -1e-13)
        throw TangentRay("ray_intersect: double root at the inner boundary");
    }

    t_prev2 = t_prev;
    in_prev2 = in_prev;
    t_prev = t;
    out_prev = out_v;
    in_prev = in_v;
  }

  if (root_t < 0.0) throw NoRootFound("ray_intersect: no crossing for t <= 4");

  const Vec2 q = start.position + root_t * direction;
  const double beta = unwrap_near(std::atan2(q.y(), q.x()), start.alpha);
  BoundaryPoint bp = eval_boundary(profile, beta, root_side);
  return bp;
}

}  // namespace knudsen
