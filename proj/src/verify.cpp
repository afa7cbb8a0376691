#include "knudsen/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>

#include "knudsen/errors.hpp"
#include "knudsen/parallel.hpp"

namespace knudsen {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kHalfPi = 1.5707963267948966;
constexpr std::uint64_t kChunk = 1 << 16;

double log_scale(double eps) { return 0.5 * eps * eps * std::log(1.0 / eps); }

// deterministic parallel harvest: per-chunk streams merged in chunk order
struct Harvest {
  MomentAccumulator acc;
  double max_abs = 0.0;
  std::uint64_t count_flag = 0;  // generic counter (e.g. stays, violations)
};

template <class F>
Harvest harvest(std::uint64_t n, std::uint64_t seed, std::uint64_t stream_base, F&& sample) {
  const std::uint64_t n_chunks = (n + kChunk - 1) / kChunk;
  std::vector<Harvest> parts(n_chunks);
  parallel_for_chunks(n, kChunk, [&](std::uint64_t c, std::uint64_t begin, std::uint64_t end) {
    SplitMix64 rng = SplitMix64::stream(seed, stream_base + c);
    Harvest& h = parts[c];
    for (std::uint64_t i = begin; i < end; ++i) {
      bool flag = false;
      const double v = sample(rng, flag);
      h.acc.add(v);
      h.max_abs = std::max(h.max_abs, std::fabs(v));
      if (flag) ++h.count_flag;
    }
  });
  Harvest total;
  for (const Harvest& h : parts) {
    total.acc.merge(h.acc);
    total.max_abs = std::max(total.max_abs, h.max_abs);
    total.count_flag += h.count_flag;
  }
  return total;
}

double bin_center(int j, int bins) { return 2.0 * kPi * (j + 0.5) / bins; }

SubCheck check_abs(std::string name, double target, double estimate, double tol_abs,
                   double ci = 0.0) {
  SubCheck c;
  c.name = std::move(name);
  c.target = target;
  c.estimate = estimate;
  c.tolerance = tol_abs;
  c.ci = ci;
  c.pass = std::fabs(estimate - target) <= tol_abs;
  return c;
}

SubCheck check_upper(std::string name, double bound, double estimate, double ci = 0.0) {
  SubCheck c;
  c.name = std::move(name);
  c.target = bound;
  c.estimate = estimate;
  c.tolerance = 0.0;
  c.ci = ci;
  c.pass = estimate <= bound;
  return c;
}

SubCheck check_lower(std::string name, double bound, double estimate, double ci = 0.0) {
  SubCheck c;
  c.name = std::move(name);
  c.target = bound;
  c.estimate = estimate;
  c.tolerance = 0.0;
  c.ci = ci;
  c.pass = estimate >= bound;
  return c;
}

void finalize(LemmaReport& rep) {
  rep.pass = !rep.checks.empty() &&
             std::all_of(rep.checks.begin(), rep.checks.end(),
                         [](const SubCheck& c) { return c.pass; });
  // headline = worst sub-check by |estimate - target| / max(tol, |target|, 1e-300)
  double worst = -1.0;
  for (const SubCheck& c : rep.checks) {
    const double denom = std::max({c.tolerance, std::fabs(c.target), 1e-300});
    const double score = std::fabs(c.estimate - c.target) / denom;
    if (score > worst) {
      worst = score;
      rep.target = c.target;
      rep.estimate = c.estimate;
      rep.tolerance = c.tolerance;
    }
  }
}

// ---- annulus one-jump samplers (closed form) ----

double annulus_T(double eps, SplitMix64& rng) {
  return annulus_chord(eps, sample_theta(rng), Side::Inner).delta_alpha;
}

// full jump from the outer circle; flag reports "stayed outer"
ChordSolution annulus_outer_jump(double eps, SplitMix64& rng) {
  return annulus_chord(eps, sample_theta(rng), Side::Outer);
}

// ---- individual checks ----

LemmaReport do_remain(const LemmaParams& p) {
  LemmaReport rep;
  const double eps = p.epsilon;
  const std::uint64_t n = p.n ? p.n : 1'000'000;
  const Harvest h = harvest(n, p.seed, 0, [&](SplitMix64& rng, bool& stayed) {
    const ChordSolution sol = annulus_outer_jump(eps, rng);
    stayed = sol.hit_side == Side::Outer;
    return sol.delta_alpha;
  });
  const double phat = static_cast<double>(h.count_flag) / static_cast<double>(n);
  const double sigma = std::sqrt(eps * (1.0 - eps) / static_cast<double>(n));
  rep.checks.push_back(check_abs("stay_probability", eps, phat, 3.0 * sigma, 1.96 * sigma));
  rep.n = n;
  return rep;
}

LemmaReport do_support(const LemmaParams& p) {
  LemmaReport rep;
  const double eps = p.epsilon;
  const std::uint64_t n = p.n ? p.n : 1'000'000;
  const std::uint64_t n_s = std::max<std::uint64_t>(n / 10, 1000);
  const double b_eps = std::atan(std::sqrt(2.0 * eps - eps * eps));

  const Harvest hT = harvest(n, p.seed, 0, [&](SplitMix64& rng, bool&) {
    return annulus_T(eps, rng);
  });
  const TubeProfile annulus = TubeProfile::annulus(eps);
  const Harvest hS = harvest(n_s, p.seed, 1'000'000, [&](SplitMix64& rng, bool&) {
    return sample_S(annulus, kHalfPi, rng);
  });

  rep.checks.push_back(check_upper("T_max_within_bound", b_eps, hT.max_abs));
  rep.checks.push_back(check_lower("T_max_tightness", 0.95 * b_eps, hT.max_abs));
  rep.checks.push_back(check_upper("S_max_within_2x_bound", 2.0 * b_eps, hS.max_abs));
  rep.n = n;
  rep.note = "exact geometric endpoints: T " + std::to_string(std::acos(1.0 - eps)) + ", S " +
             std::to_string(2.0 * std::acos(1.0 - eps));
  return rep;
}

LemmaReport do_variance2(const LemmaParams& p) {
  LemmaReport rep;
  std::vector<double> ladder = p.ladder;
  if (ladder.empty()) ladder = {1e-3, 1e-4, 1e-5, 1e-6};
  std::vector<double> ratios;
  for (double eps : ladder) ratios.push_back(quadrature_Ex2(eps) / log_scale(eps));
  for (std::size_t k = 0; k + 1 < ratios.size(); ++k) {
    rep.checks.push_back(check_upper("ladder_monotone_" + std::to_string(k),
                                     std::fabs(1.0 - ratios[k]),
                                     std::fabs(1.0 - ratios[k + 1])));
  }
  rep.checks.push_back(check_abs("final_rung_ratio", 1.0, ratios.back(), 0.10));

  // Monte Carlo cross-oracle at eps = 1e-2
  const double eps_mc = 1e-2;
  const std::uint64_t n_mc = p.n ? p.n : 10'000'000;
  const Harvest h = harvest(n_mc, p.seed, 0, [&](SplitMix64& rng, bool&) {
    const ChordSolution sol = annulus_chord(eps_mc, sample_theta(rng), Side::Inner);
    return sol.x * sol.x;
  });
  const double quad = quadrature_Ex2(eps_mc);
  const double se = std::sqrt(h.acc.variance() / static_cast<double>(n_mc));
  rep.checks.push_back(check_abs("mc_vs_quadrature", quad, h.acc.mean, 4.0 * se, 1.96 * se));
  rep.n = n_mc;
  {
    std::string s = "ladder ratios:";
    for (double r : ratios) s += " " + std::to_string(r);
    rep.note = s;
  }
  return rep;
}

LemmaReport do_estimparam(const LemmaParams& p) {
  LemmaReport rep;
  const double eps = p.epsilon;
  const std::uint64_t n = p.n ? p.n : 1'000'000;
  const Harvest hi = harvest(n, p.seed, 0, [&](SplitMix64& rng, bool&) {
    return annulus_chord(eps, sample_theta(rng), Side::Inner).chord_length;
  });
  const Harvest ho = harvest(n, p.seed, 1'000'000, [&](SplitMix64& rng, bool&) {
    return annulus_outer_jump(eps, rng).chord_length;
  });
  const double tol = 0.02 * kHalfPi;
  const double ci_i = 1.96 * std::sqrt(hi.acc.variance() / static_cast<double>(n)) / eps;
  const double ci_o = 1.96 * std::sqrt(ho.acc.variance() / static_cast<double>(n)) / eps;
  rep.checks.push_back(check_abs("flight_inner_over_eps", kHalfPi, hi.acc.mean / eps, tol, ci_i));
  rep.checks.push_back(check_abs("flight_outer_over_eps", kHalfPi, ho.acc.mean / eps, tol, ci_o));
  rep.n = 2 * n;
  return rep;
}

LemmaReport do_numberbounce(const LemmaParams& p) {
  LemmaReport rep;
  const double eps = p.epsilon;
  const double t_end = p.t_horizon;
  const int paths = p.paths ? p.paths : 1000;
  std::vector<double> counts(paths, 0.0);
  parallel_for_chunks(paths, 8, [&](std::uint64_t, std::uint64_t b, std::uint64_t e) {
    for (std::uint64_t q = b; q < e; ++q) {
      SplitMix64 rng = SplitMix64::stream(p.seed, q);
      ChainState st = make_initial_state(0.0, TubeProfile::annulus(eps), true, rng);
      double t = 0.0;
      std::uint64_t nrefl = 0;
      while (true) {
        const StepResult r = step_annulus(st, eps, rng);
        if (t + r.chord_length > t_end) break;
        t += r.chord_length;
        ++nrefl;
        st = r.state;
      }
      counts[q] = static_cast<double>(nrefl);
    }
  });
  const MomentEstimate m = moment_estimate(counts);
  const double bound = 2.0 * (t_end + 2.0 * eps) / eps;
  rep.checks.push_back(check_upper("mean_reflections_upper", bound, m.mean, m.ci95_mean));
  rep.checks.push_back(check_lower("mean_reflections_floor", 50.0, m.mean, m.ci95_mean));
  rep.n = static_cast<std::uint64_t>(paths);
  return rep;
}

LemmaReport do_t_equals_r(const LemmaParams& p) {
  LemmaReport rep;
  std::vector<double> ladder = p.ladder;
  if (ladder.empty()) ladder = {1e-2, 1e-3};
  const std::uint64_t n = p.n ? p.n : 100'000;
  std::uint64_t base = 0;
  for (double eps : ladder) {
    std::vector<double> tsamples(n), rsamples(n);
    const TubeProfile annulus = TubeProfile::annulus(eps);
    parallel_for_chunks(n, kChunk, [&](std::uint64_t c, std::uint64_t b, std::uint64_t e) {
      SplitMix64 rng = SplitMix64::stream(p.seed, base + c);
      for (std::uint64_t i = b; i < e; ++i) tsamples[i] = annulus_T(eps, rng);
    });
    base += 1'000'000;
    parallel_for_chunks(n, kChunk, [&](std::uint64_t c, std::uint64_t b, std::uint64_t e) {
      SplitMix64 rng = SplitMix64::stream(p.seed, base + c);
      for (std::uint64_t i = b; i < e; ++i) rsamples[i] = sample_R(annulus, kHalfPi, rng);
    });
    base += 1'000'000;

    const KsResult ks = ks_two_sample(tsamples, rsamples);
    rep.checks.push_back(check_lower("t_vs_r_p_eps" + std::to_string(eps), 0.01, ks.p_value));

    std::vector<double> shifted = tsamples;
    for (double& v : shifted) v += 0.01;
    const KsResult power = ks_two_sample(tsamples, shifted);
    rep.checks.push_back(check_upper("power_shifted_p_eps" + std::to_string(eps), 1e-6,
                                     power.p_value));
  }
  rep.n = n;
  return rep;
}

LemmaReport do_probreste(const LemmaParams& p) {
  LemmaReport rep;
  const TubeProfile& profile = p.perturbed_profile();
  const double eps = profile.epsilon;
  const std::uint64_t n = p.n ? p.n : 1'000'000;
  const double gsup = validate_profile(profile).g_prime_sup;
  const double lo = eps / 2.0;
  const double hi = eps * (4.0 + 6.0 * gsup);
  for (int j = 0; j < p.bins; ++j) {
    const double a = bin_center(j, p.bins);
    const Harvest h = harvest(n, p.seed, static_cast<std::uint64_t>(j) * 1'000'000,
                              [&](SplitMix64& rng, bool& stayed) {
                                ChainState st{a, Side::Outer, 0};
                                const StepResult r = step_general(st, profile, rng);
                                stayed = r.jump.kind == JumpKind::S;
                                return r.jump.value;
                              });
    const double phat = static_cast<double>(h.count_flag) / static_cast<double>(n);
    SubCheck c;
    c.name = "stay_prob_bin" + std::to_string(j);
    c.target = hi;  // record the envelope top as target; tolerance holds the bottom
    c.estimate = phat;
    c.tolerance = lo;
    c.ci = 1.96 * std::sqrt(phat * (1.0 - phat) / static_cast<double>(n));
    c.pass = phat >= lo && phat <= hi;
    rep.checks.push_back(c);
  }
  rep.n = n * p.bins;
  rep.note = "envelope [eps/2, eps(4+6|g'|)] = [" + std::to_string(lo) + ", " +
             std::to_string(hi) + "]";
  return rep;
}

LemmaReport do_maxdep(const LemmaParams& p) {
  LemmaReport rep;
  const TubeProfile& profile = p.perturbed_profile();
  const double eps = profile.epsilon;
  const std::uint64_t n_total = p.n ? p.n : 10'000'000;
  const int chains = 16;
  const std::uint64_t per_chain = n_total / chains;
  std::vector<double> maxes(chains, 0.0);
  parallel_for_chunks(chains, 1, [&](std::uint64_t, std::uint64_t b, std::uint64_t e) {
    for (std::uint64_t q = b; q < e; ++q) {
      SplitMix64 rng = SplitMix64::stream(p.seed, q);
      ChainState st = make_initial_state(bin_center(static_cast<int>(q), chains), profile,
                                         true, rng);
      double mx = 0.0;
      for (std::uint64_t k = 0; k < per_chain; ++k) {
        const StepResult r = step_general(st, profile, rng);
        mx = std::max(mx, std::fabs(r.jump.value));
        st = r.state;
      }
      maxes[q] = mx;
    }
  });
  const double mx = *std::max_element(maxes.begin(), maxes.end());
  rep.checks.push_back(check_upper("max_jump_within_12_sqrt_eps", 12.0 * std::sqrt(eps), mx));
  rep.n = per_chain * chains;
  return rep;
}

// conditional jump moments per alpha bin against the diffusion coefficients
LemmaReport do_estim_bins(const LemmaParams& p, bool from_inner, bool check_mean,
                          bool check_var) {
  LemmaReport rep;
  const TubeProfile& profile = p.perturbed_profile();
  const double eps = profile.epsilon;
  const std::uint64_t n = p.n ? p.n : 1'000'000;
  const double scale = log_scale(eps);
  for (int j = 0; j < p.bins; ++j) {
    const double a = bin_center(j, p.bins);
    Harvest h;
    if (from_inner) {
      h = harvest(n, p.seed, static_cast<std::uint64_t>(j) * 1'000'000,
                  [&](SplitMix64& rng, bool&) { return sample_T(profile, a, rng); });
    } else {
      h = harvest(n, p.seed, static_cast<std::uint64_t>(j) * 1'000'000,
                  [&](SplitMix64& rng, bool&) { return sample_R(profile, a, rng); });
    }
    const double hh = profile.h(a);
    const double hph = profile.h_prime(a) * hh;
    if (check_mean) {
      const double est = h.acc.mean / scale;
      const double ci = 1.96 * std::sqrt(h.acc.variance() / static_cast<double>(n)) / scale;
      rep.checks.push_back(check_abs("mean_bin" + std::to_string(j), hph, est,
                                     0.15 * std::fabs(hph), ci));
    }
    if (check_var) {
      const double est = h.acc.variance() / scale;
      const MomentEstimate me = moment_estimate(h.acc);
      rep.checks.push_back(check_abs("var_bin" + std::to_string(j), hh * hh, est,
                                     0.15 * hh * hh, me.ci95_var / scale));
    }
  }
  rep.n = n * p.bins;
  return rep;
}

// variance of the unconditioned jump from the outer boundary (stay or cross)
LemmaReport do_delta_a(const LemmaParams& p) {
  LemmaReport rep;
  const TubeProfile& profile = p.perturbed_profile();
  const double eps = profile.epsilon;
  const std::uint64_t n = p.n ? p.n : 1'000'000;
  const double scale = log_scale(eps);
  for (int j = 0; j < p.bins; ++j) {
    const double a = bin_center(j, p.bins);
    const Harvest h = harvest(n, p.seed, static_cast<std::uint64_t>(j) * 1'000'000,
                              [&](SplitMix64& rng, bool&) {
                                ChainState st{a, Side::Outer, 0};
                                return step_general(st, profile, rng).jump.value;
                              });
    const double hh = profile.h(a);
    const MomentEstimate me = moment_estimate(h.acc);
    rep.checks.push_back(check_abs("var_outer_bin" + std::to_string(j), hh * hh,
                                   h.acc.variance() / scale, 0.15 * hh * hh,
                                   me.ci95_var / scale));
  }
  rep.n = n * p.bins;
  return rep;
}

LemmaReport do_normparam(const LemmaParams& p) {
  LemmaReport rep;
  const TubeProfile& profile = p.perturbed_profile();
  const double eps = profile.epsilon;
  const std::uint64_t n = p.n ? p.n : 100'000;
  for (int j = 0; j < p.bins; ++j) {
    const double a = bin_center(j, p.bins);
    const double target = kHalfPi * profile.h(a);
    for (Side s : {Side::Inner, Side::Outer}) {
      const std::uint64_t base =
          static_cast<std::uint64_t>(j) * 1'000'000 + (s == Side::Outer ? 500'000 : 0);
      const Harvest h = harvest(n, p.seed, base, [&](SplitMix64& rng, bool&) {
        ChainState st{a, s, 0};
        return step_general(st, profile, rng).chord_length;
      });
      const double est = h.acc.mean / eps;
      const double ci = 1.96 * std::sqrt(h.acc.variance() / static_cast<double>(n)) / eps;
      rep.checks.push_back(check_abs(
          std::string("flight_bin") + std::to_string(j) + (s == Side::Inner ? "_inner" : "_outer"),
          target, est, 0.05 * target, ci));
    }
  }
  rep.n = n * p.bins * 2;
  return rep;
}

LemmaReport do_estims(const LemmaParams& p) {
  LemmaReport rep;
  const double kBoundConstant = 8.0;  // |E S(alpha)| <= C * eps with C fixed up front
  std::vector<double> ladder = p.ladder;
  if (ladder.empty()) ladder = {1e-2, 1e-3};
  const std::uint64_t n = p.n ? p.n : 20'000;
  std::uint64_t base = 0;
  for (double eps : ladder) {
    const TubeProfile profile =
        p.has_profile && p.profile.epsilon == eps ? p.profile : default_perturbed_profile(eps);
    double worst = 0.0;
    double worst_ci = 0.0;
    for (int j = 0; j < p.bins; ++j) {
      const double a = bin_center(j, p.bins);
      const StayBand band = stay_band(profile, a);
      const Harvest h = harvest(n, p.seed, base + static_cast<std::uint64_t>(j) * 1'000'000,
                                [&](SplitMix64& rng, bool&) { return sample_S(profile, a, band, rng); });
      const double v = std::fabs(h.acc.mean) / eps;
      if (v > worst) {
        worst = v;
        worst_ci = 1.96 * std::sqrt(h.acc.variance() / static_cast<double>(n)) / eps;
      }
    }
    rep.checks.push_back(check_upper("mean_S_over_eps_" + std::to_string(eps), kBoundConstant,
                                     worst, worst_ci));
    base += 100'000'000;
  }
  rep.n = n * p.bins * ladder.size();
  rep.note = "bound constant 8.0, applied to max over bins of |mean S|/eps";
  return rep;
}

LemmaReport do_nbrjumps(const LemmaParams& p) {
  LemmaReport rep;
  const TubeProfile& profile = p.perturbed_profile();
  const double eps = profile.epsilon;
  const double t_end = p.t_horizon;
  const int paths = p.paths ? p.paths : 50;
  const double gsup = validate_profile(profile).g_prime_sup;
  std::vector<double> counts(paths, 0.0);
  parallel_for_chunks(paths, 1, [&](std::uint64_t, std::uint64_t b, std::uint64_t e) {
    for (std::uint64_t q = b; q < e; ++q) {
      SplitMix64 rng = SplitMix64::stream(p.seed, q);
      ChainState st = make_initial_state(0.0, profile, true, rng);
      double t = 0.0;
      std::uint64_t nrefl = 0;
      while (true) {
        const StepResult r = step_general(st, profile, rng);
        if (t + r.chord_length > t_end) break;
        t += r.chord_length;
        ++nrefl;
        st = r.state;
      }
      counts[q] = static_cast<double>(nrefl);
    }
  });
  const MomentEstimate m = moment_estimate(counts);
  const double q_stay = eps * (4.0 + 6.0 * gsup);
  const double c = (2.0 - q_stay) / (2.0 * (1.0 - q_stay));
  const double bound = c * (t_end + 2.0 * eps) / eps;
  rep.checks.push_back(check_upper("mean_reflections_upper", bound, m.mean, m.ci95_mean));
  rep.n = static_cast<std::uint64_t>(paths);
  rep.note = "bound constant c = " + std::to_string(c);
  return rep;
}

}  // namespace

TubeProfile default_perturbed_profile(double eps) {
  FourierSeries f;
  f.c0 = 1.5;
  f.sin_coef = {0.5};
  FourierSeries g;
  g.c0 = 0.5;
  g.cos_coef = {0.5};
  return TubeProfile::perturbed(eps, f, g);
}

const TubeProfile& LemmaParams::perturbed_profile() const {
  if (has_profile) return profile;
  static thread_local TubeProfile cached;
  cached = default_perturbed_profile(epsilon);
  return cached;
}

const std::vector<std::string>& lemma_ids() {
  static const std::vector<std::string> ids = {
      "remain",    "support",     "variance2", "estimparam", "numberbounce",
      "t_equals_r", "probreste",  "maxdep",    "estimt_mean", "estimt_var",
      "estimr",    "estims",      "normparam", "nbrjumps",   "delta_a"};
  return ids;
}

LemmaReport verify_lemma(const std::string& lemma_id, const LemmaParams& params) {
  const auto start = std::chrono::steady_clock::now();
  LemmaReport rep;
  if (lemma_id == "remain") rep = do_remain(params);
  else if (lemma_id == "support") rep = do_support(params);
  else if (lemma_id == "variance2") rep = do_variance2(params);
  else if (lemma_id == "estimparam") rep = do_estimparam(params);
  else if (lemma_id == "numberbounce") rep = do_numberbounce(params);
  else if (lemma_id == "t_equals_r") rep = do_t_equals_r(params);
  else if (lemma_id == "probreste") rep = do_probreste(params);
  else if (lemma_id == "maxdep") rep = do_maxdep(params);
  else if (lemma_id == "estimt_mean") rep = do_estim_bins(params, true, true, false);
  else if (lemma_id == "estimt_var") rep = do_estim_bins(params, true, false, true);
  else if (lemma_id == "estimr") rep = do_estim_bins(params, false, true, true);
  else if (lemma_id == "estims") rep = do_estims(params);
  else if (lemma_id == "normparam") rep = do_normparam(params);
  else if (lemma_id == "nbrjumps") rep = do_nbrjumps(params);
  else if (lemma_id == "delta_a") rep = do_delta_a(params);
  else throw UnknownLemma("verify_lemma: unknown id '" + lemma_id + "'");

  rep.lemma_id = lemma_id;
  rep.seed = params.seed;
  rep.epsilon = params.epsilon;
  finalize(rep);
  rep.runtime_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - start)
                       .count();
  return rep;
}

std::vector<std::vector<double>> billiard_marginals(const TubeProfile& profile, double alpha0,
                                                    const std::vector<double>& s_grid, int n_paths,
                                                    std::uint64_t master_seed) {
  const TimeScale ts = TimeScale::from_epsilon(profile.epsilon);
  std::vector<double> zetas;
  zetas.reserve(s_grid.size());
  for (double s : s_grid) zetas.push_back(ts.zeta(s));
  // capture order follows ascending zeta
  std::vector<std::size_t> order(s_grid.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return zetas[a] < zetas[b]; });

  std::vector<std::vector<double>> out(s_grid.size(), std::vector<double>(n_paths, 0.0));
  parallel_for_chunks(n_paths, 4, [&](std::uint64_t, std::uint64_t b, std::uint64_t e) {
    for (std::uint64_t q = b; q < e; ++q) {
      SplitMix64 rng = SplitMix64::stream(master_seed, q);
      ChainState st = make_initial_state(alpha0, profile, true, rng);
      double t = 0.0;
      std::size_t gi = 0;
      while (gi < order.size() && zetas[order[gi]] <= 0.0) {
        out[order[gi]][q] = 0.0;
        ++gi;
      }
      while (gi < order.size()) {
        const StepResult r = step(st, profile, rng);
        const double tn = t + r.chord_length;
        while (gi < order.size() && tn > zetas[order[gi]]) {
          out[order[gi]][q] = st.alpha - alpha0;  // last reflection at or before zeta
          ++gi;
        }
        st = r.state;
        t = tn;
      }
    }
  });
  return out;
}

InvarianceReport compare_invariance(const TubeProfile& profile, const std::vector<double>& s_grid,
                                    int n_paths, std::uint64_t master_seed,
                                    const InvarianceOptions& opts) {
  InvarianceReport rep;
  rep.epsilon = profile.epsilon;
  rep.n_paths = n_paths;
  rep.seed = master_seed;
  rep.alpha0 = opts.alpha0;
  rep.s_grid = s_grid;
  rep.annulus_reference = profile.is_annulus();

  rep.billiard = billiard_marginals(profile, opts.alpha0, s_grid, n_paths, master_seed);
  if (!rep.annulus_reference) {
    const DiffusionSpec spec = DiffusionSpec::from_profile(profile, opts.alpha0);
    rep.reference = sde_ensemble(spec, s_grid, n_paths, master_seed ^ 0x5deece66dULL, opts.dt);
  }

  for (std::size_t gi = 0; gi < s_grid.size(); ++gi) {
    const double s = s_grid[gi];
    MarginalComparison row;
    row.s = s;
    const MomentEstimate mb = moment_estimate(rep.billiard[gi]);
    row.mean_billiard = mb.mean;
    row.ci_mean_billiard = mb.ci95_mean;
    row.var_billiard = mb.variance;
    if (s == 0.0) {
      row.mean_ref = opts.alpha0 - opts.alpha0;
      row.var_ref = 0.0;
      row.mean_pass = row.var_pass = row.ks_pass = true;
      rep.rows.push_back(row);
      continue;
    }
    if (rep.annulus_reference) {
      row.mean_ref = 0.0;
      row.ci_mean_ref = 0.0;
      row.var_ref = s;
      const double sd = std::sqrt(s);
      const KsResult ks = ks_one_sample(rep.billiard[gi],
                                        [sd](double x) { return normal_cdf(x / sd); });
      row.ks_stat = ks.statistic;
      row.ks_p = ks.p_value;
      row.mean_pass = opts.mean_window > 0.0 ? std::fabs(mb.mean) <= opts.mean_window
                                             : std::fabs(mb.mean) <= mb.ci95_mean;
      row.var_pass = opts.var_low > 0.0 ? (mb.variance >= opts.var_low * s &&
                                           mb.variance <= opts.var_high * s)
                                        : std::fabs(mb.variance / s - 1.0) <= opts.var_tol;
    } else {
      const MomentEstimate mr = moment_estimate(rep.reference[gi]);
      row.mean_ref = mr.mean;
      row.ci_mean_ref = mr.ci95_mean;
      row.var_ref = mr.variance;
      const KsResult ks = ks_two_sample(rep.billiard[gi], rep.reference[gi]);
      row.ks_stat = ks.statistic;
      row.ks_p = ks.p_value;
      row.mean_pass = std::fabs(mb.mean - mr.mean) <= mb.ci95_mean + mr.ci95_mean;
      row.var_pass = std::fabs(mb.variance / mr.variance - 1.0) <= opts.var_tol;
    }
    row.ks_pass = row.ks_p > opts.ks_p_floor;
    rep.rows.push_back(row);
  }
  rep.pass = std::all_of(rep.rows.begin(), rep.rows.end(), [](const MarginalComparison& r) {
    return r.mean_pass && r.var_pass && r.ks_pass;
  });
  return rep;
}

}  // namespace knudsen
