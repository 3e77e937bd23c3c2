#include "wplap/muckenhoupt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "wplap/errors.hpp"
#include "wplap/quadrature.hpp"

namespace wplap {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Strict a < b with 1e-12 relative slack: boundary values are rejected.
bool strictly_less(double a, double b) {
  if (std::isinf(a) || std::isinf(b)) return a < b;
  double scale = std::max({1.0, std::fabs(a), std::fabs(b)});
  return a < b - 1e-12 * scale;
}

// Family maximum of a per-ball ratio at one resolution; inf on overflow.
template <class Ratio>
double family_max(const BallFamily& fam, int resolution, double guard,
                  Ratio&& ratio) {
  double best = -kInf;
  for (const auto& c : fam.centers) {
    for (double r : fam.radii) {
      double val = ratio(Ball{c, r}, resolution);
      if (!std::isfinite(val) || val > guard) return kInf;
      best = std::max(best, val);
    }
  }
  return best;
}

// Shared refinement ladder + divergence flag.
template <class LevelMax>
EstimateResult refine_estimate(const RefineOpts& opts, LevelMax&& level_max) {
  if (opts.levels < 2) throw ParameterError("refinement needs >= 2 levels");
  EstimateResult res;
  int resolution = opts.base_resolution;
  for (int lvl = 0; lvl < opts.levels; ++lvl) {
    double m = level_max(resolution);
    res.level_values.push_back(m);
    if (std::isinf(m)) {
      res.diverged = true;
      res.value = m;
      return res;
    }
    resolution *= opts.level_factor;
  }
  res.value = res.level_values.back();
  bool monotone = true;
  for (std::size_t i = 0; i + 1 < res.level_values.size(); ++i) {
    if (!(res.level_values[i + 1] >
          res.level_values[i] * (1.0 + 1e-12)))
      monotone = false;
  }
  double total_growth = res.level_values.back() /
                        std::max(res.level_values.front(), 1e-300);
  res.diverged = monotone && total_growth > opts.growth_threshold;
  return res;
}

}  // namespace

double ap_ratio(const Weight& omega, double p, const Ball& Q, int resolution) {
  if (!(p > 1.0)) throw ParameterError("ap_ratio needs p > 1");
  double pprime = p / (p - 1.0);
  Weight sigma = omega.pow(1.0 - pprime);
  double wq = weight_integral(omega, Q, resolution);
  double sq = weight_integral(sigma, Q, resolution);
  double measure = ball_measure(Q, resolution);
  return wq * std::pow(sq, p - 1.0) / std::pow(measure, p);
}

double a1_ratio(const Weight& omega, const Ball& Q, int resolution) {
  double wq = weight_integral(omega, Q, resolution);
  double inf_w = weight_min(omega, Q, resolution);
  double measure = ball_measure(Q, resolution);
  return wq / (measure * inf_w);
}

double doubling_ratio(const Weight& omega, const Ball& Q, int resolution) {
  Ball twoQ{Q.center, 2.0 * Q.radius};
  return weight_integral(omega, twoQ, resolution) /
         weight_integral(omega, Q, resolution);
}

EstimateResult ap_constant(const Weight& omega, double p,
                           const BallFamily& family, const RefineOpts& opts) {
  return refine_estimate(opts, [&](int res) {
    return family_max(family, res, opts.overflow_guard,
                      [&](const Ball& Q, int r) { return ap_ratio(omega, p, Q, r); });
  });
}

EstimateResult a1_constant(const Weight& omega, const BallFamily& family,
                           const RefineOpts& opts) {
  return refine_estimate(opts, [&](int res) {
    return family_max(family, res, opts.overflow_guard,
                      [&](const Ball& Q, int r) { return a1_ratio(omega, Q, r); });
  });
}

EstimateResult doubling_constant(const Weight& omega, const BallFamily& family,
                                 const RefineOpts& opts) {
  return refine_estimate(opts, [&](int res) {
    return family_max(family, res, opts.overflow_guard, [&](const Ball& Q, int r) {
      return doubling_ratio(omega, Q, r);
    });
  });
}

std::pair<double, double> ainf_params(const Weight& v, const BallFamily& family,
                                      int probe_count, int resolution,
                                      double fit_slack, double c_margin) {
  if (probe_count < 8) throw ParameterError("ainf_params needs >= 8 probes");
  // Collect (|E|/|Q|, v(E)/v(Q)) pairs over all probes.
  std::vector<std::pair<double, double>> pairs;
  const std::size_t d = family.x0.size();
  for (const auto& c : family.centers) {
    for (double r : family.radii) {
      Ball Q{c, r};
      double vQ = weight_integral(v, Q, resolution);
      double mQ = ball_measure(Q, resolution);
      if (!(vQ > 0.0) || !(mQ > 0.0)) continue;
      pairs.emplace_back(1.0, 1.0);  // E = Q anchors C >= 1
      auto add_box = [&](const Box& box) {
        double vE = weight_integral_in_box(v, Q, box, resolution);
        double mE = ball_box_measure(Q, box, resolution);
        if (mE > 0.0 && vE >= 0.0)
          pairs.emplace_back(mE / mQ, vE / vQ);
      };
      // Half-balls along every axis.
      for (std::size_t a = 0; a < d; ++a) {
        for (int side = 0; side < 2; ++side) {
          Box half{std::vector<double>(d, -kInf), std::vector<double>(d, kInf)};
          for (std::size_t b = 0; b < d; ++b) {
            half.lo[b] = c[b] - r;
            half.hi[b] = c[b] + r;
          }
          if (side == 0)
            half.hi[a] = c[a];
          else
            half.lo[a] = c[a];
          add_box(half);
        }
      }
      // Dyadic sub-boxes at 5 scales, probe positions strided through the
      // position lattice up to the probe budget per scale.
      for (int scale = 1; scale <= 5; ++scale) {
        long positions_per_axis = 1L << scale;
        long total = 1;
        for (std::size_t a = 0; a < d; ++a) total *= positions_per_axis;
        long stride = std::max(1L, total / probe_count);
        for (long pos = 0; pos < total; pos += stride) {
          Box sub{std::vector<double>(d), std::vector<double>(d)};
          long rest = pos;
          for (std::size_t a = 0; a < d; ++a) {
            long ia = rest % positions_per_axis;
            rest /= positions_per_axis;
            double side_len = 2.0 * r / positions_per_axis;
            sub.lo[a] = c[a] - r + ia * side_len;
            sub.hi[a] = sub.lo[a] + side_len;
          }
          add_box(sub);
        }
      }
    }
  }
  if (pairs.empty())
    throw ParameterError("ainf_params: no usable probe subsets");

  auto exact_c = [&](double delta) {
    double worst = 0.0;
    for (const auto& [s, t] : pairs)
      if (s > 0.0) worst = std::max(worst, t / std::pow(s, delta));
    return worst;
  };
  // Largest delta on a descending grid whose exact constant stays within
  // fit_slack of the trivial constant 1; always at least the floor.
  const double kFloor = 0.01;
  double delta = kFloor;
  for (int k = 100; k >= 1; --k) {
    double cand = 0.01 * k;
    if (exact_c(cand) <= 1.0 + fit_slack) {
      delta = cand;
      break;
    }
  }
  double C = exact_c(delta) * (1.0 + c_margin);
  return {C, delta};
}

BalanceExponents balance_exponents(double p, double q, int n, int m) {
  if (!(p > 1.0) || !(q > 0.0)) throw ParameterError("balance needs p > 1, q > 0");
  if (strictly_less(q, p))
    throw ParameterError("balance exponents require p <= q");
  double diff = 1.0 / p - 1.0 / q;
  BalanceExponents e;
  e.radius_exp = 1.0 - (m * (n + p) / p) * diff;
  e.omega_exp = 1.0 / p - (m / p) * diff;
  if (e.omega_exp < 0.0)
    throw ParameterError("balance exponent 1/p - (m/p)(1/p - 1/q) is negative");
  return e;
}

double balance_ratio(const Weight& v, const Weight& omega, double p, double q,
                     int n, int m, const Ball& inner, const Ball& outer,
                     int resolution) {
  BalanceExponents e = balance_exponents(p, q, n, m);
  double v_in = weight_integral(v, inner, resolution);
  double v_out = weight_integral(v, outer, resolution);
  double w_in = weight_integral(omega, inner, resolution);
  double w_out = weight_integral(omega, outer, resolution);
  double lhs = std::pow(inner.radius / outer.radius, e.radius_exp) *
               std::pow(v_in / v_out, 1.0 / q);
  double rhs = std::pow(w_in / w_out, e.omega_exp);
  return lhs / rhs;
}

EstimateResult balance_constant(const Weight& v, const Weight& omega, double p,
                                double q, int n, int m,
                                const BallFamily& family,
                                const RefineOpts& opts) {
  balance_exponents(p, q, n, m);  // validate up front
  return refine_estimate(opts, [&](int res) {
    double best = -kInf;
    for (const auto& c : family.centers) {
      for (std::size_t i = 0; i < family.radii.size(); ++i) {
        for (std::size_t j = i + 1; j < family.radii.size(); ++j) {
          Ball inner{c, family.radii[i]};
          Ball outer{c, family.radii[j]};
          double val = balance_ratio(v, omega, p, q, n, m, inner, outer, res);
          if (!std::isfinite(val) || val > opts.overflow_guard) return kInf;
          best = std::max(best, val);
        }
      }
    }
    return best;
  });
}

std::vector<std::pair<double, double>> compactness_profile(
    const Weight& v, const Weight& omega, double p, double q, int n, int m,
    const BallFamily& family, int resolution) {
  BalanceExponents e = balance_exponents(p, q, n, m);
  std::vector<std::pair<double, double>> profile;
  for (auto it = family.radii.rbegin(); it != family.radii.rend(); ++it) {
    double r = *it;
    double best = 0.0;
    for (const auto& c : family.centers) {
      Ball Q{c, r};
      double vq = weight_integral(v, Q, resolution);
      double wq = weight_integral(omega, Q, resolution);
      double bound = std::pow(r, e.radius_exp) * std::pow(vq, 1.0 / q) /
                     std::pow(wq, e.omega_exp);
      best = std::max(best, bound);
    }
    profile.emplace_back(r, best);
  }
  return profile;
}

bool compactness_vanishes(const std::vector<std::pair<double, double>>& profile,
                          double vanish_fraction) {
  if (profile.size() < 2) return false;
  return profile.back().second < vanish_fraction * profile.front().second;
}

ExponentReport validate_exponents(double p, double q, double gamma, double mu,
                                  int n, int m, bool v_is_scaled_omega) {
  ExponentReport rep;
  char buf[160];
  auto flag = [&](const char* fmt, double a, double b) {
    std::snprintf(buf, sizeof buf, fmt, a, b);
    rep.violations.push_back(buf);
  };
  if (n < 1 || m < 1) {
    rep.violations.push_back("dimensions require n >= 1 and m >= 1");
    return rep;
  }
  const double N = n + m;

  rep.p_ok = strictly_less(1.0, p) && strictly_less(p, N);
  if (!rep.p_ok) flag("p = %g outside (1, %g)", p, N);

  rep.q_upper_general = p * N / (N - p);
  rep.q_ok_general = strictly_less(p, q) && strictly_less(q, rep.q_upper_general);
  if (!rep.q_ok_general) flag("q = %g outside (p, %g)", q, rep.q_upper_general);

  if (v_is_scaled_omega) {
    // Special-case upper bounds when v is a positive multiple of omega.
    double upper = 0.0;
    bool applicable = true;
    if (m == 1) {
      double s = p * p - p + 1.0;
      upper = (p * n * s + p * p) / (n * s + p - p * p);
    } else if (std::fabs(m - p) < 1e-12) {
      upper = p * (n + p) / n;
    } else if (m > p) {
      upper = p * m * (n + p) / (m * (n + p) - p * p);
    } else {
      applicable = false;  // 1 < m < p has no special-case bound
    }
    rep.corollary_applicable = applicable;
    rep.q_upper_corollary = upper;
    if (applicable) {
      rep.q_ok_corollary = strictly_less(p, q) && strictly_less(q, upper);
      if (!rep.q_ok_corollary)
        flag("q = %g outside the scaled-weight range (p, %g)", q, upper);
    }
  }

  rep.gamma_upper_strict = N / (N - 1.0);
  rep.gamma_strict_ok =
      strictly_less(1.0, gamma) && strictly_less(gamma, rep.gamma_upper_strict);
  rep.gamma_relaxed_ok = strictly_less(1.0, gamma) && strictly_less(gamma, p);
  if (!rep.gamma_strict_ok && rep.gamma_relaxed_ok) {
    // Relaxed range only: v^(-gamma/(q-gamma)) must be locally integrable.
    rep.integrability_caveat = true;
  }
  if (!rep.gamma_strict_ok && !rep.gamma_relaxed_ok)
    flag("gamma = %g outside (1, %g) and outside (1, p)", gamma,
         rep.gamma_upper_strict);

  rep.mu_ok = mu > 0.0;
  if (!rep.mu_ok) flag("mu = %g must be positive", mu, 0.0);

  rep.valid = rep.p_ok && rep.q_ok_general &&
              (!v_is_scaled_omega || !rep.corollary_applicable ||
               rep.q_ok_corollary) &&
              (rep.gamma_strict_ok || rep.gamma_relaxed_ok) && rep.mu_ok;
  return rep;
}

WeightReport build_weight_report(const Weight& omega, const Weight& v, double p,
                                 double q, int n, int m,
                                 const BallFamily& family,
                                 const WeightReportOpts& opts) {
  WeightReport rep;
  rep.ap = ap_constant(omega, p, family, opts.refine);
  if (opts.include_a1) rep.a1 = a1_constant(omega, family, opts.refine);
  std::tie(rep.ainf_C, rep.ainf_delta) =
      ainf_params(v, family, opts.ainf_probes,
                  opts.refine.base_resolution * opts.refine.level_factor);
  rep.doubling = doubling_constant(omega, family, opts.refine);
  rep.balance = balance_constant(v, omega, p, q, n, m, family, opts.refine);

  const BallFamily* prof_fam = &family;
  BallFamily compact_fam;
  if (opts.compactness_steps || opts.compactness_theta) {
    double fam_theta = family.radii.size() >= 2
                           ? family.radii[family.radii.size() - 2] /
                                 family.radii.back()
                           : 0.5;
    compact_fam = make_lattice_family(
        family.x0, family.R,
        family.centers.empty() ? 1
                               : static_cast<int>(std::lround(std::pow(
                                     family.centers.size(), 1.0 / family.x0.size()))),
        opts.compactness_steps.value_or(static_cast<int>(family.radii.size())),
        opts.compactness_theta.value_or(fam_theta));
    prof_fam = &compact_fam;
  }
  int prof_res = opts.refine.base_resolution * opts.refine.level_factor;
  rep.compactness =
      compactness_profile(v, omega, p, q, n, m, *prof_fam, prof_res);
  rep.compactness_pass =
      compactness_vanishes(rep.compactness, opts.vanish_fraction);
  return rep;
}

}  // namespace wplap
