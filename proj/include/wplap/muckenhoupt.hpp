#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wplap/ball_family.hpp"
#include "wplap/weight.hpp"

namespace wplap {

/* Refinement schedule shared by the ball-ratio estimators.
 *
 * Each estimate is the family maximum of a quadrature ratio, recomputed at
 * `levels` resolutions base, base*factor, base*factor^2, ...; the reported
 * value is the finest level.  The estimate is flagged diverged when the
 * level maxima grow strictly monotonically and the total growth across
 * the ladder exceeds `growth_threshold` (log-type divergence at the class
 * boundary grows slowly, so the threshold sits well below 2), or when any
 * quadrature sum trips the overflow guard.
 */
struct RefineOpts {
  int base_resolution = 128;
  int levels = 4;
  int level_factor = 4;
  double growth_threshold = 1.25;
  double overflow_guard = 1e280;
};

struct EstimateResult {
  double value = 0.0;  // family max at the finest level
  bool diverged = false;
  std::vector<double> level_values;  // family max per level, coarse to fine
};

// Single-ball ratios at a fixed resolution (the estimators take maxima of
// these; tests recompute them to check the maximum property).
double ap_ratio(const Weight& omega, double p, const Ball& Q, int resolution);
double a1_ratio(const Weight& omega, const Ball& Q, int resolution);
double doubling_ratio(const Weight& omega, const Ball& Q, int resolution);
double balance_ratio(const Weight& v, const Weight& omega, double p, double q,
                     int n, int m, const Ball& inner, const Ball& outer,
                     int resolution);

// sup over the family of (∫_Q ω)(∫_Q σ)^(p-1) / |Q|^p with σ = ω^(1-p').
EstimateResult ap_constant(const Weight& omega, double p,
                           const BallFamily& family, const RefineOpts& opts);

// sup over the family of (∫_Q ω) / (|Q| · inf_Q ω).
EstimateResult a1_constant(const Weight& omega, const BallFamily& family,
                           const RefineOpts& opts);

// sup over the family of ω(2Q)/ω(Q).
EstimateResult doubling_constant(const Weight& omega, const BallFamily& family,
                                 const RefineOpts& opts);

/* Fits (C, delta) with v(E)/v(Q) <= C (|E|/|Q|)^delta over probe subsets
 * E ⊂ Q: dyadic sub-boxes at 5 scales (up to `probe_count` positions per
 * scale), half-balls, and E = Q.  delta is the largest grid value whose
 * exact constant stays within `fit_slack` of 1; C is that exact constant
 * times (1 + c_margin) so the fitted pair survives denser probes.
 */
std::pair<double, double> ainf_params(const Weight& v, const BallFamily& family,
                                      int probe_count, int resolution,
                                      double fit_slack = 0.05,
                                      double c_margin = 0.02);

// Exponents of the balance expression.
struct BalanceExponents {
  double radius_exp;  // 1 - (m(n+p)/p)(1/p - 1/q)
  double omega_exp;   // 1/p - (m/p)(1/p - 1/q)
};
BalanceExponents balance_exponents(double p, double q, int n, int m);

// sup over centers and nested ladder pairs r < R of
// (r/R)^radius_exp (v(Q_r)/v(Q_R))^(1/q) / (ω(Q_r)/ω(Q_R))^omega_exp.
EstimateResult balance_constant(const Weight& v, const Weight& omega, double p,
                                double q, int n, int m,
                                const BallFamily& family,
                                const RefineOpts& opts);

/* Per-radius bound r^radius_exp v(Q_r)^(1/q) / ω(Q_r)^omega_exp maximized
 * over centers, tabulated over the ladder sorted by decreasing r.  The
 * vanishing verdict passes when the bound at the smallest radius is below
 * `vanish_fraction` times the bound at the largest.
 */
std::vector<std::pair<double, double>> compactness_profile(
    const Weight& v, const Weight& omega, double p, double q, int n, int m,
    const BallFamily& family, int resolution);
bool compactness_vanishes(const std::vector<std::pair<double, double>>& profile,
                          double vanish_fraction = 0.1);

/* Admissible-range verdict for (p, q, gamma, mu).
 *
 * Strict inequalities carry 1e-12 relative slack, so exact boundary values
 * are rejected.  The q upper bound is p(n+m)/(n+m-p) in general; when v is
 * declared a positive multiple of ω the special-case bounds for m = 1,
 * m = p and m > p apply on top.
 */
struct ExponentReport {
  bool p_ok = false;
  bool q_ok_general = false;
  bool corollary_applicable = false;
  bool q_ok_corollary = true;
  bool gamma_strict_ok = false;
  bool gamma_relaxed_ok = false;
  bool integrability_caveat = false;  // set when only the relaxed range holds
  bool mu_ok = false;
  bool valid = false;
  double q_upper_general = 0.0;
  double q_upper_corollary = 0.0;
  double gamma_upper_strict = 0.0;
  std::vector<std::string> violations;
};
ExponentReport validate_exponents(double p, double q, double gamma, double mu,
                                  int n, int m, bool v_is_scaled_omega);

/* Bundle of every estimate for one (ω, v, p, q) configuration. */
struct WeightReport {
  EstimateResult ap;
  std::optional<EstimateResult> a1;
  double ainf_C = 0.0;
  double ainf_delta = 0.0;
  EstimateResult doubling;
  EstimateResult balance;
  std::vector<std::pair<double, double>> compactness;
  bool compactness_pass = false;
};

struct WeightReportOpts {
  RefineOpts refine;
  int ainf_probes = 16;
  double vanish_fraction = 0.1;
  bool include_a1 = true;
  // Compactness wants a ladder spanning several decades; when set these
  // override the family's ladder for the profile only.
  std::optional<int> compactness_steps;
  std::optional<double> compactness_theta;
};

WeightReport build_weight_report(const Weight& omega, const Weight& v, double p,
                                 double q, int n, int m,
                                 const BallFamily& family,
                                 const WeightReportOpts& opts);

}  // namespace wplap
