#pragma once

// Shared oracles for the test binaries.  Everything here is deliberately
// written against the mathematical definitions, not against the library's
// own quadrature or reduction code paths.

#include <cmath>
#include <functional>
#include <vector>

#include "wplap/functional.hpp"
#include "wplap/grid.hpp"
#include "wplap/reduction.hpp"

namespace testing_oracles {

inline double rel_diff(double a, double b) {
  double scale = std::max({1.0, std::abs(a), std::abs(b)});
  return std::abs(a - b) / scale;
}

// Adaptive Simpson on a plain callable; the recursion is the classic
// Richardson-controlled one, nothing shared with the graded integrator.
inline double simpson_rec(const std::function<double(double)>& f, double a,
                          double b, double fa, double fm, double fb,
                          double whole, double tol, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a,
                               double b, double tol = 1e-12, int depth = 48) {
  double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_rec(f, a, b, fa, fm, fb, whole, tol, depth);
}

// Central-difference directional derivative of the discrete energy.
inline double fd_directional(const wplap::DiscreteProblem& prob,
                             const wplap::Field& u, const wplap::Field& phi,
                             double h) {
  wplap::Field up = u, um = u;
  for (std::size_t j = 0; j < u.values.size(); ++j) {
    up.values[j] += h * phi.values[j];
    um.values[j] -= h * phi.values[j];
  }
  return (prob.energy(up).I - prob.energy(um).I) / (2.0 * h);
}

// <I'(u), phi> from the residual density: cell_volume * sum g_j phi_j.
inline double pairing(const wplap::DiscreteProblem& prob, const wplap::Field& u,
                      const wplap::Field& phi) {
  std::vector<double> g = prob.residual(u);
  std::vector<double> terms(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) terms[j] = g[j] * phi.values[j];
  return prob.grid().cell_volume * wplap::pairwise_sum(terms);
}

// Least-squares slope of log|err| against log h.
inline double loglog_slope(const std::vector<double>& hs,
                           const std::vector<double>& errs) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  double n = double(hs.size());
  for (std::size_t i = 0; i < hs.size(); ++i) {
    double x = std::log(hs[i]), y = std::log(errs[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace testing_oracles
