#pragma once

#include <functional>
#include <optional>
#include <span>

#include "wplap/weight.hpp"

namespace wplap {

/* Midpoint quadrature over Euclidean balls.
 *
 * The ball's bounding box is split into `resolution` cells per axis and
 * the weight is sampled at cell centers; cells whose center falls outside
 * the ball contribute zero.  Centers landing exactly on a power-weight
 * singularity are shifted by half a cell (Weight::eval).  Per-cell
 * contributions are reduced with the deterministic pairwise tree, so the
 * result is independent of any evaluation schedule.
 *
 * Ratio-type estimators normalize by the measure computed on the same
 * cell lattice (ball_measure), which makes constant-weight ratios exact.
 */
double weight_integral(const Weight& w, const Ball& ball, int resolution);

// Quadrature of 1 on the same lattice: (number of centers inside) * cellvol.
double ball_measure(const Ball& ball, int resolution);

// Integral restricted to (ball ∩ box), same lattice as weight_integral.
double weight_integral_in_box(const Weight& w, const Ball& ball,
                              const Box& box, int resolution);
double ball_box_measure(const Ball& ball, const Box& box, int resolution);

// Minimum of the weight over cell centers inside the ball.
double weight_min(const Weight& w, const Ball& ball, int resolution);

// Midpoint quadrature over an axis-aligned box (no ball restriction).
double weight_integral_box(const Weight& w, const Box& box, int resolution,
                           const std::function<double(double)>& transform = {});

/* High-accuracy average of w over a ball, used by the quasi-metric h.
 *
 * In one dimension the ball is an interval and the integral uses
 * Gauss-Legendre panels on a mesh graded geometrically into each singular
 * point of the weight, which resolves integrable power singularities to
 * near machine precision.  Non-decaying graded-cell contributions signal a
 * non-integrable weight and raise DivergenceError.  In higher dimensions
 * this falls back to midpoint quadrature at `fallback_resolution`.
 */
double ball_average_accurate(const Weight& w, const Ball& ball,
                             int fallback_resolution = 192);

// 1D graded Gauss-Legendre integral over [a, b] (exposed for tests).
double graded_interval_integral(const Weight& w, double a, double b);

}  // namespace wplap
