#pragma once

#include <vector>

#include "wplap/weight.hpp"

namespace wplap {

/* Finite scan family for the ball-ratio estimators: a lattice of centers
 * inside the reference ball Q(x0, R) crossed with a geometric radius
 * ladder radii[k] = R * theta^(steps - 1 - k), theta in (0, 1), increasing
 * to R.
 */
struct BallFamily {
  std::vector<double> x0;
  double R = 1.0;
  std::vector<std::vector<double>> centers;
  std::vector<double> radii;  // strictly increasing, last == R
};

/* Builds the default family: centers on a `centers_per_axis`^n lattice
 * over the bounding cube of Q(x0, R), kept when within distance R of x0;
 * `steps` ladder radii with ratio `theta` ending at R.
 */
BallFamily make_lattice_family(std::vector<double> x0, double R,
                               int centers_per_axis, int steps, double theta);

}  // namespace wplap
