#include "wplap/ball_family.hpp"

#include <cmath>

#include "wplap/errors.hpp"

namespace wplap {

BallFamily make_lattice_family(std::vector<double> x0, double R,
                               int centers_per_axis, int steps, double theta) {
  if (!(R > 0.0)) throw ParameterError("family radius R must be positive");
  if (centers_per_axis < 1)
    throw ParameterError("family needs at least one center per axis");
  if (steps < 1) throw ParameterError("family needs at least one radius");
  if (!(theta > 0.0 && theta < 1.0))
    throw ParameterError("radius ladder ratio must lie in (0, 1)");
  if (x0.empty()) throw ParameterError("family center must be nonempty");

  BallFamily fam;
  fam.R = R;
  fam.x0 = x0;
  const std::size_t d = x0.size();

  std::vector<int> idx(d, 0);
  std::vector<double> pt(d);
  for (;;) {
    double dist2 = 0.0;
    for (std::size_t a = 0; a < d; ++a) {
      pt[a] = centers_per_axis == 1
                  ? x0[a]
                  : x0[a] - R + 2.0 * R * idx[a] / (centers_per_axis - 1);
      double dc = pt[a] - x0[a];
      dist2 += dc * dc;
    }
    if (dist2 <= R * R * (1.0 + 1e-12)) fam.centers.push_back(pt);
    std::size_t a = 0;
    while (a < d && ++idx[a] == centers_per_axis) idx[a++] = 0;
    if (a == d) break;
  }

  fam.radii.resize(steps);
  for (int k = 0; k < steps; ++k)
    fam.radii[k] = R * std::pow(theta, steps - 1 - k);
  return fam;
}

}  // namespace wplap
