#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "wplap/weight.hpp"

namespace wplap {

struct QuasiMetricOpts {
  double inversion_tol = 1e-12;  // relative tolerance on the inverted radius
  double domain_diameter = 1.0;  // bracketing cap for inversion = 1e6 * this
  int table_knots = 256;
  int average_resolution = 192;  // lattice resolution for ball averages, n >= 2
};

// Anisotropic quasi-metric on R^(n+m) induced by a weight on the first n
// coordinates: x-directions measured by |dx|, y-directions measured through
// the scale function h_x(t) = t * (average of omega^(1-p') over the x-ball
// of radius t)^(1/p') and its inverse.
class QuasiMetricSpace {
 public:
  QuasiMetricSpace(Weight omega, double p, int n, int m,
                   QuasiMetricOpts opts = {});

  // h_x(t).  One-dimensional values share the inversion table's prefix
  // sums (so h and h_inv act on one function); n >= 2 integrates directly.
  double h(std::span<const double> x, double t) const;

  // inf{ t > 0 : h_x(t) >= w }, by bracketing on a cached monotone table of
  // log-spaced knots plus local bisection to the configured tolerance.
  double h_inv(std::span<const double> x, double w) const;

  // max(|x1-x2|, h_inv(x1, |y1-y2|), h_inv(x2, |y1-y2|))
  double rho(std::span<const double> z1, std::span<const double> z2) const;

  int n() const { return n_; }
  int m() const { return m_; }
  const QuasiMetricOpts& options() const { return opts_; }

  // Fully materialize inversion tables for these centers; afterwards queries
  // at those centers are read-only.
  void warm_cache(const std::vector<std::vector<double>>& centers) const;

 private:
  struct Table {
    std::vector<double> knots;       // fixed ascending log grid
    std::vector<double> cumulative;  // n = 1: integral of sigma over [x-t, x+t]
    std::vector<double> h;           // h at materialized knots
    std::size_t built = 0;
  };

  Table& table_for(std::span<const double> x) const;
  void materialize(Table& tab, std::span<const double> x,
                   std::size_t upto) const;
  double h_direct(std::span<const double> x, double t) const;
  double h_from_prefix(const Table& tab, std::size_t below,
                       std::span<const double> x, double t) const;

  Weight omega_, sigma_;
  double p_, inv_pprime_;
  int n_, m_;
  QuasiMetricOpts opts_;
  mutable std::map<std::vector<double>, Table> cache_;
};

struct TripleSample {
  std::vector<double> z1, z2, z3;
  double ratio = 0.0;
};

struct QuasiMetricReport {
  double K0_estimate = 0.0;
  long sample_count = 0;
  TripleSample worst;
};

// Max over sampled triples of rho(z1,z2) / (rho(z1,z3) + rho(z2,z3)).
// Triple 0 is deterministic with z3 = z1 (ratio exactly 1), the rest are
// uniform in the box; the stream extends reproducibly with sample_count.
QuasiMetricReport quasi_triangle_constant(const QuasiMetricSpace& space,
                                          long sample_count, const Box& box,
                                          std::uint64_t seed = 0);

}  // namespace wplap
