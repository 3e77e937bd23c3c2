#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "wplap/weight.hpp"

namespace wplap {

struct DomainSpec {
  int n = 1, m = 1;
  std::vector<double> lo, hi;  // per axis, size n + m
  std::vector<int> counts;     // nodes per axis, each >= 3
};

/* Tensor grid on a box with the coordinate split z = (x, y): the first n
 * axes are x-directions (where the weight lives), the rest y-directions.
 * Nodes are uniform per axis; the outermost layer is the Dirichlet
 * boundary.  Interior nodes are indexed linearly, last axis fastest.
 */
struct Grid {
  int n = 0, m = 0;
  std::vector<double> lo, hi;
  std::vector<int> counts;
  std::vector<double> spacing;      // (hi - lo) / (counts - 1)
  std::vector<long> interior_stride;
  long interior_count = 0;
  long cell_count = 0;
  // Tensor-trapezoid weight of an interior node; equals the cell volume.
  double cell_volume = 0.0;

  int dim() const { return n + m; }
  bool is_interior(std::span<const int> node) const;
  long interior_index(std::span<const int> node) const;  // -1 on the boundary
  std::vector<double> node_point(std::span<const int> node) const;
};

Grid build_grid(const DomainSpec& spec);

// Zero-trace scalar field: values at interior nodes, boundary exactly 0.
struct Field {
  const Grid* grid = nullptr;
  std::vector<double> values;

  static Field zeros(const Grid& g) { return {&g, std::vector<double>(g.interior_count, 0.0)}; }
  double at(std::span<const int> node) const;
};

Field positive_part(const Field& u);
Field negative_part(const Field& u);  // u = positive_part - negative_part

/* Cell-centered gradient: per cell the averaged forward differences along
 * each axis (mean over the 2^(dim-1) parallel edges), plus the weight at the
 * cell-center x-block.  |grad_w u| = (omega^(2/p) |g_x|^2 + |g_y|^2)^(1/2).
 */
struct CellGradient {
  const Grid* grid = nullptr;
  double p = 2.0;
  std::vector<double> g;      // cell-major, dim() entries per cell
  std::vector<double> omega;  // per cell

  double modulus(long cell) const;
};

CellGradient weighted_gradient(const Field& u, const Weight& omega, double p);

// CSV: one row per node (all nodes, boundary included), coordinates then
// value, 17 significant digits so the round trip is bit-exact.
void write_field_csv(const Field& u, std::ostream& os);
void write_field_csv(const Field& u, const std::string& path);
Field read_field_csv(const Grid& g, std::istream& is);
Field read_field_csv(const Grid& g, const std::string& path);

}  // namespace wplap
