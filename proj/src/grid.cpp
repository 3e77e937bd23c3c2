#include "wplap/grid.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "wplap/errors.hpp"

namespace wplap {

bool Grid::is_interior(std::span<const int> node) const {
  for (std::size_t a = 0; a < node.size(); ++a)
    if (node[a] <= 0 || node[a] >= counts[a] - 1) return false;
  return true;
}

long Grid::interior_index(std::span<const int> node) const {
  long idx = 0;
  for (std::size_t a = 0; a < node.size(); ++a) {
    if (node[a] <= 0 || node[a] >= counts[a] - 1) return -1;
    idx += (node[a] - 1) * interior_stride[a];
  }
  return idx;
}

std::vector<double> Grid::node_point(std::span<const int> node) const {
  std::vector<double> pt(node.size());
  for (std::size_t a = 0; a < node.size(); ++a)
    pt[a] = lo[a] + node[a] * spacing[a];
  return pt;
}

Grid build_grid(const DomainSpec& spec) {
  const int d = spec.n + spec.m;
  if (spec.n < 1 || spec.m < 1) throw ConfigError("grid needs n >= 1 and m >= 1");
  if (static_cast<int>(spec.lo.size()) != d ||
      static_cast<int>(spec.hi.size()) != d ||
      static_cast<int>(spec.counts.size()) != d)
    throw ConfigError("domain bounds/counts length must equal n + m");
  Grid g;
  g.n = spec.n;
  g.m = spec.m;
  g.lo = spec.lo;
  g.hi = spec.hi;
  g.counts = spec.counts;
  g.spacing.resize(d);
  g.interior_stride.assign(d, 0);
  g.interior_count = 1;
  g.cell_count = 1;
  g.cell_volume = 1.0;
  for (int a = 0; a < d; ++a) {
    if (g.counts[a] < 3) throw ConfigError("each axis needs at least 3 nodes");
    if (!(g.hi[a] > g.lo[a])) throw ConfigError("degenerate domain interval");
    g.spacing[a] = (g.hi[a] - g.lo[a]) / (g.counts[a] - 1);
    g.cell_volume *= g.spacing[a];
    g.cell_count *= g.counts[a] - 1;
  }
  for (int a = d - 1; a >= 0; --a) {  // last axis fastest
    g.interior_stride[a] = g.interior_count;
    g.interior_count *= g.counts[a] - 2;
  }
  return g;
}

double Field::at(std::span<const int> node) const {
  long idx = grid->interior_index(node);
  return idx < 0 ? 0.0 : values[idx];
}

Field positive_part(const Field& u) {
  Field out{u.grid, u.values};
  for (double& x : out.values) x = std::max(x, 0.0);
  return out;
}

Field negative_part(const Field& u) {
  Field out{u.grid, u.values};
  for (double& x : out.values) x = std::max(-x, 0.0);
  return out;
}

double CellGradient::modulus(long cell) const {
  const int d = grid->dim();
  double sx = 0.0, sy = 0.0;
  const double* gc = g.data() + cell * d;
  for (int a = 0; a < grid->n; ++a) sx += gc[a] * gc[a];
  for (int a = grid->n; a < d; ++a) sy += gc[a] * gc[a];
  return std::sqrt(std::pow(omega[cell], 2.0 / p) * sx + sy);
}

CellGradient weighted_gradient(const Field& u, const Weight& omega, double p) {
  const Grid& gr = *u.grid;
  const int d = gr.dim();
  CellGradient out;
  out.grid = &gr;
  out.p = p;
  out.g.assign(gr.cell_count * d, 0.0);
  out.omega.resize(gr.cell_count);

  std::vector<int> cell(d, 0), node(d);
  std::vector<double> corner(std::size_t(1) << d);
  std::vector<double> xc(gr.n), half(gr.n);
  for (int a = 0; a < gr.n; ++a) half[a] = 0.5 * gr.spacing[a];
  const double edge_share = 1.0 / double(std::size_t(1) << (d - 1));

  for (long c = 0; c < gr.cell_count; ++c) {
    for (unsigned s = 0; s < corner.size(); ++s) {
      for (int a = 0; a < d; ++a) node[a] = cell[a] + ((s >> a) & 1u);
      corner[s] = u.at(node);
    }
    double* gc = out.g.data() + c * d;
    for (int a = 0; a < d; ++a) {
      double sum = 0.0;
      const unsigned bit = 1u << a;
      for (unsigned s = 0; s < corner.size(); ++s)
        if (!(s & bit)) sum += corner[s | bit] - corner[s];
      gc[a] = sum * edge_share / gr.spacing[a];
    }
    for (int a = 0; a < gr.n; ++a)
      xc[a] = gr.lo[a] + (cell[a] + 0.5) * gr.spacing[a];
    out.omega[c] = omega.eval(xc, half);
    for (int a = d - 1; a >= 0; --a) {  // advance the cell odometer
      if (++cell[a] < gr.counts[a] - 1) break;
      cell[a] = 0;
    }
  }
  return out;
}

void write_field_csv(const Field& u, std::ostream& os) {
  const Grid& gr = *u.grid;
  const int d = gr.dim();
  std::vector<int> node(d, 0);
  char buf[32];
  long total = 1;
  for (int a = 0; a < d; ++a) total *= gr.counts[a];
  for (long i = 0; i < total; ++i) {
    auto pt = gr.node_point(node);
    for (int a = 0; a < d; ++a) {
      std::snprintf(buf, sizeof buf, "%.17g", pt[a]);
      os << buf << ',';
    }
    std::snprintf(buf, sizeof buf, "%.17g", u.at(node));
    os << buf << '\n';
    for (int a = d - 1; a >= 0; --a) {
      if (++node[a] < gr.counts[a]) break;
      node[a] = 0;
    }
  }
}

void write_field_csv(const Field& u, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open field output file: " + path);
  write_field_csv(u, os);
}

Field read_field_csv(const Grid& g, std::istream& is) {
  Field u = Field::zeros(g);
  const int d = g.dim();
  std::string line;
  std::vector<int> node(d);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tok;
    std::vector<double> row;
    while (std::getline(ls, tok, ',')) row.push_back(std::stod(tok));
    if (static_cast<int>(row.size()) != d + 1)
      throw ConfigError("field row needs dim + 1 comma-separated values");
    for (int a = 0; a < d; ++a) {
      double rel = (row[a] - g.lo[a]) / g.spacing[a];
      node[a] = static_cast<int>(std::lround(rel));
      if (node[a] < 0 || node[a] >= g.counts[a] ||
          std::fabs(rel - node[a]) > 1e-6)
        throw ConfigError("field row coordinate is not a grid node");
    }
    long idx = g.interior_index(node);
    if (idx >= 0) u.values[idx] = row[d];
  }
  return u;
}

Field read_field_csv(const Grid& g, const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open field input file: " + path);
  return read_field_csv(g, is);
}

}  // namespace wplap
