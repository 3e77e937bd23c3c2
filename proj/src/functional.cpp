#include "wplap/functional.hpp"

#include <algorithm>
#include <cmath>

#include "wplap/errors.hpp"
#include "wplap/muckenhoupt.hpp"
#include "wplap/quadrature.hpp"
#include "wplap/reduction.hpp"

namespace wplap {

namespace {

double positive_pow(double u, double e) { return u > 0.0 ? std::pow(u, e) : 0.0; }

void check_solver_p(double p) {
  if (p < 1.2)
    throw ParameterError("residual paths require p >= 1.2");
}

}  // namespace

DiscreteProblem::DiscreteProblem(const Grid& grid, Weight omega, Weight v,
                                 ProblemParams params)
    : grid_(&grid), omega_(std::move(omega)), v_(std::move(v)),
      params_(params) {
  if (grid.n != params.n || grid.m != params.m)
    throw ParameterError("grid split (n, m) does not match the parameters");
  if (!(params.p > 1.0) || !(params.q > params.p) || !(params.gamma > 1.0) ||
      params.mu < 0.0)
    throw ParameterError("need 1 < p < q, gamma > 1, mu >= 0");
  if (omega_.dim() != 0 && omega_.dim() != grid.n)
    throw ParameterError("omega must be a weight on the x-block");
  if (v_.dim() != 0 && v_.dim() != grid.n)
    throw ParameterError("v must be a weight on the x-block");

  const int d = grid.dim();
  std::vector<double> half(grid.n);
  for (int a = 0; a < grid.n; ++a) half[a] = 0.5 * grid.spacing[a];

  v_nodes_.resize(grid.interior_count);
  std::vector<int> node(d, 1);
  std::vector<double> x(grid.n);
  for (long j = 0; j < grid.interior_count; ++j) {
    for (int a = 0; a < grid.n; ++a) x[a] = grid.lo[a] + node[a] * grid.spacing[a];
    v_nodes_[j] = v_.eval(x, half);
    for (int a = d - 1; a >= 0; --a) {
      if (++node[a] <= grid.counts[a] - 2) break;
      node[a] = 1;
    }
  }

  const unsigned nc = 1u << d;
  omega_cells_.resize(grid.cell_count);
  kappa_cells_.resize(grid.cell_count);
  corner_index_.resize(grid.cell_count * nc);
  std::vector<int> cell(d, 0), corner(d);
  for (long c = 0; c < grid.cell_count; ++c) {
    for (int a = 0; a < grid.n; ++a)
      x[a] = grid.lo[a] + (cell[a] + 0.5) * grid.spacing[a];
    omega_cells_[c] = omega_.eval(x, half);
    kappa_cells_[c] = std::pow(omega_cells_[c], 2.0 / params_.p);
    for (unsigned s = 0; s < nc; ++s) {
      for (int a = 0; a < d; ++a) corner[a] = cell[a] + ((s >> a) & 1);
      corner_index_[c * nc + s] = grid.interior_index(corner);
    }
    for (int a = d - 1; a >= 0; --a) {
      if (++cell[a] < grid.counts[a] - 1) break;
      cell[a] = 0;
    }
  }
}

template <class PerCell>
void DiscreteProblem::sweep_cells(const Field& u, PerCell&& f) const {
  const Grid& gr = *grid_;
  const int d = gr.dim();
  const unsigned nc = 1u << d;
  const double edge_share = 1.0 / double(1u << (d - 1));
  std::vector<double> vals(nc), g(d);
  for (long c = 0; c < gr.cell_count; ++c) {
    const long* ci = corner_index_.data() + c * nc;
    for (unsigned s = 0; s < nc; ++s)
      vals[s] = ci[s] < 0 ? 0.0 : u.values[ci[s]];
    for (int a = 0; a < d; ++a) {
      double sum = 0.0;
      const unsigned bit = 1u << a;
      for (unsigned s = 0; s < nc; ++s)
        if (!(s & bit)) sum += vals[s | bit] - vals[s];
      g[a] = sum * edge_share / gr.spacing[a];
    }
    f(c, ci, vals.data(), g.data());
  }
}

EnergyBreakdown DiscreteProblem::energy(const Field& u) const {
  const Grid& gr = *grid_;
  const double p = params_.p, q = params_.q, gam = params_.gamma;
  std::vector<double> cell_terms(gr.cell_count);
  sweep_cells(u, [&](long c, const long*, const double*, const double* g) {
    double sx = 0.0, sy = 0.0;
    for (int a = 0; a < gr.n; ++a) sx += g[a] * g[a];
    for (int a = gr.n; a < gr.dim(); ++a) sy += g[a] * g[a];
    double M2 = kappa_cells_[c] * sx + sy;
    cell_terms[c] = std::pow(M2, 0.5 * p);
  });
  std::vector<double> nq(gr.interior_count), ng(gr.interior_count);
  for (long j = 0; j < gr.interior_count; ++j) {
    double up = std::max(u.values[j], 0.0);
    nq[j] = v_nodes_[j] * positive_pow(up, q);
    ng[j] = positive_pow(up, gam);
  }
  EnergyBreakdown e;
  e.I1 = gr.cell_volume / p * pairwise_sum(cell_terms);
  e.I2 = gr.cell_volume / q * pairwise_sum(nq);
  e.I3 = params_.mu * gr.cell_volume / gam * pairwise_sum(ng);
  e.I = e.I1 - e.I2 - e.I3;
  return e;
}

std::vector<double> DiscreteProblem::residual(const Field& u) const {
  check_solver_p(params_.p);
  const Grid& gr = *grid_;
  const int d = gr.dim();
  const double p = params_.p, q = params_.q, gam = params_.gamma;
  const double edge_share = 1.0 / double(1u << (d - 1));
  std::vector<double> out(gr.interior_count);
  for (long j = 0; j < gr.interior_count; ++j) {
    double up = std::max(u.values[j], 0.0);
    out[j] = -v_nodes_[j] * positive_pow(up, q - 1.0) -
             params_.mu * positive_pow(up, gam - 1.0);
  }
  sweep_cells(u, [&](long c, const long* ci, const double*, const double* g) {
    double sx = 0.0, sy = 0.0;
    for (int a = 0; a < gr.n; ++a) sx += g[a] * g[a];
    for (int a = gr.n; a < d; ++a) sy += g[a] * g[a];
    double M2 = kappa_cells_[c] * sx + sy;
    if (p < 2.0 && std::pow(M2, 0.5 * p) < grad_floor) return;
    double coef = std::pow(M2, 0.5 * p - 1.0);
    for (int a = 0; a < d; ++a) {
      double kap = a < gr.n ? kappa_cells_[c] : 1.0;
      double Ga = coef * kap * g[a] * edge_share / gr.spacing[a];
      if (Ga == 0.0) continue;
      const unsigned bit = 1u << a;
      for (unsigned s = 0; s < (1u << d); ++s) {
        long jj = ci[s];
        if (jj >= 0) out[jj] += (s & bit) ? Ga : -Ga;
      }
    }
  });
  return out;
}

void DiscreteProblem::hessian_apply(const Field& u, std::span<const double> dir,
                                    std::span<double> out) const {
  check_solver_p(params_.p);
  const Grid& gr = *grid_;
  const int d = gr.dim();
  const unsigned nc = 1u << d;
  const double p = params_.p, q = params_.q, gam = params_.gamma;
  const double edge_share = 1.0 / double(1u << (d - 1));
  for (long j = 0; j < gr.interior_count; ++j) {
    double uj = u.values[j];
    double diag = 0.0;
    if (uj > 0.0)
      diag = -v_nodes_[j] * (q - 1.0) * std::pow(uj, q - 2.0) -
             params_.mu * (gam - 1.0) * std::pow(uj, gam - 2.0);
    out[j] = diag * dir[j];
  }
  std::vector<double> dvals(nc), gd(d);
  sweep_cells(u, [&](long c, const long* ci, const double*, const double* g) {
    for (unsigned s = 0; s < nc; ++s)
      dvals[s] = ci[s] < 0 ? 0.0 : dir[ci[s]];
    for (int a = 0; a < d; ++a) {
      double sum = 0.0;
      const unsigned bit = 1u << a;
      for (unsigned s = 0; s < nc; ++s)
        if (!(s & bit)) sum += dvals[s | bit] - dvals[s];
      gd[a] = sum * edge_share / gr.spacing[a];
    }
    double sx = 0.0, sy = 0.0;
    for (int a = 0; a < gr.n; ++a) sx += g[a] * g[a];
    for (int a = gr.n; a < d; ++a) sy += g[a] * g[a];
    double M2 = kappa_cells_[c] * sx + sy;
    double Mp = std::pow(M2, 0.5 * p);
    if (p < 2.0 && Mp < grad_floor) return;
    double coef1 = std::pow(M2, 0.5 * p - 1.0);
    double coef2 = 0.0;
    if (p != 2.0 && Mp >= grad_floor && M2 > 0.0)
      coef2 = (p - 2.0) * std::pow(M2, 0.5 * p - 2.0);
    double inner = 0.0;
    for (int a = 0; a < d; ++a)
      inner += (a < gr.n ? kappa_cells_[c] : 1.0) * g[a] * gd[a];
    for (int a = 0; a < d; ++a) {
      double kap = a < gr.n ? kappa_cells_[c] : 1.0;
      double Ha = kap * (coef1 * gd[a] + coef2 * inner * g[a]) * edge_share /
                  gr.spacing[a];
      if (Ha == 0.0) continue;
      const unsigned bit = 1u << a;
      for (unsigned s = 0; s < nc; ++s) {
        long jj = ci[s];
        if (jj >= 0) out[jj] += (s & bit) ? Ha : -Ha;
      }
    }
  });
}

double DiscreteProblem::e_norm(const Field& u) const {
  const Grid& gr = *grid_;
  std::vector<double> cell_terms(gr.cell_count);
  const double p = params_.p;
  sweep_cells(u, [&](long c, const long*, const double*, const double* g) {
    double sx = 0.0, sy = 0.0;
    for (int a = 0; a < gr.n; ++a) sx += g[a] * g[a];
    for (int a = gr.n; a < gr.dim(); ++a) sy += g[a] * g[a];
    cell_terms[c] = std::pow(kappa_cells_[c] * sx + sy, 0.5 * p);
  });
  return std::pow(gr.cell_volume * pairwise_sum(cell_terms), 1.0 / p);
}

double DiscreteProblem::lqv_norm(const Field& u, double q) const {
  const Grid& gr = *grid_;
  std::vector<double> terms(gr.interior_count);
  for (long j = 0; j < gr.interior_count; ++j)
    terms[j] = v_nodes_[j] * std::pow(std::fabs(u.values[j]), q);
  return std::pow(gr.cell_volume * pairwise_sum(terms), 1.0 / q);
}

DiscreteProblem::FiberTerms DiscreteProblem::fiber_terms(const Field& u) const {
  const Grid& gr = *grid_;
  FiberTerms t;
  std::vector<double> cell_terms(gr.cell_count);
  const double p = params_.p;
  sweep_cells(u, [&](long c, const long*, const double*, const double* g) {
    double sx = 0.0, sy = 0.0;
    for (int a = 0; a < gr.n; ++a) sx += g[a] * g[a];
    for (int a = gr.n; a < gr.dim(); ++a) sy += g[a] * g[a];
    cell_terms[c] = std::pow(kappa_cells_[c] * sx + sy, 0.5 * p);
  });
  t.grad_p = gr.cell_volume * pairwise_sum(cell_terms);
  std::vector<double> nq(gr.interior_count), ng(gr.interior_count);
  for (long j = 0; j < gr.interior_count; ++j) {
    double up = std::max(u.values[j], 0.0);
    nq[j] = v_nodes_[j] * positive_pow(up, params_.q);
    ng[j] = positive_pow(up, params_.gamma);
  }
  t.vq = gr.cell_volume * pairwise_sum(nq);
  t.plain_gamma = gr.cell_volume * pairwise_sum(ng);
  return t;
}

EnergyBreakdown energy(const Field& u, const Weight& omega, const Weight& v,
                       const ProblemParams& params) {
  return DiscreteProblem(*u.grid, omega, v, params).energy(u);
}

std::vector<double> residual(const Field& u, const Weight& omega,
                             const Weight& v, const ProblemParams& params) {
  return DiscreteProblem(*u.grid, omega, v, params).residual(u);
}

double e_norm(const Field& u, const Weight& omega, const ProblemParams& params) {
  return DiscreteProblem(*u.grid, omega, Weight::constant(1.0), params).e_norm(u);
}

double lqv_norm(const Field& u, const Weight& v, double q) {
  ProblemParams pp;
  pp.q = std::max(q, pp.p + 1.0);  // only q enters the norm itself
  pp.n = u.grid->n;
  pp.m = u.grid->m;
  return DiscreteProblem(*u.grid, Weight::constant(1.0), v, pp).lqv_norm(u, q);
}

double embedding_constant(const Weight& omega, const Weight& v,
                          const ProblemParams& params, double R,
                          std::span<const double> x0, double C0,
                          int resolution) {
  if (!(R > 0.0) || !(C0 > 0.0) || resolution < 4)
    throw ParameterError("embedding constant needs R > 0, C0 > 0, resolution >= 4");
  BalanceExponents e = balance_exponents(params.p, params.q, params.n, params.m);
  std::vector<double> center(x0.begin(), x0.end());
  if (center.empty()) center.assign(params.n, 0.0);
  if (static_cast<int>(center.size()) != params.n)
    throw ParameterError("x0 must live in the x-block");
  Ball Q{center, R};
  double wq = weight_integral(omega, Q, resolution);
  double vq = weight_integral(v, Q, resolution);
  return C0 * std::pow(R, e.radius_exp) * std::pow(vq, 1.0 / params.q) /
         std::pow(wq, e.omega_exp);
}

double mp_radius_from_A(double A, double p, double q) {
  if (!(q > p * (1.0 + 1e-12)))
    throw ParameterError("ball radius needs q > p");
  double base = std::pow(q / (4.0 * p), 1.0 / q) / A;
  return std::pow(base, q / (q - p));
}

double sphere_bound_from_A(double A, double p, double q) {
  if (!(q > p * (1.0 + 1e-12)))
    throw ParameterError("sphere bound needs q > p");
  double base = std::pow(q / (4.0 * p), 1.0 / q) / A;
  return std::pow(base, p * q / (q - p)) / (2.0 * p);
}

double lambda_printed(double A, const ProblemParams& params, double volume,
                      double T) {
  const double p = params.p, q = params.q, gam = params.gamma;
  const double N = params.n + params.m;
  const double pprime = p / (p - 1.0);
  double base = std::pow(q / (4.0 * p), 1.0 / q) / A;
  return std::pow(base, q * (2.0 - p) / (q - p)) *
         std::pow(volume, gam / N - 1.0) * std::pow(T, -gam / pprime);
}

double lambda_empirical(double rho, const ProblemParams& params, double volume,
                        double T) {
  const double p = params.p, gam = params.gamma;
  const double N = params.n + params.m;
  const double pprime = p / (p - 1.0);
  double K = std::pow(volume, 1.0 - gam * (N - 1.0) / N) *
             std::pow(T, gam / pprime);
  double lhs = std::pow(rho, p - gam) / (4.0 * p);
  double best = 0.0;
  for (int k = 0; k < 640; ++k) {
    double mu = 1e-10 * std::pow(10.0, 16.0 * k / 639.0);
    if (mu / gam * K <= lhs) best = std::max(best, mu);
  }
  return best;
}

double fibering_threshold(const Field& u, const Weight& omega,
                          const ProblemParams& params) {
  if (!(params.gamma < params.p))
    throw ParameterError("fibering threshold needs gamma < p");
  DiscreteProblem prob(*u.grid, omega, Weight::constant(1.0), params);
  auto t = prob.fiber_terms(u);
  if (!(t.plain_gamma > 0.0))
    throw DegenerateSeedError("seed has no positive part");
  if (!(t.grad_p > 0.0)) throw DegenerateSeedError("seed is identically zero");
  return std::pow(t.plain_gamma / (params.gamma * t.grad_p),
                  1.0 / (params.p - params.gamma));
}

GeometryConstants compute_geometry(const Weight& omega, const Weight& v,
                                   const ProblemParams& params,
                                   const GeometryInputs& in) {
  const int d = params.n + params.m;
  if (static_cast<int>(in.domain.lo.size()) != d ||
      static_cast<int>(in.domain.hi.size()) != d)
    throw ParameterError("geometry domain box must have n + m axes");
  GeometryConstants g;
  g.C0 = in.C0;
  g.embedding_A = embedding_constant(omega, v, params, in.R, in.x0, in.C0,
                                     in.ball_resolution);
  g.mp_radius = mp_radius_from_A(g.embedding_A, params.p, params.q);
  g.sphere_bound = sphere_bound_from_A(g.embedding_A, params.p, params.q);

  g.domain_volume = 1.0;
  double y_volume = 1.0;
  for (int a = 0; a < d; ++a) {
    double len = in.domain.hi[a] - in.domain.lo[a];
    g.domain_volume *= len;
    if (a >= params.n) y_volume *= len;
  }
  const double pprime = params.p / (params.p - 1.0);
  Box xbox{{in.domain.lo.begin(), in.domain.lo.begin() + params.n},
           {in.domain.hi.begin(), in.domain.hi.begin() + params.n}};
  Weight wneg = omega.pow(-pprime / params.p);
  double Tx = weight_integral_box(wneg, xbox, in.box_resolution,
                                  [](double s) { return 1.0 + s; });
  g.T_integral = y_volume * Tx;

  g.lambda = lambda_printed(g.embedding_A, params, g.domain_volume, g.T_integral);
  g.lambda_empirical =
      lambda_empirical(g.mp_radius, params, g.domain_volume, g.T_integral);
  const double N = d, gam = params.gamma;
  g.bounded_below_diag = -(params.mu * std::pow(in.R, gam) / gam) *
                         std::pow(g.domain_volume, 1.0 - gam * (N - 1.0) / N) *
                         std::pow(g.T_integral, gam / pprime);
  return g;
}

}  // namespace wplap
