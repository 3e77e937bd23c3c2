#pragma once

#include <span>
#include <vector>

#include "wplap/grid.hpp"
#include "wplap/weight.hpp"

namespace wplap {

struct ProblemParams {
  double p = 2.0, q = 4.0, gamma = 1.3, mu = 0.0;
  int n = 1, m = 1;
  bool validated = false;
};

struct EnergyBreakdown {
  double I1 = 0.0, I2 = 0.0, I3 = 0.0, I = 0.0;  // I = I1 - I2 - I3
};

/* Discretized energy
 *   I(u) = (1/p) sum_cells vol |grad_w u|^p
 *        - (1/q) sum_nodes w_j v_j (u_j)_+^q
 *        - (mu/gamma) sum_nodes w_j (u_j)_+^gamma
 * with the weight cached at cell centers and v at interior nodes.  The
 * residual is the exact gradient of this discrete I expressed as a density:
 * g_j = (dI/du_j) / w_j, so <I'(u), phi> = sum_j w_j g_j phi_j holds for
 * every nodal phi with no discretization gap.
 */
class DiscreteProblem {
 public:
  DiscreteProblem(const Grid& grid, Weight omega, Weight v,
                  ProblemParams params);

  const Grid& grid() const { return *grid_; }
  const ProblemParams& params() const { return params_; }

  EnergyBreakdown energy(const Field& u) const;
  std::vector<double> residual(const Field& u) const;
  // Exact directional derivative of the residual (symmetric in the node
  // inner product); used by the Newton polish.
  void hessian_apply(const Field& u, std::span<const double> dir,
                     std::span<double> out) const;

  double e_norm(const Field& u) const;  // (p I1)^(1/p)
  double lqv_norm(const Field& u, double q) const;

  // Raw integrals behind the fibering polynomial
  //   I(t u) = (t^p/p) grad_p - (t^q/q) vq - (mu t^gamma/gamma) plain_gamma.
  struct FiberTerms {
    double grad_p = 0.0;       // integral |grad_w u|^p = |u|_E^p
    double vq = 0.0;           // integral v u_+^q
    double plain_gamma = 0.0;  // integral u_+^gamma
  };
  FiberTerms fiber_terms(const Field& u) const;

  const std::vector<double>& v_nodes() const { return v_nodes_; }
  const std::vector<double>& omega_cells() const { return omega_cells_; }

  // Cells with |grad_w u|^p below this contribute nothing to the residual
  // when p < 2 (the |grad|^(p-2) integrand derivative is singular there,
  // the energy itself is not); doubling it must not move residuals.
  double grad_floor = 1e-30;

 private:
  template <class PerCell>
  void sweep_cells(const Field& u, PerCell&& f) const;

  const Grid* grid_;
  Weight omega_, v_;
  ProblemParams params_;
  std::vector<double> v_nodes_;
  std::vector<double> omega_cells_;
  std::vector<double> kappa_cells_;   // omega^(2/p)
  std::vector<long> corner_index_;    // per cell, 2^dim interior indices (-1 boundary)
};

// Single-shot forms of the same operations.
EnergyBreakdown energy(const Field& u, const Weight& omega, const Weight& v,
                       const ProblemParams& params);
std::vector<double> residual(const Field& u, const Weight& omega,
                             const Weight& v, const ProblemParams& params);
double e_norm(const Field& u, const Weight& omega, const ProblemParams& params);
double lqv_norm(const Field& u, const Weight& v, double q);

/* Geometry constants of the small-sphere argument.  The embedding constant
 *   A = C0 R^(1-(m(n+p)/p)(1/p-1/q)) v(Q_R)^(1/q) / omega(Q_R)^(1/p-(m/p)(1/p-1/q))
 * is evaluated from two quadratures over the x-ball Q(x0, R); everything
 * else is closed-form arithmetic on top of it.
 */
double embedding_constant(const Weight& omega, const Weight& v,
                          const ProblemParams& params, double R,
                          std::span<const double> x0, double C0,
                          int resolution);

// rho with (1/q) A^q rho^(q-p) = 1/(4p).
double mp_radius_from_A(double A, double p, double q);
// (1/2p) ((q/4p)^(1/q)/A)^(pq/(q-p)) = (1/2p) rho^p.
double sphere_bound_from_A(double A, double p, double q);
// The printed threshold ((q/4p)^(1/q)/A)^(q(2-p)/(q-p)) |O|^(g/N-1) T^(-g/p'),
// T = integral over the domain of (1 + omega^(-p'/p)).
double lambda_printed(double A, const ProblemParams& params, double volume,
                      double T);
// Largest mu on a log grid keeping the sphere estimate's concave bracket
// (1/4p) rho^(p-gamma) - (mu/gamma) |O|^(1-gamma(N-1)/N) T^(gamma/p') nonneg.
double lambda_empirical(double rho, const ProblemParams& params, double volume,
                        double T);

// t* = (integral u_+^gamma / (gamma |u|_E^p))^(1/(p-gamma)); scaling t u
// with t < t* makes the concave term dominate near zero.
double fibering_threshold(const Field& u, const Weight& omega,
                          const ProblemParams& params);

struct GeometryInputs {
  double R = 1.0;
  std::vector<double> x0;  // in R^n; empty means the origin
  double C0 = 1.0;
  Box domain;              // full (n+m)-box, for |O| and the T integral
  int ball_resolution = 256;
  int box_resolution = 256;
};

struct GeometryConstants {
  double embedding_A = 0.0;
  double C0 = 1.0;
  double mp_radius = 0.0;
  double lambda = 0.0;
  double sphere_bound = 0.0;
  double lambda_empirical = 0.0;
  double domain_volume = 0.0;
  double T_integral = 0.0;
  // Verbatim lower-bound diagnostic -(mu R^gamma/gamma)|O|^(1-gamma(N-1)/N)
  // T^(gamma/p'); the R^gamma factor is kept as found, diagnostic only.
  double bounded_below_diag = 0.0;
};

GeometryConstants compute_geometry(const Weight& omega, const Weight& v,
                                   const ProblemParams& params,
                                   const GeometryInputs& in);

}  // namespace wplap
