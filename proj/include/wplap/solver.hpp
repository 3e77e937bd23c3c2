#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wplap/functional.hpp"
#include "wplap/grid.hpp"

namespace wplap {

struct SolverConfig {
  long max_iters = 20000;
  double grad_tol = 1e-7;         // weighted L2 norm of the residual density
  double armijo_slope = 0.25;     // in (0, 1/2]
  double armijo_backtrack = 0.5;  // in (0, 1)
  double step0 = 1.0;             // initial trial step for descent
  int path_nodes = 16;            // discrete path segments (>= 8)
  double path_step = 1.0;         // initial deformation trial step
  double path_tol = 3e-3;         // residual gate ending the deformation stage
  int polish_iters = 40;          // Newton refinement iterations; 0 disables
  std::uint64_t seed = 0;
  double sphere_slack = 0.9;      // soft check: I(u0) >= (1-slack)*sphere_bound
};

struct IterRow {
  long iter = 0;
  double I = 0.0, grad_norm = 0.0, step = 0.0;
};

struct PositivityCertificate {
  double min_value = 0.0;  // smallest nodal value
  double neg_lq = 0.0;     // integral of v * (u_-)^q
  bool pass = false;
};

struct BranchResult {
  Field u;
  EnergyBreakdown energy;
  double residual_norm = 0.0;  // weighted L2
  double residual_sup = 0.0;
  double weakform = 0.0;
  PositivityCertificate positivity;
  bool converged = false;
  std::vector<IterRow> log;
};

struct SolveResult {
  std::optional<BranchResult> local_min;  // u1: I < 0 inside the ball
  std::optional<BranchResult> saddle;     // u0: I > 0 from the path search
  std::string local_min_error;            // empty when the branch succeeded
  std::string saddle_error;
  double distinct_e = 0.0;  // |u0 - u1|_E
  bool distinct_ok = false;
  bool sphere_soft_ok = false;
};

// Radial projection onto the E-norm ball of radius rho (exact: the norm is
// 1-homogeneous).
Field project_to_ball(const Field& u, double rho, const DiscreteProblem& prob);

/* u1 branch: start at t*seed with t = min(t_fiber/2, rho/|seed|_E) — or at
 * the seed itself when it already has negative energy inside the ball, so
 * restarting from a solution is a fixed point — then run projected gradient
 * descent with Armijo backtracking, Newton-polished near the end.  Succeeds
 * with I(u1) < 0, |u1|_E <= rho; raises StallError when no Armijo step fits
 * and NoNegativeMinimumError when the converged energy is nonnegative.
 */
BranchResult find_local_min(const Field& seed, const GeometryConstants& geo,
                            const SolverConfig& cfg,
                            const DiscreteProblem& prob);

// Doubles t from 1 until I(t*dir) < 0 and t|dir|_E > 2 rho.
Field find_far_point(const Field& dir, const GeometryConstants& geo,
                     const SolverConfig& cfg, const DiscreteProblem& prob);

/* u0 branch: discrete path from 0 to u_far, initialized linearly; repeat
 * (descend the max-energy node, re-parametrize to equal E-norm spacing)
 * until the residual at the max node passes the deformation gate, then
 * Newton-polish that node to the gradient tolerance.  Path collapse
 * restarts with doubled node count, three times at most.
 */
BranchResult mountain_pass(const Field& u_far, const GeometryConstants& geo,
                           const SolverConfig& cfg,
                           const DiscreteProblem& prob);

PositivityCertificate positivity_certificate(const Field& u,
                                             const DiscreteProblem& prob);

// max over the test set of |<I'(u), phi>| / |phi|_E.
double weakform_check(const Field& u, const std::vector<Field>& tests,
                      const DiscreteProblem& prob);

// 50 random fields plus nodal hats at the center and quarter points.
std::vector<Field> default_test_fields(const Grid& g, std::uint64_t seed);

// Product sine bump, the positive generic seed shape (unscaled).
Field bump_seed(const Grid& g);

// Both branches end to end; per-branch solver failures are recorded in the
// result instead of propagating, so one branch can fail alone.
SolveResult solve_two(const DiscreteProblem& prob, const GeometryConstants& geo,
                      const SolverConfig& cfg);

// Field arithmetic used by the search algorithms.
Field scaled(const Field& u, double a);
Field lin_comb(double a, const Field& u, double b, const Field& v);

}  // namespace wplap
