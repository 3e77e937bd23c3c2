#include "wplap/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <utility>

#include "wplap/errors.hpp"
#include "wplap/reduction.hpp"

namespace wplap {

namespace {

void check_config(const SolverConfig& c) {
  if (!(c.grad_tol > 0.0)) throw ConfigError("gradient tolerance must be positive");
  if (c.path_nodes < 8) throw ConfigError("path node count must be at least 8");
  if (!(c.armijo_slope > 0.0 && c.armijo_slope <= 0.5))
    throw ConfigError("Armijo slope fraction must lie in (0, 1/2]");
  if (!(c.armijo_backtrack > 0.0 && c.armijo_backtrack < 1.0))
    throw ConfigError("Armijo backtrack factor must lie in (0, 1)");
  if (!(c.step0 > 0.0) || !(c.path_step > 0.0))
    throw ConfigError("trial steps must be positive");
  if (!(c.path_tol > 0.0)) throw ConfigError("path residual gate must be positive");
  if (c.max_iters < 1) throw ConfigError("iteration cap must be positive");
  if (c.polish_iters < 0) throw ConfigError("polish iteration count must be nonnegative");
  if (!(c.sphere_slack >= 0.0 && c.sphere_slack < 1.0))
    throw ConfigError("sphere slack must lie in [0, 1)");
}

double dot_plain(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> prod(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) prod[i] = a[i] * b[i];
  return pairwise_sum(prod);
}

double wnorm(const std::vector<double>& g, double vol) {
  return std::sqrt(vol * dot_plain(g, g));
}

double supnorm(const std::vector<double>& g) {
  double s = 0.0;
  for (double x : g) s = std::max(s, std::abs(x));
  return s;
}

struct LineSearchOut {
  Field u;
  EnergyBreakdown e;
  double step = 0.0;
  bool ok = false;
};

/* One backtracking step along the descent direction -d (d = g for plain
 * gradient descent), optionally projected onto the rho-ball.  The
 * sufficient-decrease test pairs the residual g with the realized move, so
 * it stays meaningful when the projection clips the step.
 */
LineSearchOut armijo_step(const Field& u, const EnergyBreakdown& eu,
                          const std::vector<double>& g,
                          const std::vector<double>& d, double start_step,
                          double rho_ball, const SolverConfig& cfg,
                          const DiscreteProblem& prob) {
  const double vol = prob.grid().cell_volume;
  LineSearchOut out;
  double s = start_step;
  for (int k = 0; k < 60; ++k, s *= cfg.armijo_backtrack) {
    Field trial = u;
    for (std::size_t j = 0; j < trial.values.size(); ++j)
      trial.values[j] -= s * d[j];
    if (rho_ball > 0.0) trial = project_to_ball(trial, rho_ball, prob);
    std::vector<double> move(g.size());
    for (std::size_t j = 0; j < g.size(); ++j)
      move[j] = g[j] * (u.values[j] - trial.values[j]);
    double pred = vol * pairwise_sum(move);
    if (!(pred > 0.0)) continue;
    EnergyBreakdown et = prob.energy(trial);
    if (et.I <= eu.I - cfg.armijo_slope * pred) {
      out.u = std::move(trial);
      out.e = et;
      out.step = s;
      out.ok = true;
      return out;
    }
  }
  return out;
}

// Minimal-residual solve of the symmetric (possibly indefinite) system
// A x = b; plain Lanczos + Givens recurrences, x0 = 0.
template <class Op>
std::vector<double> minres(Op&& A, const std::vector<double>& b, int maxit,
                           double rtol) {
  const std::size_t N = b.size();
  std::vector<double> x(N, 0.0);
  double beta1 = std::sqrt(dot_plain(b, b));
  if (beta1 == 0.0) return x;
  std::vector<double> v_old(N, 0.0), v = b, p(N, 0.0);
  std::vector<double> w_old(N, 0.0), w(N, 0.0), w_new(N, 0.0);
  for (auto& e : v) e /= beta1;
  double beta = beta1, eta = beta1;
  double c = 1.0, c_old = 1.0, s = 0.0, s_old = 0.0;
  for (int k = 0; k < maxit; ++k) {
    A(v, p);
    double alpha = dot_plain(v, p);
    for (std::size_t i = 0; i < N; ++i) p[i] -= alpha * v[i] + beta * v_old[i];
    double beta_new = std::sqrt(dot_plain(p, p));
    double delta = c * alpha - c_old * s * beta;
    double rho1 = std::sqrt(delta * delta + beta_new * beta_new);
    double rho2 = s * alpha + c_old * c * beta;
    double rho3 = s_old * beta;
    if (rho1 == 0.0) break;
    for (std::size_t i = 0; i < N; ++i)
      w_new[i] = (v[i] - rho3 * w_old[i] - rho2 * w[i]) / rho1;
    double c_new = delta / rho1, s_new = beta_new / rho1;
    for (std::size_t i = 0; i < N; ++i) x[i] += c_new * eta * w_new[i];
    eta = -s_new * eta;
    if (std::abs(eta) <= rtol * beta1 || beta_new <= 1e-300) break;
    w_old.swap(w);
    w.swap(w_new);
    v_old.swap(v);
    v.swap(p);
    for (auto& e : v) e /= beta_new;
    c_old = c;
    c = c_new;
    s_old = s;
    s = s_new;
    beta = beta_new;
  }
  return x;
}

std::vector<double> newton_direction(const DiscreteProblem& prob,
                                     const Field& u,
                                     const std::vector<double>& g) {
  auto op = [&](const std::vector<double>& in, std::vector<double>& out) {
    prob.hessian_apply(u, std::span<const double>(in.data(), in.size()),
                       std::span<double>(out.data(), out.size()));
  };
  int maxit = static_cast<int>(std::min<std::size_t>(g.size(), 300));
  return minres(op, g, maxit, 1e-10);
}

/* Newton refinement toward a critical point that need not be a minimum:
 * the acceptance test is a shrinking residual norm, not a falling energy,
 * so the same loop serves the saddle.
 */
void polish_to_critical(Field& u, std::vector<double>& g, double& gn,
                        long& iter_counter, std::vector<IterRow>& log,
                        const SolverConfig& cfg, const DiscreteProblem& prob) {
  const double vol = prob.grid().cell_volume;
  for (int k = 0; k < cfg.polish_iters && gn > cfg.grad_tol; ++k) {
    auto delta = newton_direction(prob, u, g);
    bool accepted = false;
    double t = 1.0;
    for (int b = 0; b < 12; ++b, t *= 0.5) {
      Field cand = u;
      for (std::size_t j = 0; j < cand.values.size(); ++j)
        cand.values[j] -= t * delta[j];
      auto gc = prob.residual(cand);
      double gnc = wnorm(gc, vol);
      if (gnc < gn * (1.0 - 1e-4 * t)) {
        u = std::move(cand);
        g = std::move(gc);
        gn = gnc;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    log.push_back({iter_counter++, prob.energy(u).I, gn, t});
  }
}

// Equal E-norm spacing along the polyline; endpoints stay put.
void reparametrize(std::vector<Field>& beta, const DiscreteProblem& prob) {
  const int P = static_cast<int>(beta.size()) - 1;
  std::vector<double> cum(P + 1, 0.0);
  for (int i = 1; i <= P; ++i)
    cum[i] = cum[i - 1] + prob.e_norm(lin_comb(1.0, beta[i], -1.0, beta[i - 1]));
  if (!(cum[P] > 0.0)) return;
  std::vector<Field> nb;
  nb.reserve(P + 1);
  nb.push_back(beta[0]);
  int seg = 1;
  for (int k = 1; k < P; ++k) {
    double target = cum[P] * k / P;
    while (seg < P && cum[seg] < target) ++seg;
    double den = cum[seg] - cum[seg - 1];
    double th = den > 0.0 ? (target - cum[seg - 1]) / den : 0.0;
    nb.push_back(lin_comb(1.0 - th, beta[seg - 1], th, beta[seg]));
  }
  nb.push_back(beta[P]);
  beta = std::move(nb);
}

}  // namespace

Field scaled(const Field& u, double a) {
  Field r = u;
  for (auto& x : r.values) x *= a;
  return r;
}

Field lin_comb(double a, const Field& u, double b, const Field& v) {
  if (u.grid != v.grid || u.values.size() != v.values.size())
    throw ParameterError("field combination needs a shared grid");
  Field r = u;
  for (std::size_t j = 0; j < r.values.size(); ++j)
    r.values[j] = a * u.values[j] + b * v.values[j];
  return r;
}

Field project_to_ball(const Field& u, double rho, const DiscreteProblem& prob) {
  if (!(rho > 0.0)) throw ParameterError("projection radius must be positive");
  double nrm = prob.e_norm(u);
  if (nrm <= rho) return u;
  return scaled(u, rho / nrm);
}

Field bump_seed(const Grid& g) {
  Field u = Field::zeros(g);
  const int d = g.dim();
  std::vector<int> idx(d, 1);
  for (long j = 0; j < g.interior_count; ++j) {
    double s = 1.0;
    for (int a = 0; a < d; ++a)
      s *= std::sin(std::numbers::pi * double(idx[a]) / double(g.counts[a] - 1));
    u.values[j] = s;
    for (int a = d - 1; a >= 0; --a) {
      if (++idx[a] <= g.counts[a] - 2) break;
      idx[a] = 1;
    }
  }
  return u;
}

// Every BranchResult handed out carries its certificates, so a caller can
// never read the default pass = false of a result nobody certified.
static void attach_certificates(BranchResult& res, const SolverConfig& cfg,
                                const DiscreteProblem& prob) {
  res.positivity = positivity_certificate(res.u, prob);
  res.weakform =
      weakform_check(res.u, default_test_fields(prob.grid(), cfg.seed), prob);
}

BranchResult find_local_min(const Field& seed, const GeometryConstants& geo,
                            const SolverConfig& cfg,
                            const DiscreteProblem& prob) {
  check_config(cfg);
  const double rho = geo.mp_radius;
  if (!(rho > 0.0)) throw ParameterError("ball radius must be positive");
  const double vol = prob.grid().cell_volume;
  const ProblemParams& pp = prob.params();

  Field u = seed;
  EnergyBreakdown eu = prob.energy(u);
  double seed_norm = prob.e_norm(seed);
  // A seed that is already a negative-energy point of the ball restarts in
  // place; everything else enters through the fibering scaling.
  if (!(eu.I < 0.0 && seed_norm <= rho * (1.0 + 1e-12))) {
    if (!(pp.gamma < pp.p))
      throw ParameterError("fibering start point needs gamma < p");
    auto ft = prob.fiber_terms(seed);
    if (!(ft.grad_p > 0.0)) throw DegenerateSeedError("seed is identically zero");
    if (!(ft.plain_gamma > 0.0))
      throw DegenerateSeedError("seed has no positive part");
    // Start where the concave term already dominates the gradient term:
    // t^(p-gamma) < mu p P / (gamma G) gives I(t seed) < 0 outright, and
    // the monotone descent can then never end at nonnegative energy.  With
    // mu = 0 that region is empty; start on the ball scale and let the
    // descent report the absence of a negative minimum.
    double t = rho / seed_norm;
    if (pp.mu > 0.0) {
      double tneg = std::pow(
          pp.mu * pp.p * ft.plain_gamma / (pp.gamma * ft.grad_p),
          1.0 / (pp.p - pp.gamma));
      if (!(tneg > 0.0) || !std::isfinite(tneg))
        throw DegenerateSeedError("fibering scale underflowed");
      t = std::min(0.5 * tneg, t);
    }
    u = scaled(seed, t);
    eu = prob.energy(u);
  }

  BranchResult res;
  const double gate = std::max(100.0 * cfg.grad_tol, 1e-5);
  double step = cfg.step0;
  int polish_left = cfg.polish_iters;
  bool converged = false;
  std::vector<double> g;
  double gn = 0.0;
  long it = 0;
  for (; it < cfg.max_iters; ++it) {
    g = prob.residual(u);
    gn = wnorm(g, vol);
    res.log.push_back({it, eu.I, gn, step});
    if (gn <= cfg.grad_tol) {
      converged = true;
      break;
    }
    bool newton_ok = false;
    if (polish_left > 0 && gn <= gate) {
      --polish_left;
      auto delta = newton_direction(prob, u, g);
      double t = 1.0;
      for (int b = 0; b < 4 && !newton_ok; ++b, t *= 0.5) {
        Field cand = u;
        for (std::size_t j = 0; j < cand.values.size(); ++j)
          cand.values[j] -= t * delta[j];
        cand = project_to_ball(cand, rho, prob);
        EnergyBreakdown ec = prob.energy(cand);
        if (ec.I < eu.I) {
          u = std::move(cand);
          eu = ec;
          newton_ok = true;
        }
      }
    }
    if (!newton_ok) {
      auto ls = armijo_step(u, eu, g, g, step, rho, cfg, prob);
      if (!ls.ok) {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "no Armijo step after 60 backtracks (iter %ld, I = %.6e, "
                      "|g| = %.3e)",
                      it, eu.I, gn);
        throw StallError(buf);
      }
      u = std::move(ls.u);
      eu = ls.e;
      step = std::min(ls.step * 2.0, 1e6);
    }
  }
  if (converged && !(eu.I < 0.0)) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "converged with I = %.6e >= 0 after %ld iterations "
                  "(|g| = %.3e)",
                  eu.I, it, gn);
    throw NoNegativeMinimumError(buf);
  }
  res.u = std::move(u);
  res.energy = eu;
  res.residual_norm = gn;
  res.residual_sup = supnorm(g);
  res.converged = converged;
  attach_certificates(res, cfg, prob);
  return res;
}

Field find_far_point(const Field& dir, const GeometryConstants& geo,
                     const SolverConfig& cfg, const DiscreteProblem& prob) {
  check_config(cfg);
  auto ft = prob.fiber_terms(dir);
  if (!(ft.vq > 0.0))
    throw DegenerateSeedError("direction has no positive part in the convex term");
  double nrm = prob.e_norm(dir);
  if (!(nrm > 0.0)) throw DegenerateSeedError("direction is identically zero");
  const double rho = geo.mp_radius;
  const double cap = std::ldexp(1.0, 60);
  double t = 1.0;
  while (true) {
    if (t > cap)
      throw DegenerateSeedError(
          "no negative energy along the ray within 60 doublings");
    if (prob.energy(scaled(dir, t)).I < 0.0 && t * nrm > 2.0 * rho) break;
    t *= 2.0;
  }
  return scaled(dir, t);
}

BranchResult mountain_pass(const Field& u_far, const GeometryConstants& geo,
                           const SolverConfig& cfg,
                           const DiscreteProblem& prob) {
  check_config(cfg);
  const double vol = prob.grid().cell_volume;
  if (!(prob.energy(u_far).I < 0.0))
    throw ParameterError("path endpoint must have negative energy");

  int P = cfg.path_nodes;
  for (int attempt = 0; attempt < 4; ++attempt, P *= 2) {
    std::vector<Field> beta;
    beta.reserve(P + 1);
    for (int k = 0; k <= P; ++k) beta.push_back(scaled(u_far, double(k) / P));
    std::vector<EnergyBreakdown> E(P + 1);
    for (int k = 0; k <= P; ++k) E[k] = prob.energy(beta[k]);

    BranchResult res;
    double step = cfg.path_step;
    bool collapsed = false;
    int kmax = 1;
    long it = 0;
    // The string only has to carry the max node into the Newton basin, not
    // meet a tolerance on its own, so refinement is attempted periodically
    // (with exponential backoff while it keeps failing) as well as at the
    // deformation gate.
    long next_polish = 20, polish_gap = 20, next_gate = 0;
    for (; it < cfg.max_iters; ++it) {
      kmax = 1;
      for (int k = 2; k < P; ++k)
        if (E[k].I > E[kmax].I) kmax = k;
      auto g = prob.residual(beta[kmax]);
      double gn = wnorm(g, vol);
      res.log.push_back({it, E[kmax].I, gn, step});
      bool at_gate = gn <= cfg.path_tol;
      if (it >= next_polish || (at_gate && it >= next_gate)) {
        Field u0 = beta[kmax];
        auto gp = g;
        double gnp = gn;
        long iter_counter = it + 1;
        std::vector<IterRow> attempt_log;
        polish_to_critical(u0, gp, gnp, iter_counter, attempt_log, cfg, prob);
        EnergyBreakdown e0 = prob.energy(u0);
        if (gnp <= cfg.grad_tol && e0.I > 0.0) {
          for (auto& row : attempt_log) res.log.push_back(row);
          res.u = std::move(u0);
          res.energy = e0;
          res.residual_norm = gnp;
          res.residual_sup = supnorm(gp);
          res.converged = true;
          attach_certificates(res, cfg, prob);
          return res;
        }
        polish_gap = std::min(polish_gap * 2, 2000L);
        next_polish = it + polish_gap;
        next_gate = it + 10;
      }
      // String descent: drop the component of g along the local path
      // tangent so the node cannot slide down the ridge, and cap the move
      // at the adjacent node spacing so one step cannot fold the path.
      std::vector<double> d = g;
      {
        std::vector<double> tau(g.size());
        for (std::size_t j = 0; j < g.size(); ++j)
          tau[j] = beta[kmax + 1].values[j] - beta[kmax - 1].values[j];
        double tt = dot_plain(tau, tau);
        if (tt > 0.0) {
          double c = dot_plain(g, tau) / tt;
          for (std::size_t j = 0; j < d.size(); ++j) d[j] -= c * tau[j];
        }
        if (!(dot_plain(d, g) > 0.0)) d = g;
      }
      double start = step;
      double dn = prob.e_norm(Field{&prob.grid(), d});
      if (dn > 0.0) {
        double spacing =
            0.5 * (prob.e_norm(lin_comb(1.0, beta[kmax], -1.0, beta[kmax - 1])) +
                   prob.e_norm(lin_comb(1.0, beta[kmax + 1], -1.0, beta[kmax])));
        if (spacing > 0.0) start = std::min(start, spacing / dn);
      }
      auto ls = armijo_step(beta[kmax], E[kmax], g, d, start, -1.0, cfg, prob);
      if (!ls.ok) {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "path descent stalled at node %d (iter %ld, I = %.6e, "
                      "|g| = %.3e)",
                      kmax, it, E[kmax].I, gn);
        throw StallError(buf);
      }
      beta[kmax] = std::move(ls.u);
      E[kmax] = ls.e;
      step = std::min(ls.step * 4.0, 1e6);
      reparametrize(beta, prob);
      for (int k = 1; k < P; ++k) E[k] = prob.energy(beta[k]);
      int knew = 1;
      for (int k = 2; k < P; ++k)
        if (E[k].I > E[knew].I) knew = k;
      if (E[knew].I < geo.sphere_bound / 10.0) {
        auto gt = prob.residual(beta[knew]);
        if (wnorm(gt, vol) > cfg.path_tol) collapsed = true;
      }
      if (collapsed) break;
    }
    if (!collapsed) {
      // Iteration cap: hand back the current max node, honestly unconverged.
      auto g = prob.residual(beta[kmax]);
      res.u = beta[kmax];
      res.energy = E[kmax];
      res.residual_norm = wnorm(g, vol);
      res.residual_sup = supnorm(g);
      res.converged = false;
      attach_certificates(res, cfg, prob);
      return res;
    }
  }
  throw MountainPassError(
      "path collapsed after three restarts with doubled node count");
}

PositivityCertificate positivity_certificate(const Field& u,
                                             const DiscreteProblem& prob) {
  const Grid& g = prob.grid();
  const double vol = g.cell_volume;
  const double q = prob.params().q;
  const auto& v = prob.v_nodes();
  PositivityCertificate cert;
  double mn = u.values.empty() ? 0.0 : u.values[0];
  double amax = 0.0;
  std::vector<double> terms(u.values.size());
  for (std::size_t j = 0; j < u.values.size(); ++j) {
    mn = std::min(mn, u.values[j]);
    amax = std::max(amax, std::abs(u.values[j]));
    double neg = u.values[j] < 0.0 ? -u.values[j] : 0.0;
    terms[j] = v[j] * std::pow(neg, q);
  }
  cert.min_value = mn;
  cert.neg_lq = vol * pairwise_sum(terms);
  double tol = 1e-10 * std::max(1.0, amax);
  cert.pass = cert.min_value >= -tol && cert.neg_lq <= tol;
  return cert;
}

double weakform_check(const Field& u, const std::vector<Field>& tests,
                      const DiscreteProblem& prob) {
  if (tests.empty())
    throw ParameterError("weak-form check needs at least one test field");
  auto g = prob.residual(u);
  const double vol = prob.grid().cell_volume;
  double best = 0.0;
  for (const Field& phi : tests) {
    if (phi.values.size() != g.size())
      throw ParameterError("test field lives on a different grid");
    double pairing = vol * dot_plain(g, phi.values);
    double en = prob.e_norm(phi);
    if (!(en > 0.0)) throw ParameterError("test field must be nonzero");
    best = std::max(best, std::abs(pairing) / en);
  }
  return best;
}

std::vector<Field> default_test_fields(const Grid& g, std::uint64_t seed) {
  std::vector<Field> out;
  CounterRng rng(seed);
  for (std::uint64_t f = 0; f < 50; ++f) {
    Field phi = Field::zeros(g);
    for (long j = 0; j < g.interior_count; ++j)
      phi.values[j] = rng.uniform(f, static_cast<std::uint64_t>(j), -1.0, 1.0);
    out.push_back(std::move(phi));
  }
  auto add_hat = [&](std::vector<int> node) {
    for (int a = 0; a < g.dim(); ++a)
      node[a] = std::clamp(node[a], 1, g.counts[a] - 2);
    long idx = g.interior_index(node);
    Field h = Field::zeros(g);
    h.values[idx] = 1.0;
    out.push_back(std::move(h));
  };
  std::vector<int> center(g.dim());
  for (int a = 0; a < g.dim(); ++a) center[a] = (g.counts[a] - 1) / 2;
  add_hat(center);
  for (int a = 0; a < g.dim(); ++a) {
    auto lo = center, hi = center;
    lo[a] = (g.counts[a] - 1) / 4;
    hi[a] = (3 * (g.counts[a] - 1)) / 4;
    add_hat(lo);
    add_hat(hi);
  }
  return out;
}

SolveResult solve_two(const DiscreteProblem& prob, const GeometryConstants& geo,
                      const SolverConfig& cfg) {
  check_config(cfg);
  SolveResult out;
  Field bump = bump_seed(prob.grid());
  double bn = prob.e_norm(bump);
  if (!(bn > 0.0)) throw ParameterError("grid too coarse: seed shape vanishes");
  Field ubar = scaled(bump, geo.mp_radius / bn);

  try {
    out.local_min = find_local_min(ubar, geo, cfg, prob);
  } catch (const NoNegativeMinimumError& e) {
    out.local_min_error = std::string("no-negative-minimum: ") + e.what();
  } catch (const StallError& e) {
    out.local_min_error = std::string("stall: ") + e.what();
  } catch (const DegenerateSeedError& e) {
    out.local_min_error = std::string("degenerate-seed: ") + e.what();
  }

  try {
    Field far = find_far_point(ubar, geo, cfg, prob);
    out.saddle = mountain_pass(far, geo, cfg, prob);
  } catch (const MountainPassError& e) {
    out.saddle_error = std::string("mountain-pass: ") + e.what();
  } catch (const StallError& e) {
    out.saddle_error = std::string("stall: ") + e.what();
  } catch (const DegenerateSeedError& e) {
    out.saddle_error = std::string("degenerate-seed: ") + e.what();
  }

  if (out.saddle)
    out.sphere_soft_ok =
        out.saddle->energy.I >= (1.0 - cfg.sphere_slack) * geo.sphere_bound;
  if (out.local_min && out.saddle) {
    out.distinct_e =
        prob.e_norm(lin_comb(1.0, out.saddle->u, -1.0, out.local_min->u));
    double mx = std::max(prob.e_norm(out.saddle->u),
                         prob.e_norm(out.local_min->u));
    out.distinct_ok = out.distinct_e > 1e-3 * mx;
  }
  return out;
}

}  // namespace wplap
