#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "test_helpers.hpp"
#include "wplap/errors.hpp"
#include "wplap/functional.hpp"
#include "wplap/grid.hpp"
#include "wplap/reduction.hpp"
#include "wplap/weight.hpp"

using namespace wplap;
using testing_oracles::rel_diff;

namespace {

Grid make_grid(int nodes = 9) {
  DomainSpec d;
  d.n = 1;
  d.m = 1;
  d.lo = {0.0, 0.0};
  d.hi = {1.0, 1.0};
  d.counts = {nodes, nodes};
  return build_grid(d);
}

ProblemParams demo_params() {
  ProblemParams pp;
  pp.p = 1.5;
  pp.q = 3.0;
  pp.gamma = 1.3;
  pp.mu = 0.05;
  pp.n = 1;
  pp.m = 1;
  return pp;
}

Field random_field(const Grid& g, uint64_t seed, double lo, double hi) {
  Field u = Field::zeros(g);
  CounterRng rng(seed);
  for (std::size_t j = 0; j < u.values.size(); ++j)
    u.values[j] = rng.uniform(0, j, lo, hi);
  return u;
}

}  // namespace

TEST_CASE("energy terms scale with their own homogeneity") {
  Grid g = make_grid();
  DiscreteProblem prob(g, Weight::constant(1.0), Weight::constant(1.0),
                       demo_params());
  Field u = random_field(g, 11, -1.0, 2.0);
  EnergyBreakdown e1 = prob.energy(u);
  REQUIRE(e1.I1 > 0.0);
  REQUIRE(e1.I2 > 0.0);
  REQUIRE(e1.I3 > 0.0);
  CHECK(e1.I == doctest::Approx(e1.I1 - e1.I2 - e1.I3));
  double t = 1.7;
  Field ut = Field::zeros(g);
  for (std::size_t j = 0; j < u.values.size(); ++j)
    ut.values[j] = t * u.values[j];
  EnergyBreakdown et = prob.energy(ut);
  CHECK(rel_diff(et.I1, std::pow(t, 1.5) * e1.I1) < 1e-12);
  CHECK(rel_diff(et.I2, std::pow(t, 3.0) * e1.I2) < 1e-12);
  CHECK(rel_diff(et.I3, std::pow(t, 1.3) * e1.I3) < 1e-12);
}

TEST_CASE("fiber terms are the raw integrals behind the energy") {
  Grid g = make_grid();
  ProblemParams pp = demo_params();
  DiscreteProblem prob(g, Weight::constant(1.0), Weight::constant(1.0), pp);
  Field u = random_field(g, 4, -0.5, 1.5);
  auto t = prob.fiber_terms(u);
  EnergyBreakdown e = prob.energy(u);
  CHECK(rel_diff(t.grad_p, pp.p * e.I1) < 1e-13);
  CHECK(rel_diff(t.vq, pp.q * e.I2) < 1e-13);
  CHECK(rel_diff(t.plain_gamma, pp.gamma * e.I3 / pp.mu) < 1e-13);
  CHECK(rel_diff(prob.e_norm(u), std::pow(t.grad_p, 1.0 / pp.p)) < 1e-13);
}

TEST_CASE("weighted q-norm of a constant interior field") {
  Grid g = make_grid(5);
  ProblemParams pp = demo_params();
  DiscreteProblem prob(g, Weight::constant(1.0), Weight::constant(2.0), pp);
  Field u = Field::zeros(g);
  for (auto& x : u.values) x = -0.7;  // the norm uses |u|, not the plus part
  double expect =
      std::pow(2.0 * 9.0 * g.cell_volume * std::pow(0.7, 3.0), 1.0 / 3.0);
  CHECK(rel_diff(prob.lqv_norm(u, 3.0), expect) < 1e-13);
  CHECK(rel_diff(lqv_norm(u, Weight::constant(2.0), 3.0), expect) < 1e-13);
}

TEST_CASE("residual pairing reproduces the Euler identity") {
  // d/dt I(t u) at t = 1 equals p I1 - q I2 - gamma I3 for the exact
  // discrete gradient; any gap would mean the residual is not the gradient.
  Grid g = make_grid();
  ProblemParams pp = demo_params();
  DiscreteProblem prob(g, Weight::constant(1.0), Weight::constant(1.0), pp);
  Field u = random_field(g, 21, -1.0, 1.5);
  double paired = testing_oracles::pairing(prob, u, u);
  EnergyBreakdown e = prob.energy(u);
  double euler = pp.p * e.I1 - pp.q * e.I2 - pp.gamma * e.I3;
  CHECK(rel_diff(paired, euler) < 1e-12);
}

TEST_CASE("residual matches central differences of the energy") {
  Grid g = make_grid();
  DiscreteProblem prob(g, Weight::constant(1.0), Weight::constant(1.0),
                       demo_params());
  CounterRng rng(8);
  for (int trial = 0; trial < 4; ++trial) {
    Field u = Field::zeros(g), phi = Field::zeros(g);
    for (std::size_t j = 0; j < u.values.size(); ++j) {
      double sgn = rng.uniform(trial, 2 * j, 0.0, 1.0) < 0.5 ? -1.0 : 1.0;
      u.values[j] = sgn * rng.uniform(trial, 2 * j + 1, 0.1, 1.0);
      phi.values[j] = rng.uniform(trial + 100, j, -1.0, 1.0);
    }
    double fd = testing_oracles::fd_directional(prob, u, phi, 1e-5);
    double pr = testing_oracles::pairing(prob, u, phi);
    CHECK(rel_diff(fd, pr) < 1e-8);
  }
}

TEST_CASE("hessian action is symmetric and matches residual differences") {
  Grid g = make_grid(7);
  ProblemParams pp = demo_params();
  pp.p = 2.0;  // keep the gradient term smooth so differences are clean
  pp.q = 4.0;
  DiscreteProblem prob(g, Weight::constant(1.0), Weight::constant(1.0), pp);
  Field u = random_field(g, 31, 0.5, 1.5);  // away from the plus-part kink
  Field d1 = random_field(g, 32, -1.0, 1.0);
  Field d2 = random_field(g, 33, -1.0, 1.0);
  std::vector<double> h1(u.values.size()), h2(u.values.size());
  prob.hessian_apply(u, d1.values, h1);
  prob.hessian_apply(u, d2.values, h2);
  double a12 = 0.0, a21 = 0.0;
  for (std::size_t j = 0; j < u.values.size(); ++j) {
    a12 += h1[j] * d2.values[j];
    a21 += h2[j] * d1.values[j];
  }
  CHECK(rel_diff(a12, a21) < 1e-11);

  double h = 1e-6;
  Field up = Field::zeros(g), um = Field::zeros(g);
  for (std::size_t j = 0; j < u.values.size(); ++j) {
    up.values[j] = u.values[j] + h * d1.values[j];
    um.values[j] = u.values[j] - h * d1.values[j];
  }
  std::vector<double> rp = prob.residual(up), rm = prob.residual(um);
  double worst = 0.0;
  for (std::size_t j = 0; j < rp.size(); ++j)
    worst = std::max(worst, std::fabs((rp[j] - rm[j]) / (2.0 * h) - h1[j]));
  CHECK(worst < 1e-5);
}

TEST_CASE("flat regions stay finite for p below two") {
  // A field that is zero except in one corner leaves most cells with a zero
  // gradient, exactly where |grad|^(p-2) blows up; the floor keeps those
  // cells silent and its precise value must not matter.
  Grid g = make_grid(9);
  DiscreteProblem prob(g, Weight::constant(1.0), Weight::constant(1.0),
                       demo_params());
  Field u = Field::zeros(g);
  std::vector<int> node{1, 1};
  u.values[g.interior_index(node)] = 0.8;
  std::vector<double> r1 = prob.residual(u);
  for (double x : r1) CHECK(std::isfinite(x));
  prob.grad_floor *= 2.0;
  std::vector<double> r2 = prob.residual(u);
  for (std::size_t j = 0; j < r1.size(); ++j) CHECK(r1[j] == r2[j]);
}

TEST_CASE("geometry identities on the flat unit square") {
  ProblemParams pp = demo_params();
  GeometryInputs in;
  in.R = 1.0;
  in.x0 = {0.0};
  in.C0 = 1.0;
  in.domain.lo = {0.0, 0.0};
  in.domain.hi = {1.0, 1.0};
  GeometryConstants geo = compute_geometry(Weight::constant(1.0),
                                           Weight::constant(1.0), pp, in);
  REQUIRE(geo.embedding_A > 0.0);
  double lhs = (1.0 / pp.q) * std::pow(geo.embedding_A, pp.q) *
               std::pow(geo.mp_radius, pp.q - pp.p);
  CHECK(rel_diff(lhs, 1.0 / (4.0 * pp.p)) < 1e-10);
  CHECK(rel_diff(geo.sphere_bound,
                 std::pow(geo.mp_radius, pp.p) / (2.0 * pp.p)) < 1e-10);
  CHECK(geo.domain_volume == doctest::Approx(1.0));
  CHECK(geo.T_integral == doctest::Approx(2.0));  // 1 + omega^(-p'/p) = 2
  CHECK(geo.lambda > 0.0);
  CHECK(geo.lambda_empirical > 0.0);
  CHECK(std::isfinite(geo.bounded_below_diag));
}

TEST_CASE("embedding constant is linear in the stability constant") {
  ProblemParams pp = demo_params();
  std::vector<double> x0{0.0};
  double a1 = embedding_constant(Weight::constant(1.0), Weight::constant(1.0),
                                 pp, 1.0, x0, 1.0, 128);
  double a2 = embedding_constant(Weight::constant(1.0), Weight::constant(1.0),
                                 pp, 1.0, x0, 2.0, 128);
  CHECK(rel_diff(a2, 2.0 * a1) < 1e-13);
}

TEST_CASE("mountain pass radius shrinks when the constant grows") {
  double r1 = mp_radius_from_A(0.5, 1.5, 3.0);
  double r2 = mp_radius_from_A(1.0, 1.5, 3.0);
  CHECK(r1 > r2);
  CHECK(sphere_bound_from_A(0.5, 1.5, 3.0) ==
        doctest::Approx(std::pow(r1, 1.5) / 3.0));
}

TEST_CASE("fibering threshold is inverse-homogeneous in the seed") {
  Grid g = make_grid();
  ProblemParams pp = demo_params();
  Field u = random_field(g, 44, 0.2, 1.0);
  double t1 = fibering_threshold(u, Weight::constant(1.0), pp);
  Field us = Field::zeros(g);
  for (std::size_t j = 0; j < u.values.size(); ++j)
    us.values[j] = 3.0 * u.values[j];
  double t2 = fibering_threshold(us, Weight::constant(1.0), pp);
  CHECK(rel_diff(t2, t1 / 3.0) < 1e-12);
  Field z = Field::zeros(g);
  CHECK_THROWS_AS(fibering_threshold(z, Weight::constant(1.0), pp),
                  DegenerateSeedError);
}

TEST_CASE("single-shot forms agree with the class") {
  Grid g = make_grid(7);
  ProblemParams pp = demo_params();
  Weight om = Weight::power(0.3);
  Weight vv = Weight::constant(1.0);
  DiscreteProblem prob(g, om, vv, pp);
  Field u = random_field(g, 5, -1.0, 1.0);
  EnergyBreakdown a = prob.energy(u);
  EnergyBreakdown b = energy(u, om, vv, pp);
  CHECK(a.I == b.I);
  CHECK(e_norm(u, om, pp) == prob.e_norm(u));
  std::vector<double> ra = prob.residual(u), rb = residual(u, om, vv, pp);
  REQUIRE(ra.size() == rb.size());
  for (std::size_t j = 0; j < ra.size(); ++j) CHECK(ra[j] == rb[j]);
}
