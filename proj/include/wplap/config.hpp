#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "wplap/functional.hpp"
#include "wplap/grid.hpp"
#include "wplap/muckenhoupt.hpp"
#include "wplap/solver.hpp"
#include "wplap/weight.hpp"

namespace wplap {

struct VerifyConfig {
  int poincare_random = 40;
  double stable_fraction = 0.2;  // refinement-trend stability band
  int sphere_samples = 64;
  long k0_samples = 2000;
  int k0_resolution = 192;  // ball-average lattice for the triangle estimate, n >= 2
  RefineOpts refine;
  int ainf_probes = 16;
  double vanish_fraction = 0.1;
  // The vanishing verdict needs a radius ladder spanning several decades,
  // deeper than the estimator scan family.
  std::optional<int> compactness_steps = 16;
  std::optional<double> compactness_theta;
  int fiber_points = 200;
  double fiber_t_lo = 1e-3;
  double fiber_t_hi = 1e3;
  int family_centers = 7;   // scan-family lattice per axis
  int family_steps = 8;     // radius ladder length
  double family_theta = 0.5;
};

struct ExperimentConfig {
  ProblemParams params;
  bool v_scaled_omega = false;  // v = a * omega instead of an explicit spec
  double scale_a = 1.0;
  DomainSpec domain;
  Weight omega = Weight::constant(1.0);
  Weight v = Weight::constant(1.0);
  GeometryInputs geometry;
  SolverConfig solver;
  VerifyConfig verify;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
};

/* Sectioned key = value text ([problem], [domain], [weights], [geometry],
 * [solver], [verify], [output], [seed]); '#' and ';' start comments.
 * Parsing is strict: an unknown section or key, a malformed number, or a
 * size mismatch raises ConfigError naming the first offending line.
 */
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

// Cross-field validation plus derived fields (geometry.domain from the
// domain block, solver.seed from the seed); the parsers end with this.
void finalize_config(ExperimentConfig& cfg);

// The full annotated key reference with every default, itself parseable.
std::string config_reference();

}  // namespace wplap
