#include "wplap/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "wplap/errors.hpp"
#include "wplap/muckenhoupt.hpp"
#include "wplap/quasimetric.hpp"
#include "wplap/solver.hpp"
#include "wplap/verify.hpp"

namespace wplap {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

// JSON has no inf/nan literals; encode them as strings so nothing is
// silently dropped and reruns stay byte-identical.
json jnum(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot write " + path.string());
  os << text;
}

void write_json(const fs::path& path, const json& j) {
  write_text(path, j.dump(2) + "\n");
}

void write_log_csv(const fs::path& path, const std::vector<IterRow>& rows) {
  std::string out = "iter,I,grad_norm,step\n";
  for (const auto& r : rows)
    out += std::to_string(r.iter) + "," + fmt17(r.I) + "," +
           fmt17(r.grad_norm) + "," + fmt17(r.step) + "\n";
  write_text(path, out);
}

// Deterministic artifacts live next to a timestamped metadata.json; only
// the metadata changes between identical reruns.
void prologue(const ExperimentConfig& cfg, const char* command) {
  fs::create_directories(cfg.out_dir);
  write_text(fs::path(cfg.out_dir) / "config_reference.ini", config_reference());
  std::time_t now = std::chrono::system_clock::to_time_t(
      std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  json meta;
  meta["command"] = command;
  meta["generated_at"] = stamp;
  meta["seed"] = cfg.seed;
  write_json(fs::path(cfg.out_dir) / "metadata.json", meta);
}

void clear_outputs(const ExperimentConfig& cfg,
                   std::initializer_list<const char*> names) {
  for (const char* name : names) {
    std::error_code ec;
    fs::remove(fs::path(cfg.out_dir) / name, ec);
  }
}

template <class F>
RunOutcome guarded(F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    return {2, std::string("config error: ") + e.what()};
  } catch (const ParameterError& e) {
    return {2, std::string("parameter error: ") + e.what()};
  } catch (const InvalidWeightError& e) {
    return {3, std::string("weight condition: ") + e.what()};
  } catch (const DivergenceError& e) {
    return {3, std::string("weight condition: ") + e.what()};
  } catch (const UnreachableValueError& e) {
    return {3, std::string("weight condition: ") + e.what()};
  } catch (const MetricViolationError& e) {
    return {3, std::string("weight condition: ") + e.what()};
  } catch (const DegenerateSeedError& e) {
    return {4, std::string("solver: ") + e.what()};
  } catch (const StallError& e) {
    return {4, std::string("solver: ") + e.what()};
  } catch (const NoNegativeMinimumError& e) {
    return {4, std::string("solver: ") + e.what()};
  } catch (const MountainPassError& e) {
    return {4, std::string("solver: ") + e.what()};
  } catch (const Error& e) {
    return {1, std::string("internal error: ") + e.what()};
  }
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& s : parts) {
    if (!out.empty()) out += "; ";
    out += s;
  }
  return out;
}

std::vector<double> center_or_origin(const ExperimentConfig& cfg) {
  if (!cfg.geometry.x0.empty()) return cfg.geometry.x0;
  return std::vector<double>(static_cast<std::size_t>(cfg.params.n), 0.0);
}

BallFamily scan_family(const ExperimentConfig& cfg) {
  return make_lattice_family(center_or_origin(cfg), cfg.geometry.R,
                             cfg.verify.family_centers,
                             cfg.verify.family_steps,
                             cfg.verify.family_theta);
}

json jest(const EstimateResult& e) {
  json j;
  j["value"] = jnum(e.value);
  j["diverged"] = e.diverged;
  json levels = json::array();
  for (double v : e.level_values) levels.push_back(jnum(v));
  j["levels"] = levels;
  return j;
}

json jexponents(const ExponentReport& r) {
  json j;
  j["p_ok"] = r.p_ok;
  j["q_ok_general"] = r.q_ok_general;
  j["corollary_applicable"] = r.corollary_applicable;
  j["q_ok_corollary"] = r.q_ok_corollary;
  j["gamma_strict_ok"] = r.gamma_strict_ok;
  j["gamma_relaxed_ok"] = r.gamma_relaxed_ok;
  j["integrability_caveat"] = r.integrability_caveat;
  j["mu_ok"] = r.mu_ok;
  j["valid"] = r.valid;
  j["q_upper_general"] = jnum(r.q_upper_general);
  j["q_upper_corollary"] = jnum(r.q_upper_corollary);
  j["gamma_upper_strict"] = jnum(r.gamma_upper_strict);
  j["violations"] = r.violations;
  return j;
}

json jproblem(const ExperimentConfig& cfg) {
  json j;
  j["p"] = cfg.params.p;
  j["q"] = cfg.params.q;
  j["gamma"] = cfg.params.gamma;
  j["mu"] = cfg.params.mu;
  j["n"] = cfg.params.n;
  j["m"] = cfg.params.m;
  return j;
}

json jdomain(const ExperimentConfig& cfg) {
  json j;
  j["lo"] = cfg.domain.lo;
  j["hi"] = cfg.domain.hi;
  j["counts"] = cfg.domain.counts;
  return j;
}

json jweights_desc(const ExperimentConfig& cfg) {
  json j;
  j["omega"] = cfg.omega.describe();
  j["v"] = cfg.v.describe();
  return j;
}

json jgeometry(const GeometryConstants& g) {
  json j;
  j["embedding_A"] = jnum(g.embedding_A);
  j["C0"] = jnum(g.C0);
  j["mp_radius"] = jnum(g.mp_radius);
  j["sphere_bound"] = jnum(g.sphere_bound);
  j["lambda"] = jnum(g.lambda);
  j["lambda_empirical"] = jnum(g.lambda_empirical);
  j["domain_volume"] = jnum(g.domain_volume);
  j["T_integral"] = jnum(g.T_integral);
  j["bounded_below_diag"] = jnum(g.bounded_below_diag);
  return j;
}

// The exponent gate for running the solver: structural ranges only.  mu is
// excluded on purpose — mu = 0 must reach the descent so the absence of a
// negative minimum is reported by the solver, not by validation.
bool structural_ok(const ExponentReport& r, bool v_scaled) {
  return r.p_ok && r.q_ok_general &&
         (!v_scaled || !r.corollary_applicable || r.q_ok_corollary) &&
         (r.gamma_strict_ok || r.gamma_relaxed_ok);
}

json jbranch(const DiscreteProblem& prob, const GeometryConstants& geo,
             const std::optional<BranchResult>& br, const std::string& error) {
  json j;
  j["present"] = br.has_value();
  j["error"] = error;
  if (!br) return j;
  j["converged"] = br->converged;
  j["iterations"] = static_cast<long>(br->log.size());
  json e;
  e["I1"] = jnum(br->energy.I1);
  e["I2"] = jnum(br->energy.I2);
  e["I3"] = jnum(br->energy.I3);
  e["I"] = jnum(br->energy.I);
  j["energy"] = e;
  double en = prob.e_norm(br->u);
  j["e_norm"] = jnum(en);
  j["in_ball"] = geo.mp_radius > 0 && en <= geo.mp_radius * (1.0 + 1e-9);
  j["residual_norm"] = jnum(br->residual_norm);
  j["residual_sup"] = jnum(br->residual_sup);
  j["weakform"] = jnum(br->weakform);
  json pos;
  pos["min_value"] = jnum(br->positivity.min_value);
  pos["neg_lq"] = jnum(br->positivity.neg_lq);
  pos["pass"] = br->positivity.pass;
  j["positivity"] = pos;
  return j;
}

}  // namespace

RunOutcome cmd_check_weights(const ExperimentConfig& cfg) {
  return guarded([&]() -> RunOutcome {
    prologue(cfg, "check-weights");
    clear_outputs(cfg, {"weights.json"});

    auto exps = validate_exponents(cfg.params.p, cfg.params.q,
                                   cfg.params.gamma, cfg.params.mu,
                                   cfg.params.n, cfg.params.m,
                                   cfg.v_scaled_omega);
    auto family = scan_family(cfg);
    WeightReportOpts wopts;
    wopts.refine = cfg.verify.refine;
    wopts.ainf_probes = cfg.verify.ainf_probes;
    wopts.vanish_fraction = cfg.verify.vanish_fraction;
    wopts.include_a1 = true;
    wopts.compactness_steps = cfg.verify.compactness_steps;
    wopts.compactness_theta = cfg.verify.compactness_theta;
    auto rep = build_weight_report(cfg.omega, cfg.v, cfg.params.p, cfg.params.q,
                                   cfg.params.n, cfg.params.m, family, wopts);

    std::vector<std::string> failures;
    if (rep.ap.diverged) failures.push_back("ap estimate diverged");
    if (rep.doubling.diverged) failures.push_back("doubling estimate diverged");
    if (rep.balance.diverged) failures.push_back("balance estimate diverged");
    if (!rep.compactness_pass)
      failures.push_back("compactness profile does not vanish");
    if (!exps.valid)
      failures.push_back("exponents: " + join(exps.violations));

    json j;
    j["command"] = "check-weights";
    j["seed"] = cfg.seed;
    j["problem"] = jproblem(cfg);
    j["weights"] = jweights_desc(cfg);
    j["exponents"] = jexponents(exps);
    j["ap"] = jest(rep.ap);
    // A1 membership is informational: it sharpens the admissible q range
    // but the main estimates never require it.
    j["a1"] = rep.a1 ? jest(*rep.a1) : json(nullptr);
    json ainf;
    ainf["C"] = jnum(rep.ainf_C);
    ainf["delta"] = jnum(rep.ainf_delta);
    j["ainf"] = ainf;
    j["doubling"] = jest(rep.doubling);
    j["balance"] = jest(rep.balance);
    json compact;
    json profile = json::array();
    for (const auto& [r, b] : rep.compactness)
      profile.push_back(json::array({jnum(r), jnum(b)}));
    compact["profile"] = profile;
    compact["pass"] = rep.compactness_pass;
    j["compactness"] = compact;
    j["failures"] = failures;
    j["pass"] = failures.empty();
    write_json(fs::path(cfg.out_dir) / "weights.json", j);

    if (!failures.empty())
      return {3, "weight-condition failed: " + failures.front()};
    return {0, "check-weights ok: ap " + fmt17(rep.ap.value) + ", balance " +
                   fmt17(rep.balance.value)};
  });
}

RunOutcome cmd_solve(const ExperimentConfig& cfg) {
  return guarded([&]() -> RunOutcome {
    prologue(cfg, "solve");
    clear_outputs(cfg, {"summary.json", "u0.csv", "u1.csv", "iterations.csv",
                        "path_log.csv"});

    auto exps = validate_exponents(cfg.params.p, cfg.params.q,
                                   cfg.params.gamma, cfg.params.mu,
                                   cfg.params.n, cfg.params.m,
                                   cfg.v_scaled_omega);
    if (!structural_ok(exps, cfg.v_scaled_omega))
      return {2, "exponent validation failed: " + join(exps.violations)};

    Grid grid = build_grid(cfg.domain);
    DiscreteProblem prob(grid, cfg.omega, cfg.v, cfg.params);
    GeometryConstants geo =
        compute_geometry(cfg.omega, cfg.v, cfg.params, cfg.geometry);
    if (!std::isfinite(geo.embedding_A) || !(geo.mp_radius > 0.0) ||
        !std::isfinite(geo.mp_radius))
      return {3, "weight-condition failed: embedding constant A = " +
                     fmt17(geo.embedding_A)};

    SolveResult res = solve_two(prob, geo, cfg.solver);

    const fs::path dir(cfg.out_dir);
    if (res.local_min) {
      write_field_csv(res.local_min->u, (dir / "u1.csv").string());
      write_log_csv(dir / "iterations.csv", res.local_min->log);
    }
    if (res.saddle) {
      write_field_csv(res.saddle->u, (dir / "u0.csv").string());
      write_log_csv(dir / "path_log.csv", res.saddle->log);
    }

    std::vector<std::string> failures;
    if (!res.local_min) {
      failures.push_back("u1: " + res.local_min_error);
    } else {
      if (!res.local_min->converged) failures.push_back("u1: not converged");
      if (!(res.local_min->energy.I < 0.0))
        failures.push_back("u1: energy not negative");
      if (!res.local_min->positivity.pass)
        failures.push_back("u1: positivity certificate failed");
    }
    if (!res.saddle) {
      failures.push_back("u0: " + res.saddle_error);
    } else {
      if (!res.saddle->converged) failures.push_back("u0: not converged");
      if (!(res.saddle->energy.I > 0.0))
        failures.push_back("u0: energy not positive");
      if (!res.saddle->positivity.pass)
        failures.push_back("u0: positivity certificate failed");
    }
    if (res.local_min && res.saddle && !res.distinct_ok)
      failures.push_back("branches coincide: |u0 - u1|_E = " +
                         fmt17(res.distinct_e));

    json j;
    j["command"] = "solve";
    j["seed"] = cfg.seed;
    j["problem"] = jproblem(cfg);
    j["domain"] = jdomain(cfg);
    j["weights"] = jweights_desc(cfg);
    j["exponents"] = jexponents(exps);
    j["geometry"] = jgeometry(geo);
    j["u1"] = jbranch(prob, geo, res.local_min, res.local_min_error);
    j["u0"] = jbranch(prob, geo, res.saddle, res.saddle_error);
    json distinct;
    distinct["e_distance"] = jnum(res.distinct_e);
    distinct["pass"] = res.distinct_ok;
    j["branches_distinct"] = distinct;
    j["sphere_soft_ok"] = res.sphere_soft_ok;
    j["failures"] = failures;
    j["pass"] = failures.empty();
    write_json(dir / "summary.json", j);

    if (!failures.empty()) return {4, "solve failed: " + failures.front()};
    return {0, "solve ok: I(u1) = " + fmt17(res.local_min->energy.I) +
                   ", I(u0) = " + fmt17(res.saddle->energy.I)};
  });
}

RunOutcome cmd_verify(const ExperimentConfig& cfg) {
  return guarded([&]() -> RunOutcome {
    prologue(cfg, "verify");
    clear_outputs(cfg, {"inequalities.json", "fibering.csv"});
    const fs::path dir(cfg.out_dir);
    const auto& vf = cfg.verify;

    Grid grid = build_grid(cfg.domain);
    DiscreteProblem prob(grid, cfg.omega, cfg.v, cfg.params);
    GeometryConstants geo =
        compute_geometry(cfg.omega, cfg.v, cfg.params, cfg.geometry);
    if (!std::isfinite(geo.embedding_A) || !(geo.mp_radius > 0.0) ||
        !std::isfinite(geo.mp_radius))
      return {3, "weight-condition failed: embedding constant A = " +
                     fmt17(geo.embedding_A)};

    std::vector<std::string> failures;

    PoincareOpts popts;
    popts.random_count = vf.poincare_random;
    popts.seed = cfg.seed;
    popts.stable_fraction = vf.stable_fraction;
    InequalityReport poincare = poincare_check(cfg.domain, cfg.omega, cfg.v,
                                               cfg.params, cfg.geometry, popts);
    double empirical_C0 = poincare.max_ratio;
    if (!std::isfinite(empirical_C0) || !(empirical_C0 > 0.0))
      failures.push_back("poincare: empirical constant not finite");
    if (!poincare.stable)
      failures.push_back("poincare: refinement trend not stable");

    // Scan seed: the generic bump, scaled so the concave basin near zero,
    // the positive sphere crossing, and the convex tail all land inside
    // the scan window whenever their norm span fits into it.  The basin
    // edge sits where the concave term dominates the gradient term and
    // the tail's onset is the largest zero of the ray polynomial.
    Field bump = bump_seed(grid);
    Field unit = scaled(bump, 1.0 / prob.e_norm(bump));
    double seed_norm = geo.mp_radius;  // default: sphere crossing at t = 1
    bool window_feasible = false;
    if (cfg.params.mu > 0.0) {
      auto ft = prob.fiber_terms(unit);
      const double p = cfg.params.p, q = cfg.params.q, ga = cfg.params.gamma;
      auto poly = [&](double s) {
        return std::pow(s, p) / p * ft.grad_p - std::pow(s, q) / q * ft.vq -
               cfg.params.mu * std::pow(s, ga) / ga * ft.plain_gamma;
      };
      double a_neg = std::pow(
          cfg.params.mu * p * ft.plain_gamma / (ga * ft.grad_p),
          1.0 / (p - ga));
      if (std::isfinite(a_neg) && a_neg > 0.0 && ft.vq > 0.0 &&
          poly(geo.mp_radius) > 0.0) {
        double hi = geo.mp_radius;
        for (int it = 0; it < 200 && poly(hi) > 0.0; ++it) hi *= 2.0;
        if (poly(hi) <= 0.0) {
          double lo = 0.5 * hi;
          for (int it = 0; it < 100; ++it) {
            double mid = std::sqrt(lo * hi);
            (poly(mid) > 0.0 ? lo : hi) = mid;
          }
          double a_up = hi;
          window_feasible = a_up / vf.fiber_t_hi <= a_neg / vf.fiber_t_lo;
          if (window_feasible)
            seed_norm =
                std::sqrt((a_neg / vf.fiber_t_lo) * (a_up / vf.fiber_t_hi));
        }
      }
    }
    FiberingScan fib = fibering_scan(scaled(unit, seed_norm), prob, geo,
                                     vf.fiber_t_lo, vf.fiber_t_hi,
                                     vf.fiber_points);
    bool gap_ok = fib.max_rel_gap <= 1e-12;
    std::string expected_bands;
    bool band_ok;
    if (cfg.params.mu == 0.0) {
      // Without the concave term the ray energy changes sign exactly once.
      expected_bands = "single-high";
      band_ok = !fib.neg_low && fib.pos_at_sphere && fib.neg_high;
    } else if (cfg.params.mu >= geo.lambda_empirical) {
      expected_bands = "unconstrained";
      band_ok = true;
    } else if (window_feasible) {
      expected_bands = "three";
      band_ok = fib.three_bands;
    } else {
      // The basin hugs zero more tightly than the window can reach; the
      // visible structure is the positive hump and the convex tail.
      expected_bands = "sphere-and-high";
      band_ok = fib.pos_at_sphere && fib.neg_high;
    }
    if (!gap_ok)
      failures.push_back("fibering: polynomial mismatch " +
                         fmt17(fib.max_rel_gap));
    if (!band_ok) failures.push_back("fibering: sign bands not " + expected_bands);
    {
      std::string csv = "t,I\n";
      for (const auto& pt : fib.points)
        csv += fmt17(pt.t) + "," + fmt17(pt.I) + "\n";
      write_text(dir / "fibering.csv", csv);
    }

    json jsphere(nullptr);
    if (std::isfinite(empirical_C0) && empirical_C0 > 0.0) {
      SphereCheck sphere =
          sphere_bound_check(prob, cfg.geometry, cfg.omega, cfg.v,
                             empirical_C0, vf.sphere_samples, cfg.seed);
      if (!sphere.pass)
        failures.push_back("sphere: minimum energy " + fmt17(sphere.min_I) +
                           " below bound " + fmt17(sphere.bound));
      json js;
      js["samples"] = sphere.samples;
      js["c0_used"] = jnum(sphere.c0_used);
      js["radius"] = jnum(sphere.radius);
      js["bound"] = jnum(sphere.bound);
      js["min_I"] = jnum(sphere.min_I);
      js["worst"] = sphere.worst;
      js["pass"] = sphere.pass;
      jsphere = js;
    }

    QuasiMetricOpts qopts;
    qopts.average_resolution = vf.k0_resolution;
    double diam2 = 0.0;
    for (std::size_t a = 0; a < cfg.domain.lo.size(); ++a) {
      double s = cfg.domain.hi[a] - cfg.domain.lo[a];
      diam2 += s * s;
    }
    qopts.domain_diameter = std::sqrt(diam2);
    QuasiMetricSpace space(cfg.omega, cfg.params.p, cfg.params.n, cfg.params.m,
                           qopts);
    QuasiMetricReport k0 = quasi_triangle_constant(
        space, vf.k0_samples, Box{cfg.domain.lo, cfg.domain.hi}, cfg.seed);
    if (!std::isfinite(k0.K0_estimate) || k0.K0_estimate < 1.0 - 1e-12)
      failures.push_back("k0: triangle constant " + fmt17(k0.K0_estimate));

    OracleSuiteResult oracles = oracle_suite(cfg.seed);
    if (!oracles.all_pass) {
      for (const auto& line : oracles.lines)
        if (!line.pass) {
          failures.push_back("oracle: " + line.id);
          break;
        }
    }

    json j;
    j["command"] = "verify";
    j["seed"] = cfg.seed;
    j["problem"] = jproblem(cfg);
    j["domain"] = jdomain(cfg);
    j["weights"] = jweights_desc(cfg);
    j["geometry"] = jgeometry(geo);
    json jp;
    jp["id"] = poincare.id;
    jp["samples"] = poincare.samples;
    jp["max_ratio"] = jnum(poincare.max_ratio);
    jp["empirical_C0"] = jnum(empirical_C0);
    jp["worst"] = poincare.worst;
    json trend = json::array();
    for (double t : poincare.trend) trend.push_back(jnum(t));
    jp["trend"] = trend;
    jp["stable"] = poincare.stable;
    j["poincare"] = jp;
    json jf;
    jf["points"] = static_cast<long>(fib.points.size());
    jf["seed_norm"] = jnum(seed_norm);
    jf["window_feasible"] = window_feasible;
    jf["sphere_t"] = jnum(fib.sphere_t);
    jf["max_rel_gap"] = jnum(fib.max_rel_gap);
    jf["neg_low"] = fib.neg_low;
    jf["pos_at_sphere"] = fib.pos_at_sphere;
    jf["neg_high"] = fib.neg_high;
    jf["three_bands"] = fib.three_bands;
    jf["expected_bands"] = expected_bands;
    jf["pass"] = gap_ok && band_ok;
    j["fibering"] = jf;
    j["sphere"] = jsphere;
    json jk;
    jk["estimate"] = jnum(k0.K0_estimate);
    jk["samples"] = k0.sample_count;
    jk["worst_ratio"] = jnum(k0.worst.ratio);
    j["k0"] = jk;
    json jo;
    jo["all_pass"] = oracles.all_pass;
    json lines = json::array();
    for (const auto& line : oracles.lines) {
      json jl;
      jl["id"] = line.id;
      jl["value"] = jnum(line.value);
      jl["reference"] = jnum(line.reference);
      jl["tolerance"] = jnum(line.tolerance);
      jl["pass"] = line.pass;
      jl["note"] = line.note;
      lines.push_back(jl);
    }
    jo["lines"] = lines;
    j["oracles"] = jo;
    j["failures"] = failures;
    j["pass"] = failures.empty();
    write_json(dir / "inequalities.json", j);

    if (!failures.empty())
      return {5, "verification failed: " + failures.front()};
    return {0, "verify ok: empirical C0 " + fmt17(empirical_C0) + ", K0 " +
                   fmt17(k0.K0_estimate)};
  });
}

RunOutcome cmd_report(const std::string& run_dir) {
  return guarded([&]() -> RunOutcome {
    const fs::path dir(run_dir);
    if (!fs::is_directory(dir))
      return {2, "report: run directory not found: " + run_dir};

    json report;
    report["command"] = "report";
    json sections = json::array();
    std::vector<std::pair<std::string, bool>> rows;
    bool overall = true;

    auto merge = [&](const char* file, const char* key) {
      fs::path p = dir / file;
      if (!fs::exists(p)) {
        report[key] = nullptr;
        return;
      }
      std::ifstream is(p, std::ios::binary);
      json j;
      try {
        is >> j;
      } catch (const json::parse_error& e) {
        throw ConfigError(std::string(file) + ": " + e.what());
      }
      report[key] = j;
      sections.push_back(key);
      bool pass = j.contains("pass") && j["pass"].is_boolean() &&
                  j["pass"].get<bool>();
      rows.emplace_back(key, pass);
      overall = overall && pass;
    };
    merge("weights.json", "weights");
    merge("summary.json", "solve");
    merge("inequalities.json", "verify");

    if (sections.empty())
      return {2, "report: no outputs found in " + run_dir};
    report["sections"] = sections;
    report["pass"] = overall;
    write_json(dir / "report.json", report);

    std::string csv = "section,pass\n";
    for (const auto& [name, pass] : rows)
      csv += name + "," + (pass ? "true" : "false") + "\n";
    csv += std::string("overall,") + (overall ? "true" : "false") + "\n";
    write_text(dir / "report.csv", csv);

    std::string listed;
    for (const auto& s : sections)
      listed += (listed.empty() ? "" : ", ") + s.get<std::string>();
    return {0, "report ok: merged " + listed};
  });
}

}  // namespace wplap
