#include "wplap/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "wplap/errors.hpp"

namespace wplap {

namespace {

[[noreturn]] void fail(int line, const std::string& what) {
  throw ConfigError("config line " + std::to_string(line) + ": " + what);
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

double to_double(const std::string& v, int line, const std::string& key) {
  char* end = nullptr;
  double x = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size())
    fail(line, "key '" + key + "': not a number: '" + v + "'");
  return x;
}

long to_long(const std::string& v, int line, const std::string& key) {
  char* end = nullptr;
  long x = std::strtol(v.c_str(), &end, 10);
  if (v.empty() || end != v.c_str() + v.size())
    fail(line, "key '" + key + "': not an integer: '" + v + "'");
  return x;
}

int to_int(const std::string& v, int line, const std::string& key) {
  return static_cast<int>(to_long(v, line, key));
}

std::uint64_t to_u64(const std::string& v, int line, const std::string& key) {
  char* end = nullptr;
  unsigned long long x = std::strtoull(v.c_str(), &end, 10);
  if (v.empty() || end != v.c_str() + v.size())
    fail(line, "key '" + key + "': not an unsigned integer: '" + v + "'");
  return static_cast<std::uint64_t>(x);
}

bool to_bool(const std::string& v, int line, const std::string& key) {
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  fail(line, "key '" + key + "': not a boolean: '" + v + "'");
}

std::vector<double> to_dlist(const std::string& v, int line,
                             const std::string& key) {
  std::vector<double> out;
  for (const auto& tok : split_ws(v)) out.push_back(to_double(tok, line, key));
  return out;
}

std::vector<int> to_ilist(const std::string& v, int line,
                          const std::string& key) {
  std::vector<int> out;
  for (const auto& tok : split_ws(v)) out.push_back(to_int(tok, line, key));
  return out;
}

Weight parse_weight_spec(const std::string& v, int line,
                         const std::string& key) {
  auto toks = split_ws(v);
  if (toks.empty()) fail(line, "key '" + key + "': empty weight spec");
  try {
    if (toks[0] == "constant") {
      if (toks.size() != 2)
        fail(line, "key '" + key + "': constant takes one value");
      return Weight::constant(to_double(toks[1], line, key));
    }
    if (toks[0] == "power") {
      if (toks.size() != 2)
        fail(line, "key '" + key + "': power takes one exponent");
      return Weight::power(to_double(toks[1], line, key));
    }
    if (toks[0] == "product_powers") {
      std::vector<double> exps;
      for (std::size_t i = 1; i < toks.size(); ++i)
        exps.push_back(to_double(toks[i], line, key));
      return Weight::product_powers(std::move(exps));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    fail(line, "key '" + key + "': " + e.what());
  }
  fail(line, "key '" + key + "': unknown weight kind '" + toks[0] +
                 "' (constant | power | product_powers)");
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  bool v_given = false;
  int v_line = 0;

  std::istringstream in(text);
  std::string raw, section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = raw;
    std::size_t hash = s.find_first_of("#;");
    if (hash != std::string::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') fail(line, "unterminated section header");
      section = trim(s.substr(1, s.size() - 2));
      if (section != "problem" && section != "domain" && section != "weights" &&
          section != "geometry" && section != "solver" && section != "verify" &&
          section != "output" && section != "seed")
        fail(line, "unknown section [" + section + "]");
      continue;
    }
    std::size_t eq = s.find('=');
    if (eq == std::string::npos) fail(line, "expected key = value");
    std::string key = trim(s.substr(0, eq));
    std::string value = trim(s.substr(eq + 1));
    if (section.empty()) fail(line, "key '" + key + "' outside any section");
    if (key.empty()) fail(line, "empty key");

    if (section == "problem") {
      if (key == "p") cfg.params.p = to_double(value, line, key);
      else if (key == "q") cfg.params.q = to_double(value, line, key);
      else if (key == "gamma") cfg.params.gamma = to_double(value, line, key);
      else if (key == "mu") cfg.params.mu = to_double(value, line, key);
      else if (key == "n") cfg.params.n = to_int(value, line, key);
      else if (key == "m") cfg.params.m = to_int(value, line, key);
      else if (key == "v_scaled_omega") cfg.v_scaled_omega = to_bool(value, line, key);
      else if (key == "a") cfg.scale_a = to_double(value, line, key);
      else fail(line, "unknown key '" + key + "' in [problem]");
    } else if (section == "domain") {
      if (key == "lo") cfg.domain.lo = to_dlist(value, line, key);
      else if (key == "hi") cfg.domain.hi = to_dlist(value, line, key);
      else if (key == "counts") cfg.domain.counts = to_ilist(value, line, key);
      else fail(line, "unknown key '" + key + "' in [domain]");
    } else if (section == "weights") {
      if (key == "omega") cfg.omega = parse_weight_spec(value, line, key);
      else if (key == "v") {
        cfg.v = parse_weight_spec(value, line, key);
        v_given = true;
        v_line = line;
      } else fail(line, "unknown key '" + key + "' in [weights]");
    } else if (section == "geometry") {
      if (key == "R") cfg.geometry.R = to_double(value, line, key);
      else if (key == "x0") cfg.geometry.x0 = to_dlist(value, line, key);
      else if (key == "C0") cfg.geometry.C0 = to_double(value, line, key);
      else if (key == "ball_resolution") cfg.geometry.ball_resolution = to_int(value, line, key);
      else if (key == "box_resolution") cfg.geometry.box_resolution = to_int(value, line, key);
      else fail(line, "unknown key '" + key + "' in [geometry]");
    } else if (section == "solver") {
      if (key == "max_iters") cfg.solver.max_iters = to_long(value, line, key);
      else if (key == "grad_tol") cfg.solver.grad_tol = to_double(value, line, key);
      else if (key == "armijo_slope") cfg.solver.armijo_slope = to_double(value, line, key);
      else if (key == "armijo_backtrack") cfg.solver.armijo_backtrack = to_double(value, line, key);
      else if (key == "step0") cfg.solver.step0 = to_double(value, line, key);
      else if (key == "path_nodes") cfg.solver.path_nodes = to_int(value, line, key);
      else if (key == "path_step") cfg.solver.path_step = to_double(value, line, key);
      else if (key == "path_tol") cfg.solver.path_tol = to_double(value, line, key);
      else if (key == "polish_iters") cfg.solver.polish_iters = to_int(value, line, key);
      else if (key == "sphere_slack") cfg.solver.sphere_slack = to_double(value, line, key);
      else fail(line, "unknown key '" + key + "' in [solver]");
    } else if (section == "verify") {
      if (key == "poincare_random") cfg.verify.poincare_random = to_int(value, line, key);
      else if (key == "stable_fraction") cfg.verify.stable_fraction = to_double(value, line, key);
      else if (key == "sphere_samples") cfg.verify.sphere_samples = to_int(value, line, key);
      else if (key == "k0_samples") cfg.verify.k0_samples = to_long(value, line, key);
      else if (key == "k0_resolution") cfg.verify.k0_resolution = to_int(value, line, key);
      else if (key == "refine_base") cfg.verify.refine.base_resolution = to_int(value, line, key);
      else if (key == "refine_levels") cfg.verify.refine.levels = to_int(value, line, key);
      else if (key == "refine_factor") cfg.verify.refine.level_factor = to_int(value, line, key);
      else if (key == "growth_threshold") cfg.verify.refine.growth_threshold = to_double(value, line, key);
      else if (key == "ainf_probes") cfg.verify.ainf_probes = to_int(value, line, key);
      else if (key == "vanish_fraction") cfg.verify.vanish_fraction = to_double(value, line, key);
      else if (key == "compactness_steps") cfg.verify.compactness_steps = to_int(value, line, key);
      else if (key == "compactness_theta") cfg.verify.compactness_theta = to_double(value, line, key);
      else if (key == "fiber_points") cfg.verify.fiber_points = to_int(value, line, key);
      else if (key == "fiber_t_lo") cfg.verify.fiber_t_lo = to_double(value, line, key);
      else if (key == "fiber_t_hi") cfg.verify.fiber_t_hi = to_double(value, line, key);
      else if (key == "family_centers") cfg.verify.family_centers = to_int(value, line, key);
      else if (key == "family_steps") cfg.verify.family_steps = to_int(value, line, key);
      else if (key == "family_theta") cfg.verify.family_theta = to_double(value, line, key);
      else fail(line, "unknown key '" + key + "' in [verify]");
    } else if (section == "output") {
      if (key == "dir") cfg.out_dir = value;
      else fail(line, "unknown key '" + key + "' in [output]");
    } else {  // seed
      if (key == "value") cfg.seed = to_u64(value, line, key);
      else fail(line, "unknown key '" + key + "' in [seed]");
    }
  }

  if (cfg.v_scaled_omega) {
    if (v_given)
      fail(v_line, "[weights] v conflicts with v_scaled_omega = true");
    try {
      cfg.v = cfg.omega.scaled_by(cfg.scale_a);
    } catch (const Error& e) {
      throw ConfigError(std::string("v_scaled_omega: ") + e.what());
    }
  }
  finalize_config(cfg);
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

void finalize_config(ExperimentConfig& cfg) {
  auto& pp = cfg.params;
  if (pp.n < 1 || pp.m < 1) throw ConfigError("[problem] needs n >= 1 and m >= 1");
  if (!(pp.p > 1.0)) throw ConfigError("[problem] needs p > 1");
  if (!(pp.q > pp.p)) throw ConfigError("[problem] needs q > p");
  if (!(pp.gamma > 1.0)) throw ConfigError("[problem] needs gamma > 1");
  if (!(pp.mu >= 0.0)) throw ConfigError("[problem] needs mu >= 0");

  const std::size_t d = static_cast<std::size_t>(pp.n + pp.m);
  cfg.domain.n = pp.n;
  cfg.domain.m = pp.m;
  if (cfg.domain.lo.size() != d || cfg.domain.hi.size() != d ||
      cfg.domain.counts.size() != d)
    throw ConfigError("[domain] lo/hi/counts must each list n + m entries");
  for (std::size_t a = 0; a < d; ++a) {
    if (!(cfg.domain.hi[a] > cfg.domain.lo[a]))
      throw ConfigError("[domain] bounds out of order");
    if (cfg.domain.counts[a] < 3)
      throw ConfigError("[domain] node counts must be >= 3");
  }

  if (!cfg.geometry.x0.empty() &&
      cfg.geometry.x0.size() != static_cast<std::size_t>(pp.n))
    throw ConfigError("[geometry] x0 must list n entries (or be omitted)");
  if (!(cfg.geometry.R > 0.0)) throw ConfigError("[geometry] needs R > 0");
  if (!(cfg.geometry.C0 > 0.0)) throw ConfigError("[geometry] needs C0 > 0");
  if (cfg.geometry.ball_resolution < 4 || cfg.geometry.box_resolution < 4)
    throw ConfigError("[geometry] resolutions must be >= 4");

  if (cfg.omega.dim() != 0 && cfg.omega.dim() != pp.n)
    throw ConfigError("[weights] omega must be a weight on the x-block");
  if (cfg.v.dim() != 0 && cfg.v.dim() != pp.n)
    throw ConfigError("[weights] v must be a weight on the x-block");

  auto& vf = cfg.verify;
  if (vf.poincare_random < 0 || vf.sphere_samples < 1 || vf.k0_samples < 100)
    throw ConfigError("[verify] sample counts out of range");
  if (vf.k0_resolution < 8)
    throw ConfigError("[verify] k0_resolution must be at least 8");
  if (!(vf.stable_fraction >= 0.0 && vf.stable_fraction < 1.0))
    throw ConfigError("[verify] stable_fraction must lie in [0, 1)");
  if (vf.refine.base_resolution < 8 || vf.refine.levels < 2 ||
      vf.refine.level_factor < 2)
    throw ConfigError("[verify] refinement schedule out of range");
  if (!(vf.vanish_fraction > 0.0 && vf.vanish_fraction < 1.0))
    throw ConfigError("[verify] vanish_fraction must lie in (0, 1)");
  if (vf.fiber_points < 2 || !(vf.fiber_t_lo > 0.0) ||
      !(vf.fiber_t_hi > vf.fiber_t_lo))
    throw ConfigError("[verify] fibering scan range out of order");
  if (vf.family_centers < 1 || vf.family_steps < 1 ||
      !(vf.family_theta > 0.0 && vf.family_theta < 1.0))
    throw ConfigError("[verify] scan family out of range");
  if (vf.compactness_steps && *vf.compactness_steps < 2)
    throw ConfigError("[verify] compactness_steps must be >= 2");
  if (vf.compactness_theta &&
      !(*vf.compactness_theta > 0.0 && *vf.compactness_theta < 1.0))
    throw ConfigError("[verify] compactness_theta must lie in (0, 1)");

  if (cfg.out_dir.empty()) throw ConfigError("[output] dir must not be empty");

  cfg.geometry.domain = Box{cfg.domain.lo, cfg.domain.hi};
  cfg.solver.seed = cfg.seed;
}

std::string config_reference() {
  return R"(# Experiment configuration reference: every key with its default.
# Lists are whitespace-separated; '#' and ';' start comments.

[problem]
p = 2.0                 # gradient exponent, 1 < p < q
q = 4.0                 # convex-term exponent
gamma = 1.3             # concave-term exponent, 1 < gamma
mu = 0.0                # concave-term coefficient, >= 0
n = 1                   # x-block dimensions (weighted directions)
m = 1                   # y-block dimensions
v_scaled_omega = false  # take v = a * omega instead of the [weights] v spec
a = 1.0                 # the multiple used when v_scaled_omega is true

[domain]
lo = 0 0                # n + m lower bounds
hi = 1 1                # n + m upper bounds
counts = 17 17          # nodes per axis, >= 3

[weights]
omega = constant 1      # constant c | power alpha | product_powers a1 .. an
v = constant 1          # same kinds; ignored when v_scaled_omega is true

[geometry]
R = 1.0                 # reference x-ball radius
x0 =                    # x-ball center, n entries; empty = origin
C0 = 1.0                # embedding constant prefactor
ball_resolution = 256   # quadrature lattice for ball integrals
box_resolution = 256    # quadrature resolution for the domain T integral

[solver]
max_iters = 20000
grad_tol = 1e-7         # weighted L2 residual tolerance
armijo_slope = 0.25     # sufficient-decrease fraction, (0, 1/2]
armijo_backtrack = 0.5  # step shrink factor, (0, 1)
step0 = 1.0             # initial descent trial step
path_nodes = 16         # path segments for the pass search, >= 8
path_step = 1.0         # initial deformation trial step
path_tol = 3e-3         # residual gate ending the deformation stage
polish_iters = 40       # Newton refinement iterations, 0 disables
sphere_slack = 0.9      # soft check I(u0) >= (1 - slack) * sphere_bound

[verify]
poincare_random = 40    # random fields per level (plus 10 fixed shapes)
stable_fraction = 0.2   # refinement trend must settle within this band
sphere_samples = 64
k0_samples = 2000       # triangle-constant triples
k0_resolution = 192     # ball-average lattice per axis for the triangle
                        # estimate (only n >= 2 touches it)
refine_base = 128       # estimator ladder base resolution, per axis (cost
                        # grows like resolution^n: lower it when n >= 2)
refine_levels = 4
refine_factor = 4
growth_threshold = 1.25 # monotone growth beyond this flags divergence
ainf_probes = 16
vanish_fraction = 0.1   # compactness verdict threshold
compactness_steps = 16  # radius ladder length for the vanishing profile
#compactness_theta = 0.5
fiber_points = 200
fiber_t_lo = 1e-3
fiber_t_hi = 1e3
family_centers = 7      # scan-family lattice per axis
family_steps = 8        # radius ladder length
family_theta = 0.5

[output]
dir = out

[seed]
value = 0
)";
}

}  // namespace wplap
