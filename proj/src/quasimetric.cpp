#include "wplap/quasimetric.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "wplap/errors.hpp"
#include "wplap/quadrature.hpp"
#include "wplap/reduction.hpp"

namespace wplap {

namespace {

double euclid(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace

QuasiMetricSpace::QuasiMetricSpace(Weight omega, double p, int n, int m,
                                   QuasiMetricOpts opts)
    : omega_(std::move(omega)), sigma_(omega_.pow(1.0 - p / (p - 1.0))),
      p_(p), inv_pprime_((p - 1.0) / p), n_(n), m_(m), opts_(opts) {
  if (!(p > 1.0)) throw ParameterError("quasi-metric needs p > 1");
  if (n < 1 || m < 1) throw ParameterError("quasi-metric needs n >= 1, m >= 1");
  if (omega_.dim() != 0 && omega_.dim() != n)
    throw ParameterError("weight dimension does not match n");
  if (!(opts_.inversion_tol > 0.0) || !(opts_.domain_diameter > 0.0) ||
      opts_.table_knots < 8)
    throw ParameterError("bad quasi-metric options");
}

double QuasiMetricSpace::h_direct(std::span<const double> x, double t) const {
  if (t == 0.0) return 0.0;
  double avg;
  if (n_ == 1) {
    avg = graded_interval_integral(sigma_, x[0] - t, x[0] + t) / (2.0 * t);
  } else {
    avg = ball_average_accurate(sigma_, Ball{{x.begin(), x.end()}, t},
                                opts_.average_resolution);
  }
  return t * std::pow(avg, inv_pprime_);
}

double QuasiMetricSpace::h(std::span<const double> x, double t) const {
  if (static_cast<int>(x.size()) != n_)
    throw ParameterError("h: point dimension must equal n");
  if (t < 0.0) throw ParameterError("h: radius must be nonnegative");
  if (t == 0.0 || n_ != 1) return h_direct(x, t);
  // One-dimensional values route through the same prefix table the
  // inversion bisects, so h and h_inv act on a single shared function
  // and round trips cancel any quadrature bias.
  Table& tab = table_for(x);
  if (t < tab.knots.front() || t > tab.knots.back()) return h_direct(x, t);
  std::size_t j = std::upper_bound(tab.knots.begin(), tab.knots.end(), t) -
                  tab.knots.begin();
  if (j >= tab.knots.size()) j = tab.knots.size() - 1;
  materialize(tab, x, j);
  return h_from_prefix(tab, j, x, t);
}

QuasiMetricSpace::Table& QuasiMetricSpace::table_for(
    std::span<const double> x) const {
  if (cache_.size() > 4096) cache_.clear();  // bound the per-space footprint
  std::vector<double> key(x.begin(), x.end());
  auto [it, inserted] = cache_.try_emplace(std::move(key));
  Table& tab = it->second;
  if (inserted) {
    const int K = opts_.table_knots;
    const double cap = 1e6 * opts_.domain_diameter;
    const double t_min = cap * 1e-12;
    tab.knots.resize(K);
    for (int i = 0; i < K; ++i)
      tab.knots[i] = t_min * std::pow(cap / t_min, double(i) / (K - 1));
    tab.cumulative.assign(K, 0.0);
    tab.h.assign(K, 0.0);
  }
  return tab;
}

void QuasiMetricSpace::materialize(Table& tab, std::span<const double> x,
                                   std::size_t upto) const {
  upto = std::min(upto, tab.knots.size() - 1);
  for (std::size_t j = tab.built; j <= upto; ++j) {
    double t = tab.knots[j];
    if (n_ == 1) {
      double x0 = x[0];
      if (j == 0) {
        tab.cumulative[0] = graded_interval_integral(sigma_, x0 - t, x0 + t);
      } else {
        double prev = tab.knots[j - 1];
        tab.cumulative[j] = tab.cumulative[j - 1] +
                            graded_interval_integral(sigma_, x0 - t, x0 - prev) +
                            graded_interval_integral(sigma_, x0 + prev, x0 + t);
      }
      tab.h[j] = t * std::pow(tab.cumulative[j] / (2.0 * t), inv_pprime_);
    } else {
      tab.h[j] = h_direct(x, t);
    }
    if (j > 0 && tab.h[j] < tab.h[j - 1] * (1.0 - 1e-9))
      throw InvariantError("scale function table is not nondecreasing");
  }
  tab.built = std::max(tab.built, upto + 1);
}

double QuasiMetricSpace::h_from_prefix(const Table& tab, std::size_t below,
                                       std::span<const double> x,
                                       double t) const {
  if (n_ != 1 || below == 0) return h_direct(x, t);
  double prev = tab.knots[below - 1];
  if (t <= prev * (1.0 + 1e-15)) return tab.h[below - 1];
  double x0 = x[0];
  double integral = tab.cumulative[below - 1] +
                    graded_interval_integral(sigma_, x0 - t, x0 - prev) +
                    graded_interval_integral(sigma_, x0 + prev, x0 + t);
  return t * std::pow(integral / (2.0 * t), inv_pprime_);
}

double QuasiMetricSpace::h_inv(std::span<const double> x, double w) const {
  if (static_cast<int>(x.size()) != n_)
    throw ParameterError("h_inv: point dimension must equal n");
  if (w < 0.0) throw ParameterError("h_inv: value must be nonnegative");
  if (w == 0.0) return 0.0;

  Table& tab = table_for(x);
  const std::size_t K = tab.knots.size();
  while (tab.built < K && (tab.built == 0 || tab.h[tab.built - 1] < w))
    materialize(tab, x, tab.built + 15);
  if (tab.h[tab.built - 1] < w) {
    char buf[128];
    std::snprintf(buf, sizeof buf,
                  "h_inv: value %g unreachable below the bracketing cap %g", w,
                  tab.knots.back());
    throw UnreachableValueError(buf);
  }

  // First materialized knot with h >= w.
  std::size_t i = std::lower_bound(tab.h.begin(), tab.h.begin() + tab.built, w) -
                  tab.h.begin();

  double lo, hi;
  if (i == 0) {
    // Solution below the table: walk down until h < w.
    hi = tab.knots[0];
    lo = hi / 4.0;
    while (h_direct(x, lo) >= w) {
      hi = lo;
      lo /= 4.0;
      if (lo < 1e-300) return lo;
    }
  } else {
    lo = tab.knots[i - 1];
    hi = tab.knots[i];
  }

  const double tol = opts_.inversion_tol;
  for (int iter = 0; iter < 200 && hi - lo > tol * hi; ++iter) {
    double mid = (lo > 0.0) ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
    double hm = (i > 0) ? h_from_prefix(tab, i, x, mid) : h_direct(x, mid);
    if (hm >= w)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

double QuasiMetricSpace::rho(std::span<const double> z1,
                             std::span<const double> z2) const {
  if (static_cast<int>(z1.size()) != n_ + m_ ||
      static_cast<int>(z2.size()) != n_ + m_)
    throw ParameterError("rho: point dimension must equal n + m");
  auto x1 = z1.first(n_), x2 = z2.first(n_);
  double dx = euclid(x1, x2);
  double dy = euclid(z1.subspan(n_), z2.subspan(n_));
  if (dy == 0.0) return dx;
  return std::max({dx, h_inv(x1, dy), h_inv(x2, dy)});
}

void QuasiMetricSpace::warm_cache(
    const std::vector<std::vector<double>>& centers) const {
  for (const auto& c : centers) {
    Table& tab = table_for(c);
    materialize(tab, c, tab.knots.size() - 1);
  }
}

QuasiMetricReport quasi_triangle_constant(const QuasiMetricSpace& space,
                                          long sample_count, const Box& box,
                                          std::uint64_t seed) {
  if (sample_count < 100)
    throw ParameterError("quasi-triangle estimate needs >= 100 samples");
  const int d = space.n() + space.m();
  if (static_cast<int>(box.lo.size()) != d ||
      static_cast<int>(box.hi.size()) != d)
    throw ParameterError("sampling box dimension must equal n + m");

  CounterRng rng(seed);
  QuasiMetricReport rep;
  rep.sample_count = sample_count;
  std::vector<double> z1(d), z2(d), z3(d);
  for (long k = 0; k < sample_count; ++k) {
    for (int a = 0; a < d; ++a) {
      z1[a] = rng.uniform(0 * d + a, k, box.lo[a], box.hi[a]);
      z2[a] = rng.uniform(1 * d + a, k, box.lo[a], box.hi[a]);
      z3[a] = rng.uniform(2 * d + a, k, box.lo[a], box.hi[a]);
    }
    if (k == 0) z3 = z1;  // pins the estimate at >= 1 via a ratio-1 triple
    double r12 = space.rho(z1, z2);
    double r13 = space.rho(z1, z3);
    double r23 = space.rho(z2, z3);
    double denom = r13 + r23;
    if (denom == 0.0) {
      if (r12 == 0.0) continue;
      throw MetricViolationError(
          "coincident third point at positive distance from the pair");
    }
    double ratio = r12 / denom;
    if (ratio > rep.K0_estimate) {
      rep.K0_estimate = ratio;
      rep.worst = TripleSample{z1, z2, z3, ratio};
    }
  }
  return rep;
}

}  // namespace wplap
