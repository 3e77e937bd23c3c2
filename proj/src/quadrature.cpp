#include "wplap/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "wplap/errors.hpp"
#include "wplap/reduction.hpp"

namespace wplap {

namespace {

// Walks cell centers of the tensor lattice over the ball's bounding box
// and calls f(point, half_cell) for every center inside the ball (and the
// optional box).  Returns the cell volume.
template <class F>
double for_ball_centers(const Ball& ball, const Box* box, int resolution,
                        F&& f) {
  if (resolution < 1) throw ParameterError("quadrature resolution must be >= 1");
  if (!(ball.radius > 0.0))
    throw ParameterError("ball radius must be positive");
  const std::size_t d = ball.center.size();
  std::vector<double> lo(d), h(d), half(d), pt(d);
  double cellvol = 1.0;
  for (std::size_t a = 0; a < d; ++a) {
    lo[a] = ball.center[a] - ball.radius;
    h[a] = 2.0 * ball.radius / resolution;
    half[a] = h[a];
    cellvol *= h[a];
  }
  std::vector<int> idx(d, 0);
  const double r2 = ball.radius * ball.radius;
  for (;;) {
    double dist2 = 0.0;
    for (std::size_t a = 0; a < d; ++a) {
      pt[a] = lo[a] + (idx[a] + 0.5) * h[a];
      double dc = pt[a] - ball.center[a];
      dist2 += dc * dc;
    }
    bool inside = dist2 <= r2;
    if (inside && box) {
      for (std::size_t a = 0; a < d; ++a)
        if (pt[a] < box->lo[a] || pt[a] > box->hi[a]) inside = false;
    }
    if (inside) f(pt, half);
    std::size_t a = 0;
    while (a < d && ++idx[a] == resolution) idx[a++] = 0;
    if (a == d) break;
  }
  return cellvol;
}

}  // namespace

double weight_integral(const Weight& w, const Ball& ball, int resolution) {
  std::vector<double> terms;
  double cellvol = for_ball_centers(
      ball, nullptr, resolution,
      [&](const std::vector<double>& pt, const std::vector<double>& half) {
        terms.push_back(w.eval(pt, half));
      });
  return cellvol * pairwise_sum(terms);
}

double ball_measure(const Ball& ball, int resolution) {
  long count = 0;
  double cellvol = for_ball_centers(
      ball, nullptr, resolution,
      [&](const std::vector<double>&, const std::vector<double>&) { ++count; });
  return cellvol * static_cast<double>(count);
}

double weight_integral_in_box(const Weight& w, const Ball& ball,
                              const Box& box, int resolution) {
  std::vector<double> terms;
  double cellvol = for_ball_centers(
      ball, &box, resolution,
      [&](const std::vector<double>& pt, const std::vector<double>& half) {
        terms.push_back(w.eval(pt, half));
      });
  return cellvol * pairwise_sum(terms);
}

double ball_box_measure(const Ball& ball, const Box& box, int resolution) {
  long count = 0;
  double cellvol = for_ball_centers(
      ball, &box, resolution,
      [&](const std::vector<double>&, const std::vector<double>&) { ++count; });
  return cellvol * static_cast<double>(count);
}

double weight_min(const Weight& w, const Ball& ball, int resolution) {
  double best = std::numeric_limits<double>::infinity();
  for_ball_centers(
      ball, nullptr, resolution,
      [&](const std::vector<double>& pt, const std::vector<double>& half) {
        best = std::min(best, w.eval(pt, half));
      });
  return best;
}

double weight_integral_box(const Weight& w, const Box& box, int resolution,
                           const std::function<double(double)>& transform) {
  if (resolution < 1) throw ParameterError("quadrature resolution must be >= 1");
  const std::size_t d = box.lo.size();
  std::vector<double> h(d), pt(d);
  double cellvol = 1.0;
  for (std::size_t a = 0; a < d; ++a) {
    if (!(box.lo[a] < box.hi[a]))
      throw ParameterError("box bounds out of order");
    h[a] = (box.hi[a] - box.lo[a]) / resolution;
    cellvol *= h[a];
  }
  std::vector<int> idx(d, 0);
  std::vector<double> terms;
  for (;;) {
    for (std::size_t a = 0; a < d; ++a) pt[a] = box.lo[a] + (idx[a] + 0.5) * h[a];
    double val = w.eval(pt, h);
    terms.push_back(transform ? transform(val) : val);
    std::size_t a = 0;
    while (a < d && ++idx[a] == resolution) idx[a++] = 0;
    if (a == d) break;
  }
  return cellvol * pairwise_sum(terms);
}

namespace {

// 10-point Gauss-Legendre on [a, b] for a 1D slice of the weight; on the
// octave cells of the graded mesh this is accurate to machine precision
// for power-law integrands.
double gauss10(const Weight& w, double a, double b) {
  static const double xs[10] = {
      -0.97390652851717172, -0.86506336668898451, -0.67940956829902441,
      -0.43339539412924719, -0.14887433898163122, 0.14887433898163122,
      0.43339539412924719,  0.67940956829902441,  0.86506336668898451,
      0.97390652851717172};
  static const double ws[10] = {
      0.06667134430868814, 0.14945134915058059, 0.21908636251598204,
      0.26926671930999635, 0.29552422471475287, 0.29552422471475287,
      0.26926671930999635, 0.21908636251598204, 0.14945134915058059,
      0.06667134430868814};
  double mid = 0.5 * (a + b), halflen = 0.5 * (b - a);
  double s = 0.0;
  double pt[1];
  for (int i = 0; i < 10; ++i) {
    pt[0] = mid + halflen * xs[i];
    double v = w(std::span<const double>(pt, 1));
    if (!std::isfinite(v))
      throw InvalidWeightError("weight evaluated to a non-finite value");
    s += ws[i] * v;
  }
  return s * halflen;
}

// Integral over [a, b] where the weight is singular at exactly one
// endpoint `s` (s == a or s == b).  Geometric grading toward s; the cell
// contributions must decay or the integrand is non-integrable.
double graded_toward(const Weight& w, double a, double b, bool singular_at_a) {
  const int kLevels = 52;
  double len = b - a;
  std::vector<double> parts;
  double prev = std::numeric_limits<double>::infinity();
  double total = 0.0;
  double frac = 1.0;
  for (int j = 0; j < kLevels; ++j) {
    double next_frac = frac * 0.5;
    double c0, c1;
    if (singular_at_a) {
      c0 = a + len * next_frac;
      c1 = a + len * frac;
    } else {
      c0 = b - len * frac;
      c1 = b - len * next_frac;
    }
    if (c1 <= c0) break;
    double cell = gauss10(w, c0, c1);
    parts.push_back(cell);
    // Non-decaying contributions at depth signal non-integrability.
    if (j > 8 && cell >= prev * (1.0 - 1e-9) &&
        cell > 1e-13 * (total + cell)) {
      throw DivergenceError("non-integrable weight singularity inside the ball");
    }
    prev = cell;
    total += cell;
    frac = next_frac;
  }
  // Innermost sliver.  The graded cells of a power-law singularity decay
  // geometrically, so the tail is the geometric continuation of the last
  // two cells; that is exact for pure powers and far better than any
  // single-point rule on the remaining interval.
  std::size_t nc = parts.size();
  if (nc >= 2 && parts[nc - 1] > 0.0 && parts[nc - 1] < parts[nc - 2]) {
    double r = parts[nc - 1] / parts[nc - 2];
    parts.push_back(parts[nc - 1] * r / (1.0 - r));
  } else {
    double c0 = singular_at_a ? a : b - len * frac;
    double c1 = singular_at_a ? a + len * frac : b;
    double mid[1] = {0.5 * (c0 + c1)};
    double v = w(std::span<const double>(mid, 1));
    if (std::isfinite(v)) parts.push_back(v * (c1 - c0));
  }
  return pairwise_sum(parts);
}

}  // namespace

double graded_interval_integral(const Weight& w, double a, double b) {
  if (!(a < b)) throw ParameterError("interval bounds out of order");
  std::vector<double> cuts{a};
  for (double s : w.singular_coords(0))
    if (s > a && s < b) cuts.push_back(s);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());

  auto singular_at = [&](double x) {
    for (double s : w.singular_coords(0))
      if (s == x) return true;
    return false;
  };

  std::vector<double> parts;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    double lo = cuts[i], hi = cuts[i + 1];
    bool sing_lo = singular_at(lo), sing_hi = singular_at(hi);
    if (sing_lo && sing_hi) {
      double mid = 0.5 * (lo + hi);
      parts.push_back(graded_toward(w, lo, mid, true));
      parts.push_back(graded_toward(w, mid, hi, false));
    } else if (sing_lo) {
      parts.push_back(graded_toward(w, lo, hi, true));
    } else if (sing_hi) {
      parts.push_back(graded_toward(w, lo, hi, false));
    } else {
      // Smooth panel: composite 10-point Gauss.
      const int kPanels = 16;
      double h = (hi - lo) / kPanels;
      for (int k = 0; k < kPanels; ++k)
        parts.push_back(gauss10(w, lo + k * h, lo + (k + 1) * h));
    }
  }
  return pairwise_sum(parts);
}

double ball_average_accurate(const Weight& w, const Ball& ball,
                             int fallback_resolution) {
  if (!(ball.radius > 0.0))
    throw ParameterError("ball radius must be positive");
  if (ball.center.size() == 1) {
    double a = ball.center[0] - ball.radius;
    double b = ball.center[0] + ball.radius;
    return graded_interval_integral(w, a, b) / (b - a);
  }
  double integral = weight_integral(w, ball, fallback_resolution);
  double measure = ball_measure(ball, fallback_resolution);
  return integral / measure;
}

}  // namespace wplap
