#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "wplap/errors.hpp"

namespace wplap {

// Euclidean ball in the weight's coordinate space.
struct Ball {
  std::vector<double> center;
  double radius = 0.0;
};

// Axis-aligned box, used for probe subsets and domain integrals.
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;
};

// Cell-sampled data for a tabulated weight: values live on the cells of a
// tensor grid over `box`, nearest-cell lookup, row-major with the last
// axis fastest.
struct TabulatedData {
  Box box;
  std::vector<int> cells;
  std::vector<double> values;
};

/* Positive weight function on R^d.
 *
 * Kinds: constant c; power |x|^alpha (full Euclidean norm); product of
 * per-coordinate powers prod |x_i|^alpha_i; tabulated on its own grid.
 * Power kinds are singular on a known locus (the origin / the coordinate
 * hyperplanes); quadrature callers pass the local cell size so evaluation
 * points that land exactly on the locus are shifted off it by half a cell.
 */
class Weight {
 public:
  enum class Kind { Constant, Power, ProductPowers, Tabulated };

  static Weight constant(double c);
  static Weight power(double alpha);
  static Weight product_powers(std::vector<double> exponents);
  static Weight tabulated(TabulatedData data);

  Kind kind() const { return kind_; }

  // Dimension the weight is pinned to, or 0 when it accepts any.
  int dim() const;

  // Raw evaluation; never shifts off the singular locus.
  double operator()(std::span<const double> x) const;

  /* Evaluation for quadrature: coordinates sitting exactly on the singular
   * locus are shifted by half the local cell extent (half_cell may be
   * empty to disable).  Throws InvalidWeightError when the result is not
   * finite (tabulated zero raised to a negative power). */
  double eval(std::span<const double> x,
              std::span<const double> half_cell) const;

  // Pointwise power w^e (exponents scale; tabulated values transform).
  Weight pow(double e) const;

  // Pointwise positive multiple a*w, any kind.
  Weight scaled_by(double a) const;

  // Coordinate values on which the weight is singular along `axis`
  // (used by the graded quadrature); empty when smooth.
  std::vector<double> singular_coords(int axis) const;

  std::string describe() const;

 private:
  Weight() = default;

  Kind kind_ = Kind::Constant;
  double constant_ = 1.0;
  double alpha_ = 0.0;
  double scale_ = 1.0;
  std::vector<double> exponents_;
  std::shared_ptr<const TabulatedData> tab_;
};

}  // namespace wplap
