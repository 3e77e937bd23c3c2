#include "wplap/weight.hpp"

#include <cmath>
#include <cstdio>
#include <utility>

namespace wplap {

Weight Weight::constant(double c) {
  if (!(c > 0.0) || !std::isfinite(c))
    throw ParameterError("constant weight requires a positive finite value");
  Weight w;
  w.kind_ = Kind::Constant;
  w.constant_ = c;
  return w;
}

Weight Weight::power(double alpha) {
  if (!std::isfinite(alpha))
    throw ParameterError("power weight exponent must be finite");
  Weight w;
  w.kind_ = Kind::Power;
  w.alpha_ = alpha;
  return w;
}

Weight Weight::product_powers(std::vector<double> exponents) {
  if (exponents.empty())
    throw ParameterError("product weight needs at least one exponent");
  for (double e : exponents)
    if (!std::isfinite(e))
      throw ParameterError("product weight exponents must be finite");
  Weight w;
  w.kind_ = Kind::ProductPowers;
  w.exponents_ = std::move(exponents);
  return w;
}

Weight Weight::tabulated(TabulatedData data) {
  if (data.box.lo.size() != data.box.hi.size() ||
      data.box.lo.size() != data.cells.size() || data.cells.empty())
    throw ConfigError("tabulated weight: box and cell counts disagree");
  std::size_t total = 1;
  for (std::size_t a = 0; a < data.cells.size(); ++a) {
    if (data.cells[a] < 1)
      throw ConfigError("tabulated weight: cell counts must be >= 1");
    if (!(data.box.lo[a] < data.box.hi[a]))
      throw ConfigError("tabulated weight: box bounds out of order");
    total *= static_cast<std::size_t>(data.cells[a]);
  }
  if (data.values.size() != total)
    throw ConfigError("tabulated weight: value count does not match grid");
  for (double v : data.values)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw InvalidWeightError("tabulated weight: values must be finite and >= 0");
  Weight w;
  w.kind_ = Kind::Tabulated;
  w.tab_ = std::make_shared<const TabulatedData>(std::move(data));
  return w;
}

int Weight::dim() const {
  switch (kind_) {
    case Kind::ProductPowers:
      return static_cast<int>(exponents_.size());
    case Kind::Tabulated:
      return static_cast<int>(tab_->cells.size());
    default:
      return 0;
  }
}

double Weight::operator()(std::span<const double> x) const {
  switch (kind_) {
    case Kind::Constant:
      return scale_ * constant_;
    case Kind::Power: {
      double s = 0.0;
      for (double c : x) s += c * c;
      return scale_ * std::pow(std::sqrt(s), alpha_);
    }
    case Kind::ProductPowers: {
      double prod = 1.0;
      for (std::size_t a = 0; a < exponents_.size(); ++a)
        prod *= std::pow(std::fabs(x[a]), exponents_[a]);
      return scale_ * prod;
    }
    case Kind::Tabulated: {
      const TabulatedData& t = *tab_;
      std::size_t idx = 0;
      for (std::size_t a = 0; a < t.cells.size(); ++a) {
        double span = t.box.hi[a] - t.box.lo[a];
        double rel = (x[a] - t.box.lo[a]) / span * t.cells[a];
        long cell = static_cast<long>(std::floor(rel));
        if (cell < 0) cell = 0;
        if (cell >= t.cells[a]) cell = t.cells[a] - 1;
        idx = idx * static_cast<std::size_t>(t.cells[a]) +
              static_cast<std::size_t>(cell);
      }
      return scale_ * t.values[idx];
    }
  }
  return scale_ * constant_;
}

double Weight::eval(std::span<const double> x,
                    std::span<const double> half_cell) const {
  double value;
  if (half_cell.empty()) {
    value = (*this)(x);
  } else {
    // Shift coordinates that sit exactly on the singular locus by half a
    // cell so power weights are only evaluated at |x| > 0.
    std::vector<double> shifted(x.begin(), x.end());
    bool moved = false;
    if (kind_ == Kind::Power && alpha_ != 0.0) {
      bool at_origin = true;
      for (double c : shifted)
        if (c != 0.0) at_origin = false;
      if (at_origin) {
        shifted[0] += 0.5 * half_cell[0];
        moved = true;
      }
    } else if (kind_ == Kind::ProductPowers) {
      for (std::size_t a = 0; a < exponents_.size(); ++a) {
        if (exponents_[a] != 0.0 && shifted[a] == 0.0) {
          shifted[a] += 0.5 * half_cell[a];
          moved = true;
        }
      }
    }
    value = moved ? (*this)(shifted) : (*this)(x);
  }
  if (!std::isfinite(value))
    throw InvalidWeightError("weight evaluated to a non-finite value at a singular point");
  if (value < 0.0)
    throw InvalidWeightError("weight evaluated to a negative value");
  return value;
}

Weight Weight::pow(double e) const {
  Weight out = *this;
  switch (kind_) {
    case Kind::Constant:
      out = constant(std::pow(constant_, e));
      break;
    case Kind::Power:
      out = power(alpha_ * e);
      break;
    case Kind::ProductPowers: {
      std::vector<double> exps = exponents_;
      for (double& a : exps) a *= e;
      out = product_powers(std::move(exps));
      break;
    }
    case Kind::Tabulated: {
      TabulatedData t = *tab_;
      for (double& v : t.values) v = std::pow(v, e);
      out = Weight();
      out.kind_ = Kind::Tabulated;
      out.tab_ = std::make_shared<const TabulatedData>(std::move(t));
      break;
    }
  }
  out.scale_ = std::pow(scale_, e);
  return out;
}

Weight Weight::scaled_by(double a) const {
  if (!(a > 0.0) || !std::isfinite(a))
    throw ParameterError("weight multiple must be positive and finite");
  Weight out = *this;
  out.scale_ *= a;
  return out;
}

std::vector<double> Weight::singular_coords(int axis) const {
  switch (kind_) {
    case Kind::Power:
      return alpha_ != 0.0 ? std::vector<double>{0.0} : std::vector<double>{};
    case Kind::ProductPowers:
      if (axis >= 0 && axis < static_cast<int>(exponents_.size()) &&
          exponents_[axis] != 0.0)
        return {0.0};
      return {};
    default:
      return {};
  }
}

std::string Weight::describe() const {
  char buf[128];
  std::string s;
  switch (kind_) {
    case Kind::Constant:
      std::snprintf(buf, sizeof buf, "constant:%g", constant_);
      s = buf;
      break;
    case Kind::Power:
      std::snprintf(buf, sizeof buf, "power:%g", alpha_);
      s = buf;
      break;
    case Kind::ProductPowers: {
      s = "product:";
      for (std::size_t a = 0; a < exponents_.size(); ++a) {
        std::snprintf(buf, sizeof buf, "%s%g", a ? "," : "", exponents_[a]);
        s += buf;
      }
      break;
    }
    case Kind::Tabulated:
      s = "tabulated";
      break;
  }
  if (scale_ != 1.0) {
    std::snprintf(buf, sizeof buf, "%g*", scale_);
    s = std::string(buf) + s;
  }
  return s;
}

}  // namespace wplap
