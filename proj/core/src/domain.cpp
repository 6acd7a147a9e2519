#include "dgm/domain.hpp"

#include <cmath>
#include <string>

#include "dgm/errors.hpp"

namespace dgm {

Domain Domain::unit(std::size_t n_spatial, bool with_time) {
  Domain d;
  d.spatial.assign(n_spatial, Interval{0.0, 1.0});
  if (with_time) d.time = Interval{0.0, 1.0};
  return d;
}

const Interval& Domain::axis(std::size_t i) const {
  if (i < spatial.size()) return spatial[i];
  if (time && i == spatial.size()) return *time;
  throw Error("domain axis " + std::to_string(i) + " out of range");
}

bool Domain::contains(std::span<const double> point, double tol) const {
  if (point.size() != dims()) return false;
  for (std::size_t i = 0; i < point.size(); ++i) {
    const auto& a = axis(i);
    if (point[i] < a.lo - tol || point[i] > a.hi + tol) return false;
  }
  return true;
}

void Domain::validate() const {
  for (std::size_t i = 0; i < dims(); ++i) {
    const auto& a = axis(i);
    if (!std::isfinite(a.lo) || !std::isfinite(a.hi))
      throw Error("domain axis " + std::to_string(i) + " has a non-finite bound");
    if (!(a.lo < a.hi))
      throw Error("domain axis " + std::to_string(i) + " must satisfy lower < upper");
  }
}

}  // namespace dgm
