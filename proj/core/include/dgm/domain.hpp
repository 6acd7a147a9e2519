#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace dgm {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  double length() const noexcept { return hi - lo; }
  bool operator==(const Interval&) const = default;
};

/// Rectangle Omega in space, optionally times [t0, T]. Points are laid out
/// as (x_1, ..., x_n[, t]) -- time is always the last coordinate.
struct Domain {
  std::vector<Interval> spatial;
  std::optional<Interval> time;

  static Domain unit(std::size_t n_spatial, bool with_time);

  std::size_t n_spatial() const noexcept { return spatial.size(); }
  std::size_t dims() const noexcept { return spatial.size() + (time ? 1 : 0); }
  /// Bounds of coordinate `i` in point layout order.
  const Interval& axis(std::size_t i) const;
  bool contains(std::span<const double> point, double tol = 0.0) const;
  /// Throws Error when a bound is non-finite or empty.
  void validate() const;

  bool operator==(const Domain&) const = default;
};

}  // namespace dgm
