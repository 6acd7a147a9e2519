#pragma once

// Exact binding of boundary and initial data on rectangles:
//
//   A[net](x, t) = m(x, t) * net(x, t) + d(x, t)
//
// m(x, t) = tau(t) * prod_i 4 (x_i - a_i)(b_i - x_i) / (b_i - a_i)^2
//   tau = 1                      (no time derivative)
//   tau = (t - t0) / (T - t0)    (first order in time)
//   tau = ((t - t0) / (T - t0))^2 (second order in time)
//
// d = g (boundary value problems), d = u0 (first order),
// d = u0 + (t - t0) u0' (second order).
//
// m vanishes on the spatial boundary and at t0 (with its t-derivative for
// second order), so A matches the data for every network.

#include <cstddef>

#include "dgm/domain.hpp"
#include "dgm/expr.hpp"
#include "dgm/problem.hpp"

namespace dgm {

inline constexpr double kCompatibilityTolerance = 1e-8;
inline constexpr std::size_t kCompatibilityProbes = 256;

struct AnsatzParts {
  Expr multiplier;
  Expr addendum;
  int time_order = 0;
};

Expr build_multiplier(const Domain& domain, const VarList& vars, int time_order);

/// Throws ConfigError when the data cannot be bound exactly: time-dependent
/// boundary values with a time derivative in the form, or initial data that
/// disagree with the boundary values (max gap over kCompatibilityProbes
/// boundary points above kCompatibilityTolerance).
Expr build_addendum(const PdeProblem& problem);

AnsatzParts build_ansatz(const PdeProblem& problem);

/// m * u + d, with u the plain trial function.
Expr wrap(const AnsatzParts& parts, const VarList& vars);

/// Replaces every derivative d^alpha u in `form` by d^alpha of `trial`.
Expr bind_form(const Expr& form, const Expr& trial, const VarList& vars);

}  // namespace dgm
