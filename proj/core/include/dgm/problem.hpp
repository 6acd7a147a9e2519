#pragma once

#include <optional>

#include "dgm/domain.hpp"
#include "dgm/expr.hpp"

namespace dgm {

/// F(u; t, x, du/dt, ...) = 0 on a rectangle, with Dirichlet data and (for
/// evolution problems) an initial state and, for second order in time, an
/// initial rate.
struct PdeProblem {
  VarList vars;
  Domain domain;
  Expr form;
  /// Boundary values g, given as an expression over the whole domain.
  Expr boundary;
  std::optional<Expr> initial;
  std::optional<Expr> initial_rate;

  bool is_evolution() const { return vars.has_time(); }
  /// Highest t-derivative order of the trial function in `form` (0 without t).
  int time_order() const;
  /// Structural checks: variable/domain agreement, data free of trial leaves,
  /// initial data present when the time order demands it. Throws ConfigError.
  void validate() const;
};

int infer_time_order(const Expr& form, const VarList& vars);

}  // namespace dgm
