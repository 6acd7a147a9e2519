#include "dgm/problem.hpp"

#include <algorithm>

#include "dgm/errors.hpp"

namespace dgm {

int infer_time_order(const Expr& form, const VarList& vars) {
  const auto t = vars.time_index();
  if (!t) return 0;
  int order = 0;
  for (const auto& tag : trial_tags(form)) order = std::max<int>(order, tag[*t]);
  return order;
}

int PdeProblem::time_order() const { return infer_time_order(form, vars); }

void PdeProblem::validate() const {
  try {
    domain.validate();
  } catch (const Error& e) {
    throw ConfigError("pde.domain", e.what());
  }
  if (domain.dims() != vars.size())
    throw ConfigError("pde.domain", "domain has " + std::to_string(domain.dims()) +
                                        " axes but the problem has " + std::to_string(vars.size()) +
                                        " variables");
  if (domain.time.has_value() != vars.has_time())
    throw ConfigError("pde.domain", "time axis present iff 't' is a variable");
  if (!contains_trial(form)) throw ConfigError("pde.form", "form does not reference the unknown u");
  if (contains_trial(boundary))
    throw ConfigError("pde.boundary_condition", "boundary condition must not reference u");
  if (initial && contains_trial(*initial))
    throw ConfigError("pde.initial_condition", "initial condition must not reference u");
  if (initial_rate && contains_trial(*initial_rate))
    throw ConfigError("pde.initial_rate", "initial rate must not reference u");
  const int order = time_order();
  if (order >= 1 && !initial)
    throw ConfigError("pde.initial_condition",
                      "form has a time derivative; an initial condition is required");
  if (order >= 2 && !initial_rate)
    throw ConfigError("pde.initial_rate",
                      "form has a second time derivative; an initial rate is required");
  if (const auto t = vars.time_index()) {
    if (initial && depends_on(*initial, *t))
      throw ConfigError("pde.initial_condition", "initial condition must not depend on t");
    if (initial_rate && depends_on(*initial_rate, *t))
      throw ConfigError("pde.initial_rate", "initial rate must not depend on t");
  }
}

}  // namespace dgm
