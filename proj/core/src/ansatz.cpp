#include "dgm/ansatz.hpp"

#include <cmath>
#include <map>
#include <sstream>
#include <vector>

#include "dgm/errors.hpp"
#include "dgm/sampler.hpp"

namespace dgm {

namespace {

Expr var_expr(const VarList& vars, std::size_t i) { return Expr::variable(i, vars.name(i)); }

constexpr std::uint64_t kProbeSeed = 0x5eed'b0da'7e5ULL;

/// Largest |value| of `e` over boundary probe points at t = t0.
double max_on_boundary(const Expr& e, const PdeProblem& problem) {
  Domain spatial = problem.domain;
  spatial.time.reset();
  Rng rng(kProbeSeed);
  const PointBatch probes = sample_boundary(spatial, kCompatibilityProbes, rng);
  std::vector<double> point(problem.vars.size());
  double worst = 0.0;
  for (std::size_t p = 0; p < probes.size(); ++p) {
    std::copy(probes[p].begin(), probes[p].end(), point.begin());
    if (problem.domain.time) point.back() = problem.domain.time->lo;
    worst = std::max(worst, std::abs(eval_pointwise(e, point, problem.vars)));
  }
  return worst;
}

std::string format_gap(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

}  // namespace

Expr build_multiplier(const Domain& domain, const VarList& vars, int time_order) {
  if (domain.dims() != vars.size()) throw Error("multiplier: domain does not match variables");
  Expr m = Expr::constant(1.0);
  for (std::size_t i = 0; i < domain.n_spatial(); ++i) {
    const auto& [a, b] = domain.spatial[i];
    const Expr x = var_expr(vars, i);
    m = m * (Expr::constant(4.0 / ((b - a) * (b - a))) * (x - Expr::constant(a)) *
             (Expr::constant(b) - x));
  }
  if (time_order >= 1) {
    if (!domain.time || !vars.time_index()) throw Error("multiplier: time order without a time axis");
    const auto& [t0, T] = *domain.time;
    const Expr tau = (var_expr(vars, *vars.time_index()) - Expr::constant(t0)) / Expr::constant(T - t0);
    m = (time_order == 1 ? tau : pow(tau, 2)) * m;
  }
  return m;
}

Expr build_addendum(const PdeProblem& problem) {
  const int order = problem.time_order();
  if (order == 0) return problem.boundary;

  const std::size_t t = *problem.vars.time_index();
  if (depends_on(problem.boundary, t))
    throw ConfigError("pde.boundary_condition",
                      "time-dependent boundary values cannot be bound exactly; use soft mode");
  const Expr& u0 = *problem.initial;
  const double gap = max_on_boundary(u0 - problem.boundary, problem);
  if (gap > kCompatibilityTolerance)
    throw ConfigError("pde.initial_condition",
                      "initial condition disagrees with the boundary condition on the boundary "
                      "(max |u0 - g| = " + format_gap(gap) + "); use soft mode");
  if (order == 1) return u0;

  const Expr& rate = *problem.initial_rate;
  const double rate_gap = max_on_boundary(rate, problem);
  if (rate_gap > kCompatibilityTolerance)
    throw ConfigError("pde.initial_rate",
                      "initial rate must vanish on the boundary (max |u0'| = " +
                          format_gap(rate_gap) + "); use soft mode");
  const double t0 = problem.domain.time->lo;
  return u0 + (Expr::variable(t, problem.vars.name(t)) - Expr::constant(t0)) * rate;
}

AnsatzParts build_ansatz(const PdeProblem& problem) {
  AnsatzParts parts;
  parts.time_order = problem.time_order();
  parts.multiplier = build_multiplier(problem.domain, problem.vars, parts.time_order);
  parts.addendum = build_addendum(problem);
  return parts;
}

Expr wrap(const AnsatzParts& parts, const VarList& vars) {
  return parts.multiplier * Expr::trial(MultiIndex(vars.size())) + parts.addendum;
}

Expr bind_form(const Expr& form, const Expr& trial, const VarList& vars) {
  std::map<MultiIndex, Expr> cache;
  return substitute_trial(form, [&](const MultiIndex& tag) {
    auto it = cache.find(tag);
    if (it == cache.end()) it = cache.emplace(tag, differentiate(trial, tag, vars)).first;
    return it->second;
  });
}

}  // namespace dgm
