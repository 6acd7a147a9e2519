#pragma once

// Finite-difference reference solvers for the two oracle-supported shapes:
//   Poisson:  u_xx + u_yy = Q(x, y)            with Dirichlet data g on a rectangle
//   Heat:     u_t = u_xx + u_yy + S(x, y, t)   with u = 0 on the boundary, u(., t0) = u0
// Both use the 5-point Laplacian; heat steps with Crank-Nicolson.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "dgm/domain.hpp"
#include "dgm/expr.hpp"
#include "dgm/problem.hpp"

namespace dgm {

/// n x n nodes on a rectangle, boundary nodes included. u[i * n + j] is the
/// value at (x(i), y(j)).
struct Grid2D {
  Interval xr;
  Interval yr;
  std::size_t n = 0;
  std::vector<double> u;

  double x(std::size_t i) const;
  double y(std::size_t j) const;
  double& at(std::size_t i, std::size_t j) { return u[i * n + j]; }
  double at(std::size_t i, std::size_t j) const { return u[i * n + j]; }
  /// Every `stride`-th node (n - 1 must be divisible by stride).
  Grid2D subsample(std::size_t stride) const;
};

Grid2D solve_poisson_fd(const Expr& source, const Expr& boundary, const VarList& vars,
                        const Domain& domain, std::size_t grid_n);

struct HeatSolution {
  std::vector<double> times;
  std::vector<Grid2D> frames;
};

/// Crank-Nicolson from t0 = domain.time->lo to t_end in `time_steps` steps.
/// Records the initial state and every `record_every`-th step (the final step
/// is always recorded).
HeatSolution solve_heat_fd(const Expr& source, const Expr& initial, const VarList& vars,
                           const Domain& domain, std::size_t grid_n, std::size_t time_steps,
                           double t_end, std::size_t record_every = 0);

struct GridError {
  double linf = 0.0;
  double rms = 0.0;
};

GridError grid_error(std::span<const double> model, std::span<const double> oracle);

enum class OracleShape { Poisson, Heat };

/// The problem's source term in oracle form, recognised by probing the form
/// for linearity in the trial derivatives.
struct OracleProblem {
  OracleShape shape;
  Expr source;
};

/// Throws UnsupportedShapeError when the problem is neither shape.
OracleProblem classify_for_oracle(const PdeProblem& problem);

}  // namespace dgm
