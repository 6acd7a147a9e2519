#include "dgm/oracle.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <cmath>
#include <map>

#include "dgm/engine.hpp"
#include "dgm/errors.hpp"
#include "dgm/sampler.hpp"

namespace dgm {

double Grid2D::x(std::size_t i) const {
  if (i + 1 == n) return xr.hi;
  return xr.lo + xr.length() * static_cast<double>(i) / static_cast<double>(n - 1);
}

double Grid2D::y(std::size_t j) const {
  if (j + 1 == n) return yr.hi;
  return yr.lo + yr.length() * static_cast<double>(j) / static_cast<double>(n - 1);
}

Grid2D Grid2D::subsample(std::size_t stride) const {
  if (stride == 0 || (n - 1) % stride != 0) throw Error("grid: stride does not divide the grid");
  Grid2D g{xr, yr, (n - 1) / stride + 1, {}};
  g.u.resize(g.n * g.n);
  for (std::size_t i = 0; i < g.n; ++i)
    for (std::size_t j = 0; j < g.n; ++j) g.at(i, j) = at(i * stride, j * stride);
  return g;
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

void check_rectangle(const Domain& domain, bool with_time) {
  if (domain.n_spatial() != 2 || domain.time.has_value() != with_time)
    throw UnsupportedShapeError(with_time ? "heat oracle needs a 2-d rectangle times [t0, T]"
                                          : "Poisson oracle needs a 2-d rectangle");
  domain.validate();
}

/// -Laplacian on the interior nodes (SPD), scaled by `scale`, plus `shift` on the diagonal.
SpMat neg_laplacian(std::size_t m, double hx, double hy, double scale, double shift) {
  const double cx = scale / (hx * hx);
  const double cy = scale / (hy * hy);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(5 * m * m);
  auto idx = [m](std::size_t i, std::size_t j) { return static_cast<int>(i * m + j); };
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      const int k = idx(i, j);
      trips.emplace_back(k, k, 2 * cx + 2 * cy + shift);
      if (i > 0) trips.emplace_back(k, idx(i - 1, j), -cx);
      if (i + 1 < m) trips.emplace_back(k, idx(i + 1, j), -cx);
      if (j > 0) trips.emplace_back(k, idx(i, j - 1), -cy);
      if (j + 1 < m) trips.emplace_back(k, idx(i, j + 1), -cy);
    }
  SpMat A(static_cast<int>(m * m), static_cast<int>(m * m));
  A.setFromTriplets(trips.begin(), trips.end());
  return A;
}

class PointFunction {
 public:
  PointFunction(const Expr& e, const VarList& vars) : program_(e, vars) {
    if (!program_.tags().empty()) throw Error("oracle data must not reference u");
  }
  double operator()(std::span<const double> point) { return program_.evaluate(point, {}, ws_); }

 private:
  ResidualProgram program_;
  ResidualProgram::Workspace ws_;
};

}  // namespace

Grid2D solve_poisson_fd(const Expr& source, const Expr& boundary, const VarList& vars,
                        const Domain& domain, std::size_t grid_n) {
  check_rectangle(domain, false);
  if (grid_n < 17) throw Error("Poisson oracle: grid_n must be at least 17");
  Grid2D grid{domain.spatial[0], domain.spatial[1], grid_n, std::vector<double>(grid_n * grid_n, 0.0)};
  const std::size_t m = grid_n - 2;
  const double hx = grid.xr.length() / static_cast<double>(grid_n - 1);
  const double hy = grid.yr.length() / static_cast<double>(grid_n - 1);

  PointFunction q(source, vars);
  PointFunction g(boundary, vars);
  for (std::size_t i = 0; i < grid_n; ++i)
    for (std::size_t j = 0; j < grid_n; ++j)
      if (i == 0 || j == 0 || i + 1 == grid_n || j + 1 == grid_n) {
        const double p[2] = {grid.x(i), grid.y(j)};
        grid.at(i, j) = g(p);
      }

  // -Lap u = -Q, known boundary values moved to the right-hand side
  Vec b(static_cast<int>(m * m));
  for (std::size_t i = 1; i <= m; ++i)
    for (std::size_t j = 1; j <= m; ++j) {
      const double p[2] = {grid.x(i), grid.y(j)};
      double r = -q(p);
      if (i == 1) r += grid.at(0, j) / (hx * hx);
      if (i == m) r += grid.at(m + 1, j) / (hx * hx);
      if (j == 1) r += grid.at(i, 0) / (hy * hy);
      if (j == m) r += grid.at(i, m + 1) / (hy * hy);
      b[static_cast<int>((i - 1) * m + (j - 1))] = r;
    }
  const SpMat A = neg_laplacian(m, hx, hy, 1.0, 0.0);
  Eigen::SimplicialLDLT<SpMat> solver(A);
  if (solver.info() != Eigen::Success) throw Error("Poisson oracle: factorization failed");
  const Vec u = solver.solve(b);
  const double residual = (A * u - b).lpNorm<Eigen::Infinity>();
  if (!(residual <= 1e-10 * std::max(1.0, b.lpNorm<Eigen::Infinity>())))
    throw Error("Poisson oracle: linear solve did not reach the residual tolerance");
  for (std::size_t i = 1; i <= m; ++i)
    for (std::size_t j = 1; j <= m; ++j) grid.at(i, j) = u[static_cast<int>((i - 1) * m + (j - 1))];
  return grid;
}

HeatSolution solve_heat_fd(const Expr& source, const Expr& initial, const VarList& vars,
                           const Domain& domain, std::size_t grid_n, std::size_t time_steps,
                           double t_end, std::size_t record_every) {
  check_rectangle(domain, true);
  if (grid_n < 17) throw Error("heat oracle: grid_n must be at least 17");
  if (time_steps < 16) throw Error("heat oracle: time_steps must be at least 16");
  const double t0 = domain.time->lo;
  if (!(t_end > t0)) throw Error("heat oracle: t_end must exceed t0");
  const std::size_t m = grid_n - 2;
  const double hx = domain.spatial[0].length() / static_cast<double>(grid_n - 1);
  const double hy = domain.spatial[1].length() / static_cast<double>(grid_n - 1);
  const double dt = (t_end - t0) / static_cast<double>(time_steps);

  Grid2D grid{domain.spatial[0], domain.spatial[1], grid_n, std::vector<double>(grid_n * grid_n, 0.0)};
  PointFunction u0(initial, vars);
  PointFunction s(source, vars);
  for (std::size_t i = 0; i < grid_n; ++i)
    for (std::size_t j = 0; j < grid_n; ++j) {
      const double p[3] = {grid.x(i), grid.y(j), t0};
      grid.at(i, j) = u0(p);
    }

  HeatSolution out;
  out.times.push_back(t0);
  out.frames.push_back(grid);

  Vec u(static_cast<int>(m * m));
  for (std::size_t i = 1; i <= m; ++i)
    for (std::size_t j = 1; j <= m; ++j) u[static_cast<int>((i - 1) * m + (j - 1))] = grid.at(i, j);
  for (std::size_t i = 0; i < grid_n; ++i)
    for (std::size_t j = 0; j < grid_n; ++j)
      if (i == 0 || j == 0 || i + 1 == grid_n || j + 1 == grid_n) grid.at(i, j) = 0.0;

  auto source_at = [&](double t) {
    Vec v(static_cast<int>(m * m));
    for (std::size_t i = 1; i <= m; ++i)
      for (std::size_t j = 1; j <= m; ++j) {
        const double p[3] = {grid.x(i), grid.y(j), t};
        v[static_cast<int>((i - 1) * m + (j - 1))] = s(p);
      }
    return v;
  };

  // (I + dt/2 A) u^{n+1} = (I - dt/2 A) u^n + dt/2 (S^n + S^{n+1}),  A = -Lap
  const SpMat A = neg_laplacian(m, hx, hy, 1.0, 0.0);
  SpMat implicit = neg_laplacian(m, hx, hy, 0.5 * dt, 1.0);
  Eigen::SimplicialLDLT<SpMat> solver(implicit);
  if (solver.info() != Eigen::Success) throw Error("heat oracle: factorization failed");
  Vec s_prev = source_at(t0);
  for (std::size_t step = 1; step <= time_steps; ++step) {
    const double t = step == time_steps ? t_end : t0 + dt * static_cast<double>(step);
    const Vec s_next = source_at(t);
    const Vec rhs = u - 0.5 * dt * (A * u) + 0.5 * dt * (s_prev + s_next);
    u = solver.solve(rhs);
    if (solver.info() != Eigen::Success) throw Error("heat oracle: linear solve failed");
    s_prev = s_next;
    if (step == time_steps || (record_every > 0 && step % record_every == 0)) {
      for (std::size_t i = 1; i <= m; ++i)
        for (std::size_t j = 1; j <= m; ++j) grid.at(i, j) = u[static_cast<int>((i - 1) * m + (j - 1))];
      out.times.push_back(t);
      out.frames.push_back(grid);
    }
  }
  return out;
}

GridError grid_error(std::span<const double> model, std::span<const double> oracle) {
  if (model.size() != oracle.size()) throw Error("grid_error: grid shapes differ");
  if (model.empty()) throw Error("grid_error: empty grids");
  GridError e;
  double sq = 0.0;
  for (std::size_t k = 0; k < model.size(); ++k) {
    const double d = std::abs(model[k] - oracle[k]);
    e.linf = std::max(e.linf, d);
    sq += d * d;
  }
  e.rms = std::sqrt(sq / static_cast<double>(model.size()));
  return e;
}

// ---------------------------------------------------------------------------

namespace {

struct LinearProbe {
  std::map<MultiIndex, double> coeffs;
  Expr remainder;
};

/// Coefficients of a form that is linear in the trial derivatives with
/// constant coefficients; nullopt otherwise.
std::optional<LinearProbe> probe_linear(const PdeProblem& problem) {
  const auto tags = trial_tags(problem.form);
  ResidualProgram prog(problem.form, problem.vars);
  ResidualProgram::Workspace ws;
  Rng rng(0x0ac1e5eedULL);
  const PointBatch pts = sample(SamplerSpec::onto(problem.domain, SamplerSpec::uniform(problem.domain.dims())), 16, rng);
  std::uniform_real_distribution<double> coin(-1.0, 1.0);

  LinearProbe probe;
  std::vector<double> trial(tags.size(), 0.0);
  for (std::size_t p = 0; p < pts.size(); ++p) {
    std::fill(trial.begin(), trial.end(), 0.0);
    double r0 = 0.0;
    try {
      r0 = prog.evaluate(pts[p], trial, ws);
    } catch (const EvalError&) {
      return std::nullopt;
    }
    std::vector<double> c(tags.size());
    for (std::size_t k = 0; k < tags.size(); ++k) {
      std::fill(trial.begin(), trial.end(), 0.0);
      trial[k] = 1.0;
      c[k] = prog.evaluate(pts[p], trial, ws) - r0;
      if (p == 0)
        probe.coeffs[tags[k]] = c[k];
      else if (std::abs(c[k] - probe.coeffs[tags[k]]) > 1e-10 * std::max(1.0, std::abs(c[k])))
        return std::nullopt;
    }
    double predicted = r0;
    for (std::size_t k = 0; k < tags.size(); ++k) {
      trial[k] = coin(rng);
      predicted += c[k] * trial[k];
    }
    const double actual = prog.evaluate(pts[p], trial, ws);
    if (std::abs(actual - predicted) > 1e-9 * std::max(1.0, std::abs(actual))) return std::nullopt;
  }
  probe.remainder = substitute_trial(problem.form, [](const MultiIndex&) { return Expr::constant(0.0); });
  return probe;
}

bool matches(const LinearProbe& probe, const std::map<MultiIndex, double>& expected) {
  for (const auto& [tag, c] : probe.coeffs) {
    auto it = expected.find(tag);
    const double want = it == expected.end() ? 0.0 : it->second;
    if (std::abs(c - want) > 1e-10 * std::max(1.0, std::abs(want))) return false;
  }
  for (const auto& [tag, want] : expected)
    if (!probe.coeffs.contains(tag) && want != 0.0) return false;
  return true;
}

}  // namespace

OracleProblem classify_for_oracle(const PdeProblem& problem) {
  const VarList& vars = problem.vars;
  const bool heat = vars.has_time();
  if (vars.n_spatial() != 2)
    throw UnsupportedShapeError("oracle supports 2-d Poisson and 2-d heat problems only");
  auto probe = probe_linear(problem);
  if (!probe) throw UnsupportedShapeError("form is not linear with constant coefficients");

  MultiIndex xx = MultiIndex(vars.size()).incremented(0).incremented(0);
  MultiIndex yy = MultiIndex(vars.size()).incremented(1).incremented(1);
  auto xx_it = probe->coeffs.find(xx);
  const double k = xx_it == probe->coeffs.end() ? 0.0 : xx_it->second;
  if (k == 0.0) throw UnsupportedShapeError("form has no u_xx term");

  if (!heat) {
    if (!matches(*probe, {{xx, k}, {yy, k}}))
      throw UnsupportedShapeError("form is not of the form u_xx + u_yy = Q");
    return {OracleShape::Poisson, Expr::constant(-1.0 / k) * probe->remainder};
  }

  MultiIndex ut = MultiIndex(vars.size()).incremented(2);
  if (!matches(*probe, {{ut, -k}, {xx, k}, {yy, k}}))
    throw UnsupportedShapeError("form is not of the form u_t - u_xx - u_yy = S");
  // zero Dirichlet data only
  Rng rng(0xb0a4dULL);
  const PointBatch pts = sample_boundary(problem.domain, 64, rng);
  for (std::size_t p = 0; p < pts.size(); ++p)
    if (std::abs(eval_pointwise(problem.boundary, pts[p], vars)) > 1e-12)
      throw UnsupportedShapeError("heat oracle needs zero boundary values");
  if (!problem.initial) throw UnsupportedShapeError("heat oracle needs an initial condition");
  // u_t = Lap u - r0 / (-k)
  return {OracleShape::Heat, Expr::constant(1.0 / k) * probe->remainder};
}

}  // namespace dgm
