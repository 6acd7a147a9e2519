#include "dgm/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "dgm/errors.hpp"
#include "dgm/oracle.hpp"
#include "dgm/solver.hpp"

namespace dgm::cli {

namespace fs = std::filesystem;

namespace {

double node(const Interval& iv, std::size_t i, std::size_t n) {
  if (n == 1) return iv.lo;
  if (i + 1 == n) return iv.hi;
  return iv.lo + iv.length() * static_cast<double>(i) / static_cast<double>(n - 1);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path.string());
  return os;
}

void write_loss_csv(const fs::path& path, const TrainedModel& model) {
  auto os = open_out(path);
  const bool soft = model.mode == TrainMode::Soft;
  os << (soft ? "iter,loss,residual,boundary,initial\n" : "iter,loss\n");
  for (std::size_t i = 0; i < model.history.size(); ++i) {
    const auto& r = model.history[i];
    os << i << ',' << fmt(r.loss);
    if (soft) os << ',' << fmt(r.residual) << ',' << fmt(r.boundary) << ',' << fmt(r.initial);
    os << '\n';
  }
}

std::string coordinate_header(const VarList& vars) {
  std::string h;
  for (const auto& name : vars.names()) h += name + ",";
  return h;
}

double slice_time(const RunConfig& rc) {
  if (!rc.problem.domain.time) return 0.0;
  return rc.output.time.value_or(rc.problem.domain.time->hi);
}

int config_failure(std::ostream& err, const ConfigError& e) {
  err << "config error: " << e.what() << '\n';
  return kExitConfig;
}

}  // namespace

PointBatch solution_grid(const Domain& domain, std::size_t n, double t) {
  const std::size_t ns = domain.n_spatial();
  PointBatch pts(domain.dims());
  std::vector<std::size_t> idx(ns, 0);
  std::vector<double> p(domain.dims());
  std::size_t total = 1;
  for (std::size_t k = 0; k < ns; ++k) total *= n;
  for (std::size_t r = 0; r < total; ++r) {
    for (std::size_t k = 0; k < ns; ++k) p[k] = node(domain.spatial[k], idx[k], n);
    if (domain.time) p.back() = t;
    pts.push_back(p);
    for (std::size_t k = ns; k-- > 0;) {
      if (++idx[k] < n) break;
      idx[k] = 0;
    }
  }
  return pts;
}

int run_solve(const fs::path& config, const RunOverrides& overrides, std::ostream& out, std::ostream& err) {
  RunConfig rc;
  try {
    rc = load_run_config(config, overrides);
  } catch (const ConfigError& e) {
    return config_failure(err, e);
  }
  const fs::path dir = rc.output.out_dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    err << "config error: output.out_dir: cannot create " << dir.string() << ": " << ec.message() << '\n';
    return kExitConfig;
  }

  try {
    {
      auto os = open_out(dir / "config.resolved.json");
      os << rc.resolved_json << '\n';
    }
    Solver solver(rc.problem, rc.body, rc.train);
    int status = kExitOk;
    for (const auto& stage : rc.stages) {
      TrainConfig cfg = rc.train;
      cfg.n_iters = stage.n_iters;
      try {
        solver.fit(stage.sampler, cfg);
      } catch (const NumericError& e) {
        err << "numeric failure: " << e.what() << '\n';
        status = kExitNumeric;
        break;
      }
    }
    write_loss_csv(dir / "loss.csv", solver.model());
    if (status != kExitOk) return status;

    const double t = slice_time(rc);
    const PointBatch grid = solution_grid(rc.problem.domain, rc.output.grid, t);
    const Evaluation ev = solver.evaluate(grid);
    if (ev.out_of_domain > 0)
      err << "warning: " << ev.out_of_domain << " grid points lie outside the domain\n";
    {
      auto os = open_out(dir / "solution.csv");
      os << coordinate_header(rc.problem.vars) << "u\n";
      for (std::size_t i = 0; i < grid.size(); ++i) {
        for (double c : grid[i]) os << fmt(c) << ',';
        os << fmt(ev.values[i]) << '\n';
      }
    }
    save_checkpoint((dir / "model.ckpt").string(), solver.model().spec, solver.model().params);

    const auto& h = solver.model().history;
    out << "iterations " << h.size() << '\n';
    if (!h.empty()) out << "final loss " << fmt(h.back().loss) << '\n';
    out << "artifacts written to " << dir.string() << '\n';
    return kExitOk;
  } catch (const ConfigError& e) {
    return config_failure(err, e);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

int run_compare(const fs::path& config, const fs::path& model, const RunOverrides& overrides,
                std::ostream& out, std::ostream& err) {
  RunConfig rc;
  try {
    rc = load_run_config(config, overrides);
  } catch (const ConfigError& e) {
    return config_failure(err, e);
  }
  try {
    OracleProblem shape;
    try {
      shape = classify_for_oracle(rc.problem);
    } catch (const UnsupportedShapeError& e) {
      err << "unsupported shape: " << e.what() << '\n';
      return kExitUnsupported;
    }
    if (rc.problem.domain.n_spatial() != 2) {
      err << "unsupported shape: oracle needs two spatial dimensions\n";
      return kExitUnsupported;
    }

    Checkpoint ck = load_checkpoint(model.string());
    Solver solver(rc.problem, rc.body, rc.train);
    if (!(ck.spec == solver.model().spec))
      throw ConfigError("body", "checkpoint network does not match the configured body");
    solver.set_params(std::move(ck.params));

    const std::size_t n = rc.output.grid;
    if (n < 5) throw ConfigError("output.grid", "comparison needs at least 5 nodes per axis");
    const std::size_t fine = 4 * (n - 1) + 1;
    const double t = slice_time(rc);
    const Domain& domain = rc.problem.domain;

    Grid2D oracle;
    if (shape.shape == OracleShape::Poisson) {
      oracle = solve_poisson_fd(shape.source, rc.problem.boundary, rc.problem.vars, domain, fine);
    } else {
      const double t0 = domain.time->lo;
      if (t < t0 || t > domain.time->hi) throw ConfigError("output.time", "outside the time interval");
      if (t == t0) {
        // initial frame straight from u0
        oracle = Grid2D{domain.spatial[0], domain.spatial[1], fine, {}};
        oracle.u.assign(fine * fine, 0.0);
        for (std::size_t i = 0; i < fine; ++i)
          for (std::size_t j = 0; j < fine; ++j) {
            const double p[3] = {oracle.x(i), oracle.y(j), t0};
            oracle.at(i, j) = eval_pointwise(*rc.problem.initial, p, rc.problem.vars);
          }
      } else {
        const double span = domain.time->hi - t0;
        const auto steps = std::max<std::size_t>(
            16, static_cast<std::size_t>(std::ceil(static_cast<double>(fine - 1) * (t - t0) / span)));
        oracle = solve_heat_fd(shape.source, *rc.problem.initial, rc.problem.vars, domain, fine, steps, t)
                     .frames.back();
      }
    }
    const Grid2D coarse = oracle.subsample(4);

    // model at the oracle's own node coordinates
    PointBatch pts(domain.dims());
    std::vector<double> p(domain.dims());
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        p[0] = oracle.x(4 * i);
        p[1] = oracle.y(4 * j);
        if (domain.time) p[2] = t;
        pts.push_back(p);
      }
    const Evaluation ev = solver.evaluate(pts);
    const GridError e = grid_error(ev.values, coarse.u);

    fs::path dir = rc.output.out_dir;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("output.out_dir", "cannot create " + dir.string());
    auto os = open_out(dir / "compare.csv");
    os << coordinate_header(rc.problem.vars) << "model,oracle,abs_diff\n";
    for (std::size_t k = 0; k < pts.size(); ++k) {
      for (double c : pts[k]) os << fmt(c) << ',';
      os << fmt(ev.values[k]) << ',' << fmt(coarse.u[k]) << ',' << fmt(std::abs(ev.values[k] - coarse.u[k]))
         << '\n';
    }
    out << "grid " << n << 'x' << n << " (oracle " << fine << 'x' << fine << ")\n";
    if (domain.time) out << "t " << fmt(t) << '\n';
    out << "Linf " << fmt(e.linf) << '\n';
    out << "RMS " << fmt(e.rms) << '\n';
    return kExitOk;
  } catch (const ConfigError& e) {
    return config_failure(err, e);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace dgm::cli
