#pragma once

// Run orchestration behind the dgsolve tool. Both entry points return a
// process exit code and never throw for user errors.

#include <filesystem>
#include <iosfwd>

#include "dgm/config.hpp"
#include "dgm/points.hpp"

namespace dgm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;
inline constexpr int kExitUnsupported = 4;

/// Trains per the config and writes loss.csv, solution.csv, model.ckpt and
/// config.resolved.json into the output directory.
int run_solve(const std::filesystem::path& config, const RunOverrides& overrides, std::ostream& out,
              std::ostream& err);

/// Evaluates a checkpoint against the finite-difference oracle on the output
/// grid; writes compare.csv and prints L-inf / RMS.
int run_compare(const std::filesystem::path& config, const std::filesystem::path& model,
                const RunOverrides& overrides, std::ostream& out, std::ostream& err);

/// Tensor grid with n nodes per spatial axis, at time `t` for evolution
/// problems. Axis 0 varies slowest.
PointBatch solution_grid(const Domain& domain, std::size_t n, double t);

}  // namespace dgm::cli
