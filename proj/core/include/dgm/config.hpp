#pragma once

// JSON run configuration:
//
//   {
//     "pde":     {"n_dims": 2, "form": "D(D(u,x),x) + D(D(u,y),y) - 5*sin(pi*(x+y))",
//                 "domain": [[0,1],[0,1]], "boundary_condition": 1},
//     "body":    {"layout": "fa fa fa f", "units": [15,25,15,1], "activations": "tanh"},
//     "train":   {"batch_size": 200, "n_iters": 1000, "learning_rate": 0.005, "seed": 0},
//     "sampler": {"kind": "uniform"},
//     "output":  {"out_dir": "out", "grid": 51}
//   }
//
// Missing keys take their defaults; the filled-in document is kept as
// `resolved_json` so a run can be repeated from it exactly.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dgm/network.hpp"
#include "dgm/problem.hpp"
#include "dgm/sampler.hpp"
#include "dgm/solver.hpp"

namespace dgm {

struct FitStage {
  SamplerSpec sampler;
  std::size_t n_iters = 0;
};

struct OutputConfig {
  std::string out_dir = "out";
  std::size_t grid = 51;
  /// Evolution problems: time slice for solution.csv (default: final time).
  std::optional<double> time;
};

/// Command-line overrides, applied to the document before validation.
struct RunOverrides {
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> iters;
  std::optional<std::size_t> batch_size;
  std::optional<std::size_t> grid;
  std::optional<double> time;
  std::optional<std::string> mode;
};

struct RunConfig {
  PdeProblem problem;
  NetworkSpec body;
  TrainConfig train;
  /// One entry per fit call. A plain "sampler" block gives a single stage of
  /// train.n_iters iterations; "train.stages" gives several.
  std::vector<FitStage> stages;
  OutputConfig output;
  std::string resolved_json;

  std::size_t total_iters() const;
};

/// Throws ConfigError naming the offending key.
RunConfig parse_run_config(std::string_view json_text, const RunOverrides& overrides = {});
RunConfig load_run_config(const std::filesystem::path& path, const RunOverrides& overrides = {});

}  // namespace dgm
