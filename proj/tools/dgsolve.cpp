// dgsolve: train a Deep Galerkin model from a JSON config, or compare a
// trained checkpoint against the finite-difference oracle.
//
//   dgsolve solve   --config poisson.json [--out-dir out] [--seed 1] [--iters 500]
//   dgsolve compare --config poisson.json --model out/model.ckpt

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "dgm/cli.hpp"

namespace {

struct Flags {
  std::string config;
  std::string model;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> iters;
  std::optional<std::size_t> batch_size;
  std::optional<std::size_t> grid;
  std::optional<double> time;
  std::optional<std::string> mode;

  dgm::RunOverrides overrides() const {
    return {out_dir, seed, iters, batch_size, grid, time, mode};
  }
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON run configuration")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out-dir", f.out_dir, "output directory (output.out_dir)");
  cmd->add_option("--seed", f.seed, "RNG seed (train.seed)");
  cmd->add_option("--iters", f.iters, "iterations per fit stage (train.n_iters)");
  cmd->add_option("--batch-size", f.batch_size, "interior batch size (train.batch_size)");
  cmd->add_option("--grid", f.grid, "nodes per axis of the output grid (output.grid)");
  cmd->add_option("--time", f.time, "time slice for evolution problems (output.time)");
  cmd->add_option("--mode", f.mode, "ansatz or soft (train.mode)")
      ->check(CLI::IsMember({"ansatz", "soft"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deep Galerkin PDE solver"};
  app.require_subcommand(1);

  Flags solve_flags;
  auto* solve = app.add_subcommand("solve", "train a model and write loss.csv, solution.csv, model.ckpt");
  add_common(solve, solve_flags);

  Flags compare_flags;
  auto* compare = app.add_subcommand("compare", "compare a checkpoint with the finite-difference oracle");
  add_common(compare, compare_flags);
  compare->add_option("--model", compare_flags.model, "checkpoint written by solve")
      ->required()
      ->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : dgm::cli::kExitConfig;
  }

  if (solve->parsed())
    return dgm::cli::run_solve(solve_flags.config, solve_flags.overrides(), std::cout, std::cerr);
  return dgm::cli::run_compare(compare_flags.config, compare_flags.model, compare_flags.overrides(),
                               std::cout, std::cerr);
}
