#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "dgm/ansatz.hpp"
#include "dgm/engine.hpp"
#include "dgm/network.hpp"
#include "dgm/problem.hpp"
#include "dgm/sampler.hpp"

namespace dgm {

enum class TrainMode { Ansatz, Soft };
enum class OptimizerKind { Adam, Sgd };

struct TrainConfig {
  TrainMode mode = TrainMode::Ansatz;
  std::size_t batch_size = 200;
  /// Soft mode only.
  std::size_t boundary_batch_size = 50;
  std::size_t initial_batch_size = 50;
  std::size_t n_iters = 1000;
  OptimizerKind optimizer = OptimizerKind::Adam;
  double learning_rate = 5e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;
  double residual_weight = 1.0;
  double boundary_weight = 1.0;
  double initial_weight = 1.0;

  /// Throws ConfigError naming the offending train.* key.
  void validate() const;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t step = 0;
};

/// One optimizer step in place: Adam with bias correction, or plain SGD.
void adam_step(std::span<double> theta, std::span<const double> grad, AdamState& state,
               const TrainConfig& cfg);

struct LossRecord {
  double loss = 0.0;
  double residual = 0.0;
  double boundary = 0.0;
  double initial = 0.0;
};

struct TrainedModel {
  NetworkSpec spec;
  ParameterVector params;
  std::optional<AnsatzParts> ansatz;
  Domain domain;
  VarList vars;
  Expr form;
  TrainMode mode = TrainMode::Ansatz;
  std::vector<LossRecord> history;
};

struct Evaluation {
  std::vector<double> values;
  /// Points outside the domain (still evaluated; extrapolation).
  std::size_t out_of_domain = 0;
};

class Solver {
 public:
  using Observer = std::function<void(std::size_t iteration, const TrainedModel& model)>;

  /// Builds the network, initialises parameters from cfg.seed and, in ansatz
  /// mode, the multiplier/addendum pair. Throws ConfigError.
  Solver(PdeProblem problem, NetworkSpec body, const TrainConfig& cfg);

  /// Runs cfg.n_iters iterations of sample -> loss/gradient -> optimizer step,
  /// continuing from the current parameters with fresh optimizer state.
  /// `sampler` emits points in [0,1]^d; it is mapped onto the domain here.
  /// Throws NumericError on a non-finite loss or gradient.
  void fit(const SamplerSpec& sampler, const TrainConfig& cfg, const Observer& observer = {});

  /// A(x, t) in ansatz mode, net(x, t) in soft mode.
  Evaluation evaluate(const PointBatch& points) const;

  /// The residual of the form applied to the trial function.
  std::vector<double> residual(const PointBatch& points) const;

  const TrainedModel& model() const noexcept { return model_; }
  const PdeProblem& problem() const noexcept { return problem_; }
  const Network& network() const noexcept { return *net_; }
  void set_params(ParameterVector params);

 private:
  PdeProblem problem_;
  TrainedModel model_;
  std::unique_ptr<Network> net_;
  std::unique_ptr<ResidualProgram> residual_;
  std::unique_ptr<ResidualProgram> trial_;
  // Soft mode penalties.
  std::unique_ptr<ResidualProgram> boundary_;
  std::unique_ptr<ResidualProgram> initial_;
  std::unique_ptr<ResidualProgram> rate_;
  Rng rng_;
};

}  // namespace dgm
