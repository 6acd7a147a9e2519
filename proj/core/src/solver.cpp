#include "dgm/solver.hpp"

#include <algorithm>
#include <cmath>

#include "dgm/errors.hpp"

namespace dgm {

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError("train.batch_size", "must be at least 1");
  if (n_iters < 1) throw ConfigError("train.n_iters", "must be at least 1");
  if (!(learning_rate > 0) || !std::isfinite(learning_rate))
    throw ConfigError("train.learning_rate", "must be positive");
  if (!(beta1 >= 0 && beta1 < 1)) throw ConfigError("train.beta1", "must lie in [0, 1)");
  if (!(beta2 >= 0 && beta2 < 1)) throw ConfigError("train.beta2", "must lie in [0, 1)");
  if (!(epsilon > 0)) throw ConfigError("train.epsilon", "must be positive");
  if (mode == TrainMode::Soft) {
    if (boundary_batch_size < 1) throw ConfigError("train.boundary_batch_size", "must be at least 1");
    if (initial_batch_size < 1) throw ConfigError("train.initial_batch_size", "must be at least 1");
  }
  for (double w : {residual_weight, boundary_weight, initial_weight})
    if (!(w >= 0) || !std::isfinite(w)) throw ConfigError("train.weights", "must be non-negative");
}

void adam_step(std::span<double> theta, std::span<const double> grad, AdamState& state,
               const TrainConfig& cfg) {
  if (grad.size() != theta.size()) throw Error("adam_step: gradient size mismatch");
  if (cfg.optimizer == OptimizerKind::Sgd) {
    for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= cfg.learning_rate * grad[i];
    ++state.step;
    return;
  }
  if (state.m.size() != theta.size()) {
    state.m.assign(theta.size(), 0.0);
    state.v.assign(theta.size(), 0.0);
    state.step = 0;
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double g = grad[i];
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    theta[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
  }
}

// ---------------------------------------------------------------------------

namespace {

int max_order(const ResidualProgram& p) {
  int order = 0;
  for (const auto& t : p.tags()) order = std::max(order, t.order());
  return order;
}

Rng make_rng(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x5a4du};
  return Rng(seq);
}

}  // namespace

Solver::Solver(PdeProblem problem, NetworkSpec body, const TrainConfig& cfg)
    : problem_(std::move(problem)), rng_(make_rng(cfg.seed)) {
  problem_.validate();
  cfg.validate();
  const VarList& vars = problem_.vars;

  body.input_dim = vars.size();
  try {
    net_ = std::make_unique<Network>(body);
  } catch (const LayoutError& e) {
    throw ConfigError("body.layout", e.what());
  }
  if (net_->output_dim() != 1)
    throw ConfigError("body.units", "the last layer must have width 1 for a scalar PDE");

  model_.spec = body;
  model_.params = init_params(body, cfg.seed);
  model_.domain = problem_.domain;
  model_.vars = vars;
  model_.form = problem_.form;
  model_.mode = cfg.mode;

  const Expr u = Expr::trial(MultiIndex(vars.size()));
  if (cfg.mode == TrainMode::Ansatz) {
    model_.ansatz = build_ansatz(problem_);
    const Expr trial = wrap(*model_.ansatz, vars);
    trial_ = std::make_unique<ResidualProgram>(trial, vars);
    residual_ = std::make_unique<ResidualProgram>(bind_form(problem_.form, trial, vars), vars);
  } else {
    trial_ = std::make_unique<ResidualProgram>(u, vars);
    residual_ = std::make_unique<ResidualProgram>(problem_.form, vars);
    boundary_ = std::make_unique<ResidualProgram>(u - problem_.boundary, vars);
    if (problem_.is_evolution() && problem_.initial)
      initial_ = std::make_unique<ResidualProgram>(u - *problem_.initial, vars);
    if (problem_.time_order() >= 2 && problem_.initial_rate) {
      const Expr ut = Expr::trial(MultiIndex(vars.size()).incremented(*vars.time_index()));
      rate_ = std::make_unique<ResidualProgram>(ut - *problem_.initial_rate, vars);
    }
  }
  if (net_->uses_activation(Activation::Relu) && max_order(*residual_) >= 2)
    throw ConfigError("body.activations",
                      "relu has a zero second derivative almost everywhere and cannot represent "
                      "second-order terms of the form");
}

void Solver::set_params(ParameterVector params) {
  if (params.size() != net_->parameter_count())
    throw Error("parameter vector has the wrong size for this network");
  model_.params = std::move(params);
}

void Solver::fit(const SamplerSpec& sampler, const TrainConfig& cfg, const Observer& observer) {
  cfg.validate();
  if (cfg.mode != model_.mode) throw ConfigError("train.mode", "mode differs from the model's mode");
  SamplerSpec mapped = SamplerSpec::uniform(1);
  try {
    mapped = SamplerSpec::onto(problem_.domain, sampler);
  } catch (const Error& e) {
    throw ConfigError("sampler", e.what());
  }
  const auto box = sampler.support();
  for (std::size_t i = 0; i < box.lo.size(); ++i)
    if (box.lo[i] < 0.0 || box.hi[i] > 1.0)
      throw ConfigError("sampler", "sampler support must lie in the unit cube before mapping onto the domain");

  AdamState state;
  PointBatch boundary_batch(net_->input_dim());
  PointBatch initial_batch(net_->input_dim());
  PointBatch rate_batch(net_->input_dim());
  for (std::size_t it = 0; it < cfg.n_iters; ++it) {
    const std::size_t global_it = model_.history.size();
    const PointBatch batch = sample(mapped, cfg.batch_size, rng_);
    LossReport report;
    LossRecord record;
    if (model_.mode == TrainMode::Ansatz) {
      report = loss_and_grad(*net_, model_.params, *residual_, batch);
      record.residual = report.loss;
    } else {
      boundary_batch = sample_boundary(problem_.domain, cfg.boundary_batch_size, rng_);
      std::vector<LossTerm> terms{{residual_.get(), &batch, cfg.residual_weight},
                                  {boundary_.get(), &boundary_batch, cfg.boundary_weight}};
      if (initial_) {
        initial_batch = sample_initial(problem_.domain, cfg.initial_batch_size, rng_);
        terms.push_back({initial_.get(), &initial_batch, cfg.initial_weight});
      }
      if (rate_) {
        rate_batch = sample_initial(problem_.domain, cfg.initial_batch_size, rng_);
        terms.push_back({rate_.get(), &rate_batch, cfg.initial_weight});
      }
      report = soft_loss_and_grad(*net_, model_.params, terms);
      record.residual = report.terms[0];
      record.boundary = report.terms[1];
      for (std::size_t k = 2; k < report.terms.size(); ++k) record.initial += report.terms[k];
    }
    record.loss = report.loss;
    if (!std::isfinite(report.loss)) throw NumericError(global_it, "loss is not finite");
    for (double g : report.gradient)
      if (!std::isfinite(g)) throw NumericError(global_it, "gradient is not finite");

    adam_step(model_.params, report.gradient, state, cfg);
    model_.history.push_back(record);
    if (observer) observer(global_it, model_);
  }
}

Evaluation Solver::evaluate(const PointBatch& points) const {
  Evaluation out;
  for (std::size_t p = 0; p < points.size(); ++p)
    if (!problem_.domain.contains(points[p], 1e-12)) ++out.out_of_domain;
  out.values = evaluate_program(*net_, model_.params, *trial_, points);
  return out;
}

std::vector<double> Solver::residual(const PointBatch& points) const {
  return evaluate_program(*net_, model_.params, *residual_, points);
}

}  // namespace dgm
