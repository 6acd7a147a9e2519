#include <benchmark/benchmark.h>

#include "dgm/ansatz.hpp"
#include "dgm/engine.hpp"
#include "dgm/expr.hpp"
#include "dgm/network.hpp"
#include "dgm/oracle.hpp"
#include "dgm/sampler.hpp"

using namespace dgm;

namespace {

const VarList kXYT = VarList::standard(2, true);
const char* kHeatForm = "D(u,t) - D(D(u,x),x) - D(D(u,y),y) - 5*x*y*(1-x)*(1-y)*cos(pi*(x+y))";

NetworkSpec heat_body() { return {"faR fa fa+ f", {10, 25, 10, 1}, std::vector(3, Activation::Tanh), 3}; }

PdeProblem heat() {
  return {kXYT, Domain::unit(2, true), parse(kHeatForm, kXYT), Expr::constant(0.0),
          parse("x*y*(1-x)*(1-y)", kXYT), {}};
}

PointBatch uniform_batch(std::size_t n, std::size_t dim) {
  Rng rng(1);
  return sample(SamplerSpec::uniform(dim), n, rng);
}

}  // namespace

static void BM_Parse(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(parse(kHeatForm, kXYT));
}
BENCHMARK(BM_Parse);

// Jet forward and reverse sweep at one point; the range is the derivative order.
static void BM_JetForwardBackward(benchmark::State& state) {
  const Network net(heat_body());
  const auto theta = init_params(net.spec(), 0);
  std::vector<MultiIndex> tags;
  for (std::size_t v = 0; v < 3; ++v) {
    MultiIndex t(3);
    for (int k = 0; k < state.range(0); ++k) t = t.incremented(v);
    tags.push_back(t);
  }
  JetEvaluator jet(net, JetBasis(3, tags));
  const std::vector<double> point{0.3, 0.6, 0.2};
  std::vector<double> adjoint(jet.basis().size(), 1.0);
  std::vector<double> grad(theta.size());
  for (auto _ : state) {
    benchmark::DoNotOptimize(jet.forward(theta, point).data());
    jet.backward(theta, adjoint, grad);
  }
}
BENCHMARK(BM_JetForwardBackward)->DenseRange(1, 3);

static void BM_InputDerivatives(benchmark::State& state) {
  const Network net(heat_body());
  const auto theta = init_params(net.spec(), 0);
  const std::vector<MultiIndex> tags{MultiIndex(std::vector<std::uint8_t>{2, 0, 0}),
                                     MultiIndex(std::vector<std::uint8_t>{0, 2, 0}),
                                     MultiIndex(std::vector<std::uint8_t>{0, 0, 1})};
  const PointBatch pts = uniform_batch(static_cast<std::size_t>(state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(net.input_derivatives(theta, pts, tags));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_InputDerivatives)->Arg(200);

// One training step's worth of work: ansatz-bound heat residual, batch of 200.
static void BM_LossAndGrad(benchmark::State& state) {
  const PdeProblem p = heat();
  const Network net(heat_body());
  const auto theta = init_params(net.spec(), 0);
  const ResidualProgram prog(bind_form(p.form, wrap(build_ansatz(p), p.vars), p.vars), p.vars);
  const PointBatch batch = uniform_batch(static_cast<std::size_t>(state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(loss_and_grad(net, theta, prog, batch));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LossAndGrad)->Arg(200);

static void BM_SampleMixture(benchmark::State& state) {
  const auto s = SamplerSpec::mixture(
      {SamplerSpec::uniform(3), SamplerSpec::truncated_gaussian({0.5, 0.5, 0.5}, {0.1, 0.1, 0.1})}, {0.5, 0.5});
  Rng rng(2);
  for (auto _ : state) benchmark::DoNotOptimize(sample(s, 200, rng));
  state.SetItemsProcessed(state.iterations() * 200);
}
BENCHMARK(BM_SampleMixture);

static void BM_SampleBoundary(benchmark::State& state) {
  const Domain d = Domain::unit(2, true);
  Rng rng(3);
  for (auto _ : state) benchmark::DoNotOptimize(sample_boundary(d, 200, rng));
  state.SetItemsProcessed(state.iterations() * 200);
}
BENCHMARK(BM_SampleBoundary);

static void BM_PoissonOracle(benchmark::State& state) {
  const VarList xy = VarList::standard(2, false);
  const Expr q = parse("5*sin(pi*(x+y))", xy);
  for (auto _ : state)
    benchmark::DoNotOptimize(solve_poisson_fd(q, Expr::constant(1.0), xy, Domain::unit(2, false),
                                              static_cast<std::size_t>(state.range(0))));
}
BENCHMARK(BM_PoissonOracle)->Arg(51)->Arg(201)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
