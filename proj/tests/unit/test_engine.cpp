#include <algorithm>
#include <random>

#include "doctest.h"
#include "dgm/ansatz.hpp"
#include "dgm/engine.hpp"
#include "dgm/errors.hpp"
#include "dgm/sampler.hpp"
#include "fd.hpp"

using namespace dgm;

namespace {

const VarList xy = VarList::standard(2, false);

PointBatch unit_points(std::size_t n, std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  return sample(SamplerSpec::uniform(dim), n, rng);
}

NetworkSpec mlp(Activation act, std::size_t input_dim) {
  return {"faR fa fa+ f", {10, 25, 10, 1}, std::vector(3, act), input_dim};
}

}  // namespace

TEST_CASE("ResidualProgram: tags and values") {
  const Expr form = parse("D(D(u,x),x) + D(D(u,y),y) - 5*sin(pi*(x+y))", xy);
  const ResidualProgram prog(form, xy);
  REQUIRE(prog.tags().size() == 2);
  CHECK(prog.tags() == trial_tags(form));
  ResidualProgram::Workspace ws;
  const std::vector<double> p{0.25, 0.25};
  const std::vector<double> trial{1.5, 2.0};
  CHECK(prog.evaluate(p, trial, ws) == doctest::Approx(3.5 - 5.0).epsilon(1e-14));
  std::vector<double> adj(2, 0.0);
  prog.adjoint(ws, adj);
  CHECK(adj[0] == 1.0);
  CHECK(adj[1] == 1.0);
}

TEST_CASE("ResidualProgram: adjoint matches finite differences") {
  const Expr form = parse("u*D(u,x) - exp(D(u,y))*sin(x) + D(D(u,x),y)^2 / (2 + u^2)", xy);
  const ResidualProgram prog(form, xy);
  const auto n = prog.tags().size();
  ResidualProgram::Workspace ws;
  const std::vector<double> p{0.3, 0.7};
  std::vector<double> trial{0.4, -0.2, 0.9, 0.1};
  REQUIRE(trial.size() == n);
  prog.evaluate(p, trial, ws);
  std::vector<double> adj(n, 0.0);
  prog.adjoint(ws, adj);
  for (std::size_t k = 0; k < n; ++k) {
    auto f = [&](std::span<const double> x) {
      std::vector<double> tr = trial;
      tr[k] = x[0];
      ResidualProgram::Workspace w;
      return prog.evaluate(p, tr, w);
    };
    const double fd = testing::fd_derivative(f, {trial[k]}, MultiIndex(std::vector<std::uint8_t>{1}), 1e-6);
    CHECK(testing::rel_err(adj[k], fd, 1e-6) < 1e-8);
  }
}

TEST_CASE("loss_and_grad: zero residual") {
  const Network net(mlp(Activation::Tanh, 2));
  const auto theta = init_params(net.spec(), 0);
  const ResidualProgram zero(Expr::constant(0.0), xy);
  const auto r = loss_and_grad(net, theta, zero, unit_points(20, 2, 1));
  CHECK(r.loss == 0.0);
  CHECK(std::all_of(r.gradient.begin(), r.gradient.end(), [](double g) { return g == 0.0; }));
  CHECK_THROWS_AS(loss_and_grad(net, theta, zero, PointBatch(2)), Error);
}

TEST_CASE("loss_and_grad: affine network, closed form") {
  const VarList x = VarList::standard(1, false);
  const Network net({"f", {1}, {}, 1});
  const ResidualProgram prog(parse("D(u,x) - 1", x), x);
  const ParameterVector theta{2.5, -0.3};
  const auto r = loss_and_grad(net, theta, prog, unit_points(17, 1, 2));
  CHECK(r.loss == doctest::Approx(2.25).epsilon(1e-15));
  CHECK(r.gradient[0] == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(r.gradient[1] == 0.0);
}

TEST_CASE("loss_and_grad: gradient matches finite differences") {
  const Expr form = parse("D(D(u,x),x) + D(D(u,y),y) - 5*sin(pi*(x+y))", xy);
  PdeProblem problem{xy, Domain::unit(2, false), form, Expr::constant(1.0), {}, {}};
  const Expr bound = bind_form(form, wrap(build_ansatz(problem), xy), xy);
  for (Activation act : {Activation::Tanh, Activation::Sigmoid, Activation::Sin}) {
    CAPTURE(activation_name(act));
    const Network net(mlp(act, 2));
    const auto theta = init_params(net.spec(), 4);
    const auto pts = unit_points(64, 2, 5);
    for (const Expr& e : {form, bound}) {
      const ResidualProgram prog(e, xy);
      const auto r = loss_and_grad(net, theta, prog, pts);
      auto loss = [&](std::span<const double> th) { return loss_and_grad(net, th, prog, pts).loss; };
      CHECK(testing::gradient_check(loss, theta, r.gradient, 20, 7) < 1e-5);
    }
  }
}

TEST_CASE("loss_and_grad: third-order and time terms") {
  const VarList xt = VarList::standard(1, true);
  const Expr form = parse("D(D(u,t),t) - D(D(D(u,x),x),x) + u*D(u,x)", xt);
  const Network net(mlp(Activation::Tanh, 2));
  const auto theta = init_params(net.spec(), 9);
  const auto pts = unit_points(32, 2, 6);
  const ResidualProgram prog(form, xt);
  const auto r = loss_and_grad(net, theta, prog, pts);
  auto loss = [&](std::span<const double> th) { return loss_and_grad(net, th, prog, pts).loss; };
  CHECK(testing::gradient_check(loss, theta, r.gradient, 20, 8) < 1e-5);
}

TEST_CASE("soft_loss_and_grad") {
  const Network net(mlp(Activation::Tanh, 2));
  const ParameterVector zeros(net.parameter_count(), 0.0);
  const Expr u = Expr::trial(MultiIndex(2));
  const ResidualProgram residual(parse("D(D(u,x),x)", xy), xy);
  const ResidualProgram boundary(u - Expr::constant(1.0), xy);
  const ResidualProgram initial(u, xy);
  const auto b1 = unit_points(30, 2, 1);
  const auto b2 = unit_points(20, 2, 2);
  const auto b3 = unit_points(10, 2, 3);

  SUBCASE("only the boundary term is active for net = 0, g = 1") {
    const std::vector<LossTerm> terms{{&residual, &b1, 1.0}, {&boundary, &b2, 1.0}, {&initial, &b3, 1.0}};
    const auto r = soft_loss_and_grad(net, zeros, terms);
    CHECK(r.loss == 1.0);
    CHECK(r.terms == std::vector<double>{0.0, 1.0, 0.0});
  }

  SUBCASE("gradient of all three terms matches finite differences") {
    const auto theta = init_params(net.spec(), 12);
    const std::vector<LossTerm> terms{{&residual, &b1, 1.0}, {&boundary, &b2, 2.0}, {&initial, &b3, 0.5}};
    const auto r = soft_loss_and_grad(net, theta, terms);
    double sum = 0.0;
    for (double t : r.terms) sum += t;
    CHECK(r.loss == doctest::Approx(sum).epsilon(1e-14));
    auto loss = [&](std::span<const double> th) { return soft_loss_and_grad(net, th, terms).loss; };
    CHECK(testing::gradient_check(loss, theta, r.gradient, 20, 13) < 1e-5);
  }

  SUBCASE("reduces to loss_and_grad with empty penalty batches") {
    const auto theta = init_params(net.spec(), 14);
    const PointBatch empty(2);
    const std::vector<LossTerm> terms{{&residual, &b1, 1.0}, {&boundary, &empty, 1.0}, {&initial, &empty, 1.0}};
    const auto soft = soft_loss_and_grad(net, theta, terms);
    const auto plain = loss_and_grad(net, theta, residual, b1);
    CHECK(soft.loss == plain.loss);
    CHECK(soft.gradient == plain.gradient);
  }
}

TEST_CASE("loss is permutation invariant and unchanged by duplication") {
  const Network net(mlp(Activation::Tanh, 2));
  const auto theta = init_params(net.spec(), 1);
  const ResidualProgram prog(parse("D(D(u,x),x) + D(D(u,y),y) - 1", xy), xy);
  const auto pts = unit_points(40, 2, 1);
  PointBatch reversed(2), doubled(2);
  for (std::size_t i = pts.size(); i-- > 0;) reversed.push_back(pts[i]);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    doubled.push_back(pts[i]);
    doubled.push_back(pts[i]);
  }
  const auto a = loss_and_grad(net, theta, prog, pts);
  CHECK(loss_and_grad(net, theta, prog, reversed).loss == doctest::Approx(a.loss).epsilon(1e-14));
  CHECK(loss_and_grad(net, theta, prog, doubled).loss == doctest::Approx(a.loss).epsilon(1e-14));
}

TEST_CASE("evaluation errors name the point") {
  const Network net(mlp(Activation::Tanh, 2));
  const auto theta = init_params(net.spec(), 1);
  const ResidualProgram prog(parse("log(x - 0.5) + u", xy), xy);
  PointBatch pts(2);
  pts.push_back(std::vector<double>{0.9, 0.5});
  pts.push_back(std::vector<double>{0.1, 0.5});
  try {
    loss_and_grad(net, theta, prog, pts);
    FAIL("expected an evaluation error");
  } catch (const EvalError& e) {
    CHECK(std::string(e.what()).find("point 1") != std::string::npos);
  }
}
