#include <bit>
#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "dgm/errors.hpp"
#include "dgm/network.hpp"
#include "fd.hpp"

using namespace dgm;

namespace {

NetworkSpec spec(std::string layout, std::vector<std::size_t> units, std::vector<Activation> acts,
                 std::size_t input_dim) {
  return {std::move(layout), std::move(units), std::move(acts), input_dim};
}

PointBatch random_points(std::size_t n, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  PointBatch pts(dim);
  std::vector<double> p(dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& c : p) c = U(rng);
    pts.push_back(p);
  }
  return pts;
}

double scalar_forward(const Network& net, const ParameterVector& theta, std::span<const double> x) {
  PointBatch one(x.size());
  one.push_back(x);
  return net.forward(theta, one)[0];
}

std::vector<MultiIndex> all_tags(std::size_t dim, int max_order) {
  std::vector<MultiIndex> out;
  std::vector<MultiIndex> frontier{MultiIndex(dim)};
  for (int k = 1; k <= max_order; ++k) {
    std::vector<MultiIndex> next;
    for (const auto& m : frontier)
      for (std::size_t v = 0; v < dim; ++v) {
        MultiIndex n = m.incremented(v);
        if (std::find(next.begin(), next.end(), n) == next.end()) next.push_back(n);
      }
    out.insert(out.end(), next.begin(), next.end());
    frontier = next;
  }
  return out;
}

}  // namespace

TEST_CASE("parse_layout: heat network") {
  const auto plan = parse_layout(spec("faR fa fa+ f", {10, 25, 10, 1}, std::vector(3, Activation::Tanh), 3));
  std::size_t dense = 0;
  for (const auto& s : plan) dense += s.kind == LayerStep::Kind::Dense;
  CHECK(dense == 4);
  REQUIRE(plan.size() == 9);
  CHECK(plan[2].kind == LayerStep::Kind::ResidualSave);
  CHECK(plan[2].out == 10);
  CHECK(plan[7].kind == LayerStep::Kind::ResidualAdd);
  CHECK(plan[7].out == 10);
  CHECK(plan[8].kind == LayerStep::Kind::Dense);
  CHECK(parameter_count(plan) == (3 * 10 + 10) + (10 * 25 + 25) + (25 * 10 + 10) + (10 * 1 + 1));
}

TEST_CASE("parse_layout: simple layouts") {
  const auto affine = parse_layout(spec("f", {1}, {}, 2));
  REQUIRE(affine.size() == 1);
  CHECK(affine[0].in == 2);
  CHECK(affine[0].out == 1);

  const auto mlp = parse_layout(spec("fa fa fa f", {15, 25, 15, 1}, std::vector(3, Activation::Tanh), 2));
  CHECK(mlp.size() == 7);
  for (std::size_t i : {1u, 3u, 5u}) {
    CHECK(mlp[i].kind == LayerStep::Kind::Activation);
    CHECK(mlp[i].activation == Activation::Tanh);
  }
}

TEST_CASE("parse_layout: errors mention the layout") {
  const auto t = Activation::Tanh;
  auto fails = [](const NetworkSpec& s) {
    try {
      parse_layout(s);
    } catch (const LayoutError& e) {
      return std::string(e.what()).find("layout") != std::string::npos;
    }
    return false;
  };
  CHECK(fails(spec("faR fa fa f", {10, 25, 10, 1}, {t, t, t}, 2)));   // unmatched R
  CHECK(fails(spec("fa fa+ f", {10, 10, 1}, {t, t}, 2)));             // + without R
  CHECK(fails(spec("faR faR fa+ f", {10, 10, 10, 1}, {t, t, t}, 2)));  // nested R
  CHECK(fails(spec("faR fa+ f", {10, 25, 1}, {t, t}, 2)));            // width mismatch
  CHECK(fails(spec("fx f", {10, 1}, {}, 2)));                          // unknown symbol
  CHECK(fails(spec("fa f", {10}, {t}, 2)));                            // units count
  CHECK(fails(spec("fa f", {10, 1}, {}, 2)));                          // activation count
}

TEST_CASE("init_params: Glorot bounds, zero biases, determinism") {
  const auto s = spec("faR fa fa+ f", {10, 25, 10, 1}, std::vector(3, Activation::Tanh), 3);
  const auto a = init_params(s, 7);
  const auto b = init_params(s, 7);
  CHECK(a == b);
  CHECK(a != init_params(s, 8));
  for (const auto& step : parse_layout(s)) {
    if (step.kind != LayerStep::Kind::Dense) continue;
    const double bound = std::sqrt(6.0 / static_cast<double>(step.in + step.out));
    for (std::size_t k = 0; k < step.in * step.out; ++k) CHECK(std::abs(a[step.param_offset + k]) <= bound);
    for (std::size_t k = 0; k < step.out; ++k) CHECK(a[step.param_offset + step.in * step.out + k] == 0.0);
  }
}

TEST_CASE("forward: trivial networks") {
  const Network mlp(spec("fa fa f", {8, 8, 1}, {Activation::Tanh, Activation::Tanh}, 2));
  const ParameterVector zeros(mlp.parameter_count(), 0.0);
  for (double v : mlp.forward(zeros, random_points(5, 2, 1))) CHECK(v == 0.0);

  const Network id(spec("f", {2}, {}, 2));
  const ParameterVector eye{1, 0, 0, 1, 0, 0};
  const auto pts = random_points(5, 2, 2);
  const auto out = id.forward(eye, pts);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK(out[2 * i] == pts[i][0]);
    CHECK(out[2 * i + 1] == pts[i][1]);
  }

  // inner block zeroed: the residual block is the identity on the saved tensor
  const Network skip(spec("fR f+", {2, 2}, {}, 2));
  ParameterVector theta(skip.parameter_count(), 0.0);
  theta[0] = theta[3] = 1.0;
  const auto sk = skip.forward(theta, pts);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK(sk[2 * i] == pts[i][0]);
    CHECK(sk[2 * i + 1] == pts[i][1]);
  }
  CHECK_THROWS_AS(skip.forward(ParameterVector(3), pts), Error);
  CHECK_THROWS_AS(skip.forward(theta, random_points(2, 3, 1)), Error);
}

TEST_CASE("forward: batched equals one at a time, bitwise") {
  const Network net(spec("faR fa fa+ f", {10, 25, 10, 1}, std::vector(3, Activation::Tanh), 3));
  const auto theta = init_params(net.spec(), 3);
  const auto pts = random_points(40, 3, 9);
  const auto batched = net.forward(theta, pts);
  for (std::size_t i = 0; i < pts.size(); ++i) CHECK(scalar_forward(net, theta, pts[i]) == batched[i]);
}

TEST_CASE("input_derivatives: affine map") {
  const Network net(spec("f", {1}, {}, 3));
  const ParameterVector theta{0.3, -1.2, 2.5, 0.7};
  const std::vector<MultiIndex> tags{MultiIndex(3).incremented(0), MultiIndex(3).incremented(1),
                                     MultiIndex(3).incremented(2), MultiIndex(3).incremented(0).incremented(1)};
  const auto table = net.input_derivatives(theta, random_points(10, 3, 4), tags);
  for (std::size_t p = 0; p < 10; ++p) {
    CHECK(table.at(p, 0) == 0.3);
    CHECK(table.at(p, 1) == -1.2);
    CHECK(table.at(p, 2) == 2.5);
    CHECK(table.at(p, 3) == 0.0);
  }
}

TEST_CASE("input_derivatives: linear network has zero second derivatives") {
  const Network net(spec("fR f f+ f", {6, 6, 6, 1}, {}, 2));
  const auto theta = init_params(net.spec(), 1);
  const std::vector<MultiIndex> tags{MultiIndex(std::vector<std::uint8_t>{2, 0}),
                                     MultiIndex(std::vector<std::uint8_t>{1, 1}),
                                     MultiIndex(std::vector<std::uint8_t>{0, 2})};
  const auto table = net.input_derivatives(theta, random_points(10, 2, 5), tags);
  for (double v : table.values) CHECK(v == 0.0);
}

TEST_CASE("input_derivatives match nested central differences") {
  for (Activation act : {Activation::Tanh, Activation::Sigmoid, Activation::Sin}) {
    CAPTURE(activation_name(act));
    const Network net(spec("faR fa fa+ f", {10, 25, 10, 1}, std::vector(3, act), 3));
    const auto theta = init_params(net.spec(), 42);
    const auto tags = all_tags(3, 3);
    const auto pts = random_points(50, 3, 17);
    const auto table = net.input_derivatives(theta, pts, tags);
    auto f = [&](std::span<const double> x) { return scalar_forward(net, theta, x); };
    double worst[4] = {0, 0, 0, 0};
    for (std::size_t p = 0; p < pts.size(); ++p)
      for (std::size_t k = 0; k < tags.size(); ++k) {
        const int order = tags[k].order();
        const double h = order == 1 ? 1e-5 : order == 2 ? 1e-4 : 1e-3;
        const std::vector<double> x(pts[p].begin(), pts[p].end());
        const double fd = testing::fd_derivative(f, x, tags[k], h);
        worst[order] = std::max(worst[order], testing::rel_err(table.at(p, k), fd, 1e-2));
      }
    CHECK(worst[1] < 1e-4);
    CHECK(worst[2] < 1e-4);
    CHECK(worst[3] < 1e-3);
  }
}

TEST_CASE("input_derivatives: order cap and value column") {
  const Network net(spec("fa f", {4, 1}, {Activation::Tanh}, 2));
  const auto theta = init_params(net.spec(), 0);
  const auto pts = random_points(3, 2, 0);
  CHECK_THROWS_AS(net.input_derivatives(theta, pts, std::vector{MultiIndex(std::vector<std::uint8_t>{4, 0})}),
                  OrderError);
  const auto table = net.input_derivatives(theta, pts, std::vector{MultiIndex(2)});
  const auto fwd = net.forward(theta, pts);
  for (std::size_t p = 0; p < 3; ++p) CHECK(table.at(p, 0) == doctest::Approx(fwd[p]).epsilon(1e-15));
}

TEST_CASE("input_derivatives: evaluation-path independence") {
  // the mixed partial comes out the same whether or not other tags share the basis
  const Network net(spec("fa fa f", {7, 7, 1}, {Activation::Tanh, Activation::Tanh}, 2));
  const auto theta = init_params(net.spec(), 8);
  const auto pts = random_points(20, 2, 3);
  const MultiIndex xy(std::vector<std::uint8_t>{1, 1});
  const auto alone = net.input_derivatives(theta, pts, std::vector{xy});
  const auto many = net.input_derivatives(theta, pts, all_tags(2, 3));
  const auto all = all_tags(2, 3);
  const auto k = static_cast<std::size_t>(std::find(all.begin(), all.end(), xy) - all.begin());
  for (std::size_t p = 0; p < pts.size(); ++p)
    CHECK(alone.at(p, 0) == doctest::Approx(many.at(p, k)).epsilon(1e-13));
}

TEST_CASE("activation derivatives") {
  double out[5];
  activation_derivatives(Activation::Tanh, 0.0, 4, out);
  CHECK(out[0] == 0.0);
  CHECK(out[1] == 1.0);
  CHECK(out[3] == doctest::Approx(-2.0));
  activation_derivatives(Activation::Sigmoid, 0.0, 2, out);
  CHECK(out[0] == 0.5);
  CHECK(out[1] == 0.25);
  activation_derivatives(Activation::Relu, -1.0, 1, out);
  CHECK(out[0] == 0.0);
  CHECK(out[1] == 0.0);
  CHECK(activation_from_name("sin") == Activation::Sin);
  CHECK_THROWS_AS(activation_from_name("gelu"), LayoutError);
}

TEST_CASE("checkpoint round trip is bit-exact") {
  const auto s = spec("faR fa fa+ f", {10, 25, 10, 1}, {Activation::Tanh, Activation::Sin, Activation::Sigmoid}, 3);
  auto theta = init_params(s, 5);
  theta[0] = -0.0;
  theta[1] = 1e-310;
  std::stringstream buf;
  write_checkpoint(buf, s, theta);
  std::string header;
  std::getline(buf, header);
  CHECK(header == "GFDG1 3 faR fa fa+ f 10,25,10,1 tanh,sin,sigmoid");
  const std::string rest(std::istreambuf_iterator<char>(buf), {});
  CHECK(rest.size() == 8 * theta.size());
  CHECK(static_cast<unsigned char>(rest[8 + 7]) == 0x00);  // 1e-310 is subnormal, little-endian high byte 0

  std::stringstream again;
  write_checkpoint(again, s, theta);
  const Checkpoint ck = read_checkpoint(again);
  CHECK(ck.spec == s);
  REQUIRE(ck.params.size() == theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i)
    CHECK(std::bit_cast<std::uint64_t>(ck.params[i]) == std::bit_cast<std::uint64_t>(theta[i]));

  std::stringstream bad("GFDG2 3 f 1 \n");
  CHECK_THROWS_AS(read_checkpoint(bad), Error);
}
