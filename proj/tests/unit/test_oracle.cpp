#include <cmath>
#include <numbers>

#include "doctest.h"
#include "dgm/errors.hpp"
#include "dgm/oracle.hpp"

using namespace dgm;

namespace {

const VarList xy = VarList::standard(2, false);
const VarList xyt = VarList::standard(2, true);
constexpr double pi = std::numbers::pi;

// u = sin(pi x) sin(pi y) + x y, so Q = -2 pi^2 sin(pi x) sin(pi y) and g = x y.
const Expr kQ = parse("-2*pi^2*sin(pi*x)*sin(pi*y)", xy);
const Expr kG = parse("x*y", xy);

double exact_poisson(double x, double y) { return std::sin(pi * x) * std::sin(pi * y) + x * y; }

double poisson_error(std::size_t n) {
  const Grid2D g = solve_poisson_fd(kQ, kG, xy, Domain::unit(2, false), n);
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) worst = std::max(worst, std::abs(g.at(i, j) - exact_poisson(g.x(i), g.y(j))));
  return worst;
}

double heat_error(std::size_t n, std::size_t steps) {
  const Expr u0 = parse("sin(pi*x)*sin(pi*y)", xyt);
  const auto sol = solve_heat_fd(Expr::constant(0.0), u0, xyt, Domain::unit(2, true), n, steps, 0.1);
  const Grid2D& g = sol.frames.back();
  const double decay = std::exp(-2.0 * pi * pi * sol.times.back());
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      worst = std::max(worst, std::abs(g.at(i, j) - decay * std::sin(pi * g.x(i)) * std::sin(pi * g.y(j))));
  return worst;
}

PdeProblem problem(const char* form, bool time, const char* ic = nullptr, const char* bc = "0") {
  const VarList& v = time ? xyt : xy;
  PdeProblem p{v, Domain::unit(2, time), parse(form, v), parse(bc, v), {}, {}};
  if (ic) p.initial = parse(ic, v);
  return p;
}

}  // namespace

TEST_CASE("grid geometry") {
  Grid2D g{{0, 2}, {-1, 1}, 5, std::vector<double>(25, 0.0)};
  CHECK(g.x(0) == 0.0);
  CHECK(g.x(4) == 2.0);
  CHECK(g.y(2) == 0.0);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) g.at(i, j) = 10.0 * i + j;
  const Grid2D s = g.subsample(2);
  CHECK(s.n == 3);
  CHECK(s.at(1, 2) == 24.0);
  CHECK(s.x(1) == 1.0);
  CHECK_THROWS_AS(g.subsample(3), Error);
}

TEST_CASE("poisson: manufactured solution and fourth-power refinement") {
  const double e51 = poisson_error(51);
  const double e101 = poisson_error(101);
  CHECK(e101 < 5e-4);
  CHECK(e51 / e101 == doctest::Approx(4.0).epsilon(0.2));
}

TEST_CASE("poisson: constant data gives a constant") {
  const Grid2D g = solve_poisson_fd(Expr::constant(0.0), Expr::constant(1.0), xy, Domain::unit(2, false), 17);
  for (double v : g.u) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("poisson: harmonic data obeys the maximum principle") {
  // x^2 - y^2 is reproduced exactly by the 5-point stencil
  const Expr g = parse("x^2 - y^2 + x", xy);
  const Domain d{{{-1, 2}, {0, 1}}, {}};
  const Grid2D s = solve_poisson_fd(Expr::constant(0.0), g, xy, d, 33);
  double bmax = -1e300, imax = -1e300;
  for (std::size_t i = 0; i < s.n; ++i)
    for (std::size_t j = 0; j < s.n; ++j) {
      const bool edge = i == 0 || j == 0 || i == s.n - 1 || j == s.n - 1;
      (edge ? bmax : imax) = std::max(edge ? bmax : imax, s.at(i, j));
      const double x = s.x(i), y = s.y(j);
      CHECK(s.at(i, j) == doctest::Approx(x * x - y * y + x).epsilon(1e-10));
    }
  CHECK(imax <= bmax);
  CHECK_THROWS_AS(solve_poisson_fd(Expr::constant(0.0), g, xy, d, 9), Error);
}

TEST_CASE("poisson: second-order convergence") {
  const double e17 = poisson_error(17), e33 = poisson_error(33), e65 = poisson_error(65);
  const double p1 = std::log2(e17 / e33), p2 = std::log2(e33 / e65);
  CHECK(p1 >= 1.8);
  CHECK(p1 <= 2.2);
  CHECK(p2 >= 1.8);
  CHECK(p2 <= 2.2);
}

TEST_CASE("heat: decaying mode") {
  CHECK(heat_error(101, 200) < 1e-3);
  // halving h and dt together quarters the error
  const double coarse = heat_error(33, 64), fine = heat_error(65, 128);
  const double order = std::log2(coarse / fine);
  CHECK(order >= 1.8);
  CHECK(order <= 2.2);
}

TEST_CASE("heat: zero data stays zero and frames are recorded") {
  const auto sol =
      solve_heat_fd(Expr::constant(0.0), Expr::constant(0.0), xyt, Domain::unit(2, true), 17, 20, 0.5, 5);
  CHECK(sol.times.size() == 5);
  CHECK(sol.times.front() == 0.0);
  CHECK(sol.times.back() == doctest::Approx(0.5).epsilon(1e-15));
  for (const auto& f : sol.frames)
    for (double v : f.u) CHECK(v == 0.0);
  CHECK_THROWS_AS(
      solve_heat_fd(Expr::constant(0.0), Expr::constant(0.0), xyt, Domain::unit(2, true), 17, 8, 0.5), Error);
}

TEST_CASE("heat: frame zero is the initial condition") {
  const Expr u0 = parse("x*y*(1-x)*(1-y)", xyt);
  const auto sol = solve_heat_fd(Expr::constant(0.0), u0, xyt, Domain::unit(2, true), 21, 16, 0.2, 16);
  const Grid2D& g = sol.frames.front();
  for (std::size_t i = 0; i < g.n; ++i)
    for (std::size_t j = 0; j < g.n; ++j) {
      const double x = g.x(i), y = g.y(j);
      CHECK(g.at(i, j) == doctest::Approx(x * y * (1 - x) * (1 - y)).epsilon(1e-15));
    }
}

TEST_CASE("grid_error") {
  const std::vector<double> model{1, 2, 3}, oracle{1, 2, 5};
  const auto e = grid_error(model, oracle);
  CHECK(e.linf == 2.0);
  CHECK(e.rms == doctest::Approx(std::sqrt(4.0 / 3.0)).epsilon(1e-15));
  const auto z = grid_error(model, model);
  CHECK(z.linf == 0.0);
  CHECK(z.rms == 0.0);
  CHECK_THROWS_AS(grid_error(model, std::vector<double>{1, 2}), Error);
  CHECK_THROWS_AS(grid_error(std::vector<double>{}, std::vector<double>{}), Error);
}

TEST_CASE("classify: the two supported shapes") {
  const auto pc = classify_for_oracle(problem("D(D(u,x),x) + D(D(u,y),y) - 5*sin(pi*(x+y))", false, nullptr, "1"));
  CHECK(pc.shape == OracleShape::Poisson);
  CHECK(eval_pointwise(pc.source, std::vector<double>{0.25, 0.25}, xy) == doctest::Approx(5.0).epsilon(1e-14));

  const auto scaled = classify_for_oracle(problem("2*D(D(u,x),x) + 2*D(D(u,y),y) - 4", false));
  CHECK(eval_pointwise(scaled.source, std::vector<double>{0.3, 0.6}, xy) == doctest::Approx(2.0).epsilon(1e-14));

  const auto hc = classify_for_oracle(problem(
      "D(u,t) - D(D(u,x),x) - D(D(u,y),y) - 5*x*y*(1-x)*(1-y)*cos(pi*(x+y))", true, "x*y*(1-x)*(1-y)"));
  CHECK(hc.shape == OracleShape::Heat);
  const std::vector<double> p{0.3, 0.4, 0.7};
  const double want = 5 * 0.3 * 0.4 * 0.7 * 0.6 * std::cos(0.7 * pi);
  CHECK(eval_pointwise(hc.source, p, xyt) == doctest::Approx(want).epsilon(1e-13));
}

TEST_CASE("classify: unsupported shapes") {
  const char* forms[] = {
      "D(D(u,x),x) + 2*D(D(u,y),y)",
      "D(D(u,x),x) + D(D(u,y),y) + u",
      "D(D(u,x),x) + D(D(u,y),y) + u*D(u,x)",
      "x*D(D(u,x),x) + x*D(D(u,y),y)",
  };
  for (const char* f : forms) CHECK_THROWS_AS_MESSAGE(classify_for_oracle(problem(f, false)), UnsupportedShapeError, f);

  CHECK_THROWS_AS(classify_for_oracle(problem("D(u,t) - D(D(u,x),x) - D(D(u,y),y)", true, "x*y*(1-x)*(1-y)", "1")),
                  UnsupportedShapeError);
  CHECK_THROWS_AS(classify_for_oracle(problem("D(u,t) - 2*D(D(u,x),x) - D(D(u,y),y)", true, "0")),
                  UnsupportedShapeError);

  PdeProblem wave = problem("D(D(u,t),t) - D(D(u,x),x) - D(D(u,y),y)", true, "0");
  wave.initial_rate = parse("0", xyt);
  CHECK_THROWS_AS(classify_for_oracle(wave), UnsupportedShapeError);

  const VarList x = VarList::standard(1, false);
  PdeProblem one{x, Domain::unit(1, false), parse("D(D(u,x),x) - 1", x), Expr::constant(0.0), {}, {}};
  CHECK_THROWS_AS(classify_for_oracle(one), UnsupportedShapeError);
}
