#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>

#include "doctest.h"
#include "dgm/errors.hpp"
#include "dgm/sampler.hpp"

using namespace dgm;

namespace {

double mean_of(const PointBatch& pts, std::size_t axis) {
  double s = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) s += pts[i][axis];
  return s / static_cast<double>(pts.size());
}

/// Pearson chi-squared p-value of observed counts against expected probabilities.
double chi2_pvalue(const std::vector<double>& counts, const std::vector<double>& probs) {
  double n = 0.0;
  for (double c : counts) n += c;
  double stat = 0.0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    const double e = n * probs[k];
    stat += (counts[k] - e) * (counts[k] - e) / e;
  }
  boost::math::chi_squared dist(static_cast<double>(counts.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

bool inside(const SamplerSpec& s, const PointBatch& pts) {
  const auto box = s.support();
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t k = 0; k < pts.dim(); ++k)
      if (pts[i][k] < box.lo[k] || pts[i][k] > box.hi[k]) return false;
  return true;
}

}  // namespace

TEST_CASE("uniform moments") {
  Rng rng(1);
  const auto pts = sample(SamplerSpec::uniform(2), 10000, rng);
  const double tol = 3.0 * (1.0 / std::sqrt(12.0)) / 100.0;
  CHECK(std::abs(mean_of(pts, 0) - 0.5) < tol);
  CHECK(std::abs(mean_of(pts, 1) - 0.5) < tol);
}

TEST_CASE("mixture frequencies") {
  const auto shifted = SamplerSpec::affine(SamplerSpec::uniform(1), {1.0}, {2.0});
  const auto mix = SamplerSpec::mixture({SamplerSpec::uniform(1), shifted}, {0.3, 0.7});
  Rng rng(2);
  const auto pts = sample(mix, 10000, rng);
  double high = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) high += pts[i][0] >= 2.0;
  CHECK(std::abs(high / 1e4 - 0.7) < 3.0 * std::sqrt(0.21 / 1e4));
  CHECK(chi2_pvalue({1e4 - high, high}, {0.3, 0.7}) > 0.001);

  CHECK_THROWS_AS(SamplerSpec::mixture({SamplerSpec::uniform(1), shifted}, {0.3, 0.6}), Error);
  CHECK_THROWS_AS(SamplerSpec::mixture({SamplerSpec::uniform(1), SamplerSpec::uniform(2)}, {0.5, 0.5}), Error);
  CHECK_THROWS_AS(SamplerSpec::mixture({SamplerSpec::uniform(1), shifted}, {-0.5, 1.5}), Error);
}

TEST_CASE("three-way mixture passes a chi-squared test") {
  std::vector<SamplerSpec> parts;
  for (int k = 0; k < 3; ++k) parts.push_back(SamplerSpec::affine(SamplerSpec::uniform(1), {1.0}, {double(k)}));
  const std::vector<double> w{0.2, 0.5, 0.3};
  Rng rng(9);
  const auto pts = sample(SamplerSpec::mixture(parts, w), 10000, rng);
  std::vector<double> counts(3, 0.0);
  for (std::size_t i = 0; i < pts.size(); ++i) counts[std::min<std::size_t>(2, std::size_t(pts[i][0]))] += 1;
  CHECK(chi2_pvalue(counts, w) > 0.001);
}

TEST_CASE("affine onto a rectangle") {
  Domain d{{{0, 1}, {0, 2}}, {}};
  const auto s = SamplerSpec::onto(d, SamplerSpec::uniform(2));
  Rng rng(3);
  const auto pts = sample(s, 10000, rng);
  double ymax = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK(d.contains(pts[i]));
    ymax = std::max(ymax, pts[i][1]);
  }
  CHECK(ymax > 1.5);
}

TEST_CASE("product independence") {
  const auto s = SamplerSpec::product({SamplerSpec::uniform(1), SamplerSpec::uniform(1)});
  CHECK(s.dim() == 2);
  Rng rng(4);
  const auto pts = sample(s, 10000, rng);
  const double mx = mean_of(pts, 0), my = mean_of(pts, 1);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double a = pts[i][0] - mx, b = pts[i][1] - my;
    sxy += a * b;
    sxx += a * a;
    syy += b * b;
  }
  CHECK(std::abs(sxy / std::sqrt(sxx * syy)) < 0.03);
}

TEST_CASE("truncated distributions stay in the unit cube") {
  const auto g = SamplerSpec::truncated_gaussian({0.9, 0.1}, {0.3, 0.05});
  const auto e = SamplerSpec::exponential({3.0});
  Rng rng(5);
  const auto gp = sample(g, 20000, rng);
  const auto ep = sample(e, 20000, rng);
  CHECK(inside(g, gp));
  CHECK(inside(e, ep));
  // truncated exponential mean on [0,1]: 1/r - 1/(e^r - 1)
  const double want = 1.0 / 3.0 - 1.0 / (std::exp(3.0) - 1.0);
  CHECK(std::abs(mean_of(ep, 0) - want) < 0.01);
  CHECK_THROWS_AS(SamplerSpec::truncated_gaussian({0.5}, {0.0}), Error);
  CHECK_THROWS_AS(SamplerSpec::exponential({-1.0}), Error);
}

TEST_CASE("support containment over a million samples per combinator") {
  Domain d{{{-1, 2}, {0, 3}}, Interval{0.5, 1.5}};
  const std::vector<SamplerSpec> specs{
      SamplerSpec::uniform(3),
      SamplerSpec::onto(d, SamplerSpec::truncated_gaussian({0.5, 0.2, 0.9}, {0.1, 0.3, 0.5})),
      SamplerSpec::product({SamplerSpec::exponential({2.0, 0.5}), SamplerSpec::uniform(1)}),
      SamplerSpec::mixture({SamplerSpec::uniform(3), SamplerSpec::exponential({1, 2, 3})}, {0.4, 0.6}),
      SamplerSpec::boundary_face(d),
      SamplerSpec::initial_slice(d),
  };
  for (const auto& s : specs) {
    Rng rng(6);
    CHECK(inside(s, sample(s, 1000000, rng)));
  }
}

TEST_CASE("boundary faces are chosen by measure") {
  SUBCASE("unit square") {
    Rng rng(7);
    const auto pts = sample_boundary(Domain::unit(2, false), 40000, rng);
    std::vector<double> counts(4, 0.0);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double x = pts[i][0], y = pts[i][1];
      const int on = (x == 0.0) + (x == 1.0) + (y == 0.0) + (y == 1.0);
      CHECK(on == 1);
      counts[x == 0.0 ? 0 : x == 1.0 ? 1 : y == 0.0 ? 2 : 3] += 1;
    }
    const double sd = 3.0 * std::sqrt(4e4 * 0.25 * 0.75);
    for (double c : counts) CHECK(std::abs(c - 1e4) < sd);
    CHECK(chi2_pvalue(counts, {0.25, 0.25, 0.25, 0.25}) > 0.001);
  }
  SUBCASE("long faces get three times the share") {
    Rng rng(8);
    Domain d{{{0, 1}, {0, 3}}, {}};
    const auto pts = sample_boundary(d, 10000, rng);
    std::vector<double> counts(2, 0.0);  // x-faces (length 3), y-faces (length 1)
    for (std::size_t i = 0; i < pts.size(); ++i)
      counts[(pts[i][0] == 0.0 || pts[i][0] == 1.0) ? 0 : 1] += 1;
    CHECK(std::abs(counts[0] / 1e4 - 0.75) < 3.0 * std::sqrt(0.75 * 0.25 / 1e4));
    CHECK(chi2_pvalue(counts, {0.75, 0.25}) > 0.001);
  }
  SUBCASE("time is uniform on [t0, T]") {
    Rng rng(10);
    Domain d{{{0, 1}, {0, 1}}, Interval{1.0, 3.0}};
    const auto pts = sample_boundary(d, 10000, rng);
    CHECK(std::abs(mean_of(pts, 2) - 2.0) < 3.0 * (2.0 / std::sqrt(12.0)) / 100.0);
  }
}

TEST_CASE("initial slice") {
  Domain d{{{0, 2}, {-1, 1}}, Interval{0.25, 1.0}};
  Rng rng(11);
  const auto pts = sample_initial(d, 10000, rng);
  for (std::size_t i = 0; i < pts.size(); ++i) CHECK(pts[i][2] == 0.25);
  CHECK(std::abs(mean_of(pts, 0) - 1.0) < 3.0 * (2.0 / std::sqrt(12.0)) / 100.0);
  CHECK(std::abs(mean_of(pts, 1) - 0.0) < 3.0 * (2.0 / std::sqrt(12.0)) / 100.0);
  Rng one(12);
  const auto single = sample_initial(d, 1, one);
  CHECK(single.size() == 1);
  CHECK(d.contains(single[0]));
  CHECK_THROWS_AS(sample_initial(Domain::unit(2, false), 5, one), Error);
}

TEST_CASE("determinism") {
  const auto s = SamplerSpec::mixture({SamplerSpec::uniform(2), SamplerSpec::truncated_gaussian({0.5, 0.5}, {0.1, 0.1})},
                                      {0.5, 0.5});
  Rng a(99), b(99);
  const auto pa = sample(s, 500, a);
  const auto pb = sample(s, 500, b);
  CHECK(std::equal(pa.data().begin(), pa.data().end(), pb.data().begin()));
}
