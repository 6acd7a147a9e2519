#include "dgm/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "dgm/errors.hpp"

namespace dgm {

SamplerSpec SamplerSpec::uniform(std::size_t dim) {
  if (dim == 0) throw Error("sampler: uniform dimension must be positive");
  auto n = std::make_shared<Node>();
  n->kind = Kind::Uniform;
  n->dim = dim;
  return SamplerSpec(std::move(n));
}

SamplerSpec SamplerSpec::truncated_gaussian(std::vector<double> mean, std::vector<double> sd) {
  if (mean.empty() || mean.size() != sd.size())
    throw Error("sampler: truncated_gaussian needs matching, non-empty mean and sd");
  for (double s : sd)
    if (!(s > 0) || !std::isfinite(s)) throw Error("sampler: truncated_gaussian sd must be positive");
  for (double m : mean)
    if (!std::isfinite(m)) throw Error("sampler: truncated_gaussian mean must be finite");
  auto n = std::make_shared<Node>();
  n->kind = Kind::TruncGauss;
  n->dim = mean.size();
  n->p0 = std::move(mean);
  n->p1 = std::move(sd);
  return SamplerSpec(std::move(n));
}

SamplerSpec SamplerSpec::exponential(std::vector<double> rate) {
  if (rate.empty()) throw Error("sampler: exponential needs at least one rate");
  for (double r : rate)
    if (!(r > 0) || !std::isfinite(r)) throw Error("sampler: exponential rate must be positive");
  auto n = std::make_shared<Node>();
  n->kind = Kind::Exponential;
  n->dim = rate.size();
  n->p0 = std::move(rate);
  return SamplerSpec(std::move(n));
}

SamplerSpec SamplerSpec::product(std::vector<SamplerSpec> children) {
  if (children.empty()) throw Error("sampler: product needs at least one factor");
  auto n = std::make_shared<Node>();
  n->kind = Kind::Product;
  for (const auto& c : children) n->dim += c.dim();
  n->children = std::move(children);
  return SamplerSpec(std::move(n));
}

SamplerSpec SamplerSpec::mixture(std::vector<SamplerSpec> children, std::vector<double> weights) {
  if (children.empty()) throw Error("sampler: mixture needs at least one component");
  if (weights.size() != children.size())
    throw Error("sampler: mixture needs one weight per component");
  for (double w : weights)
    if (!(w > 0)) throw Error("sampler: mixture weights must be positive");
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-12) throw Error("sampler: mixture weights must sum to 1");
  for (const auto& c : children)
    if (c.dim() != children.front().dim())
      throw Error("sampler: mixture components must share a dimension");
  auto n = std::make_shared<Node>();
  n->kind = Kind::Mixture;
  n->dim = children.front().dim();
  n->children = std::move(children);
  n->weights = std::move(weights);
  return SamplerSpec(std::move(n));
}

SamplerSpec SamplerSpec::affine(SamplerSpec child, std::vector<double> scale,
                                std::vector<double> shift) {
  if (scale.size() != child.dim() || shift.size() != child.dim())
    throw Error("sampler: affine scale/shift must match the child dimension");
  auto n = std::make_shared<Node>();
  n->kind = Kind::Affine;
  n->dim = child.dim();
  n->p0 = std::move(scale);
  n->p1 = std::move(shift);
  n->children.push_back(std::move(child));
  return SamplerSpec(std::move(n));
}

SamplerSpec SamplerSpec::onto(const Domain& domain, SamplerSpec child) {
  if (child.dim() != domain.dims())
    throw Error("sampler: dimension " + std::to_string(child.dim()) +
                " does not match the problem dimension " + std::to_string(domain.dims()));
  std::vector<double> scale;
  std::vector<double> shift;
  for (std::size_t i = 0; i < domain.dims(); ++i) {
    scale.push_back(domain.axis(i).length());
    shift.push_back(domain.axis(i).lo);
  }
  return affine(std::move(child), std::move(scale), std::move(shift));
}

SamplerSpec SamplerSpec::boundary_face(Domain domain) {
  domain.validate();
  if (domain.n_spatial() == 0) throw Error("sampler: boundary needs a spatial domain");
  auto n = std::make_shared<Node>();
  n->kind = Kind::BoundaryFace;
  n->dim = domain.dims();
  n->domain = std::move(domain);
  return SamplerSpec(std::move(n));
}

SamplerSpec SamplerSpec::initial_slice(Domain domain) {
  domain.validate();
  if (!domain.time) throw Error("sampler: initial slice needs a time axis");
  auto n = std::make_shared<Node>();
  n->kind = Kind::InitialSlice;
  n->dim = domain.dims();
  n->domain = std::move(domain);
  return SamplerSpec(std::move(n));
}

SamplerSpec::Box SamplerSpec::support() const {
  Box box;
  switch (kind()) {
    case Kind::Uniform:
    case Kind::TruncGauss:
    case Kind::Exponential:
      box.lo.assign(dim(), 0.0);
      box.hi.assign(dim(), 1.0);
      break;
    case Kind::Product:
      for (const auto& c : children()) {
        auto b = c.support();
        box.lo.insert(box.lo.end(), b.lo.begin(), b.lo.end());
        box.hi.insert(box.hi.end(), b.hi.begin(), b.hi.end());
      }
      break;
    case Kind::Mixture:
      box = children().front().support();
      for (const auto& c : children()) {
        auto b = c.support();
        for (std::size_t i = 0; i < dim(); ++i) {
          box.lo[i] = std::min(box.lo[i], b.lo[i]);
          box.hi[i] = std::max(box.hi[i], b.hi[i]);
        }
      }
      break;
    case Kind::Affine: {
      auto b = children().front().support();
      box.lo.resize(dim());
      box.hi.resize(dim());
      for (std::size_t i = 0; i < dim(); ++i) {
        const double p = node_->p0[i] * b.lo[i] + node_->p1[i];
        const double q = node_->p0[i] * b.hi[i] + node_->p1[i];
        box.lo[i] = std::min(p, q);
        box.hi[i] = std::max(p, q);
      }
      break;
    }
    case Kind::BoundaryFace:
    case Kind::InitialSlice:
      for (std::size_t i = 0; i < dim(); ++i) {
        box.lo.push_back(node_->domain.axis(i).lo);
        box.hi.push_back(node_->domain.axis(i).hi);
      }
      if (kind() == Kind::InitialSlice) box.hi.back() = box.lo.back();
      break;
  }
  return box;
}

namespace {

double unit_uniform(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

template <typename Draw>
double truncated_draw(Draw&& draw) {
  for (std::size_t attempt = 0; attempt < kMaxRejections; ++attempt) {
    const double x = draw();
    if (x >= 0.0 && x <= 1.0) return x;
  }
  throw Error("sampler: truncated distribution exceeded the rejection cap; its mass on [0,1] is too small");
}

std::size_t pick(std::span<const double> weights, Rng& rng) {
  const double u = unit_uniform(rng);
  double acc = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    acc += weights[k];
    if (u < acc) return k;
  }
  return weights.size() - 1;
}

void boundary_point(const Domain& d, Rng& rng, double* out) {
  const std::size_t n = d.n_spatial();
  std::vector<double> measure(2 * n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double m = 1.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) m *= d.spatial[j].length();
    measure[2 * i] = measure[2 * i + 1] = m;
    total += 2 * m;
  }
  for (auto& m : measure) m /= total;
  const std::size_t face = pick(measure, rng);
  for (std::size_t j = 0; j < n; ++j)
    out[j] = d.spatial[j].lo + d.spatial[j].length() * unit_uniform(rng);
  const std::size_t axis = face / 2;
  out[axis] = face % 2 == 0 ? d.spatial[axis].lo : d.spatial[axis].hi;
  if (d.time) out[n] = d.time->lo + d.time->length() * unit_uniform(rng);
}

void initial_point(const Domain& d, Rng& rng, double* out) {
  const std::size_t n = d.n_spatial();
  for (std::size_t j = 0; j < n; ++j)
    out[j] = d.spatial[j].lo + d.spatial[j].length() * unit_uniform(rng);
  out[n] = d.time->lo;
}

}  // namespace

void sample_into(const SamplerSpec& spec, Rng& rng, double* out) {
  const auto& node = *spec.node_;
  switch (node.kind) {
    case SamplerSpec::Kind::Uniform:
      for (std::size_t i = 0; i < node.dim; ++i) out[i] = unit_uniform(rng);
      break;
    case SamplerSpec::Kind::TruncGauss:
      for (std::size_t i = 0; i < node.dim; ++i) {
        std::normal_distribution<double> dist(node.p0[i], node.p1[i]);
        out[i] = truncated_draw([&] { return dist(rng); });
      }
      break;
    case SamplerSpec::Kind::Exponential:
      for (std::size_t i = 0; i < node.dim; ++i) {
        std::exponential_distribution<double> dist(node.p0[i]);
        out[i] = truncated_draw([&] { return dist(rng); });
      }
      break;
    case SamplerSpec::Kind::Product: {
      std::size_t offset = 0;
      for (const auto& c : node.children) {
        sample_into(c, rng, out + offset);
        offset += c.dim();
      }
      break;
    }
    case SamplerSpec::Kind::Mixture:
      sample_into(node.children[pick(node.weights, rng)], rng, out);
      break;
    case SamplerSpec::Kind::Affine:
      sample_into(node.children.front(), rng, out);
      for (std::size_t i = 0; i < node.dim; ++i) out[i] = node.p0[i] * out[i] + node.p1[i];
      break;
    case SamplerSpec::Kind::BoundaryFace:
      boundary_point(node.domain, rng, out);
      break;
    case SamplerSpec::Kind::InitialSlice:
      initial_point(node.domain, rng, out);
      break;
  }
}

PointBatch sample(const SamplerSpec& spec, std::size_t n, Rng& rng) {
  PointBatch batch(spec.dim(), n);
  for (std::size_t p = 0; p < n; ++p) sample_into(spec, rng, batch[p].data());
  return batch;
}

PointBatch sample_boundary(const Domain& domain, std::size_t n, Rng& rng) {
  return sample(SamplerSpec::boundary_face(domain), n, rng);
}

PointBatch sample_initial(const Domain& domain, std::size_t n, Rng& rng) {
  return sample(SamplerSpec::initial_slice(domain), n, rng);
}

}  // namespace dgm
