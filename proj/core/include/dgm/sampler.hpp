#pragma once

// Point samplers. Base distributions live on [0,1]^d; Affine (usually
// inserted via `onto`) maps them onto the problem rectangle. Product
// concatenates independent coordinates, Mixture picks a component per
// point with the given weights.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include "dgm/domain.hpp"
#include "dgm/points.hpp"

namespace dgm {

using Rng = std::mt19937_64;

class SamplerSpec {
 public:
  enum class Kind {
    Uniform,
    TruncGauss,
    Exponential,
    Product,
    Mixture,
    Affine,
    BoundaryFace,
    InitialSlice
  };

  struct Box {
    std::vector<double> lo;
    std::vector<double> hi;
  };

  static SamplerSpec uniform(std::size_t dim);
  /// Normal(mean_i, sd_i) per coordinate, truncated to [0,1] by rejection.
  static SamplerSpec truncated_gaussian(std::vector<double> mean, std::vector<double> sd);
  /// Exponential(rate_i) per coordinate, truncated to [0,1] by rejection.
  static SamplerSpec exponential(std::vector<double> rate);
  static SamplerSpec product(std::vector<SamplerSpec> children);
  /// Weights must be positive and sum to 1 within 1e-12.
  static SamplerSpec mixture(std::vector<SamplerSpec> children, std::vector<double> weights);
  /// x -> scale * x + shift, per coordinate.
  static SamplerSpec affine(SamplerSpec child, std::vector<double> scale, std::vector<double> shift);
  /// Affine map of [0,1]^d onto the domain rectangle.
  static SamplerSpec onto(const Domain& domain, SamplerSpec child);
  static SamplerSpec boundary_face(Domain domain);
  static SamplerSpec initial_slice(Domain domain);

  Kind kind() const noexcept { return node_->kind; }
  std::size_t dim() const noexcept { return node_->dim; }
  /// Axis-aligned box containing every sample.
  Box support() const;

  const std::vector<SamplerSpec>& children() const noexcept { return node_->children; }
  const std::vector<double>& weights() const noexcept { return node_->weights; }

 private:
  struct Node {
    Kind kind = Kind::Uniform;
    std::size_t dim = 0;
    std::vector<double> p0;  // mean / rate / scale
    std::vector<double> p1;  // sd / shift
    std::vector<double> weights;
    std::vector<SamplerSpec> children;
    Domain domain;
  };

  explicit SamplerSpec(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  friend void sample_into(const SamplerSpec&, Rng&, double*);

  std::shared_ptr<const Node> node_;
};

/// n i.i.d. draws. Deterministic for a given generator state.
PointBatch sample(const SamplerSpec& spec, std::size_t n, Rng& rng);

/// Points on the spatial boundary of the domain (times [t0, T] when present).
/// Faces are chosen with probability proportional to their measure.
PointBatch sample_boundary(const Domain& domain, std::size_t n, Rng& rng);

/// Points with t = t0 exactly and space uniform on Omega. Throws without a time axis.
PointBatch sample_initial(const Domain& domain, std::size_t n, Rng& rng);

/// Retry cap for truncated distributions (per point).
inline constexpr std::size_t kMaxRejections = 1'000'000;

}  // namespace dgm
