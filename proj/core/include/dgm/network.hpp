#pragma once

// Dense networks described by layout strings:
//   f  dense layer (width from `units`)
//   a  activation (name from `activations`)
//   R  save the current tensor for a residual connection
//   +  add the saved tensor to the current one
// Spaces are separators only. "faR fa fa+ f" with units [10, 25, 10, 1] is a
// three-hidden-layer tanh MLP with one skip connection.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dgm/expr.hpp"
#include "dgm/jet.hpp"
#include "dgm/points.hpp"

namespace dgm {

enum class Activation { Tanh, Sigmoid, Relu, Sin };

std::string_view activation_name(Activation a);
Activation activation_from_name(std::string_view name);

/// f^(k)(x) for k = 0..n, written to out[0..n].
void activation_derivatives(Activation a, double x, int n, std::span<double> out);

struct NetworkSpec {
  std::string layout;
  std::vector<std::size_t> units;
  std::vector<Activation> activations;
  std::size_t input_dim = 1;

  bool operator==(const NetworkSpec&) const = default;
};

struct LayerStep {
  enum class Kind { Dense, Activation, ResidualSave, ResidualAdd };
  Kind kind;
  std::size_t in = 0;
  std::size_t out = 0;
  Activation activation = Activation::Tanh;
  /// Dense only: weights (out x in, row-major) then biases (out).
  std::size_t param_offset = 0;
};

using LayerPlan = std::vector<LayerStep>;
using ParameterVector = std::vector<double>;

/// Throws LayoutError.
LayerPlan parse_layout(const NetworkSpec& spec);
std::size_t parameter_count(const LayerPlan& plan);

/// Glorot-uniform weights, zero biases.
ParameterVector init_params(const NetworkSpec& spec, std::uint64_t seed);

/// Derivatives of one network output per point, one column per tag.
struct DerivativeTable {
  std::vector<MultiIndex> tags;
  std::size_t n_points = 0;
  std::vector<double> values;

  double at(std::size_t point, std::size_t tag) const { return values[point * tags.size() + tag]; }
};

class Network {
 public:
  explicit Network(NetworkSpec spec);

  const NetworkSpec& spec() const noexcept { return spec_; }
  const LayerPlan& plan() const noexcept { return plan_; }
  std::size_t input_dim() const noexcept { return spec_.input_dim; }
  std::size_t output_dim() const noexcept { return output_dim_; }
  std::size_t parameter_count() const noexcept { return n_params_; }
  bool uses_activation(Activation a) const;

  /// Row-major n x output_dim.
  std::vector<double> forward(std::span<const double> params, const PointBatch& points) const;

  /// Exact input derivatives of output `output` (machine precision, Taylor-mode).
  /// Throws OrderError for tags of total order > kMaxTotalOrder.
  DerivativeTable input_derivatives(std::span<const double> params, const PointBatch& points,
                                    std::span<const MultiIndex> tags,
                                    std::size_t output = 0) const;

 private:
  void check_params(std::span<const double> params) const;

  NetworkSpec spec_;
  LayerPlan plan_;
  std::size_t output_dim_ = 0;
  std::size_t n_params_ = 0;
};

/// Taylor-mode forward pass over one point with a reverse sweep for
/// parameter gradients. Reuses its buffers across points.
class JetEvaluator {
 public:
  JetEvaluator(const Network& net, JetBasis basis);

  const JetBasis& basis() const noexcept { return basis_; }

  /// Output jets, output_dim x basis().size(), row-major.
  std::span<const double> forward(std::span<const double> params, std::span<const double> point);

  /// grad += d/dtheta <output_adjoint, output jets>, using the last forward().
  void backward(std::span<const double> params, std::span<const double> output_adjoint,
                std::span<double> grad);

 private:
  const Network* net_;
  JetBasis basis_;
  std::size_t S_;
  int K_;
  // values_[0] is the input jet; values_[s + 1] the output of plan step s.
  std::vector<std::vector<double>> values_;
  // Activation steps: powers of the non-constant part (K per unit), series
  // coefficients f^(k)/k! and shifted f^(k+1)/k! (K + 1 per unit).
  std::vector<std::vector<double>> powers_;
  std::vector<std::vector<double>> series_;
  std::vector<std::vector<double>> shifted_;
  std::size_t saved_step_ = 0;
  std::vector<double> adj_;
  std::vector<double> adj_next_;
  std::vector<double> adj_saved_;
  std::vector<double> pow_adj_;
  std::vector<double> scratch_;
};

// Checkpoint: text header line
//   GFDG1 <input_dim> <layout> <units csv> <activations csv>
// followed by the parameters as little-endian IEEE-754 doubles.
struct Checkpoint {
  NetworkSpec spec;
  ParameterVector params;
};

void write_checkpoint(std::ostream& os, const NetworkSpec& spec, std::span<const double> params);
Checkpoint read_checkpoint(std::istream& is);
void save_checkpoint(const std::string& path, const NetworkSpec& spec,
                     std::span<const double> params);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace dgm
