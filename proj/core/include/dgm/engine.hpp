#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "dgm/expr.hpp"
#include "dgm/network.hpp"
#include "dgm/points.hpp"

namespace dgm {

/// A residual expression flattened into straight-line code over the
/// trial-function values it references. Forward and reverse sweeps.
class ResidualProgram {
 public:
  struct Workspace {
    std::vector<double> values;
    std::vector<double> adjoints;
  };

  ResidualProgram(Expr expr, VarList vars);

  const Expr& expr() const noexcept { return expr_; }
  const VarList& vars() const noexcept { return vars_; }
  /// Exactly the tags appearing in expr(), sorted.
  const std::vector<MultiIndex>& tags() const noexcept { return tags_; }
  std::size_t size() const noexcept { return code_.size(); }

  /// `trial` holds one value per tag(), in tags() order.
  double evaluate(std::span<const double> point, std::span<const double> trial, Workspace& ws) const;
  /// Adds d(value)/d(trial[k]) to trial_adjoint[k]; requires the matching evaluate() on `ws`.
  void adjoint(Workspace& ws, std::span<double> trial_adjoint) const;

 private:
  enum class Op { Const, Var, Trial, Sin, Cos, Exp, Log, Sqrt, Neg, Add, Sub, Mul, Div, Pow };
  struct Instr {
    Op op;
    std::uint32_t a = 0;
    std::uint32_t b = 0;
    double c = 0.0;
    std::size_t index = 0;  // variable or trial slot
    Expr source;
  };

  std::uint32_t compile(const Expr& e, std::unordered_map<const Expr::Node*, std::uint32_t>& seen);
  [[noreturn]] void domain_error(const Instr& ins, const char* what) const;

  Expr expr_;
  VarList vars_;
  std::vector<MultiIndex> tags_;
  std::vector<Instr> code_;
};

/// Loss value, per-term breakdown and gradient with respect to the network parameters.
struct LossReport {
  double loss = 0.0;
  /// Weighted mean-square contribution of each term, in input order; sums to loss.
  std::vector<double> terms;
  std::vector<double> gradient;
};

/// One mean-square penalty: weight * mean_{p in points} program(p)^2.
struct LossTerm {
  const ResidualProgram* program = nullptr;
  const PointBatch* points = nullptr;
  double weight = 1.0;
};

/// loss = mean over the batch of residual(p)^2, with its exact reverse-mode
/// gradient. Throws on an empty batch; evaluation errors name the point index.
LossReport loss_and_grad(const Network& net, std::span<const double> params,
                         const ResidualProgram& program, const PointBatch& batch);

/// Sum of weighted mean-square terms. Terms with empty batches contribute 0.
LossReport soft_loss_and_grad(const Network& net, std::span<const double> params,
                              std::span<const LossTerm> terms);

/// Program values per point (no gradient).
std::vector<double> evaluate_program(const Network& net, std::span<const double> params,
                                     const ResidualProgram& program, const PointBatch& points);

}  // namespace dgm
