#include "dgm/engine.hpp"

#include <algorithm>
#include <cmath>

#include "dgm/errors.hpp"

namespace dgm {

ResidualProgram::ResidualProgram(Expr expr, VarList vars)
    : expr_(std::move(expr)), vars_(std::move(vars)), tags_(trial_tags(expr_)) {
  for (const auto& t : tags_)
    if (t.size() != vars_.size()) throw Error("residual program: tag size does not match variables");
  std::unordered_map<const Expr::Node*, std::uint32_t> seen;
  compile(expr_, seen);
}

std::uint32_t ResidualProgram::compile(
    const Expr& e, std::unordered_map<const Expr::Node*, std::uint32_t>& seen) {
  if (e.id() != nullptr)
    if (auto it = seen.find(e.id()); it != seen.end()) return it->second;
  Instr ins{.op = Op::Const, .source = e};
  switch (e.kind()) {
    case NodeKind::Const:
      ins.op = Op::Const;
      ins.c = e.value();
      break;
    case NodeKind::Var:
      if (e.var() >= vars_.size()) throw Error("residual program: variable index out of range");
      ins.op = Op::Var;
      ins.index = e.var();
      break;
    case NodeKind::Trial:
      ins.op = Op::Trial;
      ins.index = static_cast<std::size_t>(
          std::lower_bound(tags_.begin(), tags_.end(), e.tag()) - tags_.begin());
      break;
    case NodeKind::Unary: {
      ins.a = compile(e.child(), seen);
      static constexpr Op kOps[] = {Op::Sin, Op::Cos, Op::Exp, Op::Log, Op::Sqrt, Op::Neg};
      ins.op = kOps[static_cast<int>(e.unary_op())];
      break;
    }
    case NodeKind::Binary: {
      ins.a = compile(e.lhs(), seen);
      ins.b = compile(e.rhs(), seen);
      static constexpr Op kOps[] = {Op::Add, Op::Sub, Op::Mul, Op::Div, Op::Pow};
      ins.op = kOps[static_cast<int>(e.binary_op())];
      if (ins.op == Op::Pow) ins.c = e.rhs().value();
      break;
    }
  }
  code_.push_back(std::move(ins));
  const auto idx = static_cast<std::uint32_t>(code_.size() - 1);
  if (e.id() != nullptr) seen.emplace(e.id(), idx);
  return idx;
}

void ResidualProgram::domain_error(const Instr& ins, const char* what) const {
  throw EvalError(std::string(what) + " in '" + to_string(ins.source, vars_) + "'");
}

double ResidualProgram::evaluate(std::span<const double> point, std::span<const double> trial,
                                 Workspace& ws) const {
  ws.values.resize(code_.size());
  double* v = ws.values.data();
  for (std::size_t i = 0; i < code_.size(); ++i) {
    const Instr& ins = code_[i];
    switch (ins.op) {
      case Op::Const: v[i] = ins.c; break;
      case Op::Var: v[i] = point[ins.index]; break;
      case Op::Trial: v[i] = trial[ins.index]; break;
      case Op::Sin: v[i] = std::sin(v[ins.a]); break;
      case Op::Cos: v[i] = std::cos(v[ins.a]); break;
      case Op::Exp: v[i] = std::exp(v[ins.a]); break;
      case Op::Log:
        if (!(v[ins.a] > 0)) domain_error(ins, "log of non-positive value");
        v[i] = std::log(v[ins.a]);
        break;
      case Op::Sqrt:
        if (v[ins.a] < 0) domain_error(ins, "sqrt of negative value");
        v[i] = std::sqrt(v[ins.a]);
        break;
      case Op::Neg: v[i] = -v[ins.a]; break;
      case Op::Add: v[i] = v[ins.a] + v[ins.b]; break;
      case Op::Sub: v[i] = v[ins.a] - v[ins.b]; break;
      case Op::Mul: v[i] = v[ins.a] * v[ins.b]; break;
      case Op::Div:
        if (v[ins.b] == 0.0) domain_error(ins, "division by zero");
        v[i] = v[ins.a] / v[ins.b];
        break;
      case Op::Pow: {
        double r = 1.0;
        for (int k = 0; k < static_cast<int>(ins.c); ++k) r *= v[ins.a];
        v[i] = r;
        break;
      }
    }
  }
  return code_.empty() ? 0.0 : v[code_.size() - 1];
}

void ResidualProgram::adjoint(Workspace& ws, std::span<double> trial_adjoint) const {
  if (code_.empty()) return;
  ws.adjoints.assign(code_.size(), 0.0);
  const double* v = ws.values.data();
  double* g = ws.adjoints.data();
  g[code_.size() - 1] = 1.0;
  for (std::size_t i = code_.size(); i-- > 0;) {
    const Instr& ins = code_[i];
    const double gi = g[i];
    if (gi == 0.0) continue;
    switch (ins.op) {
      case Op::Const:
      case Op::Var: break;
      case Op::Trial: trial_adjoint[ins.index] += gi; break;
      case Op::Sin: g[ins.a] += gi * std::cos(v[ins.a]); break;
      case Op::Cos: g[ins.a] -= gi * std::sin(v[ins.a]); break;
      case Op::Exp: g[ins.a] += gi * v[i]; break;
      case Op::Log: g[ins.a] += gi / v[ins.a]; break;
      case Op::Sqrt: g[ins.a] += gi / (2.0 * v[i]); break;
      case Op::Neg: g[ins.a] -= gi; break;
      case Op::Add:
        g[ins.a] += gi;
        g[ins.b] += gi;
        break;
      case Op::Sub:
        g[ins.a] += gi;
        g[ins.b] -= gi;
        break;
      case Op::Mul:
        g[ins.a] += gi * v[ins.b];
        g[ins.b] += gi * v[ins.a];
        break;
      case Op::Div:
        g[ins.a] += gi / v[ins.b];
        g[ins.b] -= gi * v[ins.a] / (v[ins.b] * v[ins.b]);
        break;
      case Op::Pow: {
        const int k = static_cast<int>(ins.c);
        double r = static_cast<double>(k);
        for (int j = 0; j < k - 1; ++j) r *= v[ins.a];
        g[ins.a] += gi * r;
        break;
      }
    }
  }
}

// ---------------------------------------------------------------------------

namespace {

/// Evaluates one program against the network, optionally accumulating the gradient.
class TermEvaluator {
 public:
  TermEvaluator(const Network& net, const ResidualProgram& program)
      : program_(program), jets_(net, JetBasis(net.input_dim(), program.tags())) {
    for (const auto& t : program.tags()) {
      slots_.push_back(*jets_.basis().index_of(t));
      scale_.push_back(t.factorial());
    }
    trial_.resize(slots_.size());
    trial_adj_.resize(slots_.size());
    out_adj_.assign(net.output_dim() * jets_.basis().size(), 0.0);
  }

  double value(std::span<const double> params, std::span<const double> point) {
    auto y = jets_.forward(params, point);
    for (std::size_t k = 0; k < slots_.size(); ++k) trial_[k] = scale_[k] * y[slots_[k]];
    return program_.evaluate(point, trial_, ws_);
  }

  /// After value(): grad += seed * d(value)/d(theta).
  void accumulate(std::span<const double> params, double seed, std::span<double> grad) {
    std::fill(trial_adj_.begin(), trial_adj_.end(), 0.0);
    program_.adjoint(ws_, trial_adj_);
    std::fill(out_adj_.begin(), out_adj_.end(), 0.0);
    for (std::size_t k = 0; k < slots_.size(); ++k)
      out_adj_[slots_[k]] += seed * trial_adj_[k] * scale_[k];
    jets_.backward(params, out_adj_, grad);
  }

 private:
  const ResidualProgram& program_;
  JetEvaluator jets_;
  std::vector<std::size_t> slots_;
  std::vector<double> scale_;
  std::vector<double> trial_;
  std::vector<double> trial_adj_;
  std::vector<double> out_adj_;
  ResidualProgram::Workspace ws_;
};

void check_batch(const Network& net, const PointBatch& batch) {
  if (batch.dim() != net.input_dim())
    throw Error("batch dimension " + std::to_string(batch.dim()) +
                " does not match network input " + std::to_string(net.input_dim()));
}

double accumulate_term(const Network& net, std::span<const double> params, const LossTerm& term,
                       std::span<double> grad) {
  const PointBatch& batch = *term.points;
  if (batch.empty()) return 0.0;
  check_batch(net, batch);
  TermEvaluator eval(net, *term.program);
  const double scale = term.weight / static_cast<double>(batch.size());
  double sum = 0.0;
  for (std::size_t p = 0; p < batch.size(); ++p) {
    double r = 0.0;
    try {
      r = eval.value(params, batch[p]);
    } catch (const EvalError& e) {
      throw EvalError("point " + std::to_string(p) + ": " + e.what());
    }
    sum += r * r;
    eval.accumulate(params, 2.0 * scale * r, grad);
  }
  return scale * sum;
}

}  // namespace

LossReport loss_and_grad(const Network& net, std::span<const double> params,
                         const ResidualProgram& program, const PointBatch& batch) {
  if (batch.empty()) throw Error("loss_and_grad: empty batch");
  const LossTerm term{&program, &batch, 1.0};
  return soft_loss_and_grad(net, params, {&term, 1});
}

LossReport soft_loss_and_grad(const Network& net, std::span<const double> params,
                              std::span<const LossTerm> terms) {
  if (params.size() != net.parameter_count())
    throw Error("parameter vector size does not match network");
  LossReport report;
  report.gradient.assign(params.size(), 0.0);
  for (const auto& term : terms) {
    const double contribution = accumulate_term(net, params, term, report.gradient);
    report.terms.push_back(contribution);
    report.loss += contribution;
  }
  return report;
}

std::vector<double> evaluate_program(const Network& net, std::span<const double> params,
                                     const ResidualProgram& program, const PointBatch& points) {
  std::vector<double> out;
  if (points.empty()) return out;
  check_batch(net, points);
  TermEvaluator eval(net, program);
  out.reserve(points.size());
  for (std::size_t p = 0; p < points.size(); ++p) {
    try {
      out.push_back(eval.value(params, points[p]));
    } catch (const EvalError& e) {
      throw EvalError("point " + std::to_string(p) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace dgm
