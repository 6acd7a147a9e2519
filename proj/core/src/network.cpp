#include "dgm/network.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include "dgm/errors.hpp"

namespace dgm {

std::string_view activation_name(Activation a) {
  switch (a) {
    case Activation::Tanh: return "tanh";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Relu: return "relu";
    case Activation::Sin: return "sin";
  }
  return "?";
}

Activation activation_from_name(std::string_view name) {
  if (name == "tanh") return Activation::Tanh;
  if (name == "sigmoid") return Activation::Sigmoid;
  if (name == "relu") return Activation::Relu;
  if (name == "sin") return Activation::Sin;
  throw LayoutError("unknown activation '" + std::string(name) +
                    "' (expected tanh, sigmoid, relu or sin)");
}

void activation_derivatives(Activation a, double x, int n, std::span<double> out) {
  if (n > 4) throw OrderError("activation derivatives beyond order 4 are not supported");
  double d[5] = {0, 0, 0, 0, 0};
  switch (a) {
    case Activation::Tanh: {
      const double y = std::tanh(x);
      const double s = 1.0 - y * y;
      d[0] = y;
      d[1] = s;
      d[2] = -2.0 * y * s;
      d[3] = s * (6.0 * y * y - 2.0);
      d[4] = 8.0 * y * (2.0 - 3.0 * y * y) * s;
      break;
    }
    case Activation::Sigmoid: {
      const double y = 1.0 / (1.0 + std::exp(-x));
      const double s = y * (1.0 - y);
      d[0] = y;
      d[1] = s;
      d[2] = s * (1.0 - 2.0 * y);
      d[3] = s * (1.0 - 6.0 * y + 6.0 * y * y);
      d[4] = s * (1.0 - 2.0 * y) * (1.0 - 12.0 * y + 12.0 * y * y);
      break;
    }
    case Activation::Relu:
      d[0] = x > 0 ? x : 0.0;
      d[1] = x > 0 ? 1.0 : 0.0;
      break;
    case Activation::Sin: {
      const double s = std::sin(x);
      const double c = std::cos(x);
      d[0] = s;
      d[1] = c;
      d[2] = -s;
      d[3] = -c;
      d[4] = s;
      break;
    }
  }
  for (int k = 0; k <= n; ++k) out[k] = d[k];
}

// ---------------------------------------------------------------------------
// Layout

LayerPlan parse_layout(const NetworkSpec& spec) {
  if (spec.input_dim == 0) throw LayoutError("layout: input_dim must be positive");
  const auto n_dense = static_cast<std::size_t>(std::count(spec.layout.begin(), spec.layout.end(), 'f'));
  const auto n_act = static_cast<std::size_t>(std::count(spec.layout.begin(), spec.layout.end(), 'a'));
  if (n_dense != spec.units.size())
    throw LayoutError("layout '" + spec.layout + "' has " + std::to_string(n_dense) +
                      " dense layers but " + std::to_string(spec.units.size()) + " units given");
  if (n_act != spec.activations.size())
    throw LayoutError("layout '" + spec.layout + "' has " + std::to_string(n_act) +
                      " activations but " + std::to_string(spec.activations.size()) +
                      " activation names given");
  if (n_dense == 0) throw LayoutError("layout '" + spec.layout + "' has no dense layer");

  LayerPlan plan;
  std::size_t width = spec.input_dim;
  std::size_t offset = 0;
  std::size_t next_unit = 0;
  std::size_t next_act = 0;
  bool open = false;
  std::size_t saved_width = 0;
  for (std::size_t pos = 0; pos < spec.layout.size(); ++pos) {
    const char c = spec.layout[pos];
    switch (c) {
      case ' ':
        break;
      case 'f': {
        const std::size_t out = spec.units[next_unit++];
        if (out == 0) throw LayoutError("layout: units must be positive");
        plan.push_back({LayerStep::Kind::Dense, width, out, Activation::Tanh, offset});
        offset += width * out + out;
        width = out;
        break;
      }
      case 'a':
        plan.push_back({LayerStep::Kind::Activation, width, width, spec.activations[next_act++], 0});
        break;
      case 'R':
        if (open)
          throw LayoutError("layout: nested 'R' at position " + std::to_string(pos) +
                            " (only one open residual connection is allowed)");
        open = true;
        saved_width = width;
        plan.push_back({LayerStep::Kind::ResidualSave, width, width, Activation::Tanh, 0});
        break;
      case '+':
        if (!open)
          throw LayoutError("layout: '+' at position " + std::to_string(pos) +
                            " has no matching 'R'");
        if (saved_width != width)
          throw LayoutError("layout: residual width mismatch at position " +
                            std::to_string(pos) + " (saved " + std::to_string(saved_width) +
                            ", current " + std::to_string(width) + ")");
        open = false;
        plan.push_back({LayerStep::Kind::ResidualAdd, width, width, Activation::Tanh, 0});
        break;
      default:
        throw LayoutError("layout: unknown symbol '" + std::string(1, c) + "' at position " +
                          std::to_string(pos));
    }
  }
  if (open) throw LayoutError("layout: unmatched 'R' (missing '+')");
  return plan;
}

std::size_t parameter_count(const LayerPlan& plan) {
  std::size_t n = 0;
  for (const auto& s : plan)
    if (s.kind == LayerStep::Kind::Dense) n += s.in * s.out + s.out;
  return n;
}

ParameterVector init_params(const NetworkSpec& spec, std::uint64_t seed) {
  const LayerPlan plan = parse_layout(spec);
  ParameterVector theta(parameter_count(plan), 0.0);
  std::mt19937_64 rng(seed);
  for (const auto& s : plan) {
    if (s.kind != LayerStep::Kind::Dense) continue;
    const double bound = std::sqrt(6.0 / static_cast<double>(s.in + s.out));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (std::size_t k = 0; k < s.in * s.out; ++k) theta[s.param_offset + k] = dist(rng);
  }
  return theta;
}

// ---------------------------------------------------------------------------
// Network

Network::Network(NetworkSpec spec) : spec_(std::move(spec)), plan_(parse_layout(spec_)) {
  n_params_ = dgm::parameter_count(plan_);
  output_dim_ = plan_.back().out;
}

bool Network::uses_activation(Activation a) const {
  return std::find(spec_.activations.begin(), spec_.activations.end(), a) !=
         spec_.activations.end();
}

void Network::check_params(std::span<const double> params) const {
  if (params.size() != n_params_)
    throw Error("parameter vector has " + std::to_string(params.size()) + " entries, network needs " +
                std::to_string(n_params_));
}

std::vector<double> Network::forward(std::span<const double> params, const PointBatch& points) const {
  check_params(params);
  if (points.dim() != spec_.input_dim && !points.empty())
    throw Error("point dimension " + std::to_string(points.dim()) + " does not match network input " +
                std::to_string(spec_.input_dim));
  JetEvaluator eval(*this, JetBasis(spec_.input_dim, {}));
  std::vector<double> out;
  out.reserve(points.size() * output_dim_);
  for (std::size_t p = 0; p < points.size(); ++p) {
    auto y = eval.forward(params, points[p]);
    out.insert(out.end(), y.begin(), y.end());
  }
  return out;
}

DerivativeTable Network::input_derivatives(std::span<const double> params, const PointBatch& points,
                                           std::span<const MultiIndex> tags,
                                           std::size_t output) const {
  check_params(params);
  if (points.dim() != spec_.input_dim && !points.empty())
    throw Error("point dimension does not match network input");
  if (output >= output_dim_) throw Error("output index out of range");
  for (const auto& t : tags) {
    if (t.size() != spec_.input_dim) throw Error("derivative tag size does not match network input");
    if (t.order() > kMaxTotalOrder)
      throw OrderError("unsupported derivative tag order " + std::to_string(t.order()) +
                       " (maximum " + std::to_string(kMaxTotalOrder) + ")");
  }
  JetBasis basis(spec_.input_dim, tags);
  std::vector<std::size_t> slots;
  std::vector<double> scale;
  for (const auto& t : tags) {
    slots.push_back(*basis.index_of(t));
    scale.push_back(t.factorial());
  }
  JetEvaluator eval(*this, std::move(basis));
  const std::size_t S = eval.basis().size();

  DerivativeTable table;
  table.tags.assign(tags.begin(), tags.end());
  table.n_points = points.size();
  table.values.reserve(points.size() * tags.size());
  for (std::size_t p = 0; p < points.size(); ++p) {
    auto y = eval.forward(params, points[p]);
    for (std::size_t k = 0; k < tags.size(); ++k)
      table.values.push_back(scale[k] * y[output * S + slots[k]]);
  }
  return table;
}

// ---------------------------------------------------------------------------
// JetEvaluator

JetEvaluator::JetEvaluator(const Network& net, JetBasis basis)
    : net_(&net), basis_(std::move(basis)), S_(basis_.size()), K_(basis_.max_degree()) {
  if (basis_.n_vars() != net.input_dim())
    throw Error("jet basis dimension does not match network input");
  const auto& plan = net.plan();
  values_.resize(plan.size() + 1);
  powers_.resize(plan.size());
  series_.resize(plan.size());
  shifted_.resize(plan.size());
  values_[0].assign(net.input_dim() * S_, 0.0);
  std::size_t widest = net.input_dim();
  for (std::size_t s = 0; s < plan.size(); ++s) {
    const auto& step = plan[s];
    values_[s + 1].assign(step.out * S_, 0.0);
    widest = std::max(widest, step.out);
    if (step.kind == LayerStep::Kind::Activation) {
      powers_[s].assign(step.out * static_cast<std::size_t>(K_) * S_, 0.0);
      series_[s].assign(step.out * static_cast<std::size_t>(K_ + 1), 0.0);
      shifted_[s].assign(step.out * static_cast<std::size_t>(K_ + 1), 0.0);
    }
  }
  adj_.assign(widest * S_, 0.0);
  adj_next_.assign(widest * S_, 0.0);
  adj_saved_.assign(widest * S_, 0.0);
  pow_adj_.assign(static_cast<std::size_t>(K_ + 1) * S_, 0.0);
  scratch_.assign(static_cast<std::size_t>(K_ + 2), 0.0);
}

std::span<const double> JetEvaluator::forward(std::span<const double> params,
                                              std::span<const double> point) {
  const auto& plan = net_->plan();
  const std::size_t S = S_;
  const auto K = static_cast<std::size_t>(K_);
  {
    auto& x = values_[0];
    std::fill(x.begin(), x.end(), 0.0);
    for (std::size_t v = 0; v < point.size(); ++v) {
      x[v * S] = point[v];
      if (auto slot = basis_.linear_slot(v)) x[v * S + *slot] = 1.0;
    }
  }
  for (std::size_t s = 0; s < plan.size(); ++s) {
    const auto& step = plan[s];
    const auto& X = values_[s];
    auto& Y = values_[s + 1];
    switch (step.kind) {
      case LayerStep::Kind::Dense: {
        const double* W = params.data() + step.param_offset;
        const double* b = W + step.in * step.out;
        for (std::size_t j = 0; j < step.out; ++j) {
          double* y = Y.data() + j * S;
          std::fill(y, y + S, 0.0);
          for (std::size_t i = 0; i < step.in; ++i) {
            const double w = W[j * step.in + i];
            const double* x = X.data() + i * S;
            for (std::size_t c = 0; c < S; ++c) y[c] += w * x[c];
          }
          y[0] += b[j];
        }
        break;
      }
      case LayerStep::Kind::Activation: {
        for (std::size_t u = 0; u < step.out; ++u) {
          const double* x = X.data() + u * S;
          double* y = Y.data() + u * S;
          double* ser = series_[s].data() + u * (K + 1);
          double* shf = shifted_[s].data() + u * (K + 1);
          activation_derivatives(step.activation, x[0], K_ + 1, scratch_);
          double inv_fact = 1.0;
          for (std::size_t k = 0; k <= K; ++k) {
            if (k > 0) inv_fact /= static_cast<double>(k);
            ser[k] = scratch_[k] * inv_fact;
            shf[k] = scratch_[k + 1] * inv_fact;
          }
          std::fill(y, y + S, 0.0);
          y[0] = ser[0];
          if (K == 0) continue;
          double* P = powers_[s].data() + u * K * S;
          // P_1 = delta (x without its constant term)
          std::copy(x, x + S, P);
          P[0] = 0.0;
          for (std::size_t k = 1; k < K; ++k) {
            double* next = P + k * S;
            std::fill(next, next + S, 0.0);
            jet_mul_add(basis_, {P + (k - 1) * S, S}, {P, S}, {next, S});
          }
          for (std::size_t k = 1; k <= K; ++k) {
            const double* pk = P + (k - 1) * S;
            for (std::size_t c = 1; c < S; ++c) y[c] += ser[k] * pk[c];
          }
        }
        break;
      }
      case LayerStep::Kind::ResidualSave:
        std::copy(X.begin(), X.end(), Y.begin());
        saved_step_ = s;
        break;
      case LayerStep::Kind::ResidualAdd: {
        const auto& saved = values_[saved_step_ + 1];
        for (std::size_t k = 0; k < Y.size(); ++k) Y[k] = X[k] + saved[k];
        break;
      }
    }
  }
  return values_.back();
}

void JetEvaluator::backward(std::span<const double> params, std::span<const double> output_adjoint,
                            std::span<double> grad) {
  const auto& plan = net_->plan();
  const std::size_t S = S_;
  const auto K = static_cast<std::size_t>(K_);
  std::copy(output_adjoint.begin(), output_adjoint.end(), adj_.begin());
  std::fill(adj_saved_.begin(), adj_saved_.end(), 0.0);

  for (std::size_t s = plan.size(); s-- > 0;) {
    const auto& step = plan[s];
    const auto& X = values_[s];
    switch (step.kind) {
      case LayerStep::Kind::Dense: {
        const double* W = params.data() + step.param_offset;
        double* gW = grad.data() + step.param_offset;
        double* gb = gW + step.in * step.out;
        std::fill(adj_next_.begin(), adj_next_.begin() + step.in * S, 0.0);
        for (std::size_t j = 0; j < step.out; ++j) {
          const double* ybar = adj_.data() + j * S;
          gb[j] += ybar[0];
          for (std::size_t i = 0; i < step.in; ++i) {
            const double* x = X.data() + i * S;
            double* xbar = adj_next_.data() + i * S;
            const double w = W[j * step.in + i];
            double acc = 0.0;
            for (std::size_t c = 0; c < S; ++c) {
              acc += ybar[c] * x[c];
              xbar[c] += w * ybar[c];
            }
            gW[j * step.in + i] += acc;
          }
        }
        break;
      }
      case LayerStep::Kind::Activation: {
        for (std::size_t u = 0; u < step.out; ++u) {
          const double* ybar = adj_.data() + u * S;
          double* xbar = adj_next_.data() + u * S;
          const double* shf = shifted_[s].data() + u * (K + 1);
          const double* ser = series_[s].data() + u * (K + 1);
          double x0bar = ybar[0] * shf[0];
          std::fill(xbar, xbar + S, 0.0);
          if (K > 0) {
            const double* P = powers_[s].data() + u * K * S;
            // pow_adj_ row k-1 holds the adjoint of P_k
            for (std::size_t k = 1; k <= K; ++k) {
              const double* pk = P + (k - 1) * S;
              double* pbar = pow_adj_.data() + (k - 1) * S;
              double dot = 0.0;
              for (std::size_t c = 1; c < S; ++c) {
                dot += ybar[c] * pk[c];
                pbar[c] = ser[k] * ybar[c];
              }
              pbar[0] = 0.0;
              x0bar += dot * shf[k];
            }
            // P_k = P_{k-1} * delta
            for (std::size_t k = K; k >= 2; --k) {
              const double* prev = P + (k - 2) * S;
              const double* pbar = pow_adj_.data() + (k - 1) * S;
              double* prev_bar = pow_adj_.data() + (k - 2) * S;
              for (const auto& pr : basis_.products()) {
                const double g = pbar[pr.out];
                prev_bar[pr.lhs] += g * P[pr.rhs];
                xbar[pr.rhs] += g * prev[pr.lhs];
              }
            }
            for (std::size_t c = 1; c < S; ++c) xbar[c] += pow_adj_[c];
          }
          xbar[0] = x0bar;
        }
        break;
      }
      case LayerStep::Kind::ResidualAdd:
        std::copy(adj_.begin(), adj_.begin() + step.out * S, adj_saved_.begin());
        std::copy(adj_.begin(), adj_.begin() + step.out * S, adj_next_.begin());
        break;
      case LayerStep::Kind::ResidualSave:
        for (std::size_t k = 0; k < step.out * S; ++k) adj_next_[k] = adj_[k] + adj_saved_[k];
        break;
    }
    std::swap(adj_, adj_next_);
  }
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

template <typename T, typename F>
std::string join_csv(const std::vector<T>& items, F&& fmt) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ',';
    out += fmt(items[i]);
  }
  return out;
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

}  // namespace

void write_checkpoint(std::ostream& os, const NetworkSpec& spec, std::span<const double> params) {
  Network net(spec);
  if (params.size() != net.parameter_count())
    throw Error("checkpoint: parameter count does not match network");
  os << "GFDG1 " << spec.input_dim << ' ' << spec.layout << ' '
     << join_csv(spec.units, [](std::size_t u) { return std::to_string(u); }) << ' '
     << join_csv(spec.activations, [](Activation a) { return std::string(activation_name(a)); })
     << '\n';
  for (double v : params) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    char bytes[8];
    for (int k = 0; k < 8; ++k) bytes[k] = static_cast<char>((bits >> (8 * k)) & 0xffu);
    os.write(bytes, 8);
  }
  if (!os) throw Error("checkpoint: write failed");
}

Checkpoint read_checkpoint(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) throw Error("checkpoint: missing header");
  const std::string magic = "GFDG1 ";
  if (header.rfind(magic, 0) != 0) throw Error("checkpoint: bad magic (expected GFDG1)");
  std::string rest = header.substr(magic.size());
  const auto sp = rest.find(' ');
  const auto last = rest.rfind(' ');
  const auto before_last = last == std::string::npos || last == 0 ? std::string::npos
                                                                  : rest.rfind(' ', last - 1);
  if (sp == std::string::npos || before_last == std::string::npos || before_last <= sp)
    throw Error("checkpoint: malformed header");

  Checkpoint ck;
  try {
    ck.spec.input_dim = std::stoul(rest.substr(0, sp));
  } catch (const std::exception&) {
    throw Error("checkpoint: malformed input_dim");
  }
  ck.spec.layout = rest.substr(sp + 1, before_last - sp - 1);
  for (const auto& u : split_csv(rest.substr(before_last + 1, last - before_last - 1))) {
    try {
      ck.spec.units.push_back(std::stoul(u));
    } catch (const std::exception&) {
      throw Error("checkpoint: malformed units");
    }
  }
  for (const auto& a : split_csv(rest.substr(last + 1))) ck.spec.activations.push_back(activation_from_name(a));

  Network net(ck.spec);
  ck.params.resize(net.parameter_count());
  for (auto& v : ck.params) {
    unsigned char bytes[8];
    if (!is.read(reinterpret_cast<char*>(bytes), 8)) throw Error("checkpoint: truncated parameters");
    std::uint64_t bits = 0;
    for (int k = 0; k < 8; ++k) bits |= static_cast<std::uint64_t>(bytes[k]) << (8 * k);
    v = std::bit_cast<double>(bits);
  }
  return ck;
}

void save_checkpoint(const std::string& path, const NetworkSpec& spec, std::span<const double> params) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("checkpoint: cannot open '" + path + "' for writing");
  write_checkpoint(os, spec, params);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("checkpoint: cannot open '" + path + "'");
  return read_checkpoint(is);
}

}  // namespace dgm
