#include "dgm/expr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "dgm/errors.hpp"

namespace dgm {

// ---------------------------------------------------------------------------
// VarList / MultiIndex

VarList::VarList(std::vector<std::string> names) : names_(std::move(names)) {
  std::set<std::string> seen;
  for (std::size_t i = 0; i < names_.size(); ++i) {
    const auto& n = names_[i];
    if (n.empty()) throw Error("empty variable name");
    if (!seen.insert(n).second) throw Error("duplicate variable name '" + n + "'");
    if (n == kTimeName && i + 1 != names_.size())
      throw Error("time variable 't' must be the last variable");
    if (n == "u" || n == "D" || n == "pi")
      throw Error("variable name '" + n + "' is reserved");
  }
}

VarList VarList::standard(std::size_t n_spatial, bool with_time) {
  std::vector<std::string> names;
  if (n_spatial <= 3) {
    static constexpr const char* kShort[] = {"x", "y", "z"};
    for (std::size_t i = 0; i < n_spatial; ++i) names.emplace_back(kShort[i]);
  } else {
    for (std::size_t i = 0; i < n_spatial; ++i) names.push_back("x" + std::to_string(i + 1));
  }
  if (with_time) names.emplace_back(kTimeName);
  return VarList(std::move(names));
}

std::optional<std::size_t> VarList::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return i;
  return std::nullopt;
}

std::optional<std::size_t> VarList::time_index() const {
  if (!names_.empty() && names_.back() == kTimeName) return names_.size() - 1;
  return std::nullopt;
}

int MultiIndex::order() const {
  int total = 0;
  for (auto c : counts_) total += c;
  return total;
}

MultiIndex MultiIndex::incremented(std::size_t var) const {
  MultiIndex out = *this;
  ++out.counts_.at(var);
  return out;
}

bool MultiIndex::divides(const MultiIndex& other) const {
  if (other.size() != size()) return false;
  for (std::size_t i = 0; i < size(); ++i)
    if (counts_[i] > other.counts_[i]) return false;
  return true;
}

double MultiIndex::factorial() const {
  double f = 1.0;
  for (auto c : counts_)
    for (int k = 2; k <= c; ++k) f *= k;
  return f;
}

MultiIndex MultiIndex::operator+(const MultiIndex& other) const {
  MultiIndex out = *this;
  for (std::size_t i = 0; i < size(); ++i) out.counts_[i] += other.counts_.at(i);
  return out;
}

std::string MultiIndex::label(const VarList& vars) const {
  std::string s = "u";
  if (order() == 0) return s;
  s += '_';
  for (std::size_t i = 0; i < size(); ++i)
    for (int k = 0; k < counts_[i]; ++k) s += vars.name(i);
  return s;
}

void check_order_caps(const MultiIndex& tag, const VarList& vars) {
  int spatial = 0;
  int time = 0;
  const auto t = vars.time_index();
  for (std::size_t i = 0; i < tag.size(); ++i) {
    if (t && *t == i)
      time += tag[i];
    else
      spatial += tag[i];
  }
  if (time > kMaxTimeOrder)
    throw OrderError("time derivative order " + std::to_string(time) +
                     " exceeds supported maximum " + std::to_string(kMaxTimeOrder));
  if (spatial > kMaxSpatialOrder)
    throw OrderError("spatial derivative order " + std::to_string(spatial) +
                     " exceeds supported maximum " + std::to_string(kMaxSpatialOrder));
  if (time + spatial > kMaxTotalOrder)
    throw OrderError("total derivative order " + std::to_string(time + spatial) +
                     " exceeds supported maximum " + std::to_string(kMaxTotalOrder));
}

// ---------------------------------------------------------------------------
// Expr

namespace {

const Expr::Node& zero_node() {
  static const Expr::Node node{};
  return node;
}

}  // namespace

Expr::Expr() = default;

#define DGM_NODE (node_ ? *node_ : zero_node())

Expr Expr::constant(double value) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Const;
  n->value = value;
  return Expr(std::move(n));
}

Expr Expr::variable(std::size_t index, std::string name) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Var;
  n->var = index;
  n->name = std::move(name);
  return Expr(std::move(n));
}

Expr Expr::trial(MultiIndex tag) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Trial;
  n->tag = std::move(tag);
  return Expr(std::move(n));
}

Expr Expr::raw_unary(UnaryOp op, Expr child) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Unary;
  n->uop = op;
  n->a = std::move(child);
  return Expr(std::move(n));
}

Expr Expr::raw_binary(BinaryOp op, Expr lhs, Expr rhs) {
  if (op == BinaryOp::Pow) {
    const double k = rhs.kind() == NodeKind::Const ? rhs.value() : -1.0;
    if (!(k >= 0 && k <= 4 && k == std::floor(k)))
      throw Error("'^' requires a constant integer exponent in 0..4");
  }
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Binary;
  n->bop = op;
  n->a = std::move(lhs);
  n->b = std::move(rhs);
  return Expr(std::move(n));
}

NodeKind Expr::kind() const { return DGM_NODE.kind; }
double Expr::value() const { return DGM_NODE.value; }
std::size_t Expr::var() const { return DGM_NODE.var; }
const std::string& Expr::var_name() const { return DGM_NODE.name; }
const MultiIndex& Expr::tag() const { return DGM_NODE.tag; }
UnaryOp Expr::unary_op() const { return DGM_NODE.uop; }
BinaryOp Expr::binary_op() const { return DGM_NODE.bop; }
const Expr& Expr::child() const { return DGM_NODE.a; }
const Expr& Expr::lhs() const { return DGM_NODE.a; }
const Expr& Expr::rhs() const { return DGM_NODE.b; }

#undef DGM_NODE

bool Expr::is_constant(double v) const { return kind() == NodeKind::Const && value() == v; }

bool Expr::operator==(const Expr& other) const {
  if (node_ == other.node_) return true;
  if (kind() != other.kind()) return false;
  switch (kind()) {
    case NodeKind::Const:
      return value() == other.value();
    case NodeKind::Var:
      return var() == other.var();
    case NodeKind::Trial:
      return tag() == other.tag();
    case NodeKind::Unary:
      return unary_op() == other.unary_op() && child() == other.child();
    case NodeKind::Binary:
      return binary_op() == other.binary_op() && lhs() == other.lhs() && rhs() == other.rhs();
  }
  return false;
}

// ---------------------------------------------------------------------------
// Folding

namespace {

double apply_unary(UnaryOp op, double x) {
  switch (op) {
    case UnaryOp::Sin: return std::sin(x);
    case UnaryOp::Cos: return std::cos(x);
    case UnaryOp::Exp: return std::exp(x);
    case UnaryOp::Log: return std::log(x);
    case UnaryOp::Sqrt: return std::sqrt(x);
    case UnaryOp::Neg: return -x;
  }
  return 0.0;
}

double int_pow(double base, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= base;
  return r;
}

double apply_binary(BinaryOp op, double a, double b) {
  switch (op) {
    case BinaryOp::Add: return a + b;
    case BinaryOp::Sub: return a - b;
    case BinaryOp::Mul: return a * b;
    case BinaryOp::Div: return a / b;
    case BinaryOp::Pow: return int_pow(a, static_cast<int>(b));
  }
  return 0.0;
}

bool domain_ok(UnaryOp op, double x) {
  if (op == UnaryOp::Log) return x > 0;
  if (op == UnaryOp::Sqrt) return x >= 0;
  return true;
}

}  // namespace

Expr make_unary(UnaryOp op, Expr child) {
  if (child.kind() == NodeKind::Const && domain_ok(op, child.value())) {
    const double r = apply_unary(op, child.value());
    if (std::isfinite(r)) return Expr::constant(r);
  }
  if (op == UnaryOp::Neg && child.kind() == NodeKind::Unary && child.unary_op() == UnaryOp::Neg)
    return child.child();
  return Expr::raw_unary(op, std::move(child));
}

Expr make_binary(BinaryOp op, Expr a, Expr b) {
  if (a.kind() == NodeKind::Const && b.kind() == NodeKind::Const &&
      !(op == BinaryOp::Div && b.value() == 0.0)) {
    if (op == BinaryOp::Pow) Expr::raw_binary(op, a, b);  // validates exponent
    const double r = apply_binary(op, a.value(), b.value());
    if (std::isfinite(r)) return Expr::constant(r);
  }
  switch (op) {
    case BinaryOp::Add:
      if (a.is_constant(0.0)) return b;
      if (b.is_constant(0.0)) return a;
      if (a == b) return make_binary(BinaryOp::Mul, Expr::constant(2.0), a);
      break;
    case BinaryOp::Sub:
      if (b.is_constant(0.0)) return a;
      if (a.is_constant(0.0)) return make_unary(UnaryOp::Neg, b);
      if (a == b) return Expr::constant(0.0);
      break;
    case BinaryOp::Mul:
      if (a.is_constant(0.0) || b.is_constant(0.0)) return Expr::constant(0.0);
      if (a.is_constant(1.0)) return b;
      if (b.is_constant(1.0)) return a;
      if (a.is_constant(-1.0)) return make_unary(UnaryOp::Neg, b);
      if (b.is_constant(-1.0)) return make_unary(UnaryOp::Neg, a);
      break;
    case BinaryOp::Div:
      if (b.is_constant(1.0)) return a;
      if (a.is_constant(0.0) && !b.is_constant(0.0)) return Expr::constant(0.0);
      break;
    case BinaryOp::Pow:
      if (b.is_constant(0.0)) return Expr::constant(1.0);
      if (b.is_constant(1.0)) return a;
      break;
  }
  return Expr::raw_binary(op, std::move(a), std::move(b));
}

Expr operator+(const Expr& a, const Expr& b) { return make_binary(BinaryOp::Add, a, b); }
Expr operator-(const Expr& a, const Expr& b) { return make_binary(BinaryOp::Sub, a, b); }
Expr operator*(const Expr& a, const Expr& b) { return make_binary(BinaryOp::Mul, a, b); }
Expr operator/(const Expr& a, const Expr& b) { return make_binary(BinaryOp::Div, a, b); }
Expr operator-(const Expr& a) { return make_unary(UnaryOp::Neg, a); }
Expr pow(const Expr& base, int exponent) {
  return make_binary(BinaryOp::Pow, base, Expr::constant(exponent));
}
Expr sin(const Expr& e) { return make_unary(UnaryOp::Sin, e); }
Expr cos(const Expr& e) { return make_unary(UnaryOp::Cos, e); }
Expr exp(const Expr& e) { return make_unary(UnaryOp::Exp, e); }
Expr log(const Expr& e) { return make_unary(UnaryOp::Log, e); }
Expr sqrt(const Expr& e) { return make_unary(UnaryOp::Sqrt, e); }

Expr fold(const Expr& e) {
  switch (e.kind()) {
    case NodeKind::Unary:
      return make_unary(e.unary_op(), fold(e.child()));
    case NodeKind::Binary:
      return make_binary(e.binary_op(), fold(e.lhs()), fold(e.rhs()));
    default:
      return e;
  }
}

// ---------------------------------------------------------------------------
// Differentiation

namespace {

class Differentiator {
 public:
  Differentiator(std::size_t var, const VarList& vars) : var_(var), vars_(vars) {}

  Expr operator()(const Expr& e) {
    if (auto it = memo_.find(e.id()); it != memo_.end()) return it->second;
    Expr d = compute(e);
    memo_.emplace(e.id(), d);
    return d;
  }

 private:
  Expr compute(const Expr& e) {
    switch (e.kind()) {
      case NodeKind::Const:
        return Expr::constant(0.0);
      case NodeKind::Var:
        return Expr::constant(e.var() == var_ ? 1.0 : 0.0);
      case NodeKind::Trial: {
        MultiIndex tag = e.tag().incremented(var_);
        check_order_caps(tag, vars_);
        return Expr::trial(std::move(tag));
      }
      case NodeKind::Unary: {
        const Expr& u = e.child();
        Expr du = (*this)(u);
        if (du.is_constant(0.0)) return du;
        switch (e.unary_op()) {
          case UnaryOp::Sin: return cos(u) * du;
          case UnaryOp::Cos: return -(sin(u) * du);
          case UnaryOp::Exp: return e * du;
          case UnaryOp::Log: return du / u;
          case UnaryOp::Sqrt: return du / (Expr::constant(2.0) * e);
          case UnaryOp::Neg: return -du;
        }
        break;
      }
      case NodeKind::Binary: {
        const Expr& a = e.lhs();
        const Expr& b = e.rhs();
        switch (e.binary_op()) {
          case BinaryOp::Add: return (*this)(a) + (*this)(b);
          case BinaryOp::Sub: return (*this)(a) - (*this)(b);
          case BinaryOp::Mul: return (*this)(a) * b + a * (*this)(b);
          case BinaryOp::Div: {
            Expr da = (*this)(a);
            Expr db = (*this)(b);
            return da / b - (a * db) / pow(b, 2);
          }
          case BinaryOp::Pow: {
            const int k = static_cast<int>(b.value());
            return Expr::constant(k) * pow(a, k - 1) * (*this)(a);
          }
        }
        break;
      }
    }
    return Expr::constant(0.0);
  }

  std::size_t var_;
  const VarList& vars_;
  std::unordered_map<const Expr::Node*, Expr> memo_;
};

}  // namespace

Expr differentiate(const Expr& e, std::size_t var, const VarList& vars) {
  if (var >= vars.size()) throw Error("differentiation variable index out of range");
  return Differentiator(var, vars)(e);
}

Expr differentiate(const Expr& e, std::string_view var, const VarList& vars) {
  auto idx = vars.index_of(var);
  if (!idx) throw Error("unknown variable '" + std::string(var) + "'");
  return differentiate(e, *idx, vars);
}

Expr differentiate(const Expr& e, const MultiIndex& tag, const VarList& vars) {
  Expr out = e;
  for (std::size_t v = 0; v < tag.size(); ++v)
    for (int k = 0; k < tag[v]; ++k) out = differentiate(out, v, vars);
  return out;
}

Expr substitute_trial(const Expr& e,
                      const std::function<Expr(const MultiIndex&)>& replacement) {
  std::unordered_map<const Expr::Node*, Expr> memo;
  std::function<Expr(const Expr&)> go = [&](const Expr& x) -> Expr {
    if (auto it = memo.find(x.id()); it != memo.end()) return it->second;
    Expr r;
    switch (x.kind()) {
      case NodeKind::Trial: r = replacement(x.tag()); break;
      case NodeKind::Unary: r = make_unary(x.unary_op(), go(x.child())); break;
      case NodeKind::Binary: r = make_binary(x.binary_op(), go(x.lhs()), go(x.rhs())); break;
      default: r = x; break;
    }
    memo.emplace(x.id(), r);
    return r;
  };
  return go(e);
}

namespace {

template <typename Visit>
void visit_unique(const Expr& e, Visit&& visit) {
  std::unordered_set<const Expr::Node*> seen;
  std::vector<const Expr*> stack{&e};
  while (!stack.empty()) {
    const Expr* x = stack.back();
    stack.pop_back();
    if (!seen.insert(x->id()).second) continue;
    visit(*x);
    if (x->kind() == NodeKind::Unary) stack.push_back(&x->child());
    if (x->kind() == NodeKind::Binary) {
      stack.push_back(&x->lhs());
      stack.push_back(&x->rhs());
    }
  }
}

}  // namespace

std::vector<MultiIndex> trial_tags(const Expr& e) {
  std::set<MultiIndex> tags;
  visit_unique(e, [&](const Expr& x) {
    if (x.kind() == NodeKind::Trial) tags.insert(x.tag());
  });
  return {tags.begin(), tags.end()};
}

bool contains_trial(const Expr& e) {
  bool found = false;
  visit_unique(e, [&](const Expr& x) { found = found || x.kind() == NodeKind::Trial; });
  return found;
}

bool depends_on(const Expr& e, std::size_t var) {
  bool found = false;
  visit_unique(e, [&](const Expr& x) {
    found = found || (x.kind() == NodeKind::Var && x.var() == var) ||
            (x.kind() == NodeKind::Trial);
  });
  return found;
}

std::size_t node_count(const Expr& e) {
  std::size_t n = 0;
  visit_unique(e, [&](const Expr&) { ++n; });
  return n;
}

// ---------------------------------------------------------------------------
// Printing

namespace {

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void print(const Expr& e, const VarList& vars, std::string& out) {
  switch (e.kind()) {
    case NodeKind::Const:
      if (std::signbit(e.value()))
        out += "(-" + format_number(-e.value()) + ")";
      else
        out += format_number(e.value());
      return;
    case NodeKind::Var:
      out += vars.name(e.var());
      return;
    case NodeKind::Trial: {
      std::string s = "u";
      for (std::size_t v = 0; v < e.tag().size(); ++v)
        for (int k = 0; k < e.tag()[v]; ++k) s = "D(" + s + "," + vars.name(v) + ")";
      out += s;
      return;
    }
    case NodeKind::Unary: {
      static constexpr const char* kNames[] = {"sin", "cos", "exp", "log", "sqrt"};
      if (e.unary_op() == UnaryOp::Neg) {
        out += "(-";
        print(e.child(), vars, out);
        out += ")";
      } else {
        out += kNames[static_cast<int>(e.unary_op())];
        out += "(";
        print(e.child(), vars, out);
        out += ")";
      }
      return;
    }
    case NodeKind::Binary: {
      static constexpr char kOps[] = {'+', '-', '*', '/', '^'};
      out += "(";
      print(e.lhs(), vars, out);
      out += kOps[static_cast<int>(e.binary_op())];
      print(e.rhs(), vars, out);
      out += ")";
      return;
    }
  }
}

}  // namespace

std::string to_string(const Expr& e, const VarList& vars) {
  std::string out;
  print(e, vars, out);
  return out;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

class Parser {
 public:
  Parser(std::string_view src, const VarList& vars) : src_(src), vars_(vars) {}

  Expr parse_all() {
    Expr e = parse_expr();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected character '" + std::string(1, src_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }
  [[noreturn]] void fail_at(const std::string& msg, std::size_t at) const {
    throw ParseError(msg, at);
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= src_.size()) fail(std::string("expected '") + c + "' but reached end of input");
      fail(std::string("expected '") + c + "'");
    }
  }

  Expr parse_expr() {
    Expr lhs = parse_term();
    for (;;) {
      if (accept('+'))
        lhs = lhs + parse_term();
      else if (accept('-'))
        lhs = lhs - parse_term();
      else
        return lhs;
    }
  }

  Expr parse_term() {
    Expr lhs = parse_factor();
    for (;;) {
      if (accept('*'))
        lhs = lhs * parse_factor();
      else if (accept('/'))
        lhs = lhs / parse_factor();
      else
        return lhs;
    }
  }

  Expr parse_factor() {
    const bool negate = accept('-');
    Expr base = parse_atom();
    if (accept('^')) {
      skip_ws();
      const std::size_t at = pos_;
      Expr ex = parse_atom();
      const bool ok = ex.kind() == NodeKind::Const && ex.value() >= 0 && ex.value() <= 4 &&
                      ex.value() == std::floor(ex.value());
      if (!ok) fail_at("'^' requires a constant integer exponent in 0..4", at);
      base = make_binary(BinaryOp::Pow, base, ex);
    }
    return negate ? -base : base;
  }

  std::string read_identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      ++pos_;
    return std::string(src_.substr(start, pos_ - start));
  }

  Expr parse_number() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[pos_])) ||
                                  src_[pos_] == '.'))
      ++pos_;
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < src_.size() && (src_[p] == '+' || src_[p] == '-')) ++p;
      if (p < src_.size() && std::isdigit(static_cast<unsigned char>(src_[p]))) {
        pos_ = p;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      }
    }
    const std::string text(src_.substr(start, pos_ - start));
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end != text.c_str() + text.size() || text == ".") fail_at("malformed number '" + text + "'", start);
    return Expr::constant(v);
  }

  Expr parse_atom() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (c == '(') {
      ++pos_;
      Expr e = parse_expr();
      expect(')');
      return e;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      const std::string id = read_identifier();
      if (id == "pi") return Expr::constant(std::numbers::pi);
      if (id == "u") return Expr::trial(MultiIndex(vars_.size()));
      if (id == "D") return parse_derivative(start);
      static const std::pair<const char*, UnaryOp> kFns[] = {{"sin", UnaryOp::Sin},
                                                             {"cos", UnaryOp::Cos},
                                                             {"exp", UnaryOp::Exp},
                                                             {"log", UnaryOp::Log},
                                                             {"sqrt", UnaryOp::Sqrt}};
      for (const auto& [name, op] : kFns) {
        if (id == name) {
          expect('(');
          Expr arg = parse_expr();
          expect(')');
          return make_unary(op, arg);
        }
      }
      if (auto idx = vars_.index_of(id)) return Expr::variable(*idx, id);
      fail_at("unknown identifier '" + id + "'", start);
    }
    fail("unexpected character '" + std::string(1, c) + "'");
  }

  Expr parse_derivative(std::size_t start) {
    expect('(');
    Expr inner = parse_expr();
    expect(',');
    skip_ws();
    const std::size_t var_at = pos_;
    std::optional<std::size_t> var;
    if (pos_ < src_.size() && std::isalpha(static_cast<unsigned char>(src_[pos_]))) {
      const std::string id = read_identifier();
      var = vars_.index_of(id);
      skip_ws();
      if (!var || (pos_ < src_.size() && src_[pos_] != ')')) var.reset();
    }
    if (!var) fail_at("second argument of D must be a declared variable", var_at);
    expect(')');
    try {
      return differentiate(inner, *var, vars_);
    } catch (const OrderError& e) {
      fail_at(std::string("derivative order exceeding supported maximum: ") + e.what(), start);
    }
  }

  std::string_view src_;
  const VarList& vars_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse(std::string_view source, const VarList& vars) {
  return Parser(source, vars).parse_all();
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

struct Evaluator {
  std::span<const double> point;
  const TrialCallback* trial;
  const VarList& vars;

  [[noreturn]] void domain_error(const Expr& e, const std::string& what) const {
    throw EvalError(what + " in '" + to_string(e, vars) + "'");
  }

  double operator()(const Expr& e) const {
    switch (e.kind()) {
      case NodeKind::Const:
        return e.value();
      case NodeKind::Var:
        if (e.var() >= point.size()) domain_error(e, "point has no coordinate for variable");
        return point[e.var()];
      case NodeKind::Trial:
        if (trial == nullptr || !*trial) domain_error(e, "no trial function bound");
        return (*trial)(e.tag(), point);
      case NodeKind::Unary: {
        const double x = (*this)(e.child());
        if (e.unary_op() == UnaryOp::Log && !(x > 0)) domain_error(e, "log of non-positive value");
        if (e.unary_op() == UnaryOp::Sqrt && x < 0) domain_error(e, "sqrt of negative value");
        return apply_unary(e.unary_op(), x);
      }
      case NodeKind::Binary: {
        const double a = (*this)(e.lhs());
        const double b = (*this)(e.rhs());
        if (e.binary_op() == BinaryOp::Div && b == 0.0) domain_error(e, "division by zero");
        return apply_binary(e.binary_op(), a, b);
      }
    }
    return 0.0;
  }
};

}  // namespace

double eval_pointwise(const Expr& e, std::span<const double> point, const TrialCallback& trial,
                      const VarList& vars) {
  return Evaluator{point, &trial, vars}(e);
}

double eval_pointwise(const Expr& e, std::span<const double> point, const VarList& vars) {
  return Evaluator{point, nullptr, vars}(e);
}

}  // namespace dgm
