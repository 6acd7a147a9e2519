#pragma once

// Expression DSL for differential operators and boundary/initial data.
//
// Grammar:
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := ('-')? atom ('^' atom)?
//   atom   := number | 'pi' | var | 'u' | fn '(' expr ')'
//           | 'D(' expr ',' var ')' | '(' expr ')'
//   fn     := sin | cos | exp | log | sqrt
//
// `D` is resolved at parse time by symbolic differentiation, so a parsed
// Expr never contains a D node: derivatives of the unknown appear as
// trial-function leaves tagged with a multi-index.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dgm {

inline constexpr int kMaxSpatialOrder = 3;
inline constexpr int kMaxTimeOrder = 2;
inline constexpr int kMaxTotalOrder = 3;

/// Reserved name of the time variable.
inline constexpr std::string_view kTimeName = "t";

/// Ordered, unique variable names. If `t` is present it must be last.
class VarList {
 public:
  VarList() = default;
  explicit VarList(std::vector<std::string> names);

  /// x / x,y / x,y,z / x1..xn, optionally followed by t.
  static VarList standard(std::size_t n_spatial, bool with_time);

  std::size_t size() const noexcept { return names_.size(); }
  const std::string& name(std::size_t i) const { return names_.at(i); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  std::optional<std::size_t> index_of(std::string_view name) const;
  std::optional<std::size_t> time_index() const;
  bool has_time() const { return time_index().has_value(); }
  std::size_t n_spatial() const { return size() - (has_time() ? 1 : 0); }

  bool operator==(const VarList&) const = default;

 private:
  std::vector<std::string> names_;
};

/// Per-variable differentiation counts; always sized to the VarList.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::size_t n_vars) : counts_(n_vars, 0) {}
  explicit MultiIndex(std::vector<std::uint8_t> counts) : counts_(std::move(counts)) {}

  std::size_t size() const noexcept { return counts_.size(); }
  std::uint8_t operator[](std::size_t i) const { return counts_.at(i); }
  const std::vector<std::uint8_t>& counts() const noexcept { return counts_; }

  int order() const;
  MultiIndex incremented(std::size_t var) const;
  bool divides(const MultiIndex& other) const;
  /// alpha! = prod_i alpha_i!
  double factorial() const;
  MultiIndex operator+(const MultiIndex& other) const;

  /// e.g. "u", "u_xx", "u_xy", "u_t".
  std::string label(const VarList& vars) const;

  auto operator<=>(const MultiIndex&) const = default;

 private:
  std::vector<std::uint8_t> counts_;
};

/// Throws OrderError when `tag` exceeds the supported order caps.
void check_order_caps(const MultiIndex& tag, const VarList& vars);

enum class NodeKind { Const, Var, Trial, Unary, Binary };
enum class UnaryOp { Sin, Cos, Exp, Log, Sqrt, Neg };
enum class BinaryOp { Add, Sub, Mul, Div, Pow };

/// Immutable expression tree. Copies share structure.
class Expr {
 public:
  struct Node;

  /// Constant 0.
  Expr();

  static Expr constant(double value);
  static Expr variable(std::size_t index, std::string name);
  static Expr trial(MultiIndex tag);
  /// Unfolded constructors; most code wants make_unary / make_binary.
  static Expr raw_unary(UnaryOp op, Expr child);
  static Expr raw_binary(BinaryOp op, Expr lhs, Expr rhs);

  NodeKind kind() const;
  double value() const;
  std::size_t var() const;
  const std::string& var_name() const;
  const MultiIndex& tag() const;
  UnaryOp unary_op() const;
  BinaryOp binary_op() const;
  const Expr& child() const;
  const Expr& lhs() const;
  const Expr& rhs() const;

  bool is_constant(double v) const;
  const Node* id() const noexcept { return node_.get(); }

  /// Structural equality.
  bool operator==(const Expr& other) const;

 private:
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

struct Expr::Node {
  NodeKind kind = NodeKind::Const;
  double value = 0.0;
  std::size_t var = 0;
  std::string name;
  MultiIndex tag;
  UnaryOp uop = UnaryOp::Neg;
  BinaryOp bop = BinaryOp::Add;
  Expr a;
  Expr b;
};

// Folding constructors: 0*x -> 0, x+0 -> x, 1*x -> x, x+x -> 2*x,
// constant subtrees collapse when the result is finite.
Expr make_unary(UnaryOp op, Expr child);
Expr make_binary(BinaryOp op, Expr lhs, Expr rhs);

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr pow(const Expr& base, int exponent);
Expr sin(const Expr& e);
Expr cos(const Expr& e);
Expr exp(const Expr& e);
Expr log(const Expr& e);
Expr sqrt(const Expr& e);

/// Re-applies folding bottom-up.
Expr fold(const Expr& e);

Expr parse(std::string_view source, const VarList& vars);

Expr differentiate(const Expr& e, std::size_t var, const VarList& vars);
Expr differentiate(const Expr& e, std::string_view var, const VarList& vars);
/// Applies differentiate once per count in `tag`.
Expr differentiate(const Expr& e, const MultiIndex& tag, const VarList& vars);

/// Replaces every trial leaf by `replacement(tag)`, refolding on the way up.
Expr substitute_trial(const Expr& e,
                      const std::function<Expr(const MultiIndex&)>& replacement);

/// Sorted, unique tags of all trial leaves.
std::vector<MultiIndex> trial_tags(const Expr& e);
bool contains_trial(const Expr& e);
bool depends_on(const Expr& e, std::size_t var);
std::size_t node_count(const Expr& e);

/// Parseable, fully parenthesised text.
std::string to_string(const Expr& e, const VarList& vars);

using TrialCallback =
    std::function<double(const MultiIndex& tag, std::span<const double> point)>;

/// Throws EvalError on domain errors, naming the failing subexpression.
double eval_pointwise(const Expr& e, std::span<const double> point,
                      const TrialCallback& trial, const VarList& vars);
/// For expressions without trial leaves.
double eval_pointwise(const Expr& e, std::span<const double> point, const VarList& vars);

}  // namespace dgm
