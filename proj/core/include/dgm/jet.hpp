#pragma once

// Truncated multivariate Taylor polynomials ("jets").
//
// A jet stores the Taylor coefficients c_alpha of a function around a point
// for every multi-index alpha in a downward-closed set S (every divisor of a
// member is a member). Products and compositions restricted to S are exact,
// because the coefficient of alpha only ever depends on coefficients of the
// divisors of alpha. The partial derivative d^alpha f equals alpha! * c_alpha.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "dgm/expr.hpp"

namespace dgm {

class JetBasis {
 public:
  struct Product {
    std::uint32_t lhs;
    std::uint32_t rhs;
    std::uint32_t out;
  };

  JetBasis() : JetBasis(0, {}) {}
  /// Downward closure of `tags` (plus the constant monomial) over `n_vars` variables.
  JetBasis(std::size_t n_vars, std::span<const MultiIndex> tags);

  std::size_t size() const noexcept { return monomials_.size(); }
  std::size_t n_vars() const noexcept { return n_vars_; }
  int max_degree() const noexcept { return max_degree_; }
  const MultiIndex& monomial(std::size_t i) const { return monomials_.at(i); }
  std::optional<std::size_t> index_of(const MultiIndex& m) const;
  /// Coefficient slot of the first-order monomial of `var`, if present.
  std::optional<std::size_t> linear_slot(std::size_t var) const { return linear_.at(var); }
  /// All (lhs, rhs, out) with non-constant lhs, rhs and lhs + rhs = out in S.
  std::span<const Product> products() const noexcept { return products_; }

 private:
  std::size_t n_vars_ = 0;
  int max_degree_ = 0;
  std::vector<MultiIndex> monomials_;
  std::map<MultiIndex, std::size_t> index_;
  std::vector<std::optional<std::size_t>> linear_;
  std::vector<Product> products_;
};

/// out += a * b over non-constant parts (constant slots of a, b are ignored).
void jet_mul_add(const JetBasis& basis, std::span<const double> a, std::span<const double> b,
                 std::span<double> out);

}  // namespace dgm
