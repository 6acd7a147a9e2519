#include "dgm/jet.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace dgm {

JetBasis::JetBasis(std::size_t n_vars, std::span<const MultiIndex> tags) : n_vars_(n_vars) {
  std::set<MultiIndex> closure;
  closure.insert(MultiIndex(n_vars));
  std::vector<MultiIndex> frontier(tags.begin(), tags.end());
  while (!frontier.empty()) {
    MultiIndex m = std::move(frontier.back());
    frontier.pop_back();
    if (m.size() != n_vars) throw std::invalid_argument("JetBasis: tag size mismatch");
    if (!closure.insert(m).second) continue;
    for (std::size_t v = 0; v < n_vars; ++v) {
      if (m[v] == 0) continue;
      auto counts = m.counts();
      --counts[v];
      frontier.emplace_back(std::move(counts));
    }
  }
  monomials_.assign(closure.begin(), closure.end());
  // constant first, then by degree
  std::stable_sort(monomials_.begin(), monomials_.end(),
                   [](const MultiIndex& a, const MultiIndex& b) { return a.order() < b.order(); });
  for (std::size_t i = 0; i < monomials_.size(); ++i) {
    index_.emplace(monomials_[i], i);
    max_degree_ = std::max(max_degree_, monomials_[i].order());
  }
  linear_.assign(n_vars, std::nullopt);
  for (std::size_t v = 0; v < n_vars; ++v) linear_[v] = index_of(MultiIndex(n_vars).incremented(v));

  for (std::size_t i = 1; i < monomials_.size(); ++i)
    for (std::size_t j = 1; j < monomials_.size(); ++j)
      if (auto k = index_of(monomials_[i] + monomials_[j]))
        products_.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j),
                             static_cast<std::uint32_t>(*k)});
}

std::optional<std::size_t> JetBasis::index_of(const MultiIndex& m) const {
  auto it = index_.find(m);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void jet_mul_add(const JetBasis& basis, std::span<const double> a, std::span<const double> b,
                 std::span<double> out) {
  for (const auto& p : basis.products()) out[p.out] += a[p.lhs] * b[p.rhs];
}

}  // namespace dgm
