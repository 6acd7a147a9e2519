#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace dgm {

/// Row-major batch of points of fixed dimension.
class PointBatch {
 public:
  PointBatch() = default;
  explicit PointBatch(std::size_t dim, std::size_t n = 0) : dim_(dim), data_(dim * n, 0.0) {}
  PointBatch(std::size_t dim, std::vector<double> rows) : dim_(dim), data_(std::move(rows)) {
    if (dim_ == 0 || data_.size() % dim_ != 0)
      throw std::invalid_argument("PointBatch: data size is not a multiple of dim");
  }

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return dim_ == 0 ? 0 : data_.size() / dim_; }
  bool empty() const noexcept { return size() == 0; }

  std::span<const double> operator[](std::size_t i) const {
    return {data_.data() + i * dim_, dim_};
  }
  std::span<double> operator[](std::size_t i) { return {data_.data() + i * dim_, dim_}; }

  void push_back(std::span<const double> point) {
    if (point.size() != dim_) throw std::invalid_argument("PointBatch: dimension mismatch");
    data_.insert(data_.end(), point.begin(), point.end());
  }

  void append(const PointBatch& other) {
    if (other.empty()) return;
    if (other.dim_ != dim_) throw std::invalid_argument("PointBatch: dimension mismatch");
    data_.insert(data_.end(), other.data_.begin(), other.data_.end());
  }

  const std::vector<double>& data() const noexcept { return data_; }
  std::vector<double>& data() noexcept { return data_; }

 private:
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

}  // namespace dgm
