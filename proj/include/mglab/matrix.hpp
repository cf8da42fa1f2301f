#pragma once

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace mglab {

// Dense row-major matrix with row-span access.
template <typename Real>
class Matrix {
 public:
  using value_type = Real;

  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, Real fill = Real{0})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  std::span<Real> row(std::size_t i) noexcept {
    assert(i < rows_);
    return {data_.data() + i * cols_, cols_};
  }
  std::span<const Real> row(std::size_t i) const noexcept {
    assert(i < rows_);
    return {data_.data() + i * cols_, cols_};
  }

  Real& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  Real operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

  std::span<Real> data() noexcept { return data_; }
  std::span<const Real> data() const noexcept { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Real> data_;
};

namespace vec {

template <typename Real>
Real dot(std::span<const Real> a, std::span<const Real> b) noexcept {
  assert(a.size() == b.size());
  Real acc{0};
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

// y += alpha * x
template <typename Real>
void axpy(Real alpha, std::span<const Real> x, std::span<Real> y) noexcept {
  assert(x.size() == y.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

template <typename Real>
void add(std::span<const Real> x, std::span<Real> y) noexcept {
  assert(x.size() == y.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += x[i];
}

}  // namespace vec
}  // namespace mglab
