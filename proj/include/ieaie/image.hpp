#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace ieaie {

/// Zero-based grid coordinate. Formulas that use 1-based indices convert at
/// the point of use.
struct Position {
  std::size_t row = 0;
  std::size_t col = 0;

  auto operator<=>(const Position&) const = default;
};

/// Dense row-major matrix.
template <typename T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<T> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows * cols) {
      throw std::invalid_argument("matrix data size does not match dimensions");
    }
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  T& operator[](Position p) { return (*this)(p.row, p.col); }
  const T& operator[](Position p) const { return (*this)(p.row, p.col); }

  std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }

  template <typename U>
  bool same_shape(const Matrix<U>& other) const {
    return rows_ == other.rows() && cols_ == other.cols();
  }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

/// M x N plane of 8-bit pixels.
using Image = Matrix<std::uint8_t>;

inline Position raster_position(std::size_t index, std::size_t cols) {
  return {index / cols, index % cols};
}

inline std::size_t raster_index(Position p, std::size_t cols) { return p.row * cols + p.col; }

}  // namespace ieaie
