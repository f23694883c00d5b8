#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace incdsi {

/// Dense row-major matrix of 32-bit floats.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols);
  /// Takes ownership of `data`; throws ShapeError unless data.size() == rows * cols.
  Matrix(std::size_t rows, std::size_t cols, std::vector<float> data);

  /// Builds a matrix from nested rows; all rows must have equal length.
  static Matrix from_rows(const std::vector<std::vector<float>>& rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return rows_ == 0; }

  std::span<float> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<const float> row(std::size_t i) const noexcept {
    return {data_.data() + i * cols_, cols_};
  }

  float& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  float operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

  std::span<float> data() noexcept { return data_; }
  std::span<const float> data() const noexcept { return data_; }

  /// Appends one row; the first row fixes the column count of an empty matrix.
  void push_row(std::span<const float> values);

  bool all_finite() const noexcept;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<float> data_;
};

}  // namespace incdsi
