#include "incdsi/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "incdsi/errors.hpp"

namespace incdsi {

Matrix::Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0f) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<float> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw ShapeError("matrix data has " + std::to_string(data_.size()) + " entries, expected " +
                     std::to_string(rows) + "x" + std::to_string(cols));
  }
}

Matrix Matrix::from_rows(const std::vector<std::vector<float>>& rows) {
  Matrix out;
  for (const auto& r : rows) out.push_row(r);
  return out;
}

void Matrix::push_row(std::span<const float> values) {
  if (rows_ == 0 && cols_ == 0) {
    cols_ = values.size();
  } else if (values.size() != cols_) {
    throw ShapeError("row has length " + std::to_string(values.size()) + ", expected " +
                     std::to_string(cols_));
  }
  data_.insert(data_.end(), values.begin(), values.end());
  ++rows_;
}

bool Matrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](float x) { return std::isfinite(x); });
}

}  // namespace incdsi
