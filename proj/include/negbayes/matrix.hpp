#ifndef NEGBAYES_MATRIX_HPP
#define NEGBAYES_MATRIX_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace negbayes {

// Dense row-major matrix of doubles, zero-initialized.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {}

  double& operator()(int i, int j) { return data[static_cast<size_t>(i) * cols + j]; }
  double operator()(int i, int j) const { return data[static_cast<size_t>(i) * cols + j]; }

  std::span<double> row(int i) { return {data.data() + static_cast<size_t>(i) * cols, static_cast<size_t>(cols)}; }
  std::span<const double> row(int i) const {
    return {data.data() + static_cast<size_t>(i) * cols, static_cast<size_t>(cols)};
  }

  bool operator==(const Matrix&) const = default;
};

}  // namespace negbayes

#endif  // NEGBAYES_MATRIX_HPP
