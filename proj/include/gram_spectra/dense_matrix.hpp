#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace gram_spectra {

using Vector = std::vector<double>;

/// Row-major dense matrix with value semantics.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries);
  DenseMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static DenseMatrix identity(std::size_t n);
  static DenseMatrix diagonal(std::span<const double> values);
  static DenseMatrix column(std::span<const double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return entries_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return entries_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {entries_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {entries_.data() + i * cols_, cols_}; }
  Vector column_copy(std::size_t j) const;

  std::span<const double> entries() const { return entries_; }
  std::span<double> entries() { return entries_; }
  double* data() { return entries_.data(); }
  const double* data() const { return entries_.data(); }

  bool all_finite() const;
  bool is_square() const { return rows_ == cols_; }
  DenseMatrix transposed() const;
  double max_abs() const;

  DenseMatrix& operator+=(const DenseMatrix& other);
  DenseMatrix& operator-=(const DenseMatrix& other);
  DenseMatrix& operator*=(double scale);

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> entries_;
};

DenseMatrix operator+(DenseMatrix lhs, const DenseMatrix& rhs);
DenseMatrix operator-(DenseMatrix lhs, const DenseMatrix& rhs);
DenseMatrix operator*(DenseMatrix lhs, double scale);
DenseMatrix operator*(double scale, DenseMatrix rhs);

/// Matrix product a * b.
DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b);
/// aᵀ * b without materializing the transpose.
DenseMatrix multiply_transposed_left(const DenseMatrix& a, const DenseMatrix& b);
/// a * bᵀ without materializing the transpose.
DenseMatrix multiply_transposed_right(const DenseMatrix& a, const DenseMatrix& b);

Vector matvec(const DenseMatrix& a, std::span<const double> x);
Vector transpose_matvec(const DenseMatrix& a, std::span<const double> x);

double dot(std::span<const double> x, std::span<const double> y);
double norm2(std::span<const double> x);
double frobenius_norm(const DenseMatrix& a);
double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b);
/// Largest |a_ij - a_ji| relative to max |a_ij|; zero for the zero matrix.
double asymmetry(const DenseMatrix& a);

}  // namespace gram_spectra
