#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "altbm/errors.hpp"

namespace altbm {

// Dense row-major matrix. Dimensions here never exceed a few dozen, so
// everything is plain value semantics over a std::vector.
template <typename T>
class BasicMatrix {
 public:
  using value_type = T;

  BasicMatrix() = default;

  BasicMatrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {
    if (rows == 0 || cols == 0) throw InvalidArgument("matrix dimensions must be positive");
  }

  BasicMatrix(std::initializer_list<std::initializer_list<T>> init) {
    rows_ = init.size();
    cols_ = rows_ ? init.begin()->size() : 0;
    if (rows_ == 0 || cols_ == 0) throw InvalidArgument("matrix dimensions must be positive");
    data_.reserve(rows_ * cols_);
    for (const auto& row : init) {
      if (row.size() != cols_) throw InvalidArgument("ragged matrix initializer");
      data_.insert(data_.end(), row.begin(), row.end());
    }
  }

  static BasicMatrix identity(std::size_t n) {
    BasicMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T{1};
    return m;
  }

  static BasicMatrix diagonal(std::span<const T> d) {
    BasicMatrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool square() const noexcept { return rows_ == cols_; }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<T> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const T> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  std::span<const T> entries() const noexcept { return data_; }

  BasicMatrix& operator+=(const BasicMatrix& o) {
    check_same_shape(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
  }
  BasicMatrix& operator-=(const BasicMatrix& o) {
    check_same_shape(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
  }
  BasicMatrix& operator*=(T s) {
    for (auto& x : data_) x *= s;
    return *this;
  }

  friend BasicMatrix operator+(BasicMatrix a, const BasicMatrix& b) { return a += b; }
  friend BasicMatrix operator-(BasicMatrix a, const BasicMatrix& b) { return a -= b; }
  friend BasicMatrix operator*(BasicMatrix a, T s) { return a *= s; }
  friend BasicMatrix operator*(T s, BasicMatrix a) { return a *= s; }

  friend BasicMatrix operator*(const BasicMatrix& a, const BasicMatrix& b) {
    if (a.cols_ != b.rows_) throw InvalidArgument("matrix product: inner dimensions differ");
    BasicMatrix c(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const T aik = a(i, k);
        if (aik == T{}) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
      }
    return c;
  }

  friend bool operator==(const BasicMatrix&, const BasicMatrix&) = default;

  // Largest absolute entry.
  double max_abs() const {
    double m = 0.0;
    for (const auto& x : data_) m = std::max(m, static_cast<double>(std::abs(x)));
    return m;
  }

  // Infinity norm (max absolute row sum).
  double norm_inf() const {
    double m = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) {
      double s = 0.0;
      for (const auto& x : row(i)) s += std::abs(x);
      m = std::max(m, s);
    }
    return m;
  }

 private:
  void check_same_shape(const BasicMatrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw InvalidArgument("matrix shapes differ");
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using Matrix = BasicMatrix<double>;
using ComplexMatrix = BasicMatrix<std::complex<double>>;
using Vector = std::vector<double>;

ComplexMatrix to_complex(const Matrix& m);

// Throws InvalidArgument unless every entry is finite.
void require_finite(const Matrix& m, const std::string& what);

// Row vector times matrix, matrix times column vector.
Vector left_multiply(std::span<const double> v, const Matrix& m);
Vector right_multiply(const Matrix& m, std::span<const double> v);

// Relative pivot threshold below which a system is declared singular.
inline constexpr double kSingularTolerance = 1e-12;

namespace detail {

// In-place LU with partial pivoting, then solve for every column of `rhs`.
template <typename T>
BasicMatrix<T> lu_solve(BasicMatrix<T> a, BasicMatrix<T> rhs) {
  if (!a.square()) throw InvalidArgument("solve_linear: matrix is not square");
  if (rhs.rows() != a.rows()) throw InvalidArgument("solve_linear: right-hand side size mismatch");
  const std::size_t n = a.rows();
  const double scale = a.max_abs();
  const double threshold = kSingularTolerance * scale;
  if (scale == 0.0) throw SingularMatrix("solve_linear: zero matrix");

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    double best = std::abs(a(k, k));
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > best) {
        best = std::abs(a(i, k));
        piv = i;
      }
    if (!(best >= threshold) || best == 0.0)
      throw SingularMatrix("solve_linear: pivot " + std::to_string(best) +
                           " below tolerance at column " + std::to_string(k));
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
      for (std::size_t j = 0; j < rhs.cols(); ++j) std::swap(rhs(k, j), rhs(piv, j));
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const T f = a(i, k) / a(k, k);
      if (f == T{}) continue;
      a(i, k) = T{};
      for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= f * a(k, j);
      for (std::size_t j = 0; j < rhs.cols(); ++j) rhs(i, j) -= f * rhs(k, j);
    }
  }
  for (std::size_t c = 0; c < rhs.cols(); ++c) {
    for (std::size_t ii = n; ii-- > 0;) {
      T s = rhs(ii, c);
      for (std::size_t j = ii + 1; j < n; ++j) s -= a(ii, j) * rhs(j, c);
      rhs(ii, c) = s / a(ii, ii);
    }
  }
  return rhs;
}

}  // namespace detail

// Solves A x = y. Throws SingularMatrix when a pivot falls below
// 1e-12 * max|A|.
Vector solve_linear(const Matrix& a, std::span<const double> y);

// Solves A X = B column by column.
Matrix solve_linear(const Matrix& a, const Matrix& b);
ComplexMatrix solve_linear(const ComplexMatrix& a, const ComplexMatrix& b);

// True when off-diagonal entries are nonnegative and rows sum to zero
// within `tol`.
bool is_generator(const Matrix& q, double tol = 1e-12);

// e^{Qt}. Conservative generators go through uniformization so the result
// is a stochastic matrix; anything else uses scaling and squaring.
Matrix mat_exp(const Matrix& q, double t);

// Transform evaluated at complex abscissas; for real-valued time functions
// only the real part of the result is used.
using LaplaceEvaluator = std::function<std::complex<double>(std::complex<double>)>;

inline constexpr int kDefaultInversionTerms = 41;
inline constexpr double kDefaultInversionTolerance = 1e-6;

// Numerical Laplace inversion by Euler summation of the Bromwich integral
// (the Abate-Whitt unified Euler algorithm with `terms` = 2M+1 abscissas).
// The estimate is recomputed with M-2 and InversionDiverged is thrown when
// the two disagree by more than tolerance * max(1, |f(t)|).
double invert_laplace(const LaplaceEvaluator& f, double t, int terms = kDefaultInversionTerms,
                      double tolerance = kDefaultInversionTolerance);

}  // namespace altbm
