#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

namespace rapm {

using Vector = Eigen::VectorXd;

/// Dense row-major matrix with finite entries.
class DenseMatrix {
 public:
  using Storage = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  DenseMatrix() = default;
  /// Throws DimensionError when entries.size() != rows * cols and
  /// ParameterError on a non-finite entry.
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> row_major);
  explicit DenseMatrix(Storage m);

  static DenseMatrix identity(std::size_t n);
  static DenseMatrix zeros(std::size_t rows, std::size_t cols);
  static DenseMatrix diagonal(const Vector& d);

  std::size_t rows() const noexcept { return static_cast<std::size_t>(m_.rows()); }
  std::size_t cols() const noexcept { return static_cast<std::size_t>(m_.cols()); }
  bool empty() const noexcept { return m_.size() == 0; }

  double operator()(std::size_t i, std::size_t j) const { return m_(i, j); }
  const Storage& storage() const noexcept { return m_; }

  friend bool operator==(const DenseMatrix& a, const DenseMatrix& b) {
    return a.m_.rows() == b.m_.rows() && a.m_.cols() == b.m_.cols() && a.m_ == b.m_;
  }

 private:
  Storage m_;
};

/// Ax. Throws DimensionError naming both sizes on mismatch.
Vector matvec(const DenseMatrix& a, const Vector& x);
/// A^T y.
Vector matvec_transposed(const DenseMatrix& a, const Vector& y);

// Reductions run sequentially in index order so results do not depend on
// vectorization or alignment.
double dot(const Vector& x, const Vector& y);
double norm2(const Vector& x);
double norm1(const Vector& x);
double norm_inf(const Vector& x);
bool all_finite(const Vector& x);

/// Largest eigenvalue of A^T A by power iteration.
///
/// Starts from the all-ones vector normalized to unit length and stops once
/// the Rayleigh quotient changes by less than tol relative to its current
/// value. If the start lies in the null space of A while A is nonzero, the
/// iteration restarts from the unit vector of the column with largest norm.
/// Throws ConvergenceError (carrying the last estimate) after max_iter steps.
double spectral_norm_sq(const DenseMatrix& a, double tol = 1e-10, std::size_t max_iter = 5000);

}  // namespace rapm
