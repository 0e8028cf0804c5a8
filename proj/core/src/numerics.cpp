#include "rapm/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rapm/errors.hpp"

namespace rapm {

namespace {

void require_finite(const DenseMatrix::Storage& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (!std::isfinite(m(i, j))) {
        throw ParameterError("DenseMatrix: non-finite entry at (" + std::to_string(i) + ", " +
                             std::to_string(j) + ")");
      }
    }
  }
}

}  // namespace

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> row_major) {
  if (row_major.size() != rows * cols) {
    throw DimensionError("DenseMatrix: entry count for " + std::to_string(rows) + "x" +
                             std::to_string(cols),
                         rows * cols, row_major.size());
  }
  m_ = Eigen::Map<const Storage>(row_major.data(), static_cast<Eigen::Index>(rows),
                                 static_cast<Eigen::Index>(cols));
  require_finite(m_);
}

DenseMatrix::DenseMatrix(Storage m) : m_(std::move(m)) { require_finite(m_); }

DenseMatrix DenseMatrix::identity(std::size_t n) {
  const auto k = static_cast<Eigen::Index>(n);
  return DenseMatrix(Storage::Identity(k, k));
}

DenseMatrix DenseMatrix::zeros(std::size_t rows, std::size_t cols) {
  return DenseMatrix(
      Storage::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols)));
}

DenseMatrix DenseMatrix::diagonal(const Vector& d) {
  Storage m = Storage::Zero(d.size(), d.size());
  m.diagonal() = d;
  return DenseMatrix(std::move(m));
}

Vector matvec(const DenseMatrix& a, const Vector& x) {
  if (a.cols() != static_cast<std::size_t>(x.size())) {
    throw DimensionError("matvec: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                             " matrix times vector of length " + std::to_string(x.size()),
                         a.cols(), static_cast<std::size_t>(x.size()));
  }
  Vector y(a.storage().rows());
  y.noalias() = a.storage() * x;
  return y;
}

Vector matvec_transposed(const DenseMatrix& a, const Vector& y) {
  if (a.rows() != static_cast<std::size_t>(y.size())) {
    throw DimensionError("matvec_transposed: transpose of " + std::to_string(a.rows()) + "x" +
                             std::to_string(a.cols()) + " matrix times vector of length " +
                             std::to_string(y.size()),
                         a.rows(), static_cast<std::size_t>(y.size()));
  }
  Vector x(a.storage().cols());
  x.noalias() = a.storage().transpose() * y;
  return x;
}

double dot(const Vector& x, const Vector& y) {
  if (x.size() != y.size()) {
    throw DimensionError("dot: vector lengths differ", static_cast<std::size_t>(x.size()),
                         static_cast<std::size_t>(y.size()));
  }
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

double norm2(const Vector& x) { return std::sqrt(dot(x, x)); }

double norm1(const Vector& x) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) s += std::abs(x[i]);
  return s;
}

double norm_inf(const Vector& x) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) s = std::max(s, std::abs(x[i]));
  return s;
}

bool all_finite(const Vector& x) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i])) return false;
  }
  return true;
}

double spectral_norm_sq(const DenseMatrix& a, double tol, std::size_t max_iter) {
  if (a.empty()) throw ParameterError("spectral_norm_sq: empty matrix");
  if (!(tol > 0.0)) throw ParameterError("spectral_norm_sq: tol must be positive");

  const auto n = static_cast<Eigen::Index>(a.cols());
  Vector v = Vector::Ones(n) / std::sqrt(static_cast<double>(n));
  Vector w = matvec_transposed(a, matvec(a, v));

  if (norm2(w) == 0.0) {
    if (a.storage().cwiseAbs().maxCoeff() == 0.0) return 0.0;
    Eigen::Index col = 0;
    a.storage().colwise().squaredNorm().maxCoeff(&col);
    v = Vector::Unit(n, col);
    w = matvec_transposed(a, matvec(a, v));
  }

  double lambda = dot(v, w);
  for (std::size_t it = 0; it < max_iter; ++it) {
    const double wn = norm2(w);
    if (wn == 0.0) return 0.0;
    v = w / wn;
    w = matvec_transposed(a, matvec(a, v));
    const double next = dot(v, w);
    if (std::abs(next - lambda) < tol * std::abs(next)) return next;
    lambda = next;
  }
  throw ConvergenceError("spectral_norm_sq: no convergence after " + std::to_string(max_iter) +
                             " iterations (last estimate " + std::to_string(lambda) + ")",
                         lambda);
}

}  // namespace rapm
