#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "maxent/errors.hpp"
#include "maxent/numeric.hpp"

namespace maxent {

// Dense row-major matrix, just enough for the factorization and projection
// needs of this library.
class Matrix {
 public:
  Matrix() : rows_(0), cols_(0) {}
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(data_.data() + i * cols_, cols_);
  }

 private:
  std::size_t rows_, cols_;
  std::vector<double> data_;
};

struct LuFactors {
  Matrix lu;                  // combined L (unit diagonal) and U
  std::vector<std::size_t> perm;
  int sign = 1;               // sign of det, 0 if singular
  double log_abs_det = kNegInf;
  double min_abs_pivot = 0.0;
  bool singular = false;
};

// Partial-pivoted LU with separate sign / log-magnitude tracking, so
// determinants of badly scaled matrices neither overflow nor underflow.
inline LuFactors lu_factor(Matrix a, double pivot_tol = 0.0) {
  const std::size_t n = a.rows();
  if (n != a.cols()) throw DomainError("lu_factor: matrix not square");
  LuFactors f;
  f.perm.resize(n);
  for (std::size_t i = 0; i < n; ++i) f.perm[i] = i;
  f.sign = 1;
  f.log_abs_det = 0.0;
  f.min_abs_pivot = kInf;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    double best = std::abs(a(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      const double v = std::abs(a(i, k));
      if (v > best) {
        best = v;
        piv = i;
      }
    }
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
      std::swap(f.perm[k], f.perm[piv]);
      f.sign = -f.sign;
    }
    const double p = a(k, k);
    f.min_abs_pivot = std::min(f.min_abs_pivot, std::abs(p));
    if (std::abs(p) <= pivot_tol || p == 0.0) {
      f.singular = true;
      f.sign = 0;
      f.log_abs_det = kNegInf;
      f.lu = std::move(a);
      return f;
    }
    f.log_abs_det += std::log(std::abs(p));
    if (p < 0.0) f.sign = -f.sign;
    for (std::size_t i = k + 1; i < n; ++i) {
      a(i, k) /= p;
      const double m = a(i, k);
      if (m != 0.0)
        for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= m * a(k, j);
    }
  }
  f.lu = std::move(a);
  return f;
}

inline Vec lu_solve(const LuFactors& f, const Vec& b) {
  const std::size_t n = f.lu.rows();
  if (f.singular) throw NumericalError("lu_solve: singular factorization");
  Vec x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[f.perm[i]];
  for (std::size_t i = 1; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) x[i] -= f.lu(i, j) * x[j];
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = i + 1; j < n; ++j) x[i] -= f.lu(i, j) * x[j];
    x[i] /= f.lu(i, i);
  }
  return x;
}

inline Vec solve_linear(Matrix a, const Vec& b) { return lu_solve(lu_factor(std::move(a)), b); }

// Orthonormal basis of span{vectors} by modified Gram-Schmidt with one
// re-orthogonalization pass. Vectors shorter than drop_tol (relative to the
// largest input norm) are treated as dependent and dropped.
inline std::vector<Vec> orthonormal_basis(const std::vector<Vec>& vectors,
                                          double drop_tol = 1e-10) {
  std::vector<Vec> basis;
  double scale = 0.0;
  for (const Vec& v : vectors) scale = std::max(scale, norm2(v));
  if (scale == 0.0) return basis;
  for (const Vec& v : vectors) {
    Vec u = v;
    for (int pass = 0; pass < 2; ++pass)
      for (const Vec& b : basis) axpy(-dot(u, b), b, u);
    const double nu = norm2(u);
    if (nu > drop_tol * scale) {
      basis.push_back((1.0 / nu) * u);
    }
  }
  return basis;
}

// Projection of v onto span(basis); basis must be orthonormal.
inline Vec project_onto_span(const Vec& v, const std::vector<Vec>& basis) {
  Vec p(v.size(), 0.0);
  for (const Vec& b : basis) axpy(dot(v, b), b, p);
  return p;
}

// One nonzero vector c with sum_j c_j * columns[j] = 0, or empty if the
// columns are (numerically) linearly independent. Gaussian elimination with
// partial pivoting on the k x p matrix whose columns are the inputs.
inline Vec nullspace_combination(const std::vector<Vec>& columns, double tol = 1e-10) {
  const std::size_t p = columns.size();
  if (p == 0) return {};
  const std::size_t k = columns[0].size();
  Matrix a(k, p);
  double scale = 0.0;
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t i = 0; i < k; ++i) a(i, j) = columns[j][i];
    scale = std::max(scale, norm2(columns[j]));
  }
  if (scale == 0.0) {
    Vec c(p, 0.0);
    c[0] = 1.0;
    return c;
  }
  std::vector<std::size_t> pivot_col;
  std::size_t r = 0;
  for (std::size_t j = 0; j < p && r < k; ++j) {
    std::size_t piv = r;
    double best = std::abs(a(r, j));
    for (std::size_t i = r + 1; i < k; ++i)
      if (std::abs(a(i, j)) > best) {
        best = std::abs(a(i, j));
        piv = i;
      }
    if (best <= tol * scale) continue;  // dependent column, candidate for nullspace
    if (piv != r)
      for (std::size_t jj = 0; jj < p; ++jj) std::swap(a(r, jj), a(piv, jj));
    for (std::size_t i = 0; i < k; ++i) {
      if (i == r) continue;
      const double m = a(i, j) / a(r, j);
      if (m != 0.0)
        for (std::size_t jj = j; jj < p; ++jj) a(i, jj) -= m * a(r, jj);
    }
    pivot_col.push_back(j);
    ++r;
  }
  // First non-pivot column gives a combination.
  std::size_t free_col = p;
  {
    std::size_t pi = 0;
    for (std::size_t j = 0; j < p; ++j) {
      if (pi < pivot_col.size() && pivot_col[pi] == j) {
        ++pi;
      } else {
        free_col = j;
        break;
      }
    }
  }
  if (free_col == p) return {};
  Vec c(p, 0.0);
  c[free_col] = 1.0;
  for (std::size_t i = 0; i < pivot_col.size(); ++i)
    c[pivot_col[i]] = -a(i, free_col) / a(i, pivot_col[i]);
  return c;
}

}  // namespace maxent
