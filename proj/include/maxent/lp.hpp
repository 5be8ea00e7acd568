#pragma once

#include <cstddef>
#include <vector>

#include "maxent/errors.hpp"
#include "maxent/linalg.hpp"
#include "maxent/numeric.hpp"

namespace maxent::lp {

enum class Status { kOptimal, kInfeasible, kUnbounded };

struct Result {
  Status status = Status::kInfeasible;
  Vec x;
  double objective = 0.0;
};

// Dense two-phase primal simplex with Bland's rule on the standard form
//
//   min c.x   s.t.  A x = b,  x >= 0.
//
// Bland's rule guarantees termination under the heavy degeneracy that
// tight-facet systems produce; everything here is desk scale so the dense
// tableau is fine.
class Simplex {
 public:
  Simplex(Matrix a, Vec b, Vec c, double tol = 1e-9)
      : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)), tol_(tol) {
    if (a_.rows() != b_.size() || a_.cols() != c_.size())
      throw DomainError("Simplex: dimension mismatch");
  }

  Result solve(long max_pivots = 200000) {
    const std::size_t m = a_.rows(), n = a_.cols();
    // Tableau with artificial columns; rhs made nonnegative first.
    tab_ = Matrix(m + 1, n + m + 1);
    for (std::size_t i = 0; i < m; ++i) {
      const double s = b_[i] < 0.0 ? -1.0 : 1.0;
      for (std::size_t j = 0; j < n; ++j) tab_(i, j) = s * a_(i, j);
      tab_(i, n + i) = 1.0;
      tab_(i, n + m) = s * b_[i];
    }
    basis_.resize(m);
    for (std::size_t i = 0; i < m; ++i) basis_[i] = n + i;

    // Phase 1: minimize sum of artificials.
    for (std::size_t j = 0; j <= n + m; ++j) {
      double v = 0.0;
      for (std::size_t i = 0; i < m; ++i) v -= tab_(i, j);
      tab_(m, j) = (j >= n && j < n + m) ? v + 1.0 : v;
    }
    if (!iterate(n + m, max_pivots)) throw NumericalError("Simplex: pivot budget exhausted (phase 1)");
    const double phase1 = -tab_(m, n + m);
    if (phase1 > tol_ * (1.0 + norm1(b_))) return Result{Status::kInfeasible, {}, phase1};
    drive_out_artificials(n);

    // Phase 2 objective: reduced costs of c relative to the current basis.
    for (std::size_t j = 0; j <= n + m; ++j) tab_(m, j) = (j < n) ? c_[j] : 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (basis_[i] >= n) continue;  // artificial stuck at zero in a redundant row
      const double cb = c_[basis_[i]];
      if (cb != 0.0)
        for (std::size_t j = 0; j <= n + m; ++j) tab_(m, j) -= cb * tab_(i, j);
    }
    if (!iterate(n, max_pivots)) throw NumericalError("Simplex: pivot budget exhausted (phase 2)");
    if (unbounded_) return Result{Status::kUnbounded, {}, kNegInf};

    Result r;
    r.status = Status::kOptimal;
    r.x.assign(n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
      if (basis_[i] < n) r.x[basis_[i]] = tab_(i, n + m);
    r.objective = dot(c_, r.x);
    return r;
  }

 private:
  // Bland: entering = lowest-index column with negative reduced cost; leaving
  // = ratio test, ties broken by lowest basic index.
  bool iterate(std::size_t ncols, long max_pivots) {
    const std::size_t m = a_.rows();
    const std::size_t rhs = a_.cols() + m;
    unbounded_ = false;
    for (long it = 0; it < max_pivots; ++it) {
      std::size_t enter = ncols;
      for (std::size_t j = 0; j < ncols; ++j)
        if (tab_(m, j) < -tol_ && !is_basic(j)) {
          enter = j;
          break;
        }
      if (enter == ncols) return true;  // optimal
      std::size_t leave = m;
      double best_ratio = kInf;
      for (std::size_t i = 0; i < m; ++i) {
        const double piv = tab_(i, enter);
        if (piv > tol_) {
          const double ratio = tab_(i, rhs) / piv;
          if (ratio < best_ratio - 1e-12 ||
              (ratio < best_ratio + 1e-12 && (leave == m || basis_[i] < basis_[leave]))) {
            best_ratio = ratio;
            leave = i;
          }
        }
      }
      if (leave == m) {
        unbounded_ = true;
        return true;
      }
      pivot(leave, enter);
    }
    return false;
  }

  bool is_basic(std::size_t j) const {
    for (std::size_t b : basis_)
      if (b == j) return true;
    return false;
  }

  void pivot(std::size_t row, std::size_t col) {
    const std::size_t m = a_.rows();
    const std::size_t w = a_.cols() + m + 1;
    const double p = tab_(row, col);
    for (std::size_t j = 0; j < w; ++j) tab_(row, j) /= p;
    for (std::size_t i = 0; i <= m; ++i) {
      if (i == row) continue;
      const double f = tab_(i, col);
      if (f != 0.0)
        for (std::size_t j = 0; j < w; ++j) tab_(i, j) -= f * tab_(row, j);
    }
    basis_[row] = col;
  }

  void drive_out_artificials(std::size_t n) {
    const std::size_t m = a_.rows();
    for (std::size_t i = 0; i < m; ++i) {
      if (basis_[i] < n) continue;
      std::size_t col = n;
      for (std::size_t j = 0; j < n; ++j)
        if (std::abs(tab_(i, j)) > 1e-7) {
          col = j;
          break;
        }
      if (col < n) pivot(i, col);
      // else: redundant row, artificial stays basic at value ~0
    }
  }

  Matrix a_;
  Vec b_, c_;
  double tol_;
  Matrix tab_;
  std::vector<std::size_t> basis_;
  bool unbounded_ = false;
};

inline Result solve_standard(Matrix a, Vec b, Vec c, double tol = 1e-9) {
  return Simplex(std::move(a), std::move(b), std::move(c), tol).solve();
}

// L1 distance from theta to the convex hull of points, via
//   min sum(s+ + s-)  s.t.  sum_k q_k p_k + s+ - s- = theta, sum q = 1, q,s >= 0.
// Always feasible; membership within tol iff the optimum is <= tol.
inline double hull_l1_residual(const std::vector<Vec>& points, const Vec& theta) {
  const std::size_t n = points.size();
  if (n == 0) throw DomainError("hull_l1_residual: empty point set");
  const std::size_t m = theta.size();
  Matrix a(m + 1, n + 2 * m);
  Vec b(m + 1), c(n + 2 * m, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    if (points[k].size() != m) throw DomainError("hull_l1_residual: dimension mismatch");
    for (std::size_t i = 0; i < m; ++i) a(i, k) = points[k][i];
    a(m, k) = 1.0;
  }
  for (std::size_t i = 0; i < m; ++i) {
    a(i, n + i) = 1.0;
    a(i, n + m + i) = -1.0;
    c[n + i] = 1.0;
    c[n + m + i] = 1.0;
    b[i] = theta[i];
  }
  b[m] = 1.0;
  const Result r = solve_standard(std::move(a), std::move(b), std::move(c));
  if (r.status != Status::kOptimal) throw IntegrityError("hull_l1_residual: LP did not solve");
  return r.objective;
}

inline bool in_convex_hull(const std::vector<Vec>& points, const Vec& theta, double tol = 1e-8) {
  return hull_l1_residual(points, theta) <= tol;
}

// Largest s such that theta = sum q_k p_k with q_k >= s, sum q = 1.
// Positive iff theta lies in the relative interior of conv(points).
inline double relative_interior_margin(const std::vector<Vec>& points, const Vec& theta) {
  const std::size_t n = points.size();
  const std::size_t m = theta.size();
  // Variables: u_k >= 0 (q_k = s + u_k), s >= 0, plus L1 slacks for roundoff.
  Matrix a(m + 1, n + 1 + 2 * m);
  Vec b(m + 1), c(n + 1 + 2 * m, 0.0);
  Vec colsum(m, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < m; ++i) {
      a(i, k) = points[k][i];
      colsum[i] += points[k][i];
    }
    a(m, k) = 1.0;
  }
  for (std::size_t i = 0; i < m; ++i) a(i, n) = colsum[i];
  a(m, n) = static_cast<double>(n);
  c[n] = -1.0;  // maximize s
  for (std::size_t i = 0; i < m; ++i) {
    a(i, n + 1 + i) = 1.0;
    a(i, n + 1 + m + i) = -1.0;
    c[n + 1 + i] = 1e6;  // slack only absorbs float roundoff in theta
    c[n + 1 + m + i] = 1e6;
    b[i] = theta[i];
  }
  b[m] = 1.0;
  const Result r = solve_standard(std::move(a), std::move(b), std::move(c));
  if (r.status == Status::kInfeasible) return -1.0;
  if (r.status != Status::kOptimal) throw IntegrityError("relative_interior_margin: LP failed");
  double slack_use = 0.0;
  for (std::size_t i = 0; i < 2 * m; ++i) slack_use += r.x[n + 1 + i];
  if (slack_use > 1e-6 * (1.0 + norm1(theta))) return -1.0;  // theta outside the hull
  return r.x[n];
}

// Feasibility of sum_j beta_j cols_j = target with beta >= 0; returns beta or
// empty on infeasibility. Equality handled through the phase-1 tolerance.
inline Vec conic_combination(const std::vector<Vec>& cols, const Vec& target, double tol = 1e-9) {
  const std::size_t p = cols.size();
  const std::size_t k = target.size();
  Matrix a(k, p + 2 * k);
  Vec b = target, c(p + 2 * k, 0.0);
  for (std::size_t j = 0; j < p; ++j)
    for (std::size_t i = 0; i < k; ++i) a(i, j) = cols[j][i];
  for (std::size_t i = 0; i < k; ++i) {
    a(i, p + i) = 1.0;
    a(i, p + k + i) = -1.0;
    c[p + i] = 1.0;
    c[p + k + i] = 1.0;
  }
  const Result r = solve_standard(std::move(a), std::move(b), std::move(c), tol);
  if (r.status != Status::kOptimal || r.objective > tol * (1.0 + norm1(target))) return {};
  Vec beta(r.x.begin(), r.x.begin() + p);
  return beta;
}

}  // namespace maxent::lp
