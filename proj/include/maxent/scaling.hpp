#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "maxent/dual_solver.hpp"
#include "maxent/errors.hpp"
#include "maxent/lp.hpp"
#include "maxent/numeric.hpp"
#include "maxent/oracle.hpp"

namespace maxent {

// (r,c)-matrix scaling instance: find positive x, y with row sums of
// diag(x) A diag(y) equal to r and column sums equal to c.
struct ScalingInstance {
  Matrix a;
  std::vector<int> row_targets;  // r
  std::vector<int> col_targets;  // c
  double bit_complexity = 0.0;   // L_A = max |log A_ij| over nonzero entries
  long long mass = 0;            // h = ||r||_1 = ||c||_1

  ScalingInstance(Matrix a_in, std::vector<int> r, std::vector<int> c)
      : a(std::move(a_in)), row_targets(std::move(r)), col_targets(std::move(c)) {
    const std::size_t n = a.rows();
    if (n == 0 || a.cols() != n) throw DomainError("ScalingInstance: A must be square");
    if (row_targets.size() != n || col_targets.size() != n)
      throw DomainError("ScalingInstance: target length mismatch");
    long long hr = 0, hc = 0;
    for (int v : row_targets) {
      if (v < 1) throw DomainError("ScalingInstance: r must be positive integers");
      hr += v;
    }
    for (int v : col_targets) {
      if (v < 1) throw DomainError("ScalingInstance: c must be positive integers");
      hc += v;
    }
    if (hr != hc) throw DomainError("ScalingInstance: ||r||_1 != ||c||_1");
    mass = hr;
    for (std::size_t i = 0; i < n; ++i) {
      bool row_any = false;
      for (std::size_t j = 0; j < n; ++j) {
        const double v = a(i, j);
        if (v < 0.0 || !std::isfinite(v)) throw DomainError("ScalingInstance: bad entry in A");
        if (v > 0.0) {
          row_any = true;
          bit_complexity = std::max(bit_complexity, std::abs(std::log(v)));
        }
      }
      if (!row_any) throw DomainError("ScalingInstance: all-zero row");
    }
    for (std::size_t j = 0; j < n; ++j) {
      bool col_any = false;
      for (std::size_t i = 0; i < n; ++i) col_any |= a(i, j) > 0.0;
      if (!col_any) throw DomainError("ScalingInstance: all-zero column");
    }
  }
};

struct ScalingResult {
  Vec z;       // optimal dual point of the scaling program
  Vec log_x, log_y;
  Vec x, y;
  double row_residual_inf = 0.0;
  double col_residual_inf = 0.0;
  double col_residual_2 = 0.0;
  double bit_budget = 0.0;  // budget from the radius bound; |log x|, |log y| <= this
  SolveReport report;
};

namespace detail {

// Asymptotic scalability is c in conv(supp p) where p is the product-form
// polynomial. That hull is the Minkowski sum of r_i-scaled simplices over
// each row's nonzero pattern, so membership is a transportation LP in n^2
// variables rather than anything over the (huge) expanded support.
inline double scalability_residual(const ScalingInstance& inst) {
  const std::size_t n = inst.a.rows();
  std::vector<std::pair<std::size_t, std::size_t>> cells;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (inst.a(i, j) > 0.0) cells.emplace_back(i, j);
  const std::size_t nc = cells.size();
  Matrix eq(2 * n, nc + 2 * n);
  Vec b(2 * n), cost(nc + 2 * n, 0.0);
  for (std::size_t k = 0; k < nc; ++k) {
    eq(cells[k].first, k) = 1.0;
    eq(n + cells[k].second, k) = 1.0;
  }
  for (std::size_t i = 0; i < 2 * n; ++i) {
    eq(i, nc + i) = 1.0;  // L1 slack; optimum is the infeasibility residual
    cost[nc + i] = 1.0;
    b[i] = static_cast<double>(i < n ? inst.row_targets[i] : inst.col_targets[i - n]);
  }
  const lp::Result r = lp::solve_standard(std::move(eq), std::move(b), std::move(cost));
  if (r.status != lp::Status::kOptimal)
    throw IntegrityError("scalability_residual: transportation LP failed");
  return r.objective;
}

}  // namespace detail

// Solves the scaling convex program inf_z sum_i r_i log(sum_j A_ij e^{z_j})
// - <c, z> through the product-form counting oracle (the support is never
// materialized) and recovers x_i = r_i / sum_l A_il e^{z_l}, y_j = e^{z_j}.
// Row sums of diag(x) A diag(y) come out exact by construction; column sums
// land within eps because the column residual vector is the dual gradient.
inline ScalingResult matrix_scale(const ScalingInstance& inst, double eps,
                                  SolveOptions opts = {}) {
  const std::size_t n = inst.a.rows();
  const double scal_resid = detail::scalability_residual(inst);
  if (scal_resid > 1e-8 * static_cast<double>(inst.mass))
    throw ConvergenceError("matrix_scale: instance is not asymptotically scalable (residual " +
                           std::to_string(scal_resid) + ")");

  CountingOracle oracle = CountingOracle::product_form(inst.a, inst.row_targets);
  Vec theta(n);
  for (std::size_t j = 0; j < n; ++j) theta[j] = static_cast<double>(inst.col_targets[j]);

  opts.grad_norm_target = eps;  // column residual is exactly the gradient
  ScalingResult res;
  res.report = solve_dual(oracle, theta, std::min(eps, 0.5), std::nullopt, opts);
  res.z = res.report.y;

  res.log_x.resize(n);
  res.log_y = res.z;
  Vec lse_rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    Vec terms;
    terms.reserve(n);
    for (std::size_t j = 0; j < n; ++j)
      if (inst.a(i, j) > 0.0) terms.push_back(std::log(inst.a(i, j)) + res.z[j]);
    lse_rows[i] = log_sum_exp(terms);
    res.log_x[i] = std::log(static_cast<double>(inst.row_targets[i])) - lse_rows[i];
  }
  res.x.resize(n);
  res.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) res.x[i] = std::exp(res.log_x[i]);
  for (std::size_t j = 0; j < n; ++j) res.y[j] = std::exp(res.log_y[j]);

  // Residuals, evaluated in the same stable form used for the recovery.
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (inst.a(i, j) > 0.0) s += std::exp(std::log(inst.a(i, j)) + res.z[j] - lse_rows[i]);
    res.row_residual_inf = std::max(
        res.row_residual_inf, std::abs(static_cast<double>(inst.row_targets[i]) * s -
                                       static_cast<double>(inst.row_targets[i])));
  }
  double col2 = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t l = 0; l < n; ++l)
      if (inst.a(l, j) > 0.0)
        s += static_cast<double>(inst.row_targets[l]) *
             std::exp(std::log(inst.a(l, j)) + res.z[j] - lse_rows[l]);
    const double resid = s - static_cast<double>(inst.col_targets[j]);
    res.col_residual_inf = std::max(res.col_residual_inf, std::abs(resid));
    col2 += resid * resid;
  }
  res.col_residual_2 = std::sqrt(col2);

  // |log y_j| <= ||z|| <= R and |log x_i| <= log h + L_A + log n + R.
  res.bit_budget = std::log(static_cast<double>(inst.mass)) + inst.bit_complexity +
                   std::log(static_cast<double>(n)) + res.report.radius_used;
  return res;
}

// Entries of the scaled matrix B = diag(x) A diag(y), assembled in log domain.
inline Matrix scaled_matrix(const ScalingInstance& inst, const ScalingResult& res) {
  const std::size_t n = inst.a.rows();
  Matrix b(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (inst.a(i, j) > 0.0)
        b(i, j) = std::exp(res.log_x[i] + std::log(inst.a(i, j)) + res.log_y[j]);
  return b;
}

}  // namespace maxent
