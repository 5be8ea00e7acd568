#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "maxent/dual_solver.hpp"
#include "maxent/errors.hpp"
#include "maxent/lp.hpp"
#include "maxent/minnorm.hpp"
#include "maxent/numeric.hpp"
#include "maxent/oracle.hpp"

namespace maxent {

// Rank-1 Brascamp-Lieb data: rows v_1..v_m in R^n, exponents p >= 0. By
// Cauchy-Binet the numerator det(sum p_j x_j v_j v_j^T) expands over the
// column bases S (|S| = n, det V_S != 0) with coefficients p^S det(V_S)^2,
// so BL(B,p) = exp(g(p)) for the max-entropy dual over the basis indicators.
struct BLInstance {
  std::vector<Vec> rows;        // v_j
  int n = 0;                    // ambient rank
  std::vector<IntVec> bases;    // indicator vectors 1_S with det(V_S) != 0
  Vec log_det_sq;               // 2 log |det V_S|, parallel to bases

  BLInstance(std::vector<Vec> v_rows, int ambient_n) : rows(std::move(v_rows)), n(ambient_n) {
    const std::size_t m = rows.size();
    if (m == 0 || n < 1) throw DomainError("BLInstance: empty row set");
    for (const Vec& v : rows)
      if (static_cast<int>(v.size()) != n) throw DomainError("BLInstance: row dimension mismatch");
    if (static_cast<std::size_t>(n) > m)
      throw DomainError("BLInstance: rank(V) < n (fewer rows than columns)");
    {
      double combos = 1.0;
      for (int i = 0; i < n; ++i)
        combos *= static_cast<double>(m - i) / static_cast<double>(i + 1);
      if (combos > 1e6) throw BudgetError("BLInstance: more than 1e6 bases to enumerate");
    }
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    auto advance = [&]() {
      int i = n;
      while (i-- > 0) {
        if (idx[i] != static_cast<int>(m) - n + i) {
          ++idx[i];
          for (int j = i + 1; j < n; ++j) idx[j] = idx[j - 1] + 1;
          return true;
        }
      }
      return false;
    };
    do {
      Matrix vs(n, n);
      double scale = 1.0;
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) vs(i, j) = rows[idx[i]][j];
        scale *= std::max(norm2(rows[idx[i]]), 1e-300);
      }
      const LuFactors f = lu_factor(std::move(vs));
      if (f.singular || std::exp(f.log_abs_det) <= 1e-10 * scale) continue;
      IntVec ind(m, 0);
      for (int i = 0; i < n; ++i) ind[idx[i]] = 1;
      bases.push_back(std::move(ind));
      log_det_sq.push_back(2.0 * f.log_abs_det);
    } while (advance());
    if (bases.empty()) throw DomainError("BLInstance: rank(V) < n");
  }
};

struct BLResult {
  double value = kInf;       // BL(B, p); +inf when p is outside the base polytope
  double log_value = kInf;
  bool finite = false;
  SolveReport report;
};

namespace detail {

inline CountingOracle bl_oracle(const BLInstance& inst, const Vec& p) {
  std::vector<IntVec> pts;
  Vec logw;
  for (std::size_t s = 0; s < inst.bases.size(); ++s) {
    double lw = inst.log_det_sq[s];
    bool dead = false;
    for (std::size_t j = 0; j < p.size(); ++j) {
      if (inst.bases[s][j] == 0) continue;
      if (p[j] <= 0.0) {
        dead = true;  // p^S vanishes
        break;
      }
      lw += std::log(p[j]);
    }
    if (dead) continue;
    pts.push_back(inst.bases[s]);
    logw.push_back(lw);
  }
  if (pts.empty()) throw DomainError("bl_oracle: no basis survives the zero pattern of p");
  return CountingOracle::from_explicit(pts, logw);
}

}  // namespace detail

// Multiplicative (1+eps)-approximation of BL(B,p). Infinite constant (p
// outside the base polytope conv{1_S}) is reported through the sentinel, not
// an exception. The inner polynomial is real stable, so the facet complexity
// of its Newton polytope is 1.
inline BLResult bl_constant(const BLInstance& inst, const Vec& p, double eps) {
  const std::size_t m = inst.rows.size();
  if (p.size() != m) throw DomainError("bl_constant: exponent vector length mismatch");
  for (double pj : p)
    if (pj < 0.0 || !std::isfinite(pj)) throw DomainError("bl_constant: p must be nonnegative");

  BLResult res;
  double psum = 0.0;
  for (double pj : p) psum += pj;
  if (std::abs(psum - static_cast<double>(inst.n)) > 1e-9) return res;  // scaling identity fails
  std::vector<Vec> base_pts;
  base_pts.reserve(inst.bases.size());
  for (const IntVec& b : inst.bases) base_pts.push_back(to_double(b));
  if (!lp::in_convex_hull(base_pts, p, 1e-9)) return res;

  const CountingOracle oracle = detail::bl_oracle(inst, p);
  SolveOptions opts;
  opts.facet_complexity_hint = 1.0;
  const double eps_log = std::min(std::log1p(eps), 0.5);
  res.report = solve_dual(oracle, p, eps_log, std::nullopt, opts);
  res.log_value = res.report.h_value;
  res.value = std::exp(res.log_value);
  res.finite = true;
  return res;
}

struct BLWorstCaseResult {
  double value = 0.0;      // sup_{p in P_B} BL(B, p)
  double log_value = 0.0;
  double upper_bound = kInf;  // cut-based bound on the log optimum
  Vec p_best;
  long outer_iterations = 0;
  bool converged = false;
  Vec value_trace;  // inner value per outer iterate
};

// sup_{p in conv{1_S}} BL(B,p) by projected supergradient ascent; the inner
// value is concave in p (real stability of the basis generating polynomial)
// and the supergradient combines the weight derivative with -y from the
// inner minimizer. Basis vertices are evaluated exactly as seeds.
inline BLWorstCaseResult bl_worst_case(const BLInstance& inst, double eps, long max_outer = 300) {
  const std::size_t m = inst.rows.size();
  std::vector<Vec> base_pts;
  base_pts.reserve(inst.bases.size());
  for (const IntVec& b : inst.bases) base_pts.push_back(to_double(b));
  const double inner_eps = std::min(eps / 4.0, 0.05);

  BLWorstCaseResult res;
  double best = kNegInf;
  Vec best_p;

  // Vertices: p = 1_S concentrates all weight on S, value = log det(V_S)^2.
  for (std::size_t s = 0; s < inst.bases.size(); ++s) {
    if (inst.log_det_sq[s] > best) {
      best = inst.log_det_sq[s];
      best_p = base_pts[s];
    }
  }

  // Barycenter start.
  Vec p(m, 0.0);
  for (const Vec& b : base_pts) axpy(1.0 / static_cast<double>(base_pts.size()), b, p);

  double d = 0.0;
  for (const Vec& a : base_pts)
    for (const Vec& b : base_pts) d = std::max(d, norm2(a - b));
  d = std::max(d, 1e-9);

  for (long t = 1; t <= max_outer; ++t) {
    res.outer_iterations = t;
    double val;
    Vec y;
    try {
      const CountingOracle oracle = detail::bl_oracle(inst, p);
      SolveOptions opts;
      opts.facet_complexity_hint = 1.0;
      try {
        SolveReport rep = solve_dual(oracle, p, inner_eps, std::nullopt, opts);
        val = rep.h_value;
        y = rep.y;
      } catch (const DualConvergenceError& e) {
        val = e.best_iterate.h_value;
        y = e.best_iterate.y;
      }
    } catch (const Error&) {
      break;
    }
    res.value_trace.push_back(val);
    if (val > best) {
      best = val;
      best_p = p;
    }

    // d/dp_j of log sum_S p^S det^2 e^{<1_S - p, y>}: the weight part has the
    // p_j factor removed (safe at p_j = 0), the -<p,y> part contributes -y_j.
    Vec supergrad(m, 0.0);
    double h_full_at_p;  // full-sum intercept for the cut (not face-restricted)
    {
      Vec full_terms;
      full_terms.reserve(inst.bases.size());
      std::vector<Vec> per_coord_terms(m);
      for (std::size_t s = 0; s < inst.bases.size(); ++s) {
        double lw = inst.log_det_sq[s] + dot(y, inst.bases[s]);
        bool dead = false;
        for (std::size_t j = 0; j < m; ++j) {
          if (inst.bases[s][j] == 0) continue;
          if (p[j] <= 0.0) {
            dead = true;
            break;
          }
        }
        double lw_full = lw;
        for (std::size_t j = 0; j < m; ++j)
          if (inst.bases[s][j] == 1 && p[j] > 0.0) lw_full += std::log(p[j]);
        if (!dead) full_terms.push_back(lw_full);
        for (std::size_t j = 0; j < m; ++j) {
          if (inst.bases[s][j] == 0) continue;
          // term with the p_j factor removed; requires the others positive
          double lwj = lw;
          bool deadj = false;
          for (std::size_t l = 0; l < m; ++l) {
            if (l == j || inst.bases[s][l] == 0) continue;
            if (p[l] <= 0.0) {
              deadj = true;
              break;
            }
            lwj += std::log(p[l]);
          }
          if (!deadj) per_coord_terms[j].push_back(lwj);
        }
      }
      const double lse_full = log_sum_exp(full_terms);
      h_full_at_p = lse_full - dot(p, y);
      for (std::size_t j = 0; j < m; ++j) {
        const double lse_j = log_sum_exp(per_coord_terms[j]);
        supergrad[j] = (lse_j == kNegInf ? 0.0 : std::exp(lse_j - lse_full)) - y[j];
      }
    }

    // Valid cut: p' -> phi(p', y) is concave, dominates the inner value, and
    // has supergradient s at p, so its tangent bounds the optimum.
    double lin = kNegInf;
    for (const Vec& b : base_pts) lin = std::max(lin, dot(supergrad, b));
    res.upper_bound = std::min(res.upper_bound, h_full_at_p + lin - dot(supergrad, p));
    if (res.upper_bound - best <= eps / 2.0) {
      res.converged = true;
      break;
    }
    const double step = d / std::sqrt(static_cast<double>(t));
    p = project_onto_hull(base_pts, p + step * supergrad);
    for (double& pj : p) pj = std::max(pj, 0.0);
  }

  res.log_value = best;
  res.value = std::exp(best);
  res.p_best = best_p;
  return res;
}

}  // namespace maxent
