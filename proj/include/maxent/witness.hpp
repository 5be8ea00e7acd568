#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "maxent/dual_solver.hpp"
#include "maxent/errors.hpp"
#include "maxent/lp.hpp"
#include "maxent/numeric.hpp"
#include "maxent/support.hpp"

namespace maxent {

// Conic expression of a dual vector in the tight facet normals at a vertex
// maximizing <., y>: y = sum_{i in I0} beta_i a'_i with beta >= 0, |I0| <=
// dim(H), a'_i the projections of the facet rows onto the span H of the
// (shifted) support.
struct ConicBasis {
  IntVec vertex;                  // alpha*, maximizer of <alpha, y>
  std::vector<int> indices;       // I0, subset of facet indices
  Vec beta;                       // nonnegative coefficients, parallel to indices
  std::vector<Vec> projected_rows;  // a'_i, parallel to indices
  Vec y_subspace;                 // projection of the input y onto H
  double residual = 0.0;          // || sum beta_i a'_i - y_subspace ||
};

namespace detail {

// Carathéodory pivoting: while the active columns are dependent, move beta
// along a nullspace direction until a coefficient hits zero. The represented
// vector never changes, so the reduction cannot increase the residual.
inline void caratheodory_reduce(std::vector<Vec>& cols, Vec& beta) {
  for (;;) {
    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < beta.size(); ++i)
      if (beta[i] > 1e-14) active.push_back(i);
    if (active.size() <= 1) break;
    std::vector<Vec> sub;
    sub.reserve(active.size());
    for (std::size_t i : active) sub.push_back(cols[i]);
    Vec c = nullspace_combination(sub);
    if (c.empty()) break;  // independent
    bool has_pos = false;
    for (double v : c) has_pos |= v > 0.0;
    if (!has_pos)
      for (double& v : c) v = -v;
    double t = kInf;
    for (std::size_t i = 0; i < c.size(); ++i)
      if (c[i] > 1e-14) t = std::min(t, beta[active[i]] / c[i]);
    for (std::size_t i = 0; i < c.size(); ++i) beta[active[i]] -= t * c[i];
    for (std::size_t i = 0; i < c.size(); ++i)
      if (beta[active[i]] < 1e-12) beta[active[i]] = 0.0;
  }
  // Drop zero entries.
  std::vector<Vec> keep_cols;
  Vec keep_beta;
  for (std::size_t i = 0; i < beta.size(); ++i)
    if (beta[i] > 0.0) {
      keep_cols.push_back(cols[i]);
      keep_beta.push_back(beta[i]);
    }
  cols = std::move(keep_cols);
  beta = std::move(keep_beta);
}

}  // namespace detail

// Finds the vertex alpha* maximizing <alpha, y> over F, the facets tight at
// it, and a nonnegative combination of their projections expressing y. The
// instance is shifted so the affine hull becomes a linear subspace; y is
// scaled to unit norm before the LP and the coefficients rescaled after.
inline ConicBasis good_basis(const Vec& y, const FacetSystem& facets,
                             const SupportFamily& support, double tol = 1e-9) {
  if (!support.is_explicit()) throw DomainError("good_basis: explicit support required");
  const int m = support.dim();
  if (static_cast<int>(y.size()) != m || facets.dim() != m)
    throw DomainError("good_basis: dimension mismatch");
  facets.validate_against(support, tol);

  // Shift so 0 in F; H = span of shifted points.
  const IntVec base = *std::min_element(support.points().begin(), support.points().end());
  std::vector<Vec> dirs;
  dirs.reserve(support.size());
  for (const IntVec& p : support.points()) {
    Vec d(m);
    for (int j = 0; j < m; ++j) d[j] = static_cast<double>(p[j] - base[j]);
    dirs.push_back(std::move(d));
  }
  const std::vector<Vec> h_basis = orthonormal_basis(dirs);

  ConicBasis cb;
  cb.y_subspace = project_onto_span(y, h_basis);
  const double ynorm = norm2(cb.y_subspace);
  if (ynorm <= 1e-14) {
    cb.vertex = base;  // y = 0: any vertex works, empty conic combination
    return cb;
  }
  const Vec yhat = (1.0 / ynorm) * cb.y_subspace;

  // alpha* = argmax <alpha, yhat>, lexicographically smallest on ties.
  double bestv = kNegInf;
  for (std::size_t k = 0; k < support.size(); ++k)
    bestv = std::max(bestv, dot(yhat, support.point(k)));
  std::size_t best = support.size();
  for (std::size_t k = 0; k < support.size(); ++k) {
    if (dot(yhat, support.point(k)) < bestv - 1e-9) continue;
    if (best == support.size() || support.point(k) < support.point(best)) best = k;
  }
  cb.vertex = support.point(best);
  const Vec vstar = to_double(cb.vertex);

  std::vector<int> tight;
  for (std::size_t i = 0; i < facets.size(); ++i)
    if (std::abs(facets.slack(i, vstar)) <= tol) tight.push_back(static_cast<int>(i));
  if (tight.empty())
    throw IntegrityError("good_basis: maximizing vertex has no tight facets; description incomplete");

  // Coordinates in the orthonormal H basis keep the LP small and well scaled.
  const std::size_t k_dim = h_basis.size();
  auto h_coords = [&](const Vec& v) {
    Vec c(k_dim);
    for (std::size_t l = 0; l < k_dim; ++l) c[l] = dot(v, h_basis[l]);
    return c;
  };
  std::vector<Vec> cols;
  cols.reserve(tight.size());
  for (int i : tight) cols.push_back(h_coords(to_double(facets.row(static_cast<std::size_t>(i)))));
  Vec beta = lp::conic_combination(cols, h_coords(yhat), 1e-9);
  if (beta.empty())
    throw IntegrityError(
        "good_basis: y is not in the cone of tight facet normals; inconsistent facet system");

  // Reduce to an independent subset, tracking which facet indices survive.
  {
    std::vector<Vec> work_cols = cols;
    Vec work_beta = beta;
    detail::caratheodory_reduce(work_cols, work_beta);
    std::vector<int> kept_idx;
    Vec kept_beta;
    std::vector<Vec> kept_rows;
    std::vector<bool> used(cols.size(), false);
    for (std::size_t wc = 0; wc < work_cols.size(); ++wc) {
      for (std::size_t i = 0; i < cols.size(); ++i) {
        if (used[i]) continue;
        if (cols[i] == work_cols[wc]) {
          used[i] = true;
          kept_idx.push_back(tight[i]);
          kept_beta.push_back(work_beta[wc]);
          break;
        }
      }
    }
    cb.indices = std::move(kept_idx);
    cb.beta = std::move(kept_beta);
  }

  for (std::size_t j = 0; j < cb.indices.size(); ++j) {
    const Vec a = to_double(facets.row(static_cast<std::size_t>(cb.indices[j])));
    cb.projected_rows.push_back(project_onto_span(a, h_basis));
    cb.beta[j] *= ynorm;  // undo the unit-norm scaling
  }

  Vec recon(m, 0.0);
  for (std::size_t j = 0; j < cb.beta.size(); ++j) axpy(cb.beta[j], cb.projected_rows[j], recon);
  cb.residual = norm2(recon - cb.y_subspace);
  if (cb.residual > 1e-8 * std::max(1.0, ynorm))
    throw IntegrityError("good_basis: reconstruction residual " + std::to_string(cb.residual));
  return cb;
}

// y_trunc = sum min(Delta, beta_i) a'_i; by the truncation argument it stays
// within eps of the input's dual value and its norm is at most m^{3/2} M Delta.
inline Vec truncate_dual(const ConicBasis& basis, double delta) {
  if (!(delta > 0.0)) throw DomainError("truncate_dual: Delta must be positive");
  Vec y(basis.y_subspace.size(), 0.0);
  for (std::size_t j = 0; j < basis.beta.size(); ++j)
    axpy(std::min(delta, basis.beta[j]), basis.projected_rows[j], y);
  return y;
}

struct TruncationReport {
  double h_star = 0.0;        // h_theta(y*)
  double h_trunc = 0.0;       // h_theta(y_trunc)
  double eps = 0.0;
  double margin = 0.0;        // h_star + eps/2 - h_trunc; negative means failure
  double norm_star = 0.0;
  double norm_trunc = 0.0;
  bool ok = false;
};

// Checks h_theta(y_trunc) <= h_theta(y*) + eps/2. A failure here would
// falsify the implementation, not the theorem; callers dump the instance.
inline TruncationReport verify_truncation(const CountingOracle& oracle, const Vec& theta,
                                          const Vec& y_star, const Vec& y_trunc, double eps) {
  TruncationReport r;
  r.eps = eps;
  r.h_star = h_value(oracle, theta, y_star);
  r.h_trunc = h_value(oracle, theta, y_trunc);
  r.norm_star = norm2(y_star);
  r.norm_trunc = norm2(y_trunc);
  r.margin = r.h_star + 0.5 * eps - r.h_trunc;
  r.ok = r.margin >= -1e-9 * std::max(1.0, std::abs(r.h_star));
  return r;
}

}  // namespace maxent
