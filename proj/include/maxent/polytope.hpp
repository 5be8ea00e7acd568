#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "maxent/errors.hpp"
#include "maxent/support.hpp"

namespace maxent {

namespace detail {

using i128 = __int128;

// Exact determinant of an integer matrix (Bareiss fraction-free elimination).
inline i128 det_bareiss(std::vector<std::vector<i128>> a) {
  const std::size_t n = a.size();
  if (n == 0) return 1;
  i128 prev = 1;
  int sign = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    std::size_t piv = k;
    while (piv < n && a[piv][k] == 0) ++piv;
    if (piv == n) return 0;
    if (piv != k) {
      std::swap(a[piv], a[k]);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i)
      for (std::size_t j = k + 1; j < n; ++j)
        a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
    prev = a[k][k];
  }
  return sign * a[n - 1][n - 1];
}

inline long long checked_ll(i128 v, const char* ctx) {
  if (v > i128(9.0e17) || v < -i128(9.0e17)) throw BudgetError(std::string(ctx) + ": coefficient overflow");
  return static_cast<long long>(v);
}

}  // namespace detail

// Integer normal of the hyperplane through m affinely independent integer
// points in Z^m (cofactor expansion of the difference matrix), reduced by the
// gcd. Returns an empty vector when the points do not span a hyperplane.
inline IntVec hyperplane_normal(const std::vector<IntVec>& pts) {
  const std::size_t m = pts[0].size();
  if (pts.size() != m) throw DomainError("hyperplane_normal: need exactly m points");
  // Rows: pts[i] - pts[0], i = 1..m-1.
  std::vector<std::vector<detail::i128>> diff(m - 1, std::vector<detail::i128>(m));
  for (std::size_t i = 0; i + 1 < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      diff[i][j] = detail::i128(pts[i + 1][j]) - detail::i128(pts[0][j]);
  IntVec normal(m, 0);
  long long g = 0;
  for (std::size_t j = 0; j < m; ++j) {
    std::vector<std::vector<detail::i128>> minor(m - 1, std::vector<detail::i128>(m - 1));
    for (std::size_t i = 0; i + 1 < m; ++i) {
      std::size_t cc = 0;
      for (std::size_t c = 0; c < m; ++c)
        if (c != j) minor[i][cc++] = diff[i][c];
    }
    detail::i128 d = detail::det_bareiss(std::move(minor));
    if (j % 2 == 1) d = -d;
    normal[j] = detail::checked_ll(d, "hyperplane_normal");
    g = std::gcd(g, std::abs(normal[j]));
  }
  if (g == 0) return {};
  if (g > 1)
    for (long long& v : normal) v /= g;
  return normal;
}

// Rank of the affine hull directions; points are full-dimensional iff this
// equals the ambient dimension.
inline std::size_t affine_rank(const std::vector<IntVec>& points) {
  if (points.size() <= 1) return 0;
  std::vector<Vec> dirs;
  dirs.reserve(points.size() - 1);
  for (std::size_t k = 1; k < points.size(); ++k) {
    Vec d(points[0].size());
    for (std::size_t j = 0; j < d.size(); ++j)
      d[j] = static_cast<double>(points[k][j] - points[0][j]);
    dirs.push_back(std::move(d));
  }
  return orthonormal_basis(dirs).size();
}

namespace detail {

// Integer normal of the affine hull of `subset` within the direction space of
// the whole family: det(G) (v - D^T G^{-1} D v) with D the subset difference
// rows, computed exactly through the adjugate. The result spans the unique
// separating direction of a candidate facet of a rank-r polytope.
inline IntVec facet_normal_in_hull(const std::vector<IntVec>& subset,
                                   const std::vector<IntVec>& points) {
  const std::size_t m = subset[0].size();
  const std::size_t k = subset.size() - 1;  // direction rows
  std::vector<std::vector<i128>> d(k, std::vector<i128>(m));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < m; ++j)
      d[i][j] = i128(subset[i + 1][j]) - i128(subset[0][j]);

  // Gram matrix and its adjugate (trivial when k = 0).
  std::vector<std::vector<i128>> gram(k, std::vector<i128>(k));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      i128 s = 0;
      for (std::size_t c = 0; c < m; ++c) s += d[i][c] * d[j][c];
      gram[i][j] = s;
    }
  i128 det_g = 1;
  std::vector<std::vector<i128>> adj(k, std::vector<i128>(k, 0));
  if (k > 0) {
    det_g = det_bareiss(gram);
    if (det_g == 0) return {};  // subset affinely dependent
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) {
        std::vector<std::vector<i128>> minor(k - 1, std::vector<i128>(k - 1));
        for (std::size_t a = 0, ar = 0; a < k; ++a) {
          if (a == j) continue;
          for (std::size_t b = 0, bc = 0; b < k; ++b) {
            if (b == i) continue;
            minor[ar][bc++] = gram[a][b];
          }
          ++ar;
        }
        i128 c = det_bareiss(std::move(minor));
        if ((i + j) % 2 == 1) c = -c;
        adj[i][j] = c;
      }
  }

  for (const IntVec& p : points) {
    std::vector<i128> v(m);
    for (std::size_t j = 0; j < m; ++j) v[j] = i128(p[j]) - i128(subset[0][j]);
    // n = det(G) v - D^T adj(G) (D v)
    std::vector<i128> dv(k, 0);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t c = 0; c < m; ++c) dv[i] += d[i][c] * v[c];
    std::vector<i128> coef(k, 0);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) coef[i] += adj[i][j] * dv[j];
    IntVec n(m, 0);
    long long g = 0;
    bool nonzero = false;
    for (std::size_t c = 0; c < m; ++c) {
      i128 val = det_g * v[c];
      for (std::size_t i = 0; i < k; ++i) val -= coef[i] * d[i][c];
      n[c] = checked_ll(val, "facet_normal_in_hull");
      nonzero |= n[c] != 0;
      g = std::gcd(g, std::abs(n[c]));
    }
    if (!nonzero) continue;  // p on the subset's affine hull; try another
    if (g > 1)
      for (long long& x : n) x /= g;
    return n;
  }
  return {};
}

}  // namespace detail

// All facets of conv(points) at desk scale, by scanning r-subsets (r the
// affine rank) for supporting hyperplanes. For full-dimensional polytopes the
// normal comes from the cofactor expansion; lower-dimensional hulls get
// normals inside their own direction space, so the description is
// {<a_i, x> <= b_i} intersected with the affine hull, matching how the facet
// complexity is measured.
inline FacetSystem enumerate_facets(const std::vector<IntVec>& points,
                                    double subset_budget = 4e6) {
  if (points.empty()) throw DomainError("enumerate_facets: empty point set");
  const std::size_t m = points[0].size();
  const std::size_t n = points.size();
  const std::size_t rank = affine_rank(points);
  if (rank == 0) throw DomainError("enumerate_facets: single point has no facets");
  const std::size_t r = rank;
  {
    double combos = 1.0;
    for (std::size_t i = 0; i < r; ++i) combos *= static_cast<double>(n - i) / (i + 1);
    if (combos > subset_budget) throw BudgetError("enumerate_facets: subset budget exceeded");
  }

  std::set<std::pair<IntVec, long long>> seen;
  std::vector<IntVec> rows;
  Vec offsets;

  std::vector<std::size_t> idx(r);
  std::iota(idx.begin(), idx.end(), 0);
  auto advance = [&]() {
    std::size_t i = r;
    while (i-- > 0) {
      if (idx[i] != i + n - r) {
        ++idx[i];
        for (std::size_t j = i + 1; j < r; ++j) idx[j] = idx[j - 1] + 1;
        return true;
      }
    }
    return false;
  };

  do {
    std::vector<IntVec> subset(r);
    for (std::size_t i = 0; i < r; ++i) subset[i] = points[idx[i]];
    IntVec normal =
        r == m ? hyperplane_normal(subset) : detail::facet_normal_in_hull(subset, points);
    if (normal.empty()) continue;
    long long b = idot(normal, subset[0]);
    // Supporting test: all points on one side.
    bool any_above = false, any_below = false;
    for (const IntVec& p : points) {
      const long long v = idot(normal, p);
      if (v > b) any_above = true;
      if (v < b) any_below = true;
      if (any_above && any_below) break;
    }
    if (any_above && any_below) continue;
    if (any_above) {
      for (long long& v : normal) v = -v;
      b = -b;
    }
    if (seen.emplace(normal, b).second) {
      rows.push_back(normal);
      offsets.push_back(static_cast<double>(b));
    }
  } while (advance());

  if (rows.empty()) throw IntegrityError("enumerate_facets: no facets found");
  return FacetSystem(std::move(rows), std::move(offsets));
}

}  // namespace maxent
