#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "maxent/dual_solver.hpp"
#include "maxent/errors.hpp"
#include "maxent/lp.hpp"
#include "maxent/minnorm.hpp"
#include "maxent/numeric.hpp"
#include "maxent/oracle.hpp"
#include "maxent/polytope.hpp"

namespace maxent {

// Capacity relaxation Cap_B(p) = sup_{theta in P(B) cap P} inf_{x>0}
// p(x)/x^theta for a multiaffine p. The inner infimum is the max-entropy
// dual, evaluated through its Lipschitz proxy inf_{||y|| <= R} h_theta(y);
// the negated inner minimizer is a supergradient of the proxy in theta, so
// each outer iterate also yields a valid linear overestimator (cut).
struct CapacityInstance {
  CountingOracle oracle;                    // multiaffine counting oracle for p
  std::vector<IntVec> constraint_vertices;  // vertex list of P(B), 0/1 points
  std::optional<FacetSystem> constraint_facets;  // alternative: an H-description

  CapacityInstance(CountingOracle o, std::vector<IntVec> b_vertices)
      : oracle(std::move(o)), constraint_vertices(std::move(b_vertices)) {
    if (!oracle.is_multiaffine())
      throw DomainError("CapacityInstance: oracle must be multiaffine");
    if (constraint_vertices.empty()) throw DomainError("CapacityInstance: empty B");
    for (const IntVec& b : constraint_vertices)
      if (static_cast<int>(b.size()) != oracle.dimension())
        throw DomainError("CapacityInstance: B dimension mismatch");
  }

  CapacityInstance(CountingOracle o, FacetSystem b_facets)
      : oracle(std::move(o)), constraint_facets(std::move(b_facets)) {
    if (!oracle.is_multiaffine())
      throw DomainError("CapacityInstance: oracle must be multiaffine");
    if (constraint_facets->dim() != oracle.dimension())
      throw DomainError("CapacityInstance: B dimension mismatch");
  }
};

struct CapacityResult {
  double log_value = 0.0;  // best certified lower estimate of log Cap
  double value = 0.0;
  double upper_bound = kInf;  // valid upper bound on log Cap from the cuts
  Vec theta_best;
  long outer_iterations = 0;
  bool converged = false;
  Vec value_trace;  // inner value per outer iterate
};

class CapacityBudgetError : public BudgetError {
 public:
  CapacityBudgetError(const std::string& msg, CapacityResult best)
      : BudgetError(msg), best_result(std::move(best)) {}
  CapacityResult best_result;
};

namespace detail {

// Dykstra's alternating projections onto the intersection of two convex sets
// given their Euclidean projectors; linear convergence for polytopes.
inline Vec project_intersection(Vec x, const std::function<Vec(const Vec&)>& proj_a,
                                const std::function<Vec(const Vec&)>& proj_b,
                                int max_sweeps = 400, double tol = 1e-11) {
  Vec p(x.size(), 0.0), q(x.size(), 0.0);
  Vec prev = x;
  for (int it = 0; it < max_sweeps; ++it) {
    const Vec ya = proj_a(x + p);
    for (std::size_t i = 0; i < x.size(); ++i) p[i] = x[i] + p[i] - ya[i];
    const Vec yb = proj_b(ya + q);
    for (std::size_t i = 0; i < x.size(); ++i) q[i] = ya[i] + q[i] - yb[i];
    const double moved = norm2(yb - prev);
    prev = yb;
    x = yb;
    if (it > 0 && moved <= tol) break;
  }
  return x;
}

// Exact Euclidean projection onto {x : <a_i, x> <= b_i} by Dykstra's method
// with one correction per half-space (each half-space projection is closed
// form). Converges for any consistent system; the sweep count is generous
// for desk scale.
inline Vec project_halfspaces(const FacetSystem& facets, Vec x, int max_sweeps = 600,
                              double tol = 1e-12) {
  const std::size_t k = facets.size();
  std::vector<Vec> corrections(k, Vec(x.size(), 0.0));
  Vec row_norm_sq(k);
  for (std::size_t i = 0; i < k; ++i) {
    const Vec a = to_double(facets.row(i));
    row_norm_sq[i] = dot(a, a);
  }
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double moved = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const Vec a = to_double(facets.row(i));
      Vec z = x + corrections[i];
      const double violation = dot(a, z) - facets.offset(i);
      Vec projected = z;
      if (violation > 0.0) axpy(-violation / row_norm_sq[i], a, projected);
      for (std::size_t c = 0; c < x.size(); ++c) corrections[i][c] = z[c] - projected[c];
      moved += norm2(projected - x);
      x = std::move(projected);
    }
    if (moved <= tol) break;
  }
  return x;
}

// max <g, theta> over an H-polytope via the simplex (free variables split
// into positive parts, one slack per inequality). Returns +inf if unbounded.
inline double linear_max_over_facets(const FacetSystem& facets, const Vec& g) {
  const std::size_t m = g.size(), k = facets.size();
  Matrix a(k, 2 * m + k);
  Vec b(k), cost(2 * m + k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      a(i, j) = static_cast<double>(facets.row(i)[j]);
      a(i, m + j) = -a(i, j);
    }
    a(i, 2 * m + i) = 1.0;
    b[i] = facets.offset(i);
  }
  for (std::size_t j = 0; j < m; ++j) {
    cost[j] = -g[j];
    cost[m + j] = g[j];
  }
  const lp::Result r = lp::solve_standard(std::move(a), std::move(b), std::move(cost));
  if (r.status == lp::Status::kUnbounded) return kInf;
  if (r.status != lp::Status::kOptimal)
    throw DomainError("capacity: constraint facet system is infeasible");
  return -r.objective;
}

// max <g, theta> over conv(points) cap {facet system}: the hull membership is
// written through mixture weights, the facets act on the mixed point.
inline double linear_max_hull_with_facets(const std::vector<Vec>& points,
                                          const FacetSystem& facets, const Vec& g) {
  const std::size_t n = points.size(), k = facets.size();
  Matrix a(1 + k, n + k);
  Vec b(1 + k), cost(n + k, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    a(0, j) = 1.0;
    cost[j] = -dot(g, points[j]);
    for (std::size_t i = 0; i < k; ++i) a(1 + i, j) = dot(to_double(facets.row(i)), points[j]);
  }
  b[0] = 1.0;
  for (std::size_t i = 0; i < k; ++i) {
    a(1 + i, n + i) = 1.0;
    b[1 + i] = facets.offset(i);
  }
  const lp::Result r = lp::solve_standard(std::move(a), std::move(b), std::move(cost));
  if (r.status != lp::Status::kOptimal)
    throw DomainError("capacity: P(B) and conv(supp p) do not intersect");
  return -r.objective;
}

// max <g, theta> over conv(points_a) cap conv(points_b) via one joint LP.
inline double linear_max_over_intersection(const std::vector<Vec>& points_a,
                                           const std::vector<Vec>& points_b, const Vec& g) {
  const std::size_t na = points_a.size(), nb = points_b.size(), m = g.size();
  Matrix eq(m + 2, na + nb + 2 * m);
  Vec rhs(m + 2, 0.0), cost(na + nb + 2 * m, 0.0);
  for (std::size_t k = 0; k < na; ++k) {
    for (std::size_t i = 0; i < m; ++i) eq(i, k) = points_a[k][i];
    eq(m, k) = 1.0;
    cost[k] = -dot(g, points_a[k]);  // maximize
  }
  for (std::size_t k = 0; k < nb; ++k) {
    for (std::size_t i = 0; i < m; ++i) eq(i, na + k) = -points_b[k][i];
    eq(m + 1, na + k) = 1.0;
  }
  for (std::size_t i = 0; i < m; ++i) {  // roundoff slack on the coupling rows
    eq(i, na + nb + i) = 1.0;
    eq(i, na + nb + m + i) = -1.0;
    cost[na + nb + i] = 1e6;
    cost[na + nb + m + i] = 1e6;
  }
  rhs[m] = 1.0;
  rhs[m + 1] = 1.0;
  const lp::Result r = lp::solve_standard(std::move(eq), std::move(rhs), std::move(cost));
  if (r.status != lp::Status::kOptimal)
    throw DomainError("capacity: P(B) and conv(supp p) do not intersect");
  double v = 0.0;
  for (std::size_t k = 0; k < na; ++k) v += r.x[k] * dot(g, points_a[k]);
  return v;
}

}  // namespace detail

inline CapacityResult capacity(const CapacityInstance& inst, double eps, long max_outer = 400) {
  const CountingOracle& oracle = inst.oracle;
  const int m = oracle.dimension();
  const double inner_eps = std::min(eps / 4.0, 0.1);
  const double d = std::max(oracle.diameter_bound(), 1e-9);

  // Facets of conv(supp p) once, shared by the inner solves and the boundary
  // lifts of the cut points. Skipped when the subset scan would blow the
  // enumeration budget; the inner solves then need the support itself to be
  // small enough for their own facet resolution.
  std::optional<FacetSystem> supp_facets;
  if (oracle.is_explicit()) {
    const SupportFamily& fam = oracle.support();
    double combos = 1.0;
    for (int i = 0; i < m; ++i)
      combos *= static_cast<double>(fam.size() - i) / static_cast<double>(i + 1);
    if (fam.size() >= 2 && m <= 8 && combos <= 4e6)
      supp_facets = enumerate_facets(fam.points());
  }

  const bool facet_mode = inst.constraint_facets.has_value();
  std::vector<Vec> b_pts;
  b_pts.reserve(inst.constraint_vertices.size());
  for (const IntVec& b : inst.constraint_vertices) b_pts.push_back(to_double(b));

  auto proj_pb = [&](const Vec& x) {
    if (facet_mode) return detail::project_halfspaces(*inst.constraint_facets, x);
    return project_onto_hull(b_pts, x);
  };
  auto in_pb = [&](const Vec& x) {
    if (facet_mode) return inst.constraint_facets->feasible(x, 1e-6);
    return lp::in_convex_hull(b_pts, x, 1e-6);
  };
  auto proj_p = [&](const Vec& x) {
    if (oracle.is_explicit()) return project_onto_hull(oracle.support().points_as_double(), x);
    return project_onto_hull_lmo(
        static_cast<std::size_t>(m), [&](const Vec& c) { return oracle.maximize_linear(c); }, x);
  };
  auto project_feasible = [&](const Vec& x) {
    return detail::project_intersection(x, proj_pb, proj_p);
  };

  // Every evaluated y yields a valid linear overestimator of g at any theta':
  // g(theta') <= h(theta', y) = h_full(theta, y) + <(-y), theta' - theta>.
  // The intercept must be the full-oracle h; a face-restricted value would
  // undercut. The linear max runs over the exact feasible set when the
  // support is explicit, else over P(B) alone, a valid superset.
  auto cut_upper = [&](const Vec& theta, const Vec& y) {
    const Vec s = (-1.0) * y;
    const double intercept = h_value(oracle, theta, y);
    double lin;
    if (oracle.is_explicit() && facet_mode) {
      lin = detail::linear_max_hull_with_facets(oracle.support().points_as_double(),
                                                *inst.constraint_facets, s);
    } else if (oracle.is_explicit()) {
      lin = detail::linear_max_over_intersection(oracle.support().points_as_double(), b_pts, s);
    } else if (facet_mode) {
      lin = detail::linear_max_over_facets(*inst.constraint_facets, s);
    } else {
      lin = kNegInf;
      for (const Vec& b : b_pts) lin = std::max(lin, dot(s, b));
    }
    return intercept + lin - dot(s, theta);
  };

  // Returns the value estimate of g(theta) and the y used for the cut. For
  // explicit supports with facets the boundary-lifted witness point drives
  // the full dual near g(theta), which is what makes the cut tight at
  // boundary maximizers (B vertices in particular).
  auto inner_value = [&](const Vec& theta) -> std::pair<double, Vec> {
    if (oracle.is_explicit() && supp_facets) {
      const DualWitnessPoint wp = eps_optimal_dual_point(oracle, theta, *supp_facets, inner_eps);
      return {wp.inner.h_value, wp.y};
    }
    try {
      SolveReport rep = solve_dual(oracle, theta, inner_eps, supp_facets, {});
      return {rep.h_value, rep.y};
    } catch (const DualConvergenceError& e) {
      return {e.best_iterate.h_value, e.best_iterate.y};
    }
  };

  CapacityResult res;
  double best = kNegInf;
  Vec best_theta;

  // Vertex seeds: alpha in B that lies in supp(p) gives the exact lower
  // bound g(alpha) = log p_alpha, so dominance Cap >= p_alpha holds even if
  // the ascent stops early.
  for (const IntVec& b : inst.constraint_vertices) {
    bool in_supp;
    if (oracle.is_explicit()) {
      in_supp = oracle.support().find(b).has_value();
    } else {
      Vec c(m);
      for (int j = 0; j < m; ++j) c[j] = b[j] ? 1.0 : -1.0;
      const Vec v = oracle.maximize_linear(c);
      in_supp = true;
      for (int j = 0; j < m; ++j)
        if (std::abs(v[j] - static_cast<double>(b[j])) > 1e-9) in_supp = false;
    }
    if (!in_supp) continue;
    try {
      auto [val, y] = inner_value(to_double(b));
      res.upper_bound = std::min(res.upper_bound, cut_upper(to_double(b), y));
      if (val > best) {
        best = val;
        best_theta = to_double(b);
      }
    } catch (const Error&) {
    }
  }

  // Ascent start: the y = 0 marginal (relative interior of P) pushed into
  // the intersection.
  Vec theta = project_feasible(oracle.log_gradient(Vec(m, 0.0)));
  if (!in_pb(theta)) throw DomainError("capacity: P(B) and conv(supp p) do not intersect");

  for (long t = 1; t <= max_outer; ++t) {
    res.outer_iterations = t;
    auto [val, y] = inner_value(theta);
    res.value_trace.push_back(val);
    const Vec s = (-1.0) * y;  // supergradient of the proxy at theta
    if (val > best) {
      best = val;
      best_theta = theta;
    }
    res.upper_bound = std::min(res.upper_bound, cut_upper(theta, y));
    if (res.upper_bound - best <= eps / 2.0) {
      res.converged = true;
      break;
    }
    const double step = d / std::sqrt(static_cast<double>(t));
    theta = project_feasible(theta + step * s);
  }

  res.log_value = best;
  res.value = std::exp(best);
  res.theta_best = best_theta;
  if (!res.converged)
    throw CapacityBudgetError("capacity: ascent budget exhausted; log Cap_B(p) in [" +
                                  std::to_string(best) + ", " + std::to_string(res.upper_bound) +
                                  "]",
                              res);
  return res;
}

}  // namespace maxent
