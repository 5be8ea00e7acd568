#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "maxent/errors.hpp"
#include "maxent/linalg.hpp"
#include "maxent/numeric.hpp"
#include "maxent/polytope.hpp"
#include "maxent/rng.hpp"

namespace maxent {

namespace detail {

// Min-norm point of the affine hull of `pts` in the difference
// parametrization z = p_0 + sum mu_i (p_i - p_0): normal equations
// (D D') mu = -D p_0. This keeps the system scale-consistent even when the
// hull sits very close to the origin relative to the point norms. Returns
// empty coefficients on (numerical) affine dependence.
inline Vec affine_min_norm_coeffs(const std::vector<Vec>& pts) {
  const std::size_t s = pts.size();
  if (s == 1) return Vec{1.0};
  const std::size_t k = s - 1;
  std::vector<Vec> d(k);
  double dscale = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    d[i] = pts[i + 1] - pts[0];
    dscale = std::max(dscale, dot(d[i], d[i]));
  }
  if (dscale == 0.0) return {};
  Matrix gram(k, k);
  Vec rhs(k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) gram(i, j) = dot(d[i], d[j]) / dscale;
    rhs[i] = -dot(d[i], pts[0]) / dscale;
  }
  const LuFactors f = lu_factor(std::move(gram));
  if (f.singular || f.min_abs_pivot < 1e-12) return {};
  const Vec mu = lu_solve(f, rhs);
  Vec beta(s);
  beta[0] = 1.0;
  for (std::size_t i = 0; i < k; ++i) {
    if (!std::isfinite(mu[i])) return {};
    beta[i + 1] = mu[i];
    beta[0] -= mu[i];
  }
  return beta;
}

}  // namespace detail

// Wolfe's minimum-norm-point algorithm over conv of a lazily discovered
// vertex set. `lmo(x)` must return argmin_{v in P} <x, v>. Full corrective
// (minor) cycles; on affine dependence of the active set the least-weighted
// point is dropped and the cycle restarts.
struct WolfeResult {
  Vec point;                    // min-norm point v
  double norm = 0.0;            // delta = ||v||
  std::vector<Vec> active;      // vertices with positive weight
  Vec weights;                  // convex coefficients over `active`
  long major_cycles = 0;
  double optimality_gap = 0.0;  // <v,v> - min_i <v, vertex_i>
  Vec norm_trace;               // ||x|| at the end of each major cycle
};

inline WolfeResult wolfe_min_norm(std::size_t dim, const std::function<Vec(const Vec&)>& lmo,
                                  double tol = 1e-10, long max_major = 100000) {
  WolfeResult r;
  Vec x = lmo(Vec(dim, 0.0));
  std::vector<Vec> s{x};
  Vec lambda{1.0};
  double vertex_scale = norm2(x);

  auto rebuild_x = [&]() {
    x.assign(dim, 0.0);
    for (std::size_t i = 0; i < s.size(); ++i) axpy(lambda[i], s[i], x);
  };

  for (long major = 1; major <= max_major; ++major) {
    r.major_cycles = major;
    const Vec v = lmo(x);
    vertex_scale = std::max(vertex_scale, norm2(v));
    const double gap = dot(x, x) - dot(x, v);
    r.optimality_gap = gap;
    // Scale-relative stop (so certificate quality survives tiny delta on flat
    // instances) with an absolute floor at the inner-product noise level.
    if (gap <= tol * dot(x, x) + 64.0 * 1e-16 * norm2(x) * vertex_scale) break;
    bool duplicate = false;
    for (const Vec& p : s)
      if (norm2(p - v) <= 1e-14 * std::max(1.0, norm2(v))) {
        duplicate = true;
        break;
      }
    if (duplicate) break;  // no further exact progress available
    s.push_back(v);
    lambda.push_back(0.0);

    // Minor cycles: move to the affine min-norm point of S, clipping back to
    // the simplex and dropping points whose weight reaches zero.
    for (std::size_t guard = 0; guard <= s.size() + 2; ++guard) {
      Vec beta = detail::affine_min_norm_coeffs(s);
      if (beta.empty()) {
        // Affine dependence: drop the least-weighted point other than the
        // newest (which carries the fresh descent direction) and restart.
        std::size_t drop = 0;
        for (std::size_t i = 1; i + 1 < s.size(); ++i)
          if (lambda[i] < lambda[drop]) drop = i;
        s.erase(s.begin() + static_cast<long>(drop));
        lambda.erase(lambda.begin() + static_cast<long>(drop));
        double sum = 0.0;
        for (double l : lambda) sum += l;
        if (sum <= 0.0) {
          lambda.assign(lambda.size(), 1.0 / static_cast<double>(lambda.size()));
        } else {
          for (double& l : lambda) l /= sum;
        }
        continue;
      }
      bool interior = true;
      for (double b : beta) interior &= b > 1e-12;
      if (interior) {
        lambda = std::move(beta);
        rebuild_x();
        break;
      }
      double step = 1.0;
      for (std::size_t i = 0; i < beta.size(); ++i)
        if (beta[i] < 1e-12 && lambda[i] - beta[i] > 1e-15)
          step = std::min(step, lambda[i] / (lambda[i] - beta[i]));
      step = std::clamp(step, 0.0, 1.0);
      for (std::size_t i = 0; i < beta.size(); ++i)
        lambda[i] = (1.0 - step) * lambda[i] + step * beta[i];
      for (std::size_t i = s.size(); i-- > 0;) {
        if (lambda[i] <= 1e-12) {
          s.erase(s.begin() + static_cast<long>(i));
          lambda.erase(lambda.begin() + static_cast<long>(i));
        }
      }
      if (s.empty()) throw NumericalError("wolfe_min_norm: active set collapsed");
      double sum = 0.0;
      for (double l : lambda) sum += l;
      for (double& l : lambda) l /= sum;
      rebuild_x();
    }
    r.norm_trace.push_back(norm2(x));
  }
  r.point = x;
  r.norm = norm2(x);
  r.active = std::move(s);
  r.weights = std::move(lambda);
  return r;
}

// Fact 6.1 certificate data: the min-norm point v of conv(v_1..v_N), its
// norm delta, tau = 1/delta, and the witness y* = -v/delta^2 which satisfies
// <y*, v_i> <= -1 with ||y*|| = tau (the optimum of the separation QP).
struct MinNormResult {
  Vec v;
  double delta = 0.0;
  Vec mu;       // convex coefficients over the input order
  double tau = 0.0;
  Vec y_star;
};

inline MinNormResult min_norm_point(const std::vector<Vec>& vectors, double tol = 1e-10) {
  if (vectors.empty()) throw DomainError("min_norm_point: empty input");
  const std::size_t dim = vectors[0].size();
  for (const Vec& v : vectors) {
    if (v.size() != dim) throw DomainError("min_norm_point: dimension mismatch");
    if (!all_finite(v)) throw DomainError("min_norm_point: non-finite input");
  }
  auto lmo = [&](const Vec& x) {
    std::size_t best = 0;
    double bestv = kInf;
    for (std::size_t k = 0; k < vectors.size(); ++k) {
      const double val = dot(x, vectors[k]);
      if (val < bestv - 1e-15) {
        bestv = val;
        best = k;
      }
    }
    return vectors[best];
  };
  const WolfeResult w = wolfe_min_norm(dim, lmo, tol);

  MinNormResult r;
  r.v = w.point;
  r.delta = w.norm;
  if (r.delta <= 1e-12)
    throw DomainError("min_norm_point: degenerate instance, 0 lies in the hull (tau undefined)");
  r.mu.assign(vectors.size(), 0.0);
  for (std::size_t i = 0; i < w.active.size(); ++i) {
    // Map active vertices back to input indices (first match).
    for (std::size_t k = 0; k < vectors.size(); ++k)
      if (norm2(vectors[k] - w.active[i]) <= 1e-12 * std::max(1.0, norm2(w.active[i]))) {
        r.mu[k] += w.weights[i];
        break;
      }
  }
  r.tau = 1.0 / r.delta;
  r.y_star = (-1.0 / (r.delta * r.delta)) * r.v;
  return r;
}

// Shortest y with <y, v_i> <= -1 for all i; equals -v/delta^2 with
// ||y|| = 1/delta exactly, by the dual construction of Fact 6.1.
inline std::pair<Vec, double> shortest_separating_y(const std::vector<Vec>& vectors,
                                                    double tol = 1e-10) {
  const MinNormResult r = min_norm_point(vectors, tol);
  return {r.y_star, r.tau};
}

// Euclidean projection of x0 onto conv(points): min-norm point of the
// translated hull.
inline Vec project_onto_hull(const std::vector<Vec>& points, const Vec& x0, double tol = 1e-10) {
  std::vector<Vec> shifted;
  shifted.reserve(points.size());
  for (const Vec& p : points) shifted.push_back(p - x0);
  auto lmo = [&](const Vec& x) {
    std::size_t best = 0;
    double bestv = kInf;
    for (std::size_t k = 0; k < shifted.size(); ++k) {
      const double val = dot(x, shifted[k]);
      if (val < bestv - 1e-15) {
        bestv = val;
        best = k;
      }
    }
    return shifted[best];
  };
  const WolfeResult w = wolfe_min_norm(x0.size(), lmo, tol);
  return w.point + x0;
}

inline Vec project_onto_hull_lmo(std::size_t dim, const std::function<Vec(const Vec&)>& vertex_max,
                                 const Vec& x0, double tol = 1e-10) {
  // vertex_max(c) returns argmax <c, v>; Wolfe wants argmin <x, v - x0>.
  auto lmo = [&](const Vec& x) { return vertex_max((-1.0) * x) - x0; };
  const WolfeResult w = wolfe_min_norm(dim, lmo, tol);
  return w.point + x0;
}

// Lattice-parallelepiped family from a flat simplex: F' is the vertex set of
// the fundamental-cell translate containing the projection of 0 onto the
// affine hull H of alpha_1..alpha_m, and the family is F' together with 0.
// Short dual vectors cannot be eps-optimal for theta = 0 on such instances.
struct FlatInstance {
  std::vector<IntVec> generators;    // alpha_1..alpha_m
  IntVec translate;                  // gamma
  std::vector<IntVec> cell_vertices; // F'
  std::vector<IntVec> family;        // F = F' u {0}
  Vec theta;                         // = 0
  Vec unit_normal;                   // a, with <a, alpha> = delta on F'
  IntVec integer_normal;             // n with <n, alpha> = normal_offset on H, exact
  long long normal_offset = 0;       // > 0; delta = normal_offset / ||n||
  double delta = 0.0;                // dist(0, H)
  double diameter = 0.0;
  double smoothness = 0.0;           // L = 2 d^2
  double epsilon = 0.0;              // delta^2 / (e^4 L)
};

inline FlatInstance build_flat_instance(const std::vector<IntVec>& points) {
  if (points.size() < 3) throw DomainError("build_flat_instance: need alpha_0..alpha_m, m >= 2");
  const std::size_t m_amb = points[0].size();
  if (points.size() != m_amb + 1)
    throw DomainError("build_flat_instance: need exactly m+1 points in Z^m");
  for (long long v : points[0])
    if (v != 0) throw DomainError("build_flat_instance: alpha_0 must be the origin");
  const std::size_t k = m_amb - 1;  // lattice rank

  FlatInstance inst;
  inst.generators.assign(points.begin() + 1, points.end());

  // Direction basis D of H and the projection of 0 onto H.
  std::vector<Vec> dirs(k);
  for (std::size_t i = 0; i < k; ++i) {
    dirs[i].resize(m_amb);
    for (std::size_t j = 0; j < m_amb; ++j)
      dirs[i][j] = static_cast<double>(points[i + 2][j] - points[1][j]);
  }
  const Vec a1 = to_double(points[1]);
  Matrix gram(k, k);
  Vec rhs(k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) gram(i, j) = dot(dirs[i], dirs[j]);
    rhs[i] = -dot(dirs[i], a1);
  }
  const LuFactors gf = lu_factor(std::move(gram));
  if (gf.singular || gf.min_abs_pivot <= 1e-12)
    throw DomainError("build_flat_instance: points are affinely dependent");
  const Vec coords = lu_solve(gf, rhs);  // lattice coordinates of the projection

  Vec proj = a1;
  for (std::size_t i = 0; i < k; ++i) axpy(coords[i], dirs[i], proj);
  inst.delta = norm2(proj);
  if (inst.delta <= 1e-12)
    throw DomainError("build_flat_instance: origin lies on the affine hull");
  inst.unit_normal = (1.0 / inst.delta) * proj;

  // Exact integer description of H: <n, x> = c on all generators, c > 0.
  // delta = c / ||n|| and y* = -n/c is exactly feasible for the separation
  // program on F', which avoids the cancellation a float route would hit.
  {
    std::vector<IntVec> gens(points.begin() + 1, points.end());
    inst.integer_normal = hyperplane_normal(gens);
    if (inst.integer_normal.empty())
      throw DomainError("build_flat_instance: points are affinely dependent");
    inst.normal_offset = idot(inst.integer_normal, points[1]);
    if (inst.normal_offset == 0)
      throw DomainError("build_flat_instance: origin lies on the affine hull");
    if (inst.normal_offset < 0) {
      for (long long& v : inst.integer_normal) v = -v;
      inst.normal_offset = -inst.normal_offset;
    }
    for (const IntVec& g : gens)
      if (idot(inst.integer_normal, g) != inst.normal_offset)
        throw IntegrityError("build_flat_instance: inconsistent hyperplane normal");
    const double delta_exact =
        static_cast<double>(inst.normal_offset) / norm2(to_double(inst.integer_normal));
    if (std::abs(delta_exact - inst.delta) > 1e-9 * std::max(1.0, inst.delta))
      throw IntegrityError("build_flat_instance: projection/normal distance mismatch");
    inst.delta = delta_exact;
  }

  // Containing cell by floor-rounding with a snap; ties go to the lower cell.
  std::vector<long long> cell(k);
  for (std::size_t i = 0; i < k; ++i) cell[i] = static_cast<long long>(std::floor(coords[i] + 1e-12));
  inst.translate = points[1];
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < m_amb; ++j)
      inst.translate[j] += cell[i] * (points[i + 2][j] - points[1][j]);

  if (k > 20) throw BudgetError("build_flat_instance: cell vertex count exceeds 2^20");
  const std::size_t count = std::size_t(1) << k;
  inst.cell_vertices.reserve(count);
  for (std::size_t mask = 0; mask < count; ++mask) {
    IntVec v = inst.translate;
    for (std::size_t i = 0; i < k; ++i)
      if (mask & (std::size_t(1) << i))
        for (std::size_t j = 0; j < m_amb; ++j) v[j] += points[i + 2][j] - points[1][j];
    inst.cell_vertices.push_back(std::move(v));
  }

  inst.family = inst.cell_vertices;
  inst.family.push_back(IntVec(m_amb, 0));
  inst.theta.assign(m_amb, 0.0);
  double diam = 0.0;
  for (std::size_t i = 0; i < inst.family.size(); ++i)
    for (std::size_t j = i + 1; j < inst.family.size(); ++j)
      diam = std::max(diam, dist2(inst.family[i], inst.family[j]));
  inst.diameter = diam;
  inst.smoothness = 2.0 * diam * diam;
  inst.epsilon = inst.delta * inst.delta / (std::exp(4.0) * inst.smoothness);
  return inst;
}

// h_theta(y) for the flat family with theta = 0 and uniform weights.
inline double flat_h(const FlatInstance& inst, const Vec& y) {
  Vec terms;
  terms.reserve(inst.family.size());
  for (const IntVec& alpha : inst.family) terms.push_back(dot(y, alpha));
  return log_sum_exp(terms);
}

struct LowerBoundCertificate {
  double delta = 0.0;
  double tau = 0.0;            // required ||y|| for eps-optimality: 1/delta
  double eps = 0.0;
  Vec y_star;                  // shortest separating witness, ||y*|| = tau
  double best_known_g = 0.0;   // upper bound on g(0), approaches 0 from above
  double min_gap_observed = 0.0;
  double gap_at_zero = 0.0;    // h_0(0) = log |F|
  int probes = 0;
  bool empirical_ok = false;
};

// Certifies that every y with h_0(y) <= g(0) + eps has ||y|| >= 1/delta, and
// cross-checks empirically at random probes of norm <= 0.5/delta.
inline LowerBoundCertificate certify_lower_bound(const FlatInstance& inst, int probes = 1000,
                                                 std::uint64_t seed = 7,
                                                 std::vector<std::pair<double, double>>*
                                                     probe_table = nullptr) {
  std::vector<Vec> fprime;
  fprime.reserve(inst.cell_vertices.size());
  for (const IntVec& v : inst.cell_vertices) fprime.push_back(to_double(v));

  LowerBoundCertificate cert;
  cert.delta = inst.delta;
  cert.eps = inst.epsilon;
  // Exact witness from the integer hyperplane: <y*, alpha> = -1 on F' and
  // ||y*|| = 1/delta. Wolfe's algorithm on F' cross-checks the distance.
  const double c = static_cast<double>(inst.normal_offset);
  cert.y_star = (-1.0 / c) * to_double(inst.integer_normal);
  cert.tau = norm2(cert.y_star);
  cert.probes = probes;
  {
    const MinNormResult mn = min_norm_point(fprime);
    if (std::abs(mn.delta * cert.tau - 1.0) > 1e-7)
      throw IntegrityError("certify_lower_bound: min-norm distance disagrees with the normal");
  }

  // g(0) = inf_y log(1 + sum_{F'} e^{<y,a>}) = 0: descending along -a kills
  // every F' term since <a, alpha> = delta > 0 on F'.
  const std::size_t m = inst.theta.size();
  cert.best_known_g = flat_h(inst, Vec(m, 0.0));
  const double tmax =
      (std::log(static_cast<double>(inst.cell_vertices.size())) + 46.0) / inst.delta;
  for (int j = 0; j <= 8; ++j) {
    const Vec y = (-tmax * (j + 1) / 9.0) * inst.unit_normal;
    cert.best_known_g = std::min(cert.best_known_g, flat_h(inst, y));
  }
  cert.gap_at_zero = flat_h(inst, Vec(m, 0.0)) - cert.best_known_g;

  Rng rng(seed);
  cert.min_gap_observed = kInf;
  for (int p = 0; p < probes; ++p) {
    const double radius =
        0.5 * cert.tau * std::pow(rng.uniform(), 1.0 / static_cast<double>(m));
    const Vec y = radius * rng.unit_vec(m);
    const double gap = flat_h(inst, y) - cert.best_known_g;
    if (probe_table) probe_table->emplace_back(radius, gap);
    cert.min_gap_observed = std::min(cert.min_gap_observed, gap);
  }
  cert.empirical_ok = cert.min_gap_observed > cert.eps;
  if (!cert.empirical_ok)
    throw IntegrityError("certify_lower_bound: probe beat the certified gap (min gap " +
                         std::to_string(cert.min_gap_observed) + " <= eps " +
                         std::to_string(cert.eps) + "); this indicates an implementation bug");
  return cert;
}

}  // namespace maxent
