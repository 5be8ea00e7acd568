#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "maxent/errors.hpp"
#include "maxent/lp.hpp"
#include "maxent/numeric.hpp"
#include "maxent/oracle.hpp"
#include "maxent/polytope.hpp"
#include "maxent/support.hpp"

namespace maxent {

// Dual objective h_theta(y) = log sum_a p_a e^{<a - theta, y>} and its
// gradient theta^y - theta.
inline double h_value(const CountingOracle& oracle, const Vec& theta, const Vec& y) {
  if (theta.size() != y.size()) throw DomainError("h_value: dimension mismatch");
  return oracle.log_eval(y) - dot(theta, y);
}

inline Vec h_gradient(const CountingOracle& oracle, const Vec& theta, const Vec& y) {
  if (theta.size() != y.size()) throw DomainError("h_gradient: dimension mismatch");
  Vec g = oracle.log_gradient(y);
  for (std::size_t j = 0; j < g.size(); ++j) g[j] -= theta[j];
  return g;
}

// Sufficient ball radius for an eps-optimal dual point:
//   Delta = log|F| + 2 L_p + log(2m) + log(1/eps),  R = m^{3/2} M Delta.
// The log(2m) term (instead of log m) makes the truncation argument's
// per-coordinate budget eps/(2m) hold with the stated constant.
struct RadiusBound {
  int m = 0;
  double facet_complexity = 0.0;
  double weight_complexity = 0.0;
  double log_cardinality = 0.0;
  double eps = 0.0;
  double delta = 0.0;
  double radius = 0.0;
};

inline RadiusBound radius_bound(int m, double facet_complexity, double weight_complexity,
                                double log_cardinality, double eps) {
  if (m < 1) throw DomainError("radius_bound: m must be positive");
  if (!(facet_complexity >= 1.0)) throw DomainError("radius_bound: facet complexity must be >= 1");
  if (!(weight_complexity >= 0.0)) throw DomainError("radius_bound: negative weight complexity");
  if (!(log_cardinality >= 0.0)) throw DomainError("radius_bound: negative log cardinality");
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("radius_bound: eps must lie in (0,1)");
  RadiusBound rb;
  rb.m = m;
  rb.facet_complexity = facet_complexity;
  rb.weight_complexity = weight_complexity;
  rb.log_cardinality = log_cardinality;
  rb.eps = eps;
  rb.delta = log_cardinality + 2.0 * weight_complexity + std::log(2.0 * m) + std::log(1.0 / eps);
  rb.radius = std::pow(static_cast<double>(m), 1.5) * facet_complexity * rb.delta;
  return rb;
}

// q^y_a = p_a e^{<a,y>} / sum_b p_b e^{<b,y>}, normalized in log domain.
inline PrimalDistribution primal_from_dual(std::shared_ptr<const SupportFamily> support,
                                           const LogWeightFunction& weights, const Vec& y) {
  const std::size_t n = support->size();
  Vec logq(n);
  for (std::size_t k = 0; k < n; ++k)
    logq[k] = weights.log_weight(k) + dot(y, support->point(k));
  const double lse = log_sum_exp(logq);
  Vec q(n);
  for (std::size_t k = 0; k < n; ++k) q[k] = std::exp(logq[k] - lse);
  return PrimalDistribution(std::move(support), std::move(q));
}

inline PrimalDistribution primal_from_dual(const CountingOracle& oracle, const Vec& y) {
  return primal_from_dual(oracle.support_ptr(), oracle.weights(), y);
}

// Residual of the identity KL(q, q^y) = h_theta(y) - sum q log(p/q), valid
// for any q feasible at theta.
inline double kl_identity_check(const PrimalDistribution& q, const LogWeightFunction& p,
                                const Vec& theta, const Vec& y) {
  const PrimalDistribution qy = primal_from_dual(q.support_ptr(), p, y);
  const double lhs = kl_divergence(q, qy).value;
  CountingOracle oracle = CountingOracle::from_explicit(q.support_ptr(), p);
  const double rhs = h_value(oracle, theta, y) - entropy_objective(q, p);
  return std::abs(lhs - rhs);
}

// Restriction of an explicit instance to the minimal face of conv(F)
// containing theta, so the dual infimum is attained; for boundary theta the
// unrestricted infimum is approached only along diverging dual sequences.
struct FaceRestriction {
  std::shared_ptr<const SupportFamily> support;
  std::optional<LogWeightFunction> weights;
  std::vector<std::size_t> kept;            // indices into the original family
  std::vector<Vec> affine_projector;        // orthonormal basis of the face's direction space
  std::vector<int> tight;                   // facet indices used
  bool identity = true;
};

namespace detail {

// Vertices that can carry mass in a feasible q with marginal theta: for each
// point, maximize q_k subject to feasibility. Exact minimal-face computation
// at desk scale.
inline std::vector<std::size_t> minimal_face_points(const std::vector<Vec>& pts, const Vec& theta,
                                                    double mass_tol = 1e-9) {
  const std::size_t n = pts.size();
  const std::size_t m = theta.size();
  std::vector<std::size_t> kept;
  for (std::size_t target = 0; target < n; ++target) {
    Matrix a(m + 1, n + 2 * m);
    Vec b(m + 1), c(n + 2 * m, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t i = 0; i < m; ++i) a(i, k) = pts[k][i];
      a(m, k) = 1.0;
    }
    for (std::size_t i = 0; i < m; ++i) {
      a(i, n + i) = 1.0;
      a(i, n + m + i) = -1.0;
      c[n + i] = 1e6;  // slacks absorb float roundoff in theta only
      c[n + m + i] = 1e6;
      b[i] = theta[i];
    }
    b[m] = 1.0;
    c[target] = -1.0;
    const lp::Result r = lp::solve_standard(std::move(a), std::move(b), std::move(c));
    if (r.status != lp::Status::kOptimal)
      throw DomainError("face_restrict: theta outside the polytope");
    if (r.x[target] > mass_tol) kept.push_back(target);
  }
  if (kept.empty()) throw DomainError("face_restrict: theta outside the polytope");
  return kept;
}

inline std::vector<Vec> direction_basis(const std::vector<IntVec>& pts) {
  std::vector<Vec> dirs;
  for (std::size_t k = 1; k < pts.size(); ++k) {
    Vec d(pts[0].size());
    for (std::size_t j = 0; j < d.size(); ++j)
      d[j] = static_cast<double>(pts[k][j] - pts[0][j]);
    dirs.push_back(std::move(d));
  }
  return orthonormal_basis(dirs);
}

}  // namespace detail

inline FaceRestriction face_restrict(const Vec& theta, const std::optional<FacetSystem>& facets,
                                     const SupportFamily& support, const LogWeightFunction& weights,
                                     double tol = 1e-9) {
  if (!support.is_explicit()) throw DomainError("face_restrict: explicit support required");
  if (static_cast<int>(theta.size()) != support.dim())
    throw DomainError("face_restrict: dimension mismatch");

  std::vector<std::size_t> kept(support.size());
  for (std::size_t k = 0; k < kept.size(); ++k) kept[k] = k;
  std::vector<int> tight_used;

  // Pass 1: with a facet description, the minimal face containing theta is
  // the intersection of all facets tight at theta; tightness of a point on
  // integer data is an exact comparison.
  if (facets) {
    const std::vector<int> tight = tight_facets(theta, *facets, tol);
    if (!tight.empty()) {
      std::vector<std::size_t> filtered;
      for (std::size_t k : kept) {
        const Vec a = to_double(support.point(k));
        bool on_face = true;
        for (int i : tight)
          if (std::abs(facets->slack(static_cast<std::size_t>(i), a)) > tol) {
            on_face = false;
            break;
          }
        if (on_face) filtered.push_back(k);
      }
      if (filtered.empty()) throw DomainError("face_restrict: theta outside the polytope");
      kept = std::move(filtered);
      tight_used = tight;
    }
  }

  // Pass 2: certify relative interiority; fall back to the LP minimal-face
  // computation when the facet list was absent or incomplete.
  {
    std::vector<Vec> pts;
    pts.reserve(kept.size());
    for (std::size_t k : kept) pts.push_back(to_double(support.point(k)));
    if (kept.size() > 1 && lp::relative_interior_margin(pts, theta) <= 1e-11) {
      const std::vector<std::size_t> sub = detail::minimal_face_points(pts, theta);
      std::vector<std::size_t> filtered;
      for (std::size_t idx : sub) filtered.push_back(kept[idx]);
      kept = std::move(filtered);
    }
  }

  FaceRestriction fr;
  fr.identity = kept.size() == support.size();
  fr.kept = kept;
  fr.tight = std::move(tight_used);
  std::vector<IntVec> pts;
  Vec lw;
  for (std::size_t k : kept) {
    pts.push_back(support.point(k));
    lw.push_back(weights.log_weight(k));
  }
  fr.affine_projector = detail::direction_basis(pts);
  fr.support = std::make_shared<const SupportFamily>(SupportFamily::explicit_family(std::move(pts)));
  fr.weights.emplace(*fr.support, std::move(lw));
  return fr;
}

struct SolveOptions {
  long max_iters = 2000000;       // practical ceiling below the theoretical cap
  bool accelerate = true;          // Nesterov momentum with monotone restarts
  double feasibility_tol = 1e-9;
  double grad_norm_target = -1.0;  // extra stop for gradient-accuracy consumers
  double radius_override = -1.0;
  double facet_complexity_hint = -1.0;
  bool face_restriction = true;
  bool record_trace = false;       // keep per-iteration h values in the report
};

struct SolveReport {
  Vec y;
  double h_value = 0.0;
  double gradient_norm = 0.0;
  double gap_certificate = 0.0;
  Vec theta_y;
  std::optional<PrimalDistribution> q;  // explicit mode only
  long iterations = 0;
  double radius_used = 0.0;
  RadiusBound radius_info;
  std::string solver = "projected_gradient";
  bool accelerated = true;
  bool face_restricted = false;
  std::size_t restricted_size = 0;
  std::string stop_reason;
  std::vector<double> h_trace;  // populated when SolveOptions::record_trace
};

class DualConvergenceError : public ConvergenceError {
 public:
  DualConvergenceError(const std::string& msg, SolveReport best)
      : ConvergenceError(msg), best_iterate(std::move(best)) {}
  SolveReport best_iterate;
};

namespace detail {

inline Vec project_ball(Vec y, double radius) {
  const double n = norm2(y);
  if (n > radius) {
    const double s = radius / n;
    for (double& v : y) v *= s;
  }
  return y;
}

// Facet complexity for the radius bound: recomputed from a given facet
// system, taken from the backend for implicit oracles (real stable Newton
// polytopes have M = 1), enumerated at desk scale otherwise.
inline double resolve_facet_complexity(const CountingOracle& oracle,
                                       const std::optional<FacetSystem>& facets,
                                       const SolveOptions& opts) {
  if (facets) return static_cast<double>(facets->unary_complexity());
  if (opts.facet_complexity_hint >= 1.0) return opts.facet_complexity_hint;
  if (auto m = oracle.default_facet_complexity()) return static_cast<double>(*m);
  const SupportFamily& fam = oracle.support();
  if (fam.size() == 1) return 1.0;  // point mass: the radius is never used
  if (fam.dim() <= 8 && fam.size() <= 64)
    return static_cast<double>(enumerate_facets(fam.points()).unary_complexity());
  throw DomainError(
      "solve_dual: facet complexity unknown; pass a facet system or a facet_complexity_hint");
}

}  // namespace detail

// Ball-constrained dual solve by projected gradient descent with fixed step
// 1/(2L), L = 2d^2, and optional Nesterov-style acceleration. The gap
// certificate is min(h(y) - best lower bound seen, 2R ||grad h(y)||): every
// y' in B(0,2R) around an iterate satisfies h(y') >= h(y) - 2R||grad||, and
// the radius bound puts an eps-optimal point inside the ball.
inline SolveReport solve_dual(const CountingOracle& oracle, const Vec& theta, double eps,
                              const std::optional<FacetSystem>& facets = std::nullopt,
                              SolveOptions opts = {}) {
  const int m = oracle.dimension();
  if (static_cast<int>(theta.size()) != m) throw DomainError("solve_dual: dimension mismatch");
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("solve_dual: eps must lie in (0,1)");
  if (facets) {
    if (facets->dim() != m) throw DomainError("solve_dual: facet dimension mismatch");
    if (!facets->feasible(theta, opts.feasibility_tol))
      throw DomainError("solve_dual: theta violates the facet system");
  }

  const double facet_complexity = detail::resolve_facet_complexity(oracle, facets, opts);

  // Explicit mode: feasibility check plus face restriction so the infimum is
  // attained and the certificate can close.
  std::optional<CountingOracle> restricted;
  const CountingOracle* work = &oracle;
  FaceRestriction fr;
  if (oracle.is_explicit()) {
    if (!lp::in_convex_hull(oracle.support().points_as_double(), theta,
                            opts.feasibility_tol * (1.0 + norm1(theta))))
      throw DomainError("solve_dual: theta outside conv(F)");
    if (opts.face_restriction) {
      fr = face_restrict(theta, facets, oracle.support(), oracle.weights(), opts.feasibility_tol);
      if (!fr.identity) {
        restricted = CountingOracle::from_explicit(fr.support, *fr.weights);
        work = &*restricted;
      }
    }
  }

  const double d = work->diameter_bound();
  const double weight_complexity = work->weight_complexity_bound();
  const double log_cardinality = work->log_cardinality_bound();
  const RadiusBound rb =
      radius_bound(m, facet_complexity, weight_complexity, std::max(log_cardinality, 0.0), eps);
  const double radius = opts.radius_override > 0.0 ? opts.radius_override : rb.radius;

  SolveReport rep;
  rep.radius_info = rb;
  rep.radius_used = radius;
  rep.accelerated = opts.accelerate;
  rep.face_restricted = !fr.identity;
  rep.restricted_size = oracle.is_explicit() ? work->support().size() : 0;

  auto finalize = [&](Vec y, double h, const Vec& grad, double cert, long iters,
                      std::string reason) {
    rep.y = std::move(y);
    rep.h_value = h;
    rep.gradient_norm = norm2(grad);
    rep.gap_certificate = cert;
    rep.theta_y = work->log_gradient(rep.y);
    rep.iterations = iters;
    rep.stop_reason = std::move(reason);
    if (oracle.is_explicit()) {
      const PrimalDistribution qr = primal_from_dual(*work, rep.y);
      if (fr.identity) {
        rep.q = qr;
      } else {
        Vec q(oracle.support().size(), 0.0);
        for (std::size_t j = 0; j < fr.kept.size(); ++j) q[fr.kept[j]] = qr.prob(j);
        rep.q = PrimalDistribution(oracle.support_ptr(), std::move(q));
      }
    }
    return rep;
  };

  // Degenerate face: single point or zero diameter. theta is a vertex; the
  // restricted dual is constant and y = 0 is optimal with a zero gap.
  if (d <= 0.0 || (work->is_explicit() && work->support().size() == 1)) {
    Vec y0(m, 0.0);
    const double h0 = h_value(*work, theta, y0);
    const Vec g0 = h_gradient(*work, theta, y0);
    return finalize(std::move(y0), h0, g0, 0.0, 0, "degenerate_face");
  }

  const double lips = 2.0 * d * d;
  const double step = 1.0 / (2.0 * lips);
  const double cap_theory = 8.0 * lips * radius * radius / eps + 10.0;
  const long cap = static_cast<long>(
      std::min(static_cast<double>(opts.max_iters), std::min(cap_theory, 2.0e9)));

  Vec y(m, 0.0);
  double h_cur = h_value(*work, theta, y);
  Vec grad = h_gradient(*work, theta, y);
  double gnorm = norm2(grad);
  double best_lb = h_cur - 2.0 * radius * gnorm;
  double cert = std::min(h_cur - best_lb, 2.0 * radius * gnorm);
  if (opts.record_trace) rep.h_trace.push_back(h_cur);

  Vec best_y = y;
  double best_h = h_cur, best_cert = cert, best_gnorm = gnorm;
  Vec best_grad = grad;

  // Momentum state.
  Vec z = y;
  double tau = 1.0;
  long last_cert_progress = 0;
  double cert_at_progress = cert;

  const double grad_small = eps / (4.0 * d);  // smoothness regime (oracle mode)

  auto stop_reason = [&](double c, double gn) -> const char* {
    if (c <= eps) return "gap_certificate";
    if (opts.grad_norm_target > 0.0 && gn <= opts.grad_norm_target) return "gradient_target";
    if (!oracle.is_explicit() && gn <= grad_small) return "gradient_small_oracle_mode";
    return nullptr;
  };

  if (const char* r = stop_reason(cert, gnorm))
    return finalize(std::move(y), h_cur, grad, cert, 0, r);

  for (long it = 1; it <= cap; ++it) {
    Vec y_next;
    if (opts.accelerate) {
      const Vec gz = h_gradient(*work, theta, z);
      y_next = detail::project_ball(z - step * gz, radius);
      double h_next = h_value(*work, theta, y_next);
      // Function restart with a representability slack: near the floating
      // floor of h the momentum must survive ulp-level wiggle, or the method
      // degrades to the plain rate while the gradient still has digits left.
      if (h_next > h_cur + 1e-14 * std::max(1.0, std::abs(h_cur))) {
        y_next = detail::project_ball(y - step * grad, radius);
        h_next = h_value(*work, theta, y_next);
        tau = 1.0;
        z = y_next;
      } else {
        const double tau_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tau * tau));
        z = y_next + ((tau - 1.0) / tau_next) * (y_next - y);
        tau = tau_next;
      }
      y = std::move(y_next);
      h_cur = h_next;
    } else {
      y_next = detail::project_ball(y - step * grad, radius);
      y = std::move(y_next);
      h_cur = h_value(*work, theta, y);
    }

    if (opts.record_trace) rep.h_trace.push_back(h_cur);
    grad = h_gradient(*work, theta, y);
    gnorm = norm2(grad);
    best_lb = std::max(best_lb, h_cur - 2.0 * radius * gnorm);
    cert = std::min(std::max(h_cur - best_lb, 0.0), 2.0 * radius * gnorm);

    if (h_cur < best_h || (h_cur == best_h && cert < best_cert)) {
      best_y = y;
      best_h = h_cur;
      best_cert = cert;
      best_gnorm = gnorm;
      best_grad = grad;
    }
    best_cert = std::min(best_cert, std::min(std::max(best_h - best_lb, 0.0), 2.0 * radius * best_gnorm));

    if (const char* r = stop_reason(cert, gnorm))
      return finalize(std::move(y), h_cur, grad, cert, it, r);
    if (const char* r = stop_reason(best_cert, best_gnorm))
      return finalize(std::move(best_y), best_h, best_grad, best_cert, it, r);

    // Stall detection on the certificate itself: once it stops improving for
    // a long stretch the iteration has hit its numerical floor (a
    // ball-constrained minimum whose gradient does not vanish) or the
    // logarithmic tail of an unattained infimum. In oracle mode the
    // deliverable is the marginal guarantee ||theta^y - theta|| <= 2d
    // sqrt(eps), i.e. a gradient of 2d sqrt(eps); a stalled iterate that
    // meets it is a success, not a failure.
    if (best_cert < cert_at_progress * (1.0 - 1e-3) - 1e-18) {
      cert_at_progress = best_cert;
      last_cert_progress = it;
    } else if (it - last_cert_progress > 5000 + 50 * m) {
      if (!oracle.is_explicit() && best_gnorm <= 2.0 * d * std::sqrt(eps))
        return finalize(std::move(best_y), best_h, best_grad, best_cert, it,
                        "marginal_guarantee_oracle_mode");
      SolveReport best = finalize(best_y, best_h, best_grad, best_cert, it, "stagnation");
      throw DualConvergenceError(
          "solve_dual: stagnated at gap certificate " + std::to_string(best_cert) +
              " before reaching eps = " + std::to_string(eps),
          std::move(best));
    }
  }

  if (!oracle.is_explicit() && best_gnorm <= 2.0 * d * std::sqrt(eps))
    return finalize(std::move(best_y), best_h, best_grad, best_cert, cap,
                    "marginal_guarantee_oracle_mode");
  SolveReport best = finalize(best_y, best_h, best_grad, best_cert, cap, "budget_exhausted");
  throw DualConvergenceError("solve_dual: iteration budget exhausted with gap certificate " +
                                 std::to_string(best.gap_certificate),
                             std::move(best));
}

// An eps/2-optimal point of the full dual h_theta, as the truncation theorem
// premises it. Interior theta: the ball-constrained solve directly. Boundary
// theta: the face-restricted optimum lifted along w = sum of the tight facet
// rows; off-face points satisfy <alpha - theta, w> <= -1 on integer data, so
// a doubling search on the lift length drives the full dual value down to
// the restricted one.
struct DualWitnessPoint {
  Vec y;
  double h_full = 0.0;
  bool lifted = false;
  double lift_length = 0.0;
  SolveReport inner;
};

inline DualWitnessPoint eps_optimal_dual_point(const CountingOracle& oracle, const Vec& theta,
                                               const FacetSystem& facets, double eps,
                                               SolveOptions opts = {}) {
  if (!oracle.is_explicit())
    throw DomainError("eps_optimal_dual_point: explicit support required");
  DualWitnessPoint out;
  const FaceRestriction fr =
      face_restrict(theta, facets, oracle.support(), oracle.weights(), opts.feasibility_tol);
  const CountingOracle* work = &oracle;
  std::optional<CountingOracle> restricted;
  if (!fr.identity) {
    restricted = CountingOracle::from_explicit(fr.support, *fr.weights);
    work = &*restricted;
  }
  try {
    out.inner = solve_dual(*work, theta, eps / 4.0, facets, opts);
  } catch (const DualConvergenceError& e) {
    // The ball-constrained minimum certifies poorly near the boundary, but
    // its value is eps/4-optimal by the radius theorem.
    out.inner = e.best_iterate;
  }
  out.y = out.inner.y;
  out.h_full = h_value(oracle, theta, out.y);
  if (fr.identity) return out;

  Vec lift(theta.size(), 0.0);
  for (int i : fr.tight) axpy(1.0, to_double(facets.row(static_cast<std::size_t>(i))), lift);
  if (norm2(lift) == 0.0)
    throw IntegrityError("eps_optimal_dual_point: boundary theta with no tight facets");
  out.lifted = true;
  const double target = out.inner.h_value + eps / 4.0;
  double t = 1.0;
  for (int tries = 0; tries < 200; ++tries) {
    const Vec cand = out.y + t * lift;
    const double h = h_value(oracle, theta, cand);
    if (h <= target) {
      out.y = cand;
      out.h_full = h;
      out.lift_length = t;
      return out;
    }
    t *= 2.0;
  }
  throw IntegrityError("eps_optimal_dual_point: lift failed to reach the restricted value");
}

}  // namespace maxent
