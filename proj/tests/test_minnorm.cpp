#include <doctest.h>

#include <cmath>

#include "maxent/maxent.hpp"
#include "testsupport.hpp"

using namespace maxent;

TEST_CASE("min norm point of two orthonormal vectors") {
  const MinNormResult r = min_norm_point({{1.0, 0.0}, {0.0, 1.0}});
  CHECK(r.v[0] == doctest::Approx(0.5));
  CHECK(r.v[1] == doctest::Approx(0.5));
  CHECK(r.delta == doctest::Approx(std::sqrt(0.5)));
  CHECK(r.tau == doctest::Approx(std::sqrt(2.0)));
  CHECK(r.y_star[0] == doctest::Approx(-1.0));
  CHECK(r.y_star[1] == doctest::Approx(-1.0));
  CHECK(r.mu[0] == doctest::Approx(0.5));
}

TEST_CASE("single vector is its own min norm point") {
  const MinNormResult r = min_norm_point({{3.0, 4.0}});
  CHECK(r.v[0] == doctest::Approx(3.0));
  CHECK(r.delta == doctest::Approx(5.0));
}

TEST_CASE("degenerate instance (origin inside hull) is rejected") {
  CHECK_THROWS_AS(min_norm_point({{-1.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {0.0, -1.0}}),
                  DomainError);
}

TEST_CASE("wolfe matches the active-set QP oracle on random sets") {
  Rng rng(307);
  for (int inst = 0; inst < 30; ++inst) {
    const int m = 2 + static_cast<int>(rng.uniform_index(5));
    const int n = 2 + static_cast<int>(rng.uniform_index(20));
    const Vec anchor = rng.unit_vec(m);
    std::vector<Vec> pts;
    for (int k = 0; k < n; ++k) {
      Vec v = rng.normal_vec(m);
      const double along = dot(v, anchor);
      // Keep every point at least 0.15 along the anchor so delta > 0.
      axpy(0.15 + std::abs(along) - along, anchor, v);
      pts.push_back(std::move(v));
    }
    const MinNormResult w = min_norm_point(pts);
    const testsupport::ActiveSetMinNorm q = testsupport::active_set_min_norm(pts);
    CHECK(std::abs(w.delta - q.norm) <= 1e-8 * std::max(1.0, q.norm));
    CHECK(norm2(w.v - q.point) <= 1e-7);
  }
}

TEST_CASE("wolfe optimality condition and monotone norms") {
  Rng rng(311);
  std::vector<Vec> pts;
  for (int k = 0; k < 12; ++k) {
    Vec v = rng.normal_vec(3);
    v[0] = std::abs(v[0]) + 0.3;
    pts.push_back(v);
  }
  const MinNormResult r = min_norm_point(pts);
  for (const Vec& p : pts) CHECK(dot(r.v, p) >= dot(r.v, r.v) - 1e-10);

  auto lmo = [&](const Vec& x) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < pts.size(); ++k)
      if (dot(x, pts[k]) < dot(x, pts[best])) best = k;
    return pts[best];
  };
  const WolfeResult w = wolfe_min_norm(3, lmo);
  for (std::size_t i = 1; i < w.norm_trace.size(); ++i)
    CHECK(w.norm_trace[i] <= w.norm_trace[i - 1] + 1e-10);
}

TEST_CASE("separating witness: feasibility and the dual value of Fact 6.1") {
  Rng rng(313);
  for (int inst = 0; inst < 20; ++inst) {
    const int m = 2 + static_cast<int>(rng.uniform_index(4));
    std::vector<Vec> pts;
    const Vec anchor = rng.unit_vec(m);
    for (int k = 0; k < 8; ++k) {
      Vec v = rng.normal_vec(m);
      const double along = dot(v, anchor);
      axpy(0.2 + std::abs(along) - along, anchor, v);
      pts.push_back(std::move(v));
    }
    const MinNormResult r = min_norm_point(pts);
    // Feasibility margin of y*.
    for (const Vec& p : pts) CHECK(dot(r.y_star, p) <= -1.0 + 1e-8);
    CHECK(norm2(r.y_star) == doctest::Approx(r.tau).epsilon(1e-8));
    CHECK(r.tau * r.delta == doctest::Approx(1.0).epsilon(1e-10));

    // Dual objective of the separation QP at lambda = 2 mu / delta^2 equals 1/delta^2.
    Vec combo(m, 0.0);
    double lambda_sum = 0.0;
    for (std::size_t k = 0; k < pts.size(); ++k) {
      const double lk = 2.0 * r.mu[k] / (r.delta * r.delta);
      lambda_sum += lk;
      axpy(lk, pts[k], combo);
    }
    const double dual_value = lambda_sum - 0.25 * dot(combo, combo);
    CHECK(dual_value == doctest::Approx(1.0 / (r.delta * r.delta)).epsilon(1e-6));
  }
}

TEST_CASE("projection onto a hull") {
  const std::vector<Vec> tri{{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
  const Vec inside = project_onto_hull(tri, Vec{0.2, 0.2});
  CHECK(norm2(inside - Vec{0.2, 0.2}) <= 1e-9);
  const Vec outside = project_onto_hull(tri, Vec{1.0, 1.0});
  CHECK(outside[0] == doctest::Approx(0.5).epsilon(1e-7));
  CHECK(outside[1] == doctest::Approx(0.5).epsilon(1e-7));
}

TEST_CASE("flat instance: axis-aligned examples") {
  // alpha_1 = (1,0), alpha_2 = (1,K): H is the line x = 1, delta = 1.
  const FlatInstance a = build_flat_instance({{0, 0}, {1, 0}, {1, 1000}});
  CHECK(a.delta == doctest::Approx(1.0));
  CHECK(a.cell_vertices.size() == 2);

  // alpha_1 = (K,1), alpha_2 = (K,-1): H is x = K, delta = K = |<0 - a1, a>|.
  const FlatInstance b = build_flat_instance({{0, 0}, {7, 1}, {7, -1}});
  CHECK(b.delta == doctest::Approx(7.0));
  const double via_normal = std::abs(dot(b.unit_normal, to_double(IntVec{7, 1})));
  CHECK(b.delta == doctest::Approx(via_normal));
}

TEST_CASE("flat instance invariants") {
  const long long k = 1000;
  const FlatInstance inst = build_flat_instance({{0, 0}, {1, 0}, {1 - k, 1}});
  CHECK(inst.delta == doctest::Approx(1.0 / std::sqrt(1.0 + double(k) * double(k))));
  // All cell vertices are integer by construction and lie on H: <a, alpha> = delta.
  for (const IntVec& v : inst.cell_vertices)
    CHECK(dot(inst.unit_normal, v) == doctest::Approx(inst.delta).epsilon(1e-9));
  // The projection of 0 lies inside the cell: it equals the min-norm point of F'.
  std::vector<Vec> fprime;
  for (const IntVec& v : inst.cell_vertices) fprime.push_back(to_double(v));
  const MinNormResult mn = min_norm_point(fprime);
  CHECK(mn.delta == doctest::Approx(inst.delta).epsilon(1e-9));
  // ||alpha|| <= ||proj|| + diam(F') for every family point.
  for (const IntVec& v : inst.family)
    CHECK(norm2(to_double(v)) <= inst.delta + inst.diameter + 1e-9);
  CHECK_THROWS_AS(build_flat_instance({{1, 1}, {1, 0}, {0, 1}}), DomainError);
  CHECK_THROWS_AS(build_flat_instance({{0, 0}, {1, 0}, {2, 0}}), DomainError);
}

TEST_CASE("lower bound certificate on a flat instance") {
  const long long k = 1000;
  const FlatInstance inst = build_flat_instance({{0, 0}, {1, 0}, {1 - k, 1}});
  std::vector<std::pair<double, double>> table;
  const LowerBoundCertificate cert = certify_lower_bound(inst, 500, 7, &table);
  CHECK(cert.tau * cert.delta == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(cert.best_known_g <= 1e-12);  // g(0) = 0 for these families
  CHECK(cert.gap_at_zero == doctest::Approx(std::log(3.0)).epsilon(1e-9));
  CHECK(cert.empirical_ok);
  CHECK(cert.min_gap_observed > cert.eps);
  CHECK(table.size() == 500);
  // Separating witness from F' disallows short eps-optimal duals.
  for (const IntVec& v : inst.cell_vertices)
    CHECK(dot(cert.y_star, v) <= -1.0 + 1e-8);
}

TEST_CASE("non-flat instance gives only a trivial bound") {
  const FlatInstance inst = build_flat_instance({{0, 0}, {1, 0}, {0, 1}});
  CHECK(inst.delta == doctest::Approx(std::sqrt(0.5)));
  const LowerBoundCertificate cert = certify_lower_bound(inst, 200, 3);
  CHECK(cert.tau == doctest::Approx(std::sqrt(2.0)).epsilon(1e-8));
}
