#include <doctest.h>

#include <cmath>

#include "maxent/maxent.hpp"
#include "testsupport.hpp"

using namespace maxent;

namespace {

double binary_entropy(double theta) {
  return -theta * std::log(theta) - (1.0 - theta) * std::log(1.0 - theta);
}

CountingOracle two_point() { return CountingOracle::from_explicit({{0}, {1}}, Vec(2, 0.0)); }

FacetSystem segment_facets() { return FacetSystem({{-1}, {1}}, {0.0, 1.0}); }

}  // namespace

TEST_CASE("radius bound formula") {
  const RadiusBound rb = radius_bound(1, 1.0, 0.0, std::log(2.0), std::exp(-1.0));
  CHECK(rb.delta == doctest::Approx(2.0 * std::log(2.0) + 1.0));
  CHECK(rb.radius == doctest::Approx(rb.delta));

  // Halving eps adds exactly log 2 to Delta; uniform weights keep Delta
  // independent of the prior.
  const RadiusBound a = radius_bound(4, 3.0, 0.0, 2.0, 1e-3);
  const RadiusBound b = radius_bound(4, 3.0, 0.0, 2.0, 0.5e-3);
  CHECK(b.delta - a.delta == doctest::Approx(std::log(2.0)));
  CHECK(a.radius == doctest::Approx(8.0 * 3.0 * a.delta));
  CHECK_THROWS_AS(radius_bound(1, 1.0, 0.0, 0.0, 2.0), DomainError);
  CHECK_THROWS_AS(radius_bound(1, 0.5, 0.0, 0.0, 0.5), DomainError);
}

TEST_CASE("h value and gradient closed forms") {
  const CountingOracle o = two_point();
  for (double y : {-2.0, 0.0, 1.5})
    CHECK(h_value(o, Vec{0.0}, Vec{y}) == doctest::Approx(std::log1p(std::exp(y))));
  CHECK(h_value(o, Vec{0.25}, Vec{0.0}) == doctest::Approx(std::log(2.0)));
  CHECK(h_gradient(o, Vec{0.25}, Vec{0.0})[0] == doctest::Approx(0.25));

  const std::vector<IntVec> trees = testsupport::enumerate_spanning_trees(3, {{0, 1}, {0, 2}, {1, 2}});
  const CountingOracle k3 = CountingOracle::from_explicit(trees, Vec(trees.size(), 0.0));
  CHECK(h_value(k3, Vec(3, 2.0 / 3.0), Vec(3, 0.0)) == doctest::Approx(std::log(3.0)));
  const Vec g = h_gradient(k3, Vec(3, 2.0 / 3.0), Vec(3, 0.0));
  CHECK(norm2(g) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("h gradient matches finite differences on random instances") {
  Rng rng(101);
  for (int inst = 0; inst < 10; ++inst) {
    const int m = 2 + static_cast<int>(rng.uniform_index(2));
    std::vector<IntVec> pts;
    for (int k = 0; k < 5; ++k) {
      IntVec p(m);
      for (int j = 0; j < m; ++j) p[j] = rng.uniform_int(-2, 3);
      pts.push_back(p);
    }
    Vec lw(5);
    for (double& v : lw) v = rng.uniform(-0.5, 0.5);
    CountingOracle o = CountingOracle::from_explicit(pts, lw);
    Vec theta(m, 0.1);
    auto f = [&](const Vec& y) { return h_value(o, theta, y); };
    for (int t = 0; t < 5; ++t) {
      const Vec y = rng.normal_vec(m);
      const Vec g = h_gradient(o, theta, y);
      const Vec fd = testsupport::fd_gradient(f, y);
      for (int j = 0; j < m; ++j) {
        const double scale = std::max(1.0, std::abs(fd[j]));
        CHECK(std::abs(g[j] - fd[j]) / scale <= 1e-6);
      }
    }
  }
}

TEST_CASE("solve_dual reproduces the binary closed form") {
  const CountingOracle o = two_point();
  const FacetSystem facets = segment_facets();
  for (double theta : {0.5, 0.25, 1e-3, 1e-6}) {
    const SolveReport rep = solve_dual(o, Vec{theta}, 1e-10, facets);
    CHECK(std::abs(rep.h_value - binary_entropy(theta)) <= 1e-8);
    REQUIRE(rep.q.has_value());
    CHECK(std::abs(rep.q->prob(0) - (1.0 - theta)) + std::abs(rep.q->prob(1) - theta) <= 1e-6);
    CHECK(norm2(rep.y) <= rep.radius_used + 1e-9);
  }
}

TEST_CASE("solve_dual stops immediately at a stationary start") {
  const CountingOracle o = two_point();
  const SolveReport rep = solve_dual(o, Vec{0.5}, 1e-9, segment_facets());
  CHECK(rep.iterations == 0);
  CHECK(rep.gap_certificate <= 1e-9);
}

TEST_CASE("vertex theta returns the point mass without optimization") {
  const CountingOracle o = two_point();
  const SolveReport rep = solve_dual(o, Vec{1.0}, 1e-9, segment_facets());
  CHECK(rep.iterations == 0);
  CHECK(rep.stop_reason == "degenerate_face");
  REQUIRE(rep.q.has_value());
  CHECK(rep.q->prob(1) == doctest::Approx(1.0));
  CHECK(rep.theta_y[0] == doctest::Approx(1.0));
}

TEST_CASE("face restriction on the unit square") {
  auto square = std::make_shared<const SupportFamily>(
      SupportFamily::explicit_family({{0, 0}, {0, 1}, {1, 0}, {1, 1}}));
  const LogWeightFunction w = LogWeightFunction::uniform(*square);
  const FacetSystem facets = enumerate_facets(square->points());

  const FaceRestriction interior = face_restrict(Vec{0.5, 0.5}, facets, *square, w);
  CHECK(interior.identity);

  const FaceRestriction edge = face_restrict(Vec{0.0, 0.5}, facets, *square, w);
  CHECK(edge.support->size() == 2);
  CHECK(edge.support->point(0) == IntVec{0, 0});
  CHECK(edge.support->point(1) == IntVec{0, 1});

  const FaceRestriction vertex = face_restrict(Vec{0.0, 0.0}, facets, *square, w);
  CHECK(vertex.support->size() == 1);

  CHECK_THROWS_AS(face_restrict(Vec{2.0, 0.0}, facets, *square, w), DomainError);
}

TEST_CASE("boundary theta solves through face restriction") {
  // K3 spanning trees, theta on the edge between (1,1,0)-type trees.
  const std::vector<IntVec> trees = testsupport::enumerate_spanning_trees(3, {{0, 1}, {0, 2}, {1, 2}});
  const CountingOracle o = CountingOracle::from_explicit(trees, Vec(trees.size(), 0.0));
  const Vec theta{1.0, 0.5, 0.5};
  const SolveReport rep = solve_dual(o, theta, 1e-8);
  CHECK(rep.face_restricted);
  REQUIRE(rep.q.has_value());
  // Brute force: only trees containing edge 0 can carry mass, equally split.
  // (Index through the oracle's support: construction sorts points.)
  for (std::size_t k = 0; k < rep.q->support().size(); ++k) {
    const double expect = rep.q->support().point(k)[0] == 1 ? 0.5 : 0.0;
    CHECK(std::abs(rep.q->prob(k) - expect) <= 1e-5);
  }
}

TEST_CASE("primal_from_dual") {
  auto two = std::make_shared<const SupportFamily>(SupportFamily::explicit_family({{0}, {1}}));
  const LogWeightFunction w = LogWeightFunction::uniform(*two);
  const PrimalDistribution uniform = primal_from_dual(two, w, Vec{0.0});
  CHECK(uniform.prob(0) == doctest::Approx(0.5));
  const PrimalDistribution q = primal_from_dual(two, w, Vec{-std::log(3.0)});
  CHECK(q.prob(0) == doctest::Approx(0.75));
  CHECK(q.prob(1) == doctest::Approx(0.25));
}

TEST_CASE("no overflow under extreme weight spreads") {
  auto fam = std::make_shared<const SupportFamily>(SupportFamily::explicit_family({{0}, {1}, {2}}));
  const LogWeightFunction w(*fam, {-500.0, 0.0, 500.0});
  const CountingOracle o = CountingOracle::from_explicit(fam, w);
  const double le = o.log_eval(Vec{1.0});
  CHECK(std::isfinite(le));
  const PrimalDistribution q = primal_from_dual(fam, w, Vec{250.0});
  double sum = 0.0;
  for (std::size_t k = 0; k < 3; ++k) sum += q.prob(k);
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("kl identity residual") {
  auto fam = std::make_shared<const SupportFamily>(
      SupportFamily::explicit_family({{0, 0}, {1, 0}, {0, 1}, {1, 1}, {2, 1}, {1, 2}}));
  const LogWeightFunction w(*fam, {0.0, 0.1, -0.2, 0.3, -0.1, 0.2});
  Rng rng(71);
  for (int t = 0; t < 10; ++t) {
    const PrimalDistribution q(fam, rng.dirichlet_uniform(6));
    const Vec theta = marginal_of(q).theta;
    const Vec y = rng.normal_vec(2);
    CHECK(kl_identity_check(q, w, theta, y) <= 1e-10);
  }
}

TEST_CASE("kl identity recovers the duality gap at the optimum") {
  auto fam = std::make_shared<const SupportFamily>(
      SupportFamily::explicit_family({{0, 0}, {1, 0}, {0, 1}, {1, 1}}));
  const LogWeightFunction w = LogWeightFunction::uniform(*fam);
  const Vec theta{0.4, 0.3};
  const testsupport::NewtonSolve opt =
      testsupport::newton_dual_solve(fam->points(), w.log_weights(), theta);
  // q^theta from the optimal dual point; KL(q^theta, q^y) = h(y) - g(theta).
  const PrimalDistribution q_opt = primal_from_dual(fam, w, opt.y);
  const Vec y{0.3, -0.2};
  const CountingOracle o = CountingOracle::from_explicit(fam, w);
  const PrimalDistribution qy = primal_from_dual(fam, w, y);
  CHECK(kl_divergence(q_opt, qy).value ==
        doctest::Approx(h_value(o, theta, y) - opt.value).epsilon(1e-6));
}

TEST_CASE("hessian entries are bounded by 2 d^2") {
  const std::vector<IntVec> pts{{0, 0}, {2, 0}, {0, 2}, {1, 1}};
  const CountingOracle o = CountingOracle::from_explicit(pts, {0.0, 0.2, -0.2, 0.1});
  const double d = o.support().diameter();
  const Vec theta{0.8, 0.7};
  auto f = [&](const Vec& y) { return h_value(o, theta, y); };
  Rng rng(83);
  for (int t = 0; t < 5; ++t) {
    const Vec y = rng.normal_vec(2);
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j)
        CHECK(std::abs(testsupport::fd_hessian_entry(f, y, i, j)) <= 2.0 * d * d + 1e-4);
  }
}

TEST_CASE("descent lemma with step 1/(4 d^2)") {
  const std::vector<IntVec> pts{{0, 0}, {1, 0}, {0, 1}, {1, 1}};
  const CountingOracle o = CountingOracle::from_explicit(pts, Vec(4, 0.0));
  const double d = o.support().diameter();
  const double step = 1.0 / (4.0 * d * d);
  const Vec theta{0.35, 0.6};
  Rng rng(89);
  for (int t = 0; t < 20; ++t) {
    const Vec y = 2.0 * rng.normal_vec(2);
    const Vec g = h_gradient(o, theta, y);
    const double drop = h_value(o, theta, y) - h_value(o, theta, y - step * g);
    CHECK(drop >= dot(g, g) / (8.0 * d * d) - 1e-12);
  }
}

TEST_CASE("iterates are monotone in h") {
  const std::vector<IntVec> pts{{0, 0}, {1, 0}, {0, 1}, {1, 1}, {2, 2}};
  const CountingOracle o = CountingOracle::from_explicit(pts, {0.0, 0.3, -0.2, 0.4, -0.5});
  SolveOptions opts;
  opts.record_trace = true;
  for (bool accel : {true, false}) {
    opts.accelerate = accel;
    const SolveReport rep = solve_dual(o, Vec{0.9, 0.8}, 1e-8, std::nullopt, opts);
    for (std::size_t i = 1; i < rep.h_trace.size(); ++i)
      CHECK(rep.h_trace[i] <= rep.h_trace[i - 1] + 1e-12 * std::max(1.0, std::abs(rep.h_trace[i - 1])));
  }
}

TEST_CASE("close-to-optimal dual points control the primal") {
  // tv(q^theta, q^y) <= sqrt(2 eps) and ||theta^y - theta|| <= 2 d sqrt(eps).
  const std::vector<IntVec> pts{{0, 0}, {1, 0}, {0, 1}, {1, 1}};
  auto fam = std::make_shared<const SupportFamily>(SupportFamily::explicit_family(pts));
  const LogWeightFunction w = LogWeightFunction::uniform(*fam);
  const CountingOracle o = CountingOracle::from_explicit(fam, w);
  const double d = fam->diameter();
  Rng rng(97);
  for (double eps : {1e-4, 1e-6}) {
    for (int t = 0; t < 5; ++t) {
      Vec theta{0.2 + 0.6 * rng.uniform(), 0.2 + 0.6 * rng.uniform()};
      const SolveReport rep = solve_dual(o, theta, eps);
      const testsupport::NewtonSolve opt =
          testsupport::newton_dual_solve(pts, w.log_weights(), theta);
      const PrimalDistribution q_star = primal_from_dual(fam, w, opt.y);
      CHECK(tv_distance(q_star, *rep.q) <= std::sqrt(2.0 * eps) + 1e-9);
      CHECK(norm2(rep.theta_y - theta) <= 2.0 * d * std::sqrt(eps) + 1e-9);
    }
  }
}

TEST_CASE("infeasible theta raises a domain error") {
  const CountingOracle o = two_point();
  CHECK_THROWS_AS(solve_dual(o, Vec{1.5}, 1e-6, segment_facets()), DomainError);
  CHECK_THROWS_AS(solve_dual(o, Vec{-0.2}, 1e-6), DomainError);
}

TEST_CASE("report marginal matches the marginal of the reported distribution") {
  const std::vector<IntVec> trees =
      testsupport::enumerate_spanning_trees(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {2, 3}});
  const CountingOracle o = CountingOracle::from_explicit(trees, Vec(trees.size(), 0.0));
  // Boundary theta (a mixture of trees all containing edge 0): expansion of
  // the restricted q must stay consistent with the reported marginal.
  Vec theta(5, 0.0);
  Rng rng(991);
  int used = 0;
  for (const IntVec& t : trees)
    if (t[0] == 1) {
      axpy(1.0, to_double(t), theta);
      ++used;
    }
  REQUIRE(used > 1);
  theta = (1.0 / used) * theta;
  const SolveReport rep = solve_dual(o, theta, 1e-7);
  REQUIRE(rep.q.has_value());
  const Marginal mq = marginal_of(*rep.q);
  for (std::size_t j = 0; j < 5; ++j)
    CHECK(rep.theta_y[j] == doctest::Approx(mq.theta[j]).epsilon(1e-9));
  CHECK(rep.gap_certificate >= 0.0);
  CHECK(norm2(rep.y) <= rep.radius_used + 1e-9);
}

TEST_CASE("oracle mode reports the marginal guarantee at boundary targets") {
  // Spanning-tree oracle, theta on a face of the base polytope: the solver
  // runs unrestricted and stops on the small-gradient rule, which delivers
  // ||theta^y - theta|| <= 2 d sqrt(eps).
  const CountingOracle o = CountingOracle::spanning_tree(3, {{0, 1}, {0, 2}, {1, 2}});
  const double eps = 1e-6;
  const Vec theta{1.0, 0.5, 0.5};
  const SolveReport rep = solve_dual(o, theta, eps);
  const bool oracle_stop = rep.stop_reason == "gradient_small_oracle_mode" ||
                           rep.stop_reason == "marginal_guarantee_oracle_mode";
  CHECK(oracle_stop);
  CHECK_FALSE(rep.q.has_value());
  const double d = o.diameter_bound();
  CHECK(norm2(rep.theta_y - theta) <= 2.0 * d * std::sqrt(eps));
}
