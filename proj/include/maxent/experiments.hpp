#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "maxent/dual_solver.hpp"
#include "maxent/errors.hpp"
#include "maxent/numeric.hpp"
#include "maxent/oracle.hpp"
#include "maxent/polytope.hpp"
#include "maxent/rng.hpp"
#include "maxent/support.hpp"

namespace maxent {

// One stability measurement: theta_2 is at l1 distance eps from theta_1, both
// solved to high precision, tv compared against the sqrt(R(eps) * eps) bound.
struct StabilityRow {
  std::string instance_id;
  long pair_index = 0;
  double eps = 0.0;
  double theta_dist_l1 = 0.0;
  double theta_dist_l2 = 0.0;
  double tv = 0.0;
  double bound = 0.0;
  double margin = 0.0;  // bound - tv
  long iters1 = 0;
  long iters2 = 0;
  bool solver_failed = false;
  bool violation = false;
};

struct StabilityTable {
  std::vector<StabilityRow> rows;
  long violations = 0;
  long failures = 0;
};

struct StabilityOptions {
  double solve_eps_override = -1.0;  // default: min(1e-2 * eps, 1e-8)
  SolveOptions solver;
};

// Samples theta_1 as a Dirichlet(1) mixture over up to m+1 random vertices,
// moves toward another random mixture until the l1 distance is exactly eps,
// solves both marginals and records tv against sqrt(R * eps). R is evaluated
// at the perturbation size, matching the stability theorem's statement.
inline StabilityTable stability_experiment(const CountingOracle& oracle,
                                           const FacetSystem& facets, long num_pairs,
                                           const Vec& eps_grid, std::uint64_t seed,
                                           const std::string& instance_id = "instance",
                                           StabilityOptions opts = {}) {
  if (!oracle.is_explicit())
    throw DomainError("stability_experiment: explicit support required");
  const SupportFamily& fam = oracle.support();
  const int m = fam.dim();
  const double log_card = fam.log_cardinality();
  const double l_p = oracle.weights().bit_complexity();
  const double big_m = static_cast<double>(facets.unary_complexity());

  StabilityTable table;
  for (double eps : eps_grid) {
    const RadiusBound rb = radius_bound(m, big_m, l_p, log_card, eps);
    const double bound = std::sqrt(rb.radius * eps);
    const double solve_eps =
        opts.solve_eps_override > 0.0 ? opts.solve_eps_override : std::min(1e-2 * eps, 1e-8);

    for (long t = 0; t < num_pairs; ++t) {
      Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(t) * 1000003ULL +
                                         std::uint64_t(std::llround(-std::log10(eps))));
      StabilityRow row;
      row.instance_id = instance_id;
      row.pair_index = t;
      row.eps = eps;

      auto vertex_mixture = [&]() {
        const std::size_t k = std::min<std::size_t>(fam.size(), static_cast<std::size_t>(m) + 1);
        std::vector<std::size_t> picks;
        while (picks.size() < k) {
          const std::size_t c = rng.uniform_index(fam.size());
          if (std::find(picks.begin(), picks.end(), c) == picks.end()) picks.push_back(c);
        }
        const Vec w = rng.dirichlet_uniform(picks.size());
        Vec theta(m, 0.0);
        for (std::size_t i = 0; i < picks.size(); ++i)
          axpy(w[i], to_double(fam.point(picks[i])), theta);
        return theta;
      };

      const Vec theta1 = vertex_mixture();
      Vec theta2;
      bool placed = false;
      for (int attempt = 0; attempt < 64 && !placed; ++attempt) {
        const Vec w = vertex_mixture();
        const double dist = norm1(w - theta1);
        if (dist < eps) continue;
        theta2 = theta1 + (eps / dist) * (w - theta1);
        placed = true;
      }
      if (!placed) {
        row.solver_failed = true;
        ++table.failures;
        table.rows.push_back(row);
        continue;
      }
      row.theta_dist_l1 = norm1(theta2 - theta1);
      row.theta_dist_l2 = norm2(theta2 - theta1);
      row.bound = bound;

      try {
        const SolveReport r1 = solve_dual(oracle, theta1, solve_eps, facets, opts.solver);
        const SolveReport r2 = solve_dual(oracle, theta2, solve_eps, facets, opts.solver);
        row.iters1 = r1.iterations;
        row.iters2 = r2.iterations;
        row.tv = tv_distance(*r1.q, *r2.q);
        row.margin = row.bound - row.tv;
        row.violation = row.tv > row.bound;
        if (row.violation) ++table.violations;
      } catch (const Error&) {
        row.solver_failed = true;
        ++table.failures;
      }
      table.rows.push_back(row);
    }
  }
  return table;
}

// Appendix-A experiment over F = ({0} x {0,1}^{m-1}) u {e_1}: the empirical
// mean of N uniform samples almost always lies on the boundary of
// P = {0 <= x_1 <= 1, 0 <= x_i <= 1 - x_1}. Two statistics are reported:
//   frac_off_boundary  - exact facet test on the mean (integer arithmetic)
//   frac_apex_mixed    - trials whose samples include e_1 but not exclusively
// The closed form 1 - (1 - 1/(2^{m-1}+1))^N is the probability of the second
// event (up to the negligible all-apex term) and an upper bound on the first.
struct BoundaryRun {
  int m = 0;
  long samples_per_trial = 0;
  long trials = 0;
  double frac_off_boundary = 0.0;
  double frac_apex_mixed = 0.0;
  double exact_probability = 0.0;  // 1 - (1 - 1/(2^{m-1}+1))^N
  double std_error = 0.0;          // binomial SE of frac_apex_mixed at the exact probability
  bool within_3_se = false;        // |frac_apex_mixed - exact| <= 3 SE
  bool facet_subset_ok = false;    // off-boundary (facets) implies apex-mixed, per trial
};

inline BoundaryRun boundary_demo(int m, long n_samples, long trials, std::uint64_t seed) {
  if (m < 2 || m > 62) throw DomainError("boundary_demo: m must be in [2, 62]");
  if (n_samples < 1) throw DomainError("boundary_demo: need at least one sample per trial");
  if (m < 62 && n_samples > (1LL << m)) throw DomainError("boundary_demo: N exceeds 2^m");
  if (trials < 1) throw DomainError("boundary_demo: need at least one trial");

  const std::uint64_t cube = std::uint64_t(1) << (m - 1);  // |F| = cube + 1
  long off_facets = 0, apex_mixed = 0;
  bool subset_ok = true;

  for (long t = 0; t < trials; ++t) {
    Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(t));
    long apex = 0;  // samples equal to e_1
    std::vector<long> bit_sums(m - 1, 0);
    for (long s = 0; s < n_samples; ++s) {
      const std::uint64_t pick = rng.uniform_index(cube + 1);
      if (pick == cube) {
        ++apex;
      } else {
        for (int i = 0; i < m - 1; ++i)
          if (pick & (std::uint64_t(1) << i)) ++bit_sums[i];
      }
    }
    const bool mixed = apex > 0 && apex < n_samples;
    // Facet tests on the mean, exact in integers: x1 = apex/N, xi = S_i/N,
    // 1 - x1 = (N - apex)/N.
    bool on_boundary = apex == 0 || apex == n_samples;
    if (!on_boundary)
      for (int i = 0; i < m - 1; ++i)
        if (bit_sums[i] == 0 || bit_sums[i] == n_samples - apex) {
          on_boundary = true;
          break;
        }
    if (!on_boundary) ++off_facets;
    if (mixed) ++apex_mixed;
    if (!on_boundary && !mixed) subset_ok = false;
  }

  BoundaryRun run;
  run.m = m;
  run.samples_per_trial = n_samples;
  run.trials = trials;
  run.frac_off_boundary = static_cast<double>(off_facets) / static_cast<double>(trials);
  run.frac_apex_mixed = static_cast<double>(apex_mixed) / static_cast<double>(trials);
  const double p_facet = 1.0 / (static_cast<double>(cube) + 1.0);
  run.exact_probability = 1.0 - std::pow(1.0 - p_facet, static_cast<double>(n_samples));
  run.std_error = std::sqrt(run.exact_probability * (1.0 - run.exact_probability) /
                            static_cast<double>(trials));
  run.within_3_se = std::abs(run.frac_apex_mixed - run.exact_probability) <= 3.0 * run.std_error;
  run.facet_subset_ok = subset_ok;
  return run;
}

}  // namespace maxent
