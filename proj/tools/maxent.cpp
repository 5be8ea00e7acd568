// maxent: max-entropy dual solves over finite integer supports, with the
// radius bound, truncation witnesses, min-norm certificates, matrix scaling,
// capacity and rank-1 Brascamp-Lieb solvers, and the stability / boundary
// experiments. Exit codes: 0 all invariants held, 2 counterexample recorded,
// 1 error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "maxent/maxent.hpp"

using namespace maxent;

namespace {

int log_verbosity = 1;  // 0 = quiet, 1 = info, 2 = debug

void log_info(const std::string& msg) {
  if (log_verbosity >= 1) std::cout << msg << "\n";
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) out.push_back(std::stoi(tok));
  }
  if (out.empty()) throw ParseError("empty integer list: " + s);
  return out;
}

Vec parse_double_list(const std::string& s) {
  Vec out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) out.push_back(std::stod(tok));
  }
  if (out.empty()) throw ParseError("empty list: " + s);
  return out;
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError("JSON parse failure in " + path + ": " + e.what());
  }
  return j;
}

std::vector<Vec> parse_matrix_json(const json& j, const char* key) {
  if (!j.contains(key)) throw ParseError(std::string("missing key '") + key + "'");
  std::vector<Vec> rows;
  for (const auto& row : j.at(key)) {
    Vec r;
    for (const auto& v : row) r.push_back(v.get<double>());
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw ParseError(std::string("empty matrix under '") + key + "'");
  return rows;
}

FacetSystem require_facets(const LoadedInstance& inst) {
  if (inst.facets) return *inst.facets;
  if (!inst.support) throw DomainError("instance has no facets and no explicit support");
  log_info("# facets not supplied; enumerating from the support");
  return enumerate_facets(inst.support->points());
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

static int cmd_solve(const std::string& path, double eps, long max_iters, bool no_accel,
                     const std::string& out, bool deterministic) {
  const LoadedInstance inst = load_instance(path);
  if (!inst.theta) throw DomainError("solve: instance has no theta");
  SolveOptions opts;
  if (max_iters > 0) opts.max_iters = max_iters;
  opts.accelerate = !no_accel;
  const SolveReport rep = solve_dual(inst.oracle, *inst.theta, eps, inst.facets, opts);
  log_info("h_value         " + fmt(rep.h_value));
  log_info("gradient_norm   " + fmt(rep.gradient_norm));
  log_info("gap_certificate " + fmt(rep.gap_certificate));
  log_info("iterations      " + std::to_string(rep.iterations));
  log_info("radius_used     " + fmt(rep.radius_used));
  log_info("stop_reason     " + rep.stop_reason);
  if (!out.empty()) {
    emit_report(report_to_json(rep), out, deterministic);
    log_info("# report written to " + out);
  }
  return 0;
}

static int cmd_witness(const std::string& path, double eps) {
  const LoadedInstance inst = load_instance(path);
  if (!inst.theta) throw DomainError("witness: instance has no theta");
  if (!inst.support) throw DomainError("witness: explicit support required");
  const FacetSystem facets = require_facets(inst);
  const DualWitnessPoint wp = eps_optimal_dual_point(inst.oracle, *inst.theta, facets, eps);
  const ConicBasis basis = good_basis(wp.y, facets, *inst.support);
  const RadiusBound rb =
      radius_bound(inst.dimension, static_cast<double>(facets.unary_complexity()),
                   inst.weights->bit_complexity(), inst.support->log_cardinality(), eps);
  const Vec y_trunc = truncate_dual(basis, rb.delta);
  const TruncationReport rep = verify_truncation(inst.oracle, *inst.theta, wp.y, y_trunc, eps);
  std::cout << "norm_y_star    " << fmt(rep.norm_star) << "\n";
  std::cout << "norm_y_trunc   " << fmt(rep.norm_trunc) << "\n";
  std::cout << "h(y_star)      " << fmt(rep.h_star) << "\n";
  std::cout << "h(y_trunc)     " << fmt(rep.h_trunc) << "\n";
  std::cout << "norm_bound     " << fmt(rb.radius) << "  (m^{3/2} M Delta)\n";
  std::cout << "margin         " << fmt(rep.margin) << "\n";
  if (!rep.ok) {
    std::cout << "counterexample: truncation exceeded the eps/2 budget; instance dump follows\n";
    json dump;
    dump["instance"] = path;
    dump["y_star"] = wp.y;
    dump["y_trunc"] = y_trunc;
    dump["theta"] = *inst.theta;
    std::cout << dump.dump(2) << "\n";
    return 2;
  }
  return 0;
}

static int cmd_minnorm(const std::string& vectors_path, const std::string& out,
                       bool deterministic) {
  const json j = load_json(vectors_path);
  const std::vector<Vec> vectors = parse_matrix_json(j, "vectors");
  const MinNormResult r = min_norm_point(vectors);
  std::cout << "delta  " << fmt(r.delta) << "\n";
  std::cout << "tau    " << fmt(r.tau) << "\n";
  std::cout << "y_star ";
  for (double v : r.y_star) std::cout << fmt(v) << " ";
  std::cout << "\n";
  if (!out.empty()) {
    json rep;
    rep["delta"] = r.delta;
    rep["tau"] = r.tau;
    rep["v"] = r.v;
    rep["y_star"] = r.y_star;
    rep["mu"] = r.mu;
    emit_report(std::move(rep), out, deterministic);
  }
  return 0;
}

static int cmd_lowerbound(const std::string& simplex_path, int probes, std::uint64_t seed,
                          const std::string& out) {
  const json j = load_json(simplex_path);
  const std::vector<Vec> raw = parse_matrix_json(j, "points");
  std::vector<IntVec> pts;
  for (const Vec& r : raw) {
    IntVec p;
    for (double v : r) p.push_back(static_cast<long long>(std::llround(v)));
    pts.push_back(std::move(p));
  }
  // Shift so alpha_0 is the origin (the programs are shift invariant).
  const IntVec base = pts[0];
  for (IntVec& p : pts)
    for (std::size_t c = 0; c < p.size(); ++c) p[c] -= base[c];
  const FlatInstance inst = build_flat_instance(pts);
  std::vector<std::pair<double, double>> table;
  const LowerBoundCertificate cert = certify_lower_bound(inst, probes, seed, &table);
  std::cout << "delta    " << fmt(cert.delta) << "\n";
  std::cout << "tau      " << fmt(cert.tau) << "  (required ||y|| for eps-optimality)\n";
  std::cout << "eps      " << fmt(cert.eps) << "\n";
  std::cout << "min_gap  " << fmt(cert.min_gap_observed) << "  over " << cert.probes
            << " probes with ||y|| <= tau/2\n";
  std::cout << "y_star   ";
  for (double v : cert.y_star) std::cout << fmt(v) << " ";
  std::cout << "\n";
  if (!out.empty()) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& [radius, gap] : table) rows.push_back({fmt(radius), fmt(gap)});
    write_csv(out, {"probe_norm", "gap"}, rows);
    log_info("# empirical gap table written to " + out);
  }
  return cert.empirical_ok ? 0 : 2;
}

static int cmd_scale(const std::string& matrix_path, const std::string& r_str,
                     const std::string& c_str, double eps, const std::string& out,
                     const std::string& iters_csv, bool deterministic) {
  const json j = load_json(matrix_path);
  const std::vector<Vec> rows = parse_matrix_json(j, "A");
  const std::size_t n = rows.size();
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != n) throw ParseError("scale: A must be square");
    for (std::size_t k = 0; k < n; ++k) a(i, k) = rows[i][k];
  }
  SolveOptions opts;
  opts.record_trace = !iters_csv.empty();
  const ScalingInstance inst(std::move(a), parse_int_list(r_str), parse_int_list(c_str));
  const ScalingResult res = matrix_scale(inst, eps, opts);
  std::cout << "row_residual_inf " << fmt(res.row_residual_inf) << "\n";
  std::cout << "col_residual_inf " << fmt(res.col_residual_inf) << "\n";
  std::cout << "col_residual_2   " << fmt(res.col_residual_2) << "\n";
  std::cout << "bit_budget       " << fmt(res.bit_budget) << "\n";
  std::cout << "iterations       " << res.report.iterations << "\n";
  if (!out.empty()) {
    json rep;
    rep["z"] = res.z;
    rep["log_x"] = res.log_x;
    rep["log_y"] = res.log_y;
    rep["x"] = res.x;
    rep["y"] = res.y;
    rep["row_residual_inf"] = res.row_residual_inf;
    rep["col_residual_inf"] = res.col_residual_inf;
    rep["col_residual_2"] = res.col_residual_2;
    rep["bit_budget"] = res.bit_budget;
    rep["solver"] = report_to_json(res.report);
    emit_report(std::move(rep), out, deterministic);
  }
  if (!iters_csv.empty()) {
    std::vector<std::vector<std::string>> trace;
    for (std::size_t i = 0; i < res.report.h_trace.size(); ++i)
      trace.push_back({std::to_string(i), fmt(res.report.h_trace[i])});
    write_csv(iters_csv, {"iteration", "h"}, trace);
  }
  return 0;
}

static void write_value_trace(const std::string& path, const Vec& trace) {
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < trace.size(); ++i)
    rows.push_back({std::to_string(i), fmt(trace[i])});
  write_csv(path, {"iteration", "value"}, rows);
}

static int cmd_capacity(const std::string& path, double eps, const std::string& out,
                        const std::string& iters_csv, bool deterministic) {
  const LoadedInstance inst = load_instance(path);
  if (!inst.capacity_b && !inst.capacity_b_facets)
    throw DomainError("capacity: instance has neither a B vertex list nor B_facets");
  const CapacityInstance cap_inst =
      inst.capacity_b ? CapacityInstance(inst.oracle, *inst.capacity_b)
                      : CapacityInstance(inst.oracle, *inst.capacity_b_facets);
  CapacityResult res;
  int code = 0;
  try {
    res = capacity(cap_inst, eps);
  } catch (const CapacityBudgetError& e) {
    res = e.best_result;
    std::cout << "# " << e.what() << "\n";
    code = 2;
  }
  if (!iters_csv.empty()) write_value_trace(iters_csv, res.value_trace);
  std::cout << "capacity     " << fmt(res.value) << "\n";
  std::cout << "log_capacity " << fmt(res.log_value) << "\n";
  std::cout << "upper_bound  " << fmt(res.upper_bound) << "  (log domain)\n";
  std::cout << "iterations   " << res.outer_iterations << "\n";
  if (!out.empty()) {
    json rep;
    rep["value"] = res.value;
    rep["log_value"] = res.log_value;
    rep["upper_bound_log"] = res.upper_bound;
    rep["theta_best"] = res.theta_best;
    rep["outer_iterations"] = res.outer_iterations;
    rep["converged"] = res.converged;
    emit_report(std::move(rep), out, deterministic);
  }
  return code;
}

static int cmd_bl(const std::string& vectors_path, const std::string& p_str, bool worst_case,
                  double eps, const std::string& out, const std::string& iters_csv,
                  bool deterministic) {
  const json j = load_json(vectors_path);
  const std::vector<Vec> rows = parse_matrix_json(j, "V");
  const int n = static_cast<int>(rows[0].size());
  const BLInstance inst(rows, n);
  json rep;
  if (worst_case) {
    const BLWorstCaseResult res = bl_worst_case(inst, eps);
    if (!iters_csv.empty()) write_value_trace(iters_csv, res.value_trace);
    std::cout << "bl_worst_case " << fmt(res.value) << "\n";
    std::cout << "p_best        ";
    for (double v : res.p_best) std::cout << fmt(v) << " ";
    std::cout << "\n";
    rep["value"] = res.value;
    rep["log_value"] = res.log_value;
    rep["p_best"] = res.p_best;
    rep["upper_bound_log"] = res.upper_bound;
    rep["converged"] = res.converged;
  } else {
    if (p_str.empty()) throw DomainError("bl: --p required unless --worst-case");
    const Vec p = parse_double_list(p_str);
    const BLResult res = bl_constant(inst, p, eps);
    if (!res.finite) {
      std::cout << "bl_constant inf  (p outside the base polytope)\n";
      rep["value"] = "inf";
      rep["finite"] = false;
    } else {
      std::cout << "bl_constant " << fmt(res.value) << "\n";
      rep["value"] = res.value;
      rep["log_value"] = res.log_value;
      rep["finite"] = true;
    }
  }
  if (!out.empty()) emit_report(std::move(rep), out, deterministic);
  return 0;
}

static int cmd_stability(const std::string& path, long pairs, const Vec& eps_list,
                         std::uint64_t seed, const std::string& out) {
  const LoadedInstance inst = load_instance(path);
  if (!inst.support) throw DomainError("stability: explicit support required");
  const FacetSystem facets = require_facets(inst);
  const StabilityTable table =
      stability_experiment(inst.oracle, facets, pairs, eps_list, seed, inst.name);
  std::cout << "pairs       " << table.rows.size() << "\n";
  std::cout << "violations  " << table.violations << "\n";
  std::cout << "failures    " << table.failures << "\n";
  if (!out.empty()) {
    std::vector<std::vector<std::string>> rows;
    for (const StabilityRow& r : table.rows)
      rows.push_back({r.instance_id, fmt(r.eps), fmt(r.theta_dist_l1), fmt(r.tv), fmt(r.bound),
                      fmt(r.margin), std::to_string(r.iters1), std::to_string(r.iters2)});
    write_csv(out,
              {"instance_id", "eps", "theta_dist", "tv", "bound", "margin", "iters1", "iters2"},
              rows);
    log_info("# stability table written to " + out);
  }
  return table.violations == 0 ? 0 : 2;
}

static int cmd_boundary(int m, long n_samples, long trials, std::uint64_t seed) {
  const BoundaryRun run = boundary_demo(m, n_samples, trials, seed);
  std::cout << "exact_probability " << fmt(run.exact_probability) << "\n";
  std::cout << "frac_apex_mixed   " << fmt(run.frac_apex_mixed) << "\n";
  std::cout << "frac_off_boundary " << fmt(run.frac_off_boundary) << "  (exact facet test)\n";
  std::cout << "std_error         " << fmt(run.std_error) << "\n";
  std::cout << "within_3_se       " << (run.within_3_se ? "yes" : "no") << "\n";
  return run.within_3_se && run.facet_subset_ok ? 0 : 2;
}

int main(int argc, char** argv) {
  CLI::App app{"max-entropy distributions over finite integer supports"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand
  bool deterministic = false;
  std::string log_level = "info";
  app.add_flag("--deterministic", deterministic,
               "suppress non-reproducible fields in outputs");
  app.add_option("--log-level", log_level, "quiet|info|debug");

  std::string inst_path, out_path;
  double eps = 1e-6;
  long max_iters = -1;
  bool no_accel = false;
  CLI::App* solve = app.add_subcommand("solve", "solve the dual max-entropy program");
  solve->add_option("instance", inst_path)->required();
  solve->add_option("--eps", eps);
  solve->add_option("--max-iters", max_iters);
  solve->add_flag("--no-accel", no_accel);
  solve->add_option("--out", out_path);

  std::string wit_path;
  double wit_eps = 1e-6;
  CLI::App* witness = app.add_subcommand("witness", "truncation witness for a short dual point");
  witness->add_option("instance", wit_path)->required();
  witness->add_option("--eps", wit_eps);

  std::string mn_vectors, mn_out;
  CLI::App* minnorm = app.add_subcommand("minnorm", "min-norm point of a vector hull");
  minnorm->add_option("--vectors", mn_vectors)->required();
  minnorm->add_option("--out", mn_out);

  std::string lb_simplex, lb_out;
  int lb_probes = 1000;
  std::uint64_t lb_seed = 7;
  CLI::App* lowerbound =
      app.add_subcommand("lowerbound", "flat-instance lower bound certificate");
  lowerbound->add_option("--simplex", lb_simplex)->required();
  lowerbound->add_option("--probes", lb_probes);
  lowerbound->add_option("--seed", lb_seed);
  lowerbound->add_option("--out", lb_out);

  std::string sc_matrix, sc_r, sc_c, sc_out, sc_iters;
  double sc_eps = 1e-6;
  CLI::App* scale = app.add_subcommand("scale", "(r,c)-matrix scaling");
  scale->add_option("--matrix", sc_matrix)->required();
  scale->add_option("--r", sc_r)->required();
  scale->add_option("--c", sc_c)->required();
  scale->add_option("--eps", sc_eps);
  scale->add_option("--out", sc_out);
  scale->add_option("--iters-csv", sc_iters);

  std::string cap_path, cap_out, cap_iters;
  double cap_eps = 1e-3;
  CLI::App* cap = app.add_subcommand("capacity", "capacity relaxation Cap_B(p)");
  cap->add_option("instance", cap_path)->required();
  cap->add_option("--eps", cap_eps);
  cap->add_option("--out", cap_out);
  cap->add_option("--iters-csv", cap_iters);

  std::string bl_vectors, bl_p, bl_out, bl_iters;
  bool bl_worst = false;
  double bl_eps = 1e-4;
  CLI::App* bl = app.add_subcommand("bl", "rank-1 Brascamp-Lieb constant");
  bl->add_option("--vectors", bl_vectors)->required();
  bl->add_option("--p", bl_p);
  bl->add_flag("--worst-case", bl_worst);
  bl->add_option("--eps", bl_eps);
  bl->add_option("--out", bl_out);
  bl->add_option("--iters-csv", bl_iters);

  std::string st_path, st_out;
  long st_pairs = 200;
  std::vector<double> st_eps{1e-4};
  std::uint64_t st_seed = 7;
  CLI::App* stability = app.add_subcommand("stability", "stability experiment");
  stability->add_option("instance", st_path)->required();
  stability->add_option("--pairs", st_pairs);
  stability->add_option("--eps", st_eps);
  stability->add_option("--seed", st_seed);
  stability->add_option("--out", st_out);

  int bd_m = 10;
  long bd_n = 8, bd_trials = 100000;
  std::uint64_t bd_seed = 7;
  CLI::App* boundary = app.add_subcommand("boundary", "empirical-mean boundary demo");
  boundary->add_option("--m", bd_m);
  boundary->add_option("--n", bd_n);
  boundary->add_option("--trials", bd_trials);
  boundary->add_option("--seed", bd_seed);

  CLI11_PARSE(app, argc, argv);
  log_verbosity = log_level == "quiet" ? 0 : log_level == "debug" ? 2 : 1;

  try {
    if (*solve) return cmd_solve(inst_path, eps, max_iters, no_accel, out_path, deterministic);
    if (*witness) return cmd_witness(wit_path, wit_eps);
    if (*minnorm) return cmd_minnorm(mn_vectors, mn_out, deterministic);
    if (*lowerbound) return cmd_lowerbound(lb_simplex, lb_probes, lb_seed, lb_out);
    if (*scale) return cmd_scale(sc_matrix, sc_r, sc_c, sc_eps, sc_out, sc_iters, deterministic);
    if (*cap) return cmd_capacity(cap_path, cap_eps, cap_out, cap_iters, deterministic);
    if (*bl) return cmd_bl(bl_vectors, bl_p, bl_worst, bl_eps, bl_out, bl_iters, deterministic);
    if (*stability)
      return cmd_stability(st_path, st_pairs, Vec(st_eps.begin(), st_eps.end()), st_seed, st_out);
    if (*boundary) return cmd_boundary(bd_m, bd_n, bd_trials, bd_seed);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
