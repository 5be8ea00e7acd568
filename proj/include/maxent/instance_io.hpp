#pragma once

#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "maxent/dual_solver.hpp"
#include "maxent/errors.hpp"
#include "maxent/oracle.hpp"
#include "maxent/support.hpp"

namespace maxent {

using json = nlohmann::json;

struct LoadedInstance {
  std::string name;
  int dimension = 0;
  CountingOracle oracle;
  std::shared_ptr<const SupportFamily> support;  // explicit mode only
  std::optional<LogWeightFunction> weights;
  std::optional<Vec> theta;
  std::optional<FacetSystem> facets;
  std::optional<std::vector<IntVec>> capacity_b;       // P(B) as a vertex list
  std::optional<FacetSystem> capacity_b_facets;        // or as an H-description
};

namespace io_detail {

inline json require_field(const json& j, const char* key, const char* ctx) {
  if (!j.contains(key))
    throw ParseError(std::string("instance: missing field '") + key + "' in " + ctx);
  return j.at(key);
}

inline std::vector<IntVec> parse_int_matrix(const json& j, const char* ctx) {
  if (!j.is_array()) throw ParseError(std::string("instance: '") + ctx + "' must be an array");
  std::vector<IntVec> rows;
  for (const auto& row : j) {
    if (!row.is_array())
      throw ParseError(std::string("instance: '") + ctx + "' entries must be arrays");
    IntVec r;
    for (const auto& v : row) {
      if (!v.is_number_integer())
        throw ParseError(std::string("instance: '") + ctx + "' entries must be integers");
      r.push_back(v.get<long long>());
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

inline Vec parse_real_vector(const json& j, const char* ctx) {
  if (!j.is_array()) throw ParseError(std::string("instance: '") + ctx + "' must be an array");
  Vec r;
  for (const auto& v : j) {
    if (!v.is_number()) throw ParseError(std::string("instance: '") + ctx + "' must be numeric");
    r.push_back(v.get<double>());
  }
  return r;
}

}  // namespace io_detail

inline LoadedInstance parse_instance(const json& j, const std::string& name_hint = "instance") {
  if (!j.is_object()) throw ParseError("instance: top level must be a JSON object");
  const int dim = static_cast<int>(io_detail::require_field(j, "dimension", "top level")
                                       .get<long long>());
  if (dim < 1) throw ValidationError("instance: dimension must be positive");

  std::string oracle_type = "explicit";
  json oracle_payload;
  if (j.contains("oracle")) {
    oracle_payload = j.at("oracle");
    oracle_type = io_detail::require_field(oracle_payload, "type", "oracle").get<std::string>();
  }

  std::optional<CountingOracle> oracle;
  std::shared_ptr<const SupportFamily> support;
  std::optional<LogWeightFunction> weights;

  if (oracle_type == "explicit") {
    const std::vector<IntVec> pts =
        io_detail::parse_int_matrix(io_detail::require_field(j, "support", "top level"), "support");
    for (const IntVec& p : pts)
      if (static_cast<int>(p.size()) != dim)
        throw ValidationError("instance: support point dimension != declared dimension");
    Vec logw(pts.size(), 0.0);
    if (j.contains("log_weights")) {
      logw = io_detail::parse_real_vector(j.at("log_weights"), "log_weights");
      if (logw.size() != pts.size())
        throw ValidationError("instance: log_weights not parallel to support");
    }
    auto [fam, w] = make_weighted_support(pts, logw);
    support = fam;
    weights.emplace(w);
    oracle.emplace(CountingOracle::from_explicit(fam, std::move(w)));
  } else if (oracle_type == "product_form") {
    const json aj = io_detail::require_field(oracle_payload, "A", "oracle");
    if (!aj.is_array() || aj.empty()) throw ParseError("instance: oracle.A must be a matrix");
    const std::size_t n = aj.size();
    Matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      const Vec row = io_detail::parse_real_vector(aj.at(i), "oracle.A");
      if (row.size() != n) throw ValidationError("instance: oracle.A must be square");
      for (std::size_t k = 0; k < n; ++k) a(i, k) = row[k];
    }
    const Vec rv = io_detail::parse_real_vector(
        io_detail::require_field(oracle_payload, "r", "oracle"), "oracle.r");
    std::vector<int> r;
    for (double v : rv) r.push_back(static_cast<int>(v));
    if (static_cast<int>(n) != dim)
      throw ValidationError("instance: product form size != declared dimension");
    try {
      oracle.emplace(CountingOracle::product_form(std::move(a), std::move(r)));
    } catch (const DomainError& e) {
      throw ValidationError(std::string("instance: ") + e.what());
    }
  } else if (oracle_type == "spanning_tree") {
    const long long nv =
        io_detail::require_field(oracle_payload, "num_vertices", "oracle").get<long long>();
    const std::vector<IntVec> edges_raw = io_detail::parse_int_matrix(
        io_detail::require_field(oracle_payload, "edges", "oracle"), "oracle.edges");
    std::vector<std::pair<int, int>> edges;
    for (const IntVec& e : edges_raw) {
      if (e.size() != 2) throw ValidationError("instance: edges must be [u, v] pairs");
      edges.emplace_back(static_cast<int>(e[0]), static_cast<int>(e[1]));
    }
    if (static_cast<int>(edges.size()) != dim)
      throw ValidationError("instance: edge count != declared dimension (edge order defines y)");
    try {
      oracle.emplace(CountingOracle::spanning_tree(static_cast<int>(nv), std::move(edges)));
    } catch (const DomainError& e) {
      throw ValidationError(std::string("instance: ") + e.what());
    }
  } else {
    throw ParseError("instance: oracle.type must be explicit|product_form|spanning_tree");
  }

  LoadedInstance inst{.name = j.value("name", name_hint),
                      .dimension = dim,
                      .oracle = std::move(*oracle),
                      .support = std::move(support),
                      .weights = std::move(weights),
                      .theta = std::nullopt,
                      .facets = std::nullopt,
                      .capacity_b = std::nullopt,
                      .capacity_b_facets = std::nullopt};

  if (j.contains("theta")) {
    Vec theta = io_detail::parse_real_vector(j.at("theta"), "theta");
    if (static_cast<int>(theta.size()) != dim)
      throw ValidationError("instance: theta dimension mismatch");
    inst.theta = std::move(theta);
  }

  if (j.contains("facets")) {
    const json fj = j.at("facets");
    std::vector<IntVec> rows =
        io_detail::parse_int_matrix(io_detail::require_field(fj, "A", "facets"), "facets.A");
    Vec b = io_detail::parse_real_vector(io_detail::require_field(fj, "b", "facets"), "facets.b");
    try {
      FacetSystem fs(std::move(rows), std::move(b));
      if (fs.dim() != dim) throw ValidationError("instance: facet dimension mismatch");
      if (inst.support) {
        fs.validate_against(*inst.support);
        fs.attach_subspace(*inst.support);
      }
      // Declared unary complexity must match the recomputed value.
      if (fj.contains("unary_complexity")) {
        const long long declared = fj.at("unary_complexity").get<long long>();
        if (declared != fs.unary_complexity())
          throw ValidationError("instance: declared unary_complexity " + std::to_string(declared) +
                                " does not match recomputed " +
                                std::to_string(fs.unary_complexity()));
      }
      inst.facets.emplace(std::move(fs));
    } catch (const DomainError& e) {
      throw ValidationError(std::string("instance: ") + e.what());
    }
  }

  // Declared audit values are recomputed and must not disagree.
  if (j.contains("bit_complexity") && inst.weights) {
    const double declared = j.at("bit_complexity").get<double>();
    if (std::abs(declared - inst.weights->bit_complexity()) > 1e-9)
      throw ValidationError("instance: declared bit_complexity does not match recomputed value");
  }
  if (j.contains("diameter") && inst.support) {
    const double declared = j.at("diameter").get<double>();
    if (std::abs(declared - inst.support->diameter()) > 1e-9)
      throw ValidationError("instance: declared diameter does not match recomputed value");
  }

  if (j.contains("B")) {
    std::vector<IntVec> b = io_detail::parse_int_matrix(j.at("B"), "B");
    for (const IntVec& v : b)
      if (static_cast<int>(v.size()) != dim)
        throw ValidationError("instance: B vertex dimension mismatch");
    inst.capacity_b = std::move(b);
  }
  if (j.contains("B_facets")) {
    const json fj = j.at("B_facets");
    std::vector<IntVec> rows =
        io_detail::parse_int_matrix(io_detail::require_field(fj, "A", "B_facets"), "B_facets.A");
    Vec b = io_detail::parse_real_vector(io_detail::require_field(fj, "b", "B_facets"),
                                         "B_facets.b");
    try {
      FacetSystem fs(std::move(rows), std::move(b));
      if (fs.dim() != dim) throw ValidationError("instance: B_facets dimension mismatch");
      inst.capacity_b_facets.emplace(std::move(fs));
    } catch (const DomainError& e) {
      throw ValidationError(std::string("instance: ") + e.what());
    }
  }
  return inst;
}

inline LoadedInstance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open instance file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError("instance: JSON parse failure in " + path + ": " + e.what());
  }
  return parse_instance(j, path);
}

// Serialization of an explicit instance; loading the result reproduces the
// instance byte-for-byte up to float formatting.
inline json instance_to_json(const LoadedInstance& inst) {
  json j;
  j["name"] = inst.name;
  j["dimension"] = inst.dimension;
  if (inst.support) {
    json pts = json::array();
    for (const IntVec& p : inst.support->points()) pts.push_back(p);
    j["support"] = pts;
    j["log_weights"] = inst.weights->log_weights();
  }
  if (inst.theta) j["theta"] = *inst.theta;
  if (inst.facets) {
    json rows = json::array();
    for (const IntVec& a : inst.facets->rows()) rows.push_back(a);
    Vec b(inst.facets->size());
    for (std::size_t i = 0; i < inst.facets->size(); ++i) b[i] = inst.facets->offset(i);
    j["facets"] = {{"A", rows}, {"b", b}};
  }
  if (inst.capacity_b) {
    json rows = json::array();
    for (const IntVec& v : *inst.capacity_b) rows.push_back(v);
    j["B"] = rows;
  }
  return j;
}

inline json report_to_json(const SolveReport& r) {
  json j;
  j["y"] = r.y;
  j["h_value"] = r.h_value;
  j["gradient_norm"] = r.gradient_norm;
  j["gap_certificate"] = r.gap_certificate;
  j["theta_y"] = r.theta_y;
  j["iterations"] = r.iterations;
  j["radius_used"] = r.radius_used;
  j["radius"] = {{"m", r.radius_info.m},
                 {"facet_complexity", r.radius_info.facet_complexity},
                 {"weight_complexity", r.radius_info.weight_complexity},
                 {"log_cardinality", r.radius_info.log_cardinality},
                 {"eps", r.radius_info.eps},
                 {"delta", r.radius_info.delta}};
  j["solver"] = r.solver;
  j["accelerated"] = r.accelerated;
  j["face_restricted"] = r.face_restricted;
  j["restricted_size"] = r.restricted_size;
  j["stop_reason"] = r.stop_reason;
  if (r.q) j["q"] = r.q->probabilities();
  if (!r.h_trace.empty()) j["h_trace"] = r.h_trace;
  return j;
}

inline void emit_report(json j, const std::string& path, bool deterministic = false) {
  j["schema_version"] = "maxent-report-v1";
  if (!deterministic) j["generated_by"] = "maxent";
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open report file for writing: " + path);
  out << j.dump(2) << "\n";
}

inline void write_csv(const std::string& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open csv file for writing: " + path);
  out << "# schema: maxent-csv-v1\n";
  for (std::size_t i = 0; i < header.size(); ++i)
    out << header[i] << (i + 1 < header.size() ? "," : "\n");
  for (const auto& row : rows)
    for (std::size_t i = 0; i < row.size(); ++i)
      out << row[i] << (i + 1 < row.size() ? "," : "\n");
}

}  // namespace maxent
