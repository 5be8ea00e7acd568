#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <optional>
#include <variant>
#include <vector>

#include "maxent/errors.hpp"
#include "maxent/linalg.hpp"
#include "maxent/numeric.hpp"
#include "maxent/support.hpp"

namespace maxent {

// log of any cofactor of the weighted Laplacian of G, equal to
// log sum_T prod_{e in T} exp(w_e) by the matrix-tree identity. Weights are
// rescaled by exp(-max w) before factoring so nothing overflows; sign and
// log-magnitude are tracked separately.
inline double matrix_tree_log_det(int num_vertices, const std::vector<std::pair<int, int>>& edges,
                                  const Vec& edge_log_weights) {
  if (num_vertices < 2) throw DomainError("matrix_tree_log_det: need at least 2 vertices");
  if (edges.size() != edge_log_weights.size())
    throw DomainError("matrix_tree_log_det: edge/weight length mismatch");
  // Connectivity via union-find; a disconnected graph has no spanning tree.
  std::vector<int> parent(num_vertices);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  for (const auto& [u, v] : edges) {
    if (u < 0 || v < 0 || u >= num_vertices || v >= num_vertices)
      throw DomainError("matrix_tree_log_det: edge endpoint out of range");
    if (u == v) throw DomainError("matrix_tree_log_det: self-loop");
    parent[find(u)] = find(v);
  }
  for (int v = 0; v < num_vertices; ++v)
    if (find(v) != find(0)) throw DomainError("matrix_tree_log_det: graph is disconnected");

  double wmax = kNegInf;
  for (double w : edge_log_weights) wmax = std::max(wmax, w);
  const int n = num_vertices - 1;  // ground the last vertex
  Matrix lap(n, n, 0.0);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const double w = std::exp(edge_log_weights[e] - wmax);
    const auto [u, v] = edges[e];
    if (u < n) lap(u, u) += w;
    if (v < n) lap(v, v) += w;
    if (u < n && v < n) {
      lap(u, v) -= w;
      lap(v, u) -= w;
    }
  }
  const LuFactors f = lu_factor(std::move(lap));
  if (f.singular || f.sign <= 0 || f.min_abs_pivot < 1e-13)
    throw NumericalError("matrix_tree_log_det: non-positive or vanishing pivot");
  return f.log_abs_det + static_cast<double>(n) * wmax;
}

namespace backend {

struct Explicit {
  std::shared_ptr<const SupportFamily> support;
  std::shared_ptr<const LogWeightFunction> weights;
  std::vector<long long> coord_min, coord_max;
};

struct ProductForm {
  Matrix a;             // nonnegative n x n
  std::vector<int> r;   // positive row exponents
  Matrix log_a;         // -inf where a == 0
  long long degree = 0; // ||r||_1
  double bit_complexity_bound = 0.0;
  double log_cardinality = 0.0;
};

struct SpanningTree {
  int num_vertices = 0;
  std::vector<std::pair<int, int>> edges;
  double log_cardinality = 0.0;
};

}  // namespace backend

// Evaluator of the generalized counting function g_p(x) = sum_a p_a x^a and
// its directional data, for three backends. Oracles are immutable and every
// evaluation is pure.
class CountingOracle {
 public:
  static CountingOracle from_explicit(std::shared_ptr<const SupportFamily> support,
                                      LogWeightFunction weights) {
    if (!support->is_explicit()) throw DomainError("CountingOracle: explicit support required");
    backend::Explicit b;
    b.support = std::move(support);
    const int m = b.support->dim();
    b.coord_min.assign(m, 0);
    b.coord_max.assign(m, 0);
    for (int j = 0; j < m; ++j) {
      long long lo = b.support->point(0)[j], hi = lo;
      for (const IntVec& p : b.support->points()) {
        lo = std::min(lo, p[j]);
        hi = std::max(hi, p[j]);
      }
      b.coord_min[j] = lo;
      b.coord_max[j] = hi;
    }
    b.weights = std::make_shared<const LogWeightFunction>(std::move(weights));
    CountingOracle o;
    o.dim_ = m;
    o.backend_ = std::move(b);
    return o;
  }

  static CountingOracle from_explicit(const std::vector<IntVec>& points, const Vec& log_weights) {
    auto [fam, w] = make_weighted_support(points, log_weights);
    return from_explicit(fam, std::move(w));
  }

  static CountingOracle product_form(Matrix a, std::vector<int> r) {
    const std::size_t n = a.rows();
    if (n == 0 || a.cols() != n) throw DomainError("CountingOracle: product form needs square A");
    if (r.size() != n) throw DomainError("CountingOracle: exponent count mismatch");
    backend::ProductForm b;
    b.log_a = Matrix(n, n, kNegInf);
    double log_a_max = kNegInf, abs_log_a = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      bool any = false;
      for (std::size_t j = 0; j < n; ++j) {
        const double v = a(i, j);
        if (v < 0.0 || !std::isfinite(v))
          throw DomainError("CountingOracle: A must be nonnegative and finite");
        if (v > 0.0) {
          b.log_a(i, j) = std::log(v);
          abs_log_a = std::max(abs_log_a, std::abs(b.log_a(i, j)));
          log_a_max = std::max(log_a_max, b.log_a(i, j));
          any = true;
        }
      }
      if (!any) throw DomainError("CountingOracle: all-zero row makes g identically zero");
    }
    for (int ri : r) {
      if (ri < 1) throw DomainError("CountingOracle: exponents must be positive integers");
      b.degree += ri;
    }
    // |log p_alpha| <= h (L_A + log n): every coefficient is a sum of at most
    // n^h products of h entries.
    const double h = static_cast<double>(b.degree);
    b.bit_complexity_bound = h * (abs_log_a + std::log(static_cast<double>(n)));
    b.log_cardinality = std::lgamma(h + n) - std::lgamma(h + 1.0) - std::lgamma(static_cast<double>(n));
    b.a = std::move(a);
    b.r = std::move(r);
    CountingOracle o;
    o.dim_ = static_cast<int>(n);
    o.backend_ = std::move(b);
    return o;
  }

  static CountingOracle spanning_tree(int num_vertices, std::vector<std::pair<int, int>> edges) {
    if (edges.empty()) throw DomainError("CountingOracle: spanning tree backend needs edges");
    // Validates connectivity as a side effect.
    matrix_tree_log_det(num_vertices, edges, Vec(edges.size(), 0.0));
    backend::SpanningTree b;
    b.num_vertices = num_vertices;
    // #trees <= C(m, n-1); tighter than the generic (2d)^m since |F| only
    // enters the radius bound through its logarithm.
    const double me = static_cast<double>(edges.size());
    const double k = static_cast<double>(num_vertices - 1);
    b.log_cardinality =
        std::lgamma(me + 1.0) - std::lgamma(k + 1.0) - std::lgamma(me - k + 1.0);
    if (!(b.log_cardinality >= 0.0)) b.log_cardinality = 0.0;
    b.edges = std::move(edges);
    CountingOracle o;
    o.dim_ = static_cast<int>(b.edges.size());
    o.backend_ = std::move(b);
    return o;
  }

  int dimension() const { return dim_; }
  bool is_explicit() const { return std::holds_alternative<backend::Explicit>(backend_); }

  const SupportFamily& support() const {
    return *std::get<backend::Explicit>(backend_).support;
  }
  std::shared_ptr<const SupportFamily> support_ptr() const {
    return std::get<backend::Explicit>(backend_).support;
  }
  const LogWeightFunction& weights() const {
    return *std::get<backend::Explicit>(backend_).weights;
  }

  // log g_p(e^{y_1}, ..., e^{y_m}), computed stably in log domain.
  double log_eval(const Vec& y) const {
    check_dim(y);
    if (const auto* b = std::get_if<backend::Explicit>(&backend_)) {
      Vec terms(b->support->size());
      for (std::size_t k = 0; k < terms.size(); ++k)
        terms[k] = b->weights->log_weight(k) + dot(y, b->support->point(k));
      return log_sum_exp(terms);
    }
    if (const auto* b = std::get_if<backend::ProductForm>(&backend_)) {
      const std::size_t n = b->a.rows();
      double total = 0.0;
      Vec terms(n);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) terms[j] = b->log_a(i, j) + y[j];
        total += b->r[i] * log_sum_exp(terms);
      }
      return total;
    }
    const auto& b = std::get<backend::SpanningTree>(backend_);
    return matrix_tree_log_det(b.num_vertices, b.edges, y);
  }

  // grad_y log g_p(e^y), a point in conv(F).
  Vec log_gradient(const Vec& y) const {
    check_dim(y);
    if (const auto* b = std::get_if<backend::Explicit>(&backend_)) {
      Vec terms(b->support->size());
      for (std::size_t k = 0; k < terms.size(); ++k)
        terms[k] = b->weights->log_weight(k) + dot(y, b->support->point(k));
      const double lse = log_sum_exp(terms);
      Vec grad(dim_, 0.0);
      for (std::size_t k = 0; k < terms.size(); ++k) {
        const double w = std::exp(terms[k] - lse);
        if (w != 0.0) axpy(w, to_double(b->support->point(k)), grad);
      }
      return grad;
    }
    if (const auto* b = std::get_if<backend::ProductForm>(&backend_)) {
      const std::size_t n = b->a.rows();
      Vec grad(dim_, 0.0), terms(n);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) terms[j] = b->log_a(i, j) + y[j];
        const double lse = log_sum_exp(terms);
        for (std::size_t j = 0; j < n; ++j)
          if (terms[j] != kNegInf) grad[j] += b->r[i] * std::exp(terms[j] - lse);
      }
      return grad;
    }
    return tree_edge_marginals(y);
  }

  // Coordinate i of the unnormalized gradient sum_a a_i p_a e^{<a,y>},
  // recovered by interpolating t -> g_p(..., e^{y_i} + t, ...) at
  // degree_bound+1 Chebyshev-spaced points and differentiating at t = 0.
  double gradient_by_interpolation(const Vec& y, int coord) const;

  // Upper bound on the degree of coordinate `coord` in g_p (span of the
  // exponents for explicit supports, so Laurent supports also work).
  int degree_bound(int coord) const {
    if (const auto* b = std::get_if<backend::Explicit>(&backend_))
      return static_cast<int>(b->coord_max[coord] - b->coord_min[coord]);
    if (const auto* b = std::get_if<backend::ProductForm>(&backend_))
      return static_cast<int>(b->degree);
    (void)coord;
    return 1;  // spanning tree generating polynomial is multiaffine
  }

  long long coordinate_min(int coord) const {
    if (const auto* b = std::get_if<backend::Explicit>(&backend_)) return b->coord_min[coord];
    return 0;
  }

  bool is_multiaffine() const {
    for (int j = 0; j < dim_; ++j)
      if (degree_bound(j) > 1 || coordinate_min(j) < 0) return false;
    return true;
  }

  double diameter_bound() const {
    if (const auto* b = std::get_if<backend::Explicit>(&backend_)) return b->support->diameter();
    if (const auto* b = std::get_if<backend::ProductForm>(&backend_))
      return std::sqrt(2.0) * static_cast<double>(b->degree);
    return std::sqrt(static_cast<double>(dim_));
  }

  double log_cardinality_bound() const {
    if (const auto* b = std::get_if<backend::Explicit>(&backend_))
      return b->support->log_cardinality();
    if (const auto* b = std::get_if<backend::ProductForm>(&backend_)) return b->log_cardinality;
    return std::get<backend::SpanningTree>(backend_).log_cardinality;
  }

  double weight_complexity_bound() const {
    if (const auto* b = std::get_if<backend::Explicit>(&backend_))
      return b->weights->bit_complexity();
    if (const auto* b = std::get_if<backend::ProductForm>(&backend_))
      return b->bit_complexity_bound;
    return 0.0;  // tree weights are identically 1
  }

  // Newton polytopes of the implicit backends are jump systems of real
  // stable polynomials, so their unary facet complexity is 1.
  std::optional<long long> default_facet_complexity() const {
    if (is_explicit()) return std::nullopt;
    return 1;
  }

  // argmax <c, alpha> over F; a vertex of conv(F). Ties break toward the
  // lexicographically smallest maximizer.
  Vec maximize_linear(const Vec& c) const {
    check_dim(c);
    if (const auto* b = std::get_if<backend::Explicit>(&backend_)) {
      std::size_t best = 0;
      double bestv = kNegInf;
      for (std::size_t k = 0; k < b->support->size(); ++k) {
        const double v = dot(c, b->support->point(k));
        if (v > bestv + 1e-12 ||
            (v > bestv - 1e-12 && b->support->point(k) < b->support->point(best))) {
          bestv = std::max(bestv, v);
          best = k;
        }
      }
      return to_double(b->support->point(best));
    }
    if (const auto* b = std::get_if<backend::ProductForm>(&backend_)) {
      Vec alpha(dim_, 0.0);
      for (std::size_t i = 0; i < b->a.rows(); ++i) {
        std::size_t bestj = dim_;
        for (std::size_t j = 0; j < b->a.rows(); ++j) {
          if (b->log_a(i, j) == kNegInf) continue;
          if (bestj == static_cast<std::size_t>(dim_) || c[j] > c[bestj]) bestj = j;
        }
        alpha[bestj] += b->r[i];
      }
      return alpha;
    }
    // Maximum-weight spanning tree by Kruskal.
    const auto& b = std::get<backend::SpanningTree>(backend_);
    std::vector<std::size_t> order(b.edges.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t z) { return c[x] > c[z]; });
    std::vector<int> parent(b.num_vertices);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int v) {
      while (parent[v] != v) v = parent[v] = parent[parent[v]];
      return v;
    };
    Vec alpha(dim_, 0.0);
    for (std::size_t e : order) {
      const auto [u, v] = b.edges[e];
      if (find(u) != find(v)) {
        parent[find(u)] = find(v);
        alpha[e] = 1.0;
      }
    }
    return alpha;
  }

 private:
  CountingOracle() = default;

  void check_dim(const Vec& y) const {
    if (static_cast<int>(y.size()) != dim_) throw DomainError("CountingOracle: dimension mismatch");
    if (!all_finite(y)) throw DomainError("CountingOracle: non-finite input");
  }

  // Edge inclusion probabilities of the weighted spanning-tree measure:
  // P(e in T) = w_e * R_eff(u_e, v_e), scale invariant so computed on the
  // rescaled Laplacian.
  Vec tree_edge_marginals(const Vec& y) const {
    const auto& b = std::get<backend::SpanningTree>(backend_);
    double wmax = kNegInf;
    for (double w : y) wmax = std::max(wmax, w);
    const int n = b.num_vertices - 1;
    Matrix lap(n, n, 0.0);
    for (std::size_t e = 0; e < b.edges.size(); ++e) {
      const double w = std::exp(y[e] - wmax);
      const auto [u, v] = b.edges[e];
      if (u < n) lap(u, u) += w;
      if (v < n) lap(v, v) += w;
      if (u < n && v < n) {
        lap(u, v) -= w;
        lap(v, u) -= w;
      }
    }
    const LuFactors f = lu_factor(std::move(lap));
    if (f.singular || f.sign <= 0)
      throw NumericalError("CountingOracle: singular Laplacian in tree marginals");
    // Columns of the grounded inverse.
    Matrix inv(n, n);
    for (int j = 0; j < n; ++j) {
      Vec e(n, 0.0);
      e[j] = 1.0;
      const Vec col = lu_solve(f, e);
      for (int i = 0; i < n; ++i) inv(i, j) = col[i];
    }
    auto kab = [&](int a, int bb) { return (a < n && bb < n) ? inv(a, bb) : 0.0; };
    Vec grad(dim_);
    for (std::size_t e = 0; e < b.edges.size(); ++e) {
      const auto [u, v] = b.edges[e];
      const double reff = kab(u, u) + kab(v, v) - 2.0 * kab(u, v);
      grad[e] = std::clamp(std::exp(y[e] - wmax) * reff, 0.0, 1.0);
    }
    return grad;
  }

  int dim_ = 0;
  std::variant<backend::Explicit, backend::ProductForm, backend::SpanningTree> backend_;
};

inline double CountingOracle::gradient_by_interpolation(const Vec& y, int coord) const {
  check_dim(y);
  if (coord < 0 || coord >= dim_) throw DomainError("gradient_by_interpolation: bad coordinate");
  const int deg = degree_bound(coord);
  const long long cmin = coordinate_min(coord);
  const double log_g = log_eval(y);
  if (deg == 0)
    return static_cast<double>(cmin) * std::exp(log_g);  // coordinate is constant in F

  // Work on the coordinate-shifted polynomial H(x) = x_i^{-cmin} g_p(x) so
  // Laurent supports become honest polynomials of degree `deg` in x_i.
  // Chebyshev-Lobatto nodes in s over [0,1]; t = e^{y_i} s, so x_i = e^{y_i}(1+s).
  constexpr double kPi = 3.141592653589793238462643383279502884;
  const int npts = deg + 1;
  Vec s(npts), logq(npts);
  for (int k = 0; k < npts; ++k) {
    s[k] = 0.5 * (1.0 - std::cos(kPi * static_cast<double>(k) / deg));
    Vec yk = y;
    yk[coord] = y[coord] + std::log1p(s[k]);
    logq[k] = log_eval(yk) - static_cast<double>(cmin) * yk[coord];
  }
  double mscale = kNegInf;
  for (double v : logq) mscale = std::max(mscale, v);
  Vec w(npts);
  for (int k = 0; k < npts; ++k) w[k] = std::exp(logq[k] - mscale);

  // Monomial coefficients in s via a pivoted Vandermonde solve; only the
  // linear coefficient is consumed.
  Matrix vand(npts, npts);
  for (int k = 0; k < npts; ++k) {
    double p = 1.0;
    for (int j = 0; j < npts; ++j) {
      vand(k, j) = p;
      p *= s[k];
    }
  }
  const LuFactors f = lu_factor(std::move(vand));
  if (f.singular || f.min_abs_pivot < 1e-13)
    throw NumericalError("gradient_by_interpolation: Vandermonde conditioning failure (pivot " +
                         std::to_string(f.min_abs_pivot) + ", degree " + std::to_string(deg) + ")");
  const Vec coeff = lu_solve(f, w);
  // U_i = e^{y_i cmin + M} c_1 + cmin * g_p(e^y).
  const double u = std::exp(y[coord] * static_cast<double>(cmin) + mscale) * coeff[1] +
                   static_cast<double>(cmin) * std::exp(log_g);
  if (!std::isfinite(u))
    throw NumericalError("gradient_by_interpolation: non-finite result (rescale the instance)");
  return u;
}

}  // namespace maxent
