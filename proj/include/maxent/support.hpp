#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "maxent/errors.hpp"
#include "maxent/linalg.hpp"
#include "maxent/numeric.hpp"

namespace maxent {

// A finite set F of integer vectors in Z^m. Explicit mode stores the points;
// implicit mode (oracle-described) keeps only the dimension, a cardinality
// upper bound and a diameter upper bound, which is all the radius bound needs.
class SupportFamily {
 public:
  static SupportFamily explicit_family(std::vector<IntVec> points) {
    if (points.empty()) throw DomainError("SupportFamily: empty point set");
    const std::size_t m = points[0].size();
    if (m == 0) throw DomainError("SupportFamily: zero-dimensional points");
    for (const IntVec& p : points)
      if (p.size() != m) throw DomainError("SupportFamily: inconsistent point dimensions");
    std::vector<IntVec> sorted = points;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 1; i < sorted.size(); ++i)
      if (sorted[i] == sorted[i - 1])
        throw DomainError("SupportFamily: duplicate points (merge weights first)");
    SupportFamily f;
    f.explicit_ = true;
    f.dim_ = static_cast<int>(m);
    f.points_ = std::move(points);
    f.cardinality_bound_ = static_cast<double>(f.points_.size());
    double d = 0.0;
    for (std::size_t i = 0; i < f.points_.size(); ++i)
      for (std::size_t j = i + 1; j < f.points_.size(); ++j)
        d = std::max(d, dist2(f.points_[i], f.points_[j]));
    f.diameter_ = d;
    return f;
  }

  static SupportFamily implicit_family(int dim, double cardinality_bound, double diameter_bound) {
    if (dim < 1) throw DomainError("SupportFamily: dimension must be positive");
    if (!(cardinality_bound >= 1.0)) throw DomainError("SupportFamily: cardinality bound < 1");
    if (!(diameter_bound >= 0.0)) throw DomainError("SupportFamily: diameter bound required");
    SupportFamily f;
    f.explicit_ = false;
    f.dim_ = dim;
    f.cardinality_bound_ = cardinality_bound;
    f.diameter_ = diameter_bound;
    return f;
  }

  bool is_explicit() const { return explicit_; }
  int dim() const { return dim_; }
  std::size_t size() const { return points_.size(); }
  const std::vector<IntVec>& points() const { return points_; }
  const IntVec& point(std::size_t k) const { return points_[k]; }
  double diameter() const { return diameter_; }
  double cardinality_bound() const { return cardinality_bound_; }
  double log_cardinality() const { return std::log(cardinality_bound_); }

  std::vector<Vec> points_as_double() const {
    std::vector<Vec> r;
    r.reserve(points_.size());
    for (const IntVec& p : points_) r.push_back(to_double(p));
    return r;
  }

  std::optional<std::size_t> find(const IntVec& alpha) const {
    for (std::size_t k = 0; k < points_.size(); ++k)
      if (points_[k] == alpha) return k;
    return std::nullopt;
  }

 private:
  SupportFamily() = default;
  bool explicit_ = false;
  int dim_ = 0;
  std::vector<IntVec> points_;
  double cardinality_bound_ = 0.0;
  double diameter_ = 0.0;
};

// Prior weights p: F -> R_{>0}, held in log domain end-to-end. The bit
// complexity L_p = max |log p| is always recomputed from the stored values.
class LogWeightFunction {
 public:
  LogWeightFunction(const SupportFamily& support, Vec log_weights)
      : log_weights_(std::move(log_weights)) {
    if (!support.is_explicit())
      throw DomainError("LogWeightFunction: explicit support required");
    if (log_weights_.size() != support.size())
      throw DomainError("LogWeightFunction: weight count does not match support");
    bit_complexity_ = 0.0;
    for (double lw : log_weights_) {
      if (!std::isfinite(lw))
        throw DomainError("LogWeightFunction: weights must be strictly positive and finite");
      bit_complexity_ = std::max(bit_complexity_, std::abs(lw));
    }
  }

  static LogWeightFunction uniform(const SupportFamily& support) {
    return LogWeightFunction(support, Vec(support.size(), 0.0));
  }

  const Vec& log_weights() const { return log_weights_; }
  double log_weight(std::size_t k) const { return log_weights_[k]; }
  double bit_complexity() const { return bit_complexity_; }

 private:
  Vec log_weights_;
  double bit_complexity_ = 0.0;
};

// Duplicate points are merged by log-sum-exp of their log-weights; the
// programs only ever see aggregate mass per alpha. Points come out sorted
// lexicographically, which makes downstream tie-breaking deterministic.
inline std::pair<std::shared_ptr<const SupportFamily>, LogWeightFunction> make_weighted_support(
    const std::vector<IntVec>& points, const Vec& log_weights) {
  if (points.size() != log_weights.size())
    throw DomainError("make_weighted_support: points/weights length mismatch");
  std::map<IntVec, double> merged;
  for (std::size_t k = 0; k < points.size(); ++k) {
    auto [it, fresh] = merged.emplace(points[k], log_weights[k]);
    if (!fresh) it->second = log_add(it->second, log_weights[k]);
  }
  std::vector<IntVec> pts;
  Vec lw;
  pts.reserve(merged.size());
  lw.reserve(merged.size());
  for (auto& [p, w] : merged) {
    pts.push_back(p);
    lw.push_back(w);
  }
  auto fam = std::make_shared<const SupportFamily>(SupportFamily::explicit_family(std::move(pts)));
  LogWeightFunction weights(*fam, std::move(lw));
  return {fam, std::move(weights)};
}

// Probability distribution over an explicit support.
class PrimalDistribution {
 public:
  PrimalDistribution(std::shared_ptr<const SupportFamily> support, Vec probabilities)
      : support_(std::move(support)), prob_(std::move(probabilities)) {
    if (!support_ || !support_->is_explicit())
      throw DomainError("PrimalDistribution: explicit support required");
    if (prob_.size() != support_->size())
      throw DomainError("PrimalDistribution: probability count does not match support");
    double sum = 0.0;
    for (double& q : prob_) {
      if (q < 0.0) {
        if (q < -1e-12) throw DomainError("PrimalDistribution: negative probability");
        q = 0.0;
      }
      sum += q;
    }
    if (std::abs(sum - 1.0) > 1e-12)
      throw DomainError("PrimalDistribution: probabilities do not sum to 1");
  }

  static PrimalDistribution point_mass(std::shared_ptr<const SupportFamily> support,
                                       std::size_t index) {
    Vec q(support->size(), 0.0);
    q[index] = 1.0;
    return PrimalDistribution(std::move(support), std::move(q));
  }

  const SupportFamily& support() const { return *support_; }
  std::shared_ptr<const SupportFamily> support_ptr() const { return support_; }
  const Vec& probabilities() const { return prob_; }
  double prob(std::size_t k) const { return prob_[k]; }

  bool same_support(const PrimalDistribution& other) const {
    return support_ == other.support_ || support_->points() == other.support().points();
  }

 private:
  std::shared_ptr<const SupportFamily> support_;
  Vec prob_;
};

struct Marginal {
  Vec theta;
};

// Inequality description <a_i, x> <= b_i with integer rows. The unary facet
// complexity M = max_i ||a_i||_inf is recomputed, never trusted from input.
class FacetSystem {
 public:
  FacetSystem(std::vector<IntVec> rows, Vec offsets)
      : rows_(std::move(rows)), offsets_(std::move(offsets)) {
    if (rows_.empty()) throw DomainError("FacetSystem: no inequalities");
    if (rows_.size() != offsets_.size())
      throw DomainError("FacetSystem: rows/offsets length mismatch");
    dim_ = static_cast<int>(rows_[0].size());
    long long m = 0;
    for (const IntVec& a : rows_) {
      if (static_cast<int>(a.size()) != dim_)
        throw DomainError("FacetSystem: inconsistent row dimensions");
      long long amax = 0;
      for (long long v : a) amax = std::max(amax, std::abs(v));
      if (amax == 0) throw DomainError("FacetSystem: zero row");
      m = std::max(m, amax);
    }
    unary_complexity_ = m;
    for (double b : offsets_)
      if (!std::isfinite(b)) throw DomainError("FacetSystem: non-finite offset");
  }

  int dim() const { return dim_; }
  std::size_t size() const { return rows_.size(); }
  const std::vector<IntVec>& rows() const { return rows_; }
  const IntVec& row(std::size_t i) const { return rows_[i]; }
  double offset(std::size_t i) const { return offsets_[i]; }
  long long unary_complexity() const { return unary_complexity_; }

  double slack(std::size_t i, const Vec& x) const { return offsets_[i] - dot(x, rows_[i]); }

  bool feasible(const Vec& x, double tol) const {
    for (std::size_t i = 0; i < rows_.size(); ++i)
      if (slack(i, x) < -tol) return false;
    return true;
  }

  // Every point of an explicit support must satisfy every inequality with
  // equality or strict slack; a violation means the description is not for
  // conv(F).
  void validate_against(const SupportFamily& support, double tol = 1e-9) const {
    if (!support.is_explicit()) return;
    for (const IntVec& alpha : support.points()) {
      const Vec a = to_double(alpha);
      for (std::size_t i = 0; i < rows_.size(); ++i)
        if (slack(i, a) < -tol)
          throw ValidationError("FacetSystem: support point violates inequality " +
                                std::to_string(i));
    }
  }

  void attach_subspace(const SupportFamily& support) {
    if (!support.is_explicit() || support.size() == 0) return;
    const IntVec& base = support.point(0);
    std::vector<Vec> dirs;
    dirs.reserve(support.size());
    for (std::size_t k = 1; k < support.size(); ++k) {
      Vec d(dim_);
      for (int j = 0; j < dim_; ++j)
        d[j] = static_cast<double>(support.point(k)[j] - base[j]);
      dirs.push_back(std::move(d));
    }
    subspace_basis_ = orthonormal_basis(dirs);
  }

  const std::vector<Vec>& subspace_basis() const { return subspace_basis_; }

 private:
  std::vector<IntVec> rows_;
  Vec offsets_;
  int dim_ = 0;
  long long unary_complexity_ = 0;
  std::vector<Vec> subspace_basis_;
};

// sum_a q_a (log p_a - log q_a) with the continuous extension 0 log 0 = 0.
inline double entropy_objective(const PrimalDistribution& q, const LogWeightFunction& p) {
  if (p.log_weights().size() != q.support().size())
    throw DomainError("entropy_objective: mismatched supports");
  double s = 0.0;
  for (std::size_t k = 0; k < q.support().size(); ++k) {
    const double qk = q.prob(k);
    if (qk > 0.0) s += qk * (p.log_weight(k) - std::log(qk));
  }
  return s;
}

struct KlResult {
  double value = 0.0;
  bool absolutely_continuous = true;  // false when q1 puts mass where q2 has none
};

inline KlResult kl_divergence(const PrimalDistribution& q1, const PrimalDistribution& q2) {
  if (!q1.same_support(q2)) throw DomainError("kl_divergence: mismatched supports");
  KlResult r;
  for (std::size_t k = 0; k < q1.support().size(); ++k) {
    const double a = q1.prob(k), b = q2.prob(k);
    if (a > 0.0) {
      if (b <= 0.0) {
        r.value = kInf;
        r.absolutely_continuous = false;
        return r;
      }
      r.value += a * std::log(a / b);
    }
  }
  r.value = std::max(r.value, 0.0);
  return r;
}

// Total variation reported as the l1 norm (twice the usual sup-event form).
inline double tv_distance(const PrimalDistribution& q1, const PrimalDistribution& q2) {
  if (!q1.same_support(q2)) throw DomainError("tv_distance: mismatched supports");
  double s = 0.0;
  for (std::size_t k = 0; k < q1.support().size(); ++k) s += std::abs(q1.prob(k) - q2.prob(k));
  return s;
}

inline Marginal marginal_of(const PrimalDistribution& q) {
  Vec theta(q.support().dim(), 0.0);
  for (std::size_t k = 0; k < q.support().size(); ++k) {
    const double qk = q.prob(k);
    if (qk != 0.0) axpy(qk, to_double(q.support().point(k)), theta);
  }
  return Marginal{std::move(theta)};
}

// Indices i with b_i - <a_i, theta> <= tol. Infeasible theta is a caller bug.
inline std::vector<int> tight_facets(const Vec& theta, const FacetSystem& facets, double tol) {
  std::vector<int> tight;
  for (std::size_t i = 0; i < facets.size(); ++i) {
    const double s = facets.slack(i, theta);
    if (s < -tol) throw DomainError("tight_facets: theta infeasible for facet system");
    if (s <= tol) tight.push_back(static_cast<int>(i));
  }
  return tight;
}

inline std::vector<int> tight_facets(const Marginal& theta, const FacetSystem& facets,
                                     double tol) {
  return tight_facets(theta.theta, facets, tol);
}

}  // namespace maxent
