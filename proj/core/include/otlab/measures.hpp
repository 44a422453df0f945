#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "otlab/errors.hpp"

namespace otlab {

using Point = std::vector<double>;

/// t * ln(t), extended by 0 at t = 0.
inline double xlogx(double t) { return t > 0.0 ? t * std::log(t) : 0.0; }

/// Finitely supported probability measure on R^d: distinct points with
/// nonnegative weights summing to one. Immutable after construction and
/// safe for concurrent reads.
class DiscreteMeasure {
 public:
  /// Builds a measure from raw data. Weights are renormalized to total mass
  /// one; exactly coincident points are merged (weights summed, first
  /// occurrence kept). Throws ValidationError on empty input, mixed
  /// dimensions, or a negative weight.
  DiscreteMeasure(std::vector<Point> points, std::vector<double> weights);

  std::size_t size() const { return points_.size(); }
  std::size_t dimension() const { return points_.front().size(); }
  const std::vector<Point>& points() const { return points_; }
  const std::vector<double>& weights() const { return weights_; }
  const Point& point(std::size_t i) const { return points_[i]; }
  double weight(std::size_t i) const { return weights_[i]; }

  bool operator==(const DiscreteMeasure&) const = default;

 private:
  std::vector<Point> points_;
  std::vector<double> weights_;
};

inline DiscreteMeasure make_measure(std::vector<Point> points,
                                    std::vector<double> weights) {
  return DiscreteMeasure(std::move(points), std::move(weights));
}

enum class Norm { Euclidean, L1, Linf, PNorm };

/// Norm family used to measure displacement lengths. `p` is only consulted
/// for Norm::PNorm.
struct NormSpec {
  Norm kind = Norm::Euclidean;
  double p = 2.0;

  void validate() const;
  bool operator==(const NormSpec&) const = default;
};

/// Ground cost c(x,y). Plain form: ||x-y||^exponent with exponent >= 1.
/// With crystalline_eps = e set, the ternary form
///   ||x-y|| + e |x-y| + e^2 |x-y| ln|x-y|
/// is used instead (|.| Euclidean, t ln t extended by 0 at t = 0); the
/// ternary form requires exponent == 1.
struct CostSpec {
  NormSpec norm;
  double exponent = 1.0;
  std::optional<double> crystalline_eps;

  void validate() const;
};

/// Distance between two points of equal dimension under the given norm.
double norm_distance(const NormSpec& norm, const Point& x, const Point& y);

/// Ground cost evaluation; throws ValidationError on dimension mismatch.
double eval_cost(const CostSpec& spec, const Point& x, const Point& y);

struct PlanEntry {
  std::int32_t source = 0;
  std::int32_t target = 0;
  double mass = 0.0;

  bool operator==(const PlanEntry&) const = default;
};

/// Sparse coupling between two discrete measures. Entries hold strictly
/// positive mass, are sorted by (source, target), and reproduce both
/// marginals within 1e-10 (checked at construction). Immutable.
class TransportPlan {
 public:
  TransportPlan(DiscreteMeasure source, DiscreteMeasure target,
                std::vector<PlanEntry> entries);

  const DiscreteMeasure& source() const { return source_; }
  const DiscreteMeasure& target() const { return target_; }
  const std::vector<PlanEntry>& entries() const { return entries_; }

  /// Support as the sorted list of (source, target) index pairs.
  std::vector<std::pair<std::int32_t, std::int32_t>> support() const;

 private:
  DiscreteMeasure source_;
  DiscreteMeasure target_;
  std::vector<PlanEntry> entries_;
};

/// Total transport cost of the plan: sum of gamma_ij * c(x_i, y_j).
double plan_cost(const TransportPlan& plan, const CostSpec& spec);

/// The product coupling mu (x) nu; always feasible.
TransportPlan product_plan(const DiscreteMeasure& mu,
                           const DiscreteMeasure& nu);

/// Deterministic assignment i -> j(i) extracted from a plan concentrated on
/// a graph, together with the plan it came from.
class MongeMap {
 public:
  MongeMap(std::vector<std::int32_t> assignment, TransportPlan witness);

  const std::vector<std::int32_t>& assignment() const { return assignment_; }
  const TransportPlan& witness() const { return witness_; }

 private:
  std::vector<std::int32_t> assignment_;
  TransportPlan witness_;
};

/// Reads the map off a graph plan; throws ValidationError if some source
/// index has more than one (or no) positive entry.
MongeMap extract_monge_map(const TransportPlan& plan);

/// The plan induced by the map: entries (i, j(i), mu_i). Push-forward
/// validity is enforced by the marginal check at construction.
TransportPlan plan_from_map(const MongeMap& map);

}  // namespace otlab
