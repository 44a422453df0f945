#include "otlab/measures.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

namespace otlab {

namespace {

constexpr double kNormalizationTol = 1e-12;
constexpr double kMarginalTol = 1e-10;

}  // namespace

DiscreteMeasure::DiscreteMeasure(std::vector<Point> points,
                                 std::vector<double> weights) {
  if (points.empty()) {
    throw ValidationError("empty_measure", "a measure needs at least one point");
  }
  if (points.size() != weights.size()) {
    throw ValidationError("length_mismatch",
                          "points and weights must have equal length");
  }
  const std::size_t d = points.front().size();
  if (d == 0) {
    throw ValidationError("bad_dimension", "points must live in R^d with d >= 1");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].size() != d) {
      throw ValidationError("mixed_dimensions",
                            "all points must share the same dimension");
    }
    for (double c : points[i]) {
      if (!std::isfinite(c)) {
        throw ValidationError("nonfinite_coordinate",
                              "point coordinates must be finite");
      }
    }
    if (!(weights[i] >= 0.0)) {
      std::ostringstream msg;
      msg << "weight " << i << " is negative (" << weights[i] << ")";
      throw ValidationError("negative_weight", msg.str());
    }
    total += weights[i];
  }
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw ValidationError("zero_total_mass", "total weight must be positive");
  }

  // Merge coincident points (exact coordinate equality), keeping first-seen
  // order, then renormalize to total mass one.
  std::map<Point, std::size_t> seen;
  for (std::size_t i = 0; i < points.size(); ++i) {
    auto [it, inserted] = seen.try_emplace(points[i], points_.size());
    if (inserted) {
      points_.push_back(std::move(points[i]));
      weights_.push_back(weights[i] / total);
    } else {
      weights_[it->second] += weights[i] / total;
    }
  }

  const double s = std::accumulate(weights_.begin(), weights_.end(), 0.0);
  if (std::abs(s - 1.0) > kNormalizationTol) {
    throw NumericError("normalization_failed",
                       "renormalized weights do not sum to one");
  }
}

void NormSpec::validate() const {
  if (kind == Norm::PNorm && !(p >= 1.0)) {
    throw ValidationError("bad_norm_p", "p-norm requires p >= 1");
  }
}

void CostSpec::validate() const {
  norm.validate();
  if (!(exponent >= 1.0)) {
    throw ValidationError("bad_exponent", "cost exponent must be >= 1");
  }
  if (crystalline_eps) {
    if (!(*crystalline_eps > 0.0)) {
      throw ValidationError("bad_crystalline_eps",
                            "crystalline perturbation must be positive");
    }
    if (exponent != 1.0) {
      throw ValidationError(
          "bad_crystalline_exponent",
          "the crystalline ternary cost is defined for exponent 1");
    }
  }
}

double norm_distance(const NormSpec& norm, const Point& x, const Point& y) {
  if (x.size() != y.size()) {
    throw ValidationError("dimension_mismatch",
                          "points must share the same dimension");
  }
  switch (norm.kind) {
    case Norm::Euclidean: {
      double s = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        s += d * d;
      }
      return std::sqrt(s);
    }
    case Norm::L1: {
      double s = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) s += std::abs(x[i] - y[i]);
      return s;
    }
    case Norm::Linf: {
      double s = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i)
        s = std::max(s, std::abs(x[i] - y[i]));
      return s;
    }
    case Norm::PNorm: {
      double s = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i)
        s += std::pow(std::abs(x[i] - y[i]), norm.p);
      return std::pow(s, 1.0 / norm.p);
    }
  }
  throw ValidationError("bad_norm", "unknown norm kind");
}

double eval_cost(const CostSpec& spec, const Point& x, const Point& y) {
  const double base = norm_distance(spec.norm, x, y);
  if (spec.crystalline_eps) {
    const double e = *spec.crystalline_eps;
    const double euclid =
        norm_distance(NormSpec{Norm::Euclidean, 2.0}, x, y);
    return base + e * euclid + e * e * xlogx(euclid);
  }
  if (spec.exponent == 1.0) return base;
  if (base == 0.0) return 0.0;
  return std::pow(base, spec.exponent);
}

TransportPlan::TransportPlan(DiscreteMeasure source, DiscreteMeasure target,
                             std::vector<PlanEntry> entries)
    : source_(std::move(source)), target_(std::move(target)),
      entries_(std::move(entries)) {
  const std::size_t m = source_.size();
  const std::size_t n = target_.size();
  std::sort(entries_.begin(), entries_.end(),
            [](const PlanEntry& a, const PlanEntry& b) {
              return std::pair{a.source, a.target} < std::pair{b.source, b.target};
            });
  std::vector<double> row(m, 0.0), col(n, 0.0);
  for (std::size_t e = 0; e < entries_.size(); ++e) {
    const PlanEntry& it = entries_[e];
    if (it.source < 0 || static_cast<std::size_t>(it.source) >= m ||
        it.target < 0 || static_cast<std::size_t>(it.target) >= n) {
      throw ValidationError("entry_out_of_range",
                            "plan entry indices must address both supports");
    }
    if (!(it.mass > 0.0) || !std::isfinite(it.mass)) {
      throw ValidationError("nonpositive_entry",
                            "plan entries must carry strictly positive mass");
    }
    if (e > 0 && entries_[e - 1].source == it.source &&
        entries_[e - 1].target == it.target) {
      throw ValidationError("duplicate_entry",
                            "plan entries must be unique per (source, target)");
    }
    row[it.source] += it.mass;
    col[it.target] += it.mass;
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (std::abs(row[i] - source_.weight(i)) > kMarginalTol) {
      throw ValidationError("marginal_mismatch",
                            "row marginals do not match the source measure");
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (std::abs(col[j] - target_.weight(j)) > kMarginalTol) {
      throw ValidationError("marginal_mismatch",
                            "column marginals do not match the target measure");
    }
  }
}

std::vector<std::pair<std::int32_t, std::int32_t>> TransportPlan::support()
    const {
  std::vector<std::pair<std::int32_t, std::int32_t>> out;
  out.reserve(entries_.size());
  for (const PlanEntry& e : entries_) out.emplace_back(e.source, e.target);
  return out;
}

double plan_cost(const TransportPlan& plan, const CostSpec& spec) {
  spec.validate();
  double total = 0.0;
  for (const PlanEntry& e : plan.entries()) {
    total += e.mass * eval_cost(spec, plan.source().point(e.source),
                                plan.target().point(e.target));
  }
  return total;
}

TransportPlan product_plan(const DiscreteMeasure& mu,
                           const DiscreteMeasure& nu) {
  std::vector<PlanEntry> entries;
  entries.reserve(mu.size() * nu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    for (std::size_t j = 0; j < nu.size(); ++j) {
      const double mass = mu.weight(i) * nu.weight(j);
      if (mass > 0.0) {
        entries.push_back({static_cast<std::int32_t>(i),
                           static_cast<std::int32_t>(j), mass});
      }
    }
  }
  return TransportPlan(mu, nu, std::move(entries));
}

MongeMap::MongeMap(std::vector<std::int32_t> assignment, TransportPlan witness)
    : assignment_(std::move(assignment)), witness_(std::move(witness)) {
  if (assignment_.size() != witness_.source().size()) {
    throw ValidationError("length_mismatch",
                          "assignment must cover every source index");
  }
}

MongeMap extract_monge_map(const TransportPlan& plan) {
  std::vector<std::int32_t> assignment(plan.source().size(), -1);
  for (const PlanEntry& e : plan.entries()) {
    if (assignment[e.source] != -1) {
      throw ValidationError("not_a_graph",
                            "plan splits mass from a source point");
    }
    assignment[e.source] = e.target;
  }
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (assignment[i] == -1 && plan.source().weight(i) > 0.0) {
      throw ValidationError("not_a_graph",
                            "a source point with mass has no target");
    }
    if (assignment[i] == -1) assignment[i] = 0;  // massless point, arbitrary
  }
  return MongeMap(std::move(assignment), plan);
}

TransportPlan plan_from_map(const MongeMap& map) {
  const DiscreteMeasure& mu = map.witness().source();
  const DiscreteMeasure& nu = map.witness().target();
  std::vector<PlanEntry> entries;
  entries.reserve(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (mu.weight(i) > 0.0) {
      entries.push_back({static_cast<std::int32_t>(i), map.assignment()[i],
                         mu.weight(i)});
    }
  }
  return TransportPlan(mu, nu, std::move(entries));
}

}  // namespace otlab
