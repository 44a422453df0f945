#pragma once

#include <random>
#include <vector>

#include "otlab/measures.hpp"

namespace otlab::testing {

inline std::mt19937_64 make_rng(std::uint64_t seed) {
  return std::mt19937_64(seed);
}

inline DiscreteMeasure random_measure(std::mt19937_64& rng, std::size_t count,
                                      std::size_t dim,
                                      bool uniform_weights = false,
                                      double span = 2.0) {
  std::uniform_real_distribution<double> coord(-span, span);
  std::uniform_real_distribution<double> weight(0.05, 1.0);
  std::vector<Point> points;
  std::vector<double> weights;
  for (std::size_t i = 0; i < count; ++i) {
    Point p(dim);
    for (double& c : p) c = coord(rng);
    points.push_back(std::move(p));
    weights.push_back(uniform_weights ? 1.0 : weight(rng));
  }
  return DiscreteMeasure(std::move(points), std::move(weights));
}

/// Independent re-evaluation of a plan's cost by a naive double loop over
/// the full support grid (zero where no entry exists).
inline double naive_plan_cost(const TransportPlan& plan, const CostSpec& spec) {
  double total = 0.0;
  for (std::size_t i = 0; i < plan.source().size(); ++i) {
    for (std::size_t j = 0; j < plan.target().size(); ++j) {
      double mass = 0.0;
      for (const PlanEntry& e : plan.entries()) {
        if (e.source == static_cast<std::int32_t>(i) &&
            e.target == static_cast<std::int32_t>(j)) {
          mass += e.mass;
        }
      }
      if (mass > 0.0) {
        total += mass * eval_cost(spec, plan.source().point(i),
                                  plan.target().point(j));
      }
    }
  }
  return total;
}

/// The canonical degenerate fixture for cost = distance: mu = (d0 + d1)/2,
/// nu = (d1 + d2)/2 on the line. Both polytope vertices tie at primary cost
/// 1; the entropy secondary criterion selects the translation.
struct BookShift {
  DiscreteMeasure mu{{{0.0}, {1.0}}, {0.5, 0.5}};
  DiscreteMeasure nu{{{1.0}, {2.0}}, {0.5, 0.5}};
};

}  // namespace otlab::testing
