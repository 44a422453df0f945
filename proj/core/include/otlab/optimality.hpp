#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "otlab/measures.hpp"

namespace otlab {

/// A cyclic reassignment of support pairs that strictly lowers total cost.
/// `entry_indices` index into plan.entries(); `gain` is the cost decrease
/// per unit of mass sent around the cycle.
struct CyclicalViolation {
  std::vector<std::int32_t> entry_indices;
  double gain = 0.0;
};

struct MonotonicityReport {
  bool ok = true;
  int max_cycle_checked = 0;
  std::optional<CyclicalViolation> violation;
};

/// Exhaustive c-cyclical-monotonicity check of the plan's support over all
/// cycles of length 2..max_cycle (depth-first with partial-sum pruning).
/// ok == true iff no cycle improves by more than 1e-9 * (1 + plan cost).
/// Throws BudgetExceeded when S^max_cycle > 1e8 for support size S; requires
/// 2 <= max_cycle <= 6. Pure read-only analysis.
MonotonicityReport check_cyclical_monotonicity(const TransportPlan& plan,
                                               const CostSpec& spec,
                                               int max_cycle = 3);

/// Re-evaluates a cycle's gain on the plan's support (sum of on-support
/// costs minus the shifted reassignment costs).
double cycle_gain(const TransportPlan& plan, const CostSpec& spec,
                  const std::vector<std::int32_t>& entry_indices);

/// Sends delta = min mass along the violating cycle, producing the strictly
/// cheaper feasible plan (cost drops by delta * gain).
TransportPlan apply_cycle_improvement(const TransportPlan& plan,
                                      const CyclicalViolation& violation);

struct GraphReport {
  bool graph = true;
  /// Total mu-weight of source points whose mass splits across >= 2 targets.
  double split_mass = 0.0;
};

/// Whether the plan is concentrated on a graph (one target per source),
/// hence induced by a transport map.
GraphReport is_graph(const TransportPlan& plan);

/// Discrete fingerprint of "gradient of a convex function" for the squared
/// Euclidean cost: <x_a - x_b, y_a - y_b> >= -1e-12 over all support pairs.
/// Equivalent to order-2 cyclical monotonicity for that cost; the caller is
/// responsible for the cost actually being squared Euclidean.
bool check_quadratic_monotone_support(const TransportPlan& plan);

}  // namespace otlab
