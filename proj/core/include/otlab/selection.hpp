#pragma once

#include <vector>

#include "otlab/kantorovich.hpp"
#include "otlab/measures.hpp"

namespace otlab {

/// Result of driving the perturbed solves down an epsilon schedule. The
/// limit plan is the one at the smallest epsilon; `stabilized` records
/// whether the support stopped changing across the last two levels, and
/// `primary_value` / `secondary_value` evaluate it under the unperturbed
/// norm cost and the entropy functional sum gamma * d * ln d.
struct SelectionReport {
  std::vector<double> eps_schedule;
  std::vector<TransportPlan> plans;
  TransportPlan limit_plan;
  bool stabilized = false;
  double primary_value = 0.0;
  double secondary_value = 0.0;
  bool graph = false;
  double split_mass = 0.0;
};

/// Optimal plan for the strictly convex perturbed cost ||x-y||^(1+eps),
/// computed as exp((1+eps) ln||x-y||) with ||x-y|| = 0 mapped to cost 0.
TransportPlan solve_perturbed(const DiscreteMeasure& mu,
                              const DiscreteMeasure& nu, const NormSpec& norm,
                              double eps);

/// Entropy of the displacement lengths: sum gamma_ij * d_ij * ln d_ij with
/// d in the given norm and t ln t = 0 at t = 0. May be negative.
double secondary_entropy(const TransportPlan& plan, const NormSpec& norm);

/// Singular-perturbation selection: solves the eps schedule (strictly
/// decreasing, at least 3 values in (0, 1]) for the costs ||x-y||^(1+eps)
/// and reports the limit. Failure to stabilize surfaces as
/// stabilized == false rather than an exception.
SelectionReport select_monge_plan(const DiscreteMeasure& mu,
                                  const DiscreteMeasure& nu,
                                  const NormSpec& norm,
                                  const std::vector<double>& eps_schedule);

/// Selection for crystalline norms (l1 / linf) under the ternary perturbed
/// cost ||x-y|| + eps |x-y| + eps^2 |x-y| ln|x-y| (|.| Euclidean).
SelectionReport select_crystalline(const DiscreteMeasure& mu,
                                   const DiscreteMeasure& nu,
                                   const NormSpec& norm,
                                   const std::vector<double>& eps_schedule);

struct SecondaryOracleResult {
  TransportPlan plan;
  double secondary_value = 0.0;
  double primary_value = 0.0;
};

/// Exact minimizer of the entropy functional over the optimal face of the
/// primary problem (cost = norm distance), via the lexicographic two-stage
/// LP: stage one solves the primary problem; stage two re-optimizes the
/// entropy objective over the zero-reduced-cost arcs, warm-started from the
/// stage-one basis. Any feasible flow on those arcs attains the primary
/// optimum (up to the 1e-9 face tolerance), so the equality constraint is
/// built into the arc set. Throws BudgetExceeded beyond `max_support`
/// points per side.
SecondaryOracleResult exact_secondary_oracle(const DiscreteMeasure& mu,
                                             const DiscreteMeasure& nu,
                                             const NormSpec& norm,
                                             std::size_t max_support = 64);

}  // namespace otlab
