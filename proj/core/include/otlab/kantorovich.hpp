#pragma once

#include <cstdint>
#include <vector>

#include "otlab/measures.hpp"

namespace otlab {

/// Feasible dual pair: h per source point, k per target point, with
/// h_i + k_j <= c_ij + 1e-9 everywhere.
struct DualPotentials {
  std::vector<double> h;
  std::vector<double> k;
};

/// Outcome of an exact Kantorovich solve. The plan is a vertex of the
/// transportation polytope (at most m+n-1 entries) and the pair
/// (primal_value, dual_value) carries the strong-duality certificate
/// primal - dual <= 1e-9 * (1 + |primal|).
struct SolveReport {
  TransportPlan plan;
  DualPotentials potentials;
  double primal_value = 0.0;
  double dual_value = 0.0;
  std::int64_t iterations = 0;
};

/// Exact discrete Kantorovich solve by primal network simplex.
/// Complementary slackness holds on the returned plan: every positive entry
/// satisfies |h_i + k_j - c_ij| <= 1e-9. Potentials are shifted so that
/// min h = 0. Pure function; safe to call concurrently.
SolveReport solve_kantorovich(const DiscreteMeasure& mu,
                              const DiscreteMeasure& nu,
                              const CostSpec& spec);

/// primal_value minus the dual objective of the report's potentials;
/// nonnegative by weak duality. Throws DualInfeasible if the potentials
/// violate h_i + k_j <= c_ij + 1e-9 at any pair.
double duality_gap(const SolveReport& report, const CostSpec& spec);

/// Independent exact optimum for small instances (test oracle; both sizes
/// must be <= 8 unless one measure is a Dirac). Routes: permutation
/// enumeration for uniform m = n, exhaustive spanning-tree vertex
/// enumeration when the tree count is small, successive shortest paths
/// otherwise. None of the routes shares code with the simplex.
double brute_force_optimum(const DiscreteMeasure& mu,
                           const DiscreteMeasure& nu, const CostSpec& spec);

}  // namespace otlab
