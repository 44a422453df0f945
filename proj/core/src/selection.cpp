#include "otlab/selection.hpp"

#include <algorithm>
#include <cmath>

#include "network_simplex.hpp"
#include "otlab/optimality.hpp"

namespace otlab {

namespace {

void validate_schedule(const std::vector<double>& eps_schedule) {
  if (eps_schedule.size() < 3) {
    throw ValidationError("bad_eps_schedule",
                          "the eps schedule needs at least 3 values");
  }
  for (std::size_t t = 0; t < eps_schedule.size(); ++t) {
    if (!(eps_schedule[t] > 0.0) || eps_schedule[t] > 1.0) {
      throw ValidationError("bad_eps_schedule", "eps values must lie in (0, 1]");
    }
    if (t > 0 && !(eps_schedule[t] < eps_schedule[t - 1])) {
      throw ValidationError("bad_eps_schedule",
                            "the eps schedule must be strictly decreasing");
    }
  }
}

TransportPlan solve_with_cost(
    const DiscreteMeasure& mu, const DiscreteMeasure& nu,
    const std::function<double(std::int32_t, std::int32_t)>& cost) {
  const detail::CostTable table(mu.size(), nu.size(), cost);
  detail::SimplexResult res = detail::solve_complete(
      std::span(mu.weights()), std::span(nu.weights()), table);
  return TransportPlan(mu, nu, std::move(res.entries));
}

// ||x-y||^(1+eps) through the log, so that the nearly degenerate exponent
// stays well-behaved; distance 0 maps to cost 0.
double perturbed_cost(double d, double eps) {
  return d > 0.0 ? std::exp((1.0 + eps) * std::log(d)) : 0.0;
}

double ternary_cost(const NormSpec& norm, const Point& x, const Point& y,
                    double eps) {
  const double base = norm_distance(norm, x, y);
  const double euclid = norm_distance(NormSpec{Norm::Euclidean, 2.0}, x, y);
  return base + eps * euclid + eps * eps * xlogx(euclid);
}

SelectionReport run_schedule(
    const NormSpec& norm, const std::vector<double>& eps_schedule,
    const std::function<TransportPlan(double)>& solve_at) {
  std::vector<TransportPlan> plans;
  plans.reserve(eps_schedule.size());
  for (double eps : eps_schedule) plans.push_back(solve_at(eps));

  const std::size_t last = plans.size() - 1;
  const bool stabilized = plans[last].support() == plans[last - 1].support();
  TransportPlan limit = plans[last];
  const GraphReport graph = is_graph(limit);

  CostSpec primary;
  primary.norm = norm;
  SelectionReport report{
      eps_schedule,
      std::move(plans),
      std::move(limit),
      stabilized,
      0.0,
      0.0,
      graph.graph,
      graph.split_mass,
  };
  report.primary_value = plan_cost(report.limit_plan, primary);
  report.secondary_value = secondary_entropy(report.limit_plan, norm);
  return report;
}

}  // namespace

TransportPlan solve_perturbed(const DiscreteMeasure& mu,
                              const DiscreteMeasure& nu, const NormSpec& norm,
                              double eps) {
  norm.validate();
  if (!(eps > 0.0)) {
    throw ValidationError("bad_eps", "perturbation eps must be positive");
  }
  return solve_with_cost(mu, nu, [&](std::int32_t i, std::int32_t j) {
    return perturbed_cost(norm_distance(norm, mu.point(i), nu.point(j)), eps);
  });
}

double secondary_entropy(const TransportPlan& plan, const NormSpec& norm) {
  norm.validate();
  double total = 0.0;
  for (const PlanEntry& e : plan.entries()) {
    total += e.mass * xlogx(norm_distance(norm, plan.source().point(e.source),
                                          plan.target().point(e.target)));
  }
  return total;
}

SelectionReport select_monge_plan(const DiscreteMeasure& mu,
                                  const DiscreteMeasure& nu,
                                  const NormSpec& norm,
                                  const std::vector<double>& eps_schedule) {
  norm.validate();
  validate_schedule(eps_schedule);
  return run_schedule(norm, eps_schedule, [&](double eps) {
    return solve_perturbed(mu, nu, norm, eps);
  });
}

SelectionReport select_crystalline(const DiscreteMeasure& mu,
                                   const DiscreteMeasure& nu,
                                   const NormSpec& norm,
                                   const std::vector<double>& eps_schedule) {
  if (norm.kind != Norm::L1 && norm.kind != Norm::Linf) {
    throw ValidationError("bad_norm",
                          "crystalline selection expects the l1 or linf norm");
  }
  validate_schedule(eps_schedule);
  return run_schedule(norm, eps_schedule, [&](double eps) {
    return solve_with_cost(mu, nu, [&](std::int32_t i, std::int32_t j) {
      return ternary_cost(norm, mu.point(i), nu.point(j), eps);
    });
  });
}

SecondaryOracleResult exact_secondary_oracle(const DiscreteMeasure& mu,
                                             const DiscreteMeasure& nu,
                                             const NormSpec& norm,
                                             std::size_t max_support) {
  norm.validate();
  if (mu.size() > max_support || nu.size() > max_support) {
    throw BudgetExceeded("instance_too_large",
                         "secondary oracle support guard exceeded");
  }
  if (mu.dimension() != nu.dimension()) {
    throw ValidationError("dimension_mismatch",
                          "measures must share the ambient dimension");
  }

  // Stage one: primary optimum and its potentials.
  const detail::CostTable table(
      mu.size(), nu.size(), [&](std::int32_t i, std::int32_t j) {
        return norm_distance(norm, mu.point(i), nu.point(j));
      });
  detail::SimplexResult primary = detail::solve_complete(
      std::span(mu.weights()), std::span(nu.weights()), table);

  // Stage two: the optimal face is the set of plans supported on arcs with
  // zero reduced cost; every basic arc qualifies, so the final tree is a
  // feasible warm start inside the face.
  const double face_tol = 1e-9 * (1.0 + table.scale());
  std::vector<detail::Arc> arcs;
  for (std::int32_t i = 0; i < static_cast<std::int32_t>(mu.size()); ++i) {
    for (std::int32_t j = 0; j < static_cast<std::int32_t>(nu.size()); ++j) {
      const double reduced = table(i, j) - primary.h[i] - primary.k[j];
      if (reduced <= face_tol) {
        const double d = norm_distance(norm, mu.point(i), nu.point(j));
        arcs.push_back({i, j, xlogx(d)});
      }
    }
  }
  detail::SimplexResult secondary =
      detail::solve_restricted(std::span(mu.weights()), std::span(nu.weights()),
                               arcs, primary.basis);

  TransportPlan plan(mu, nu, std::move(secondary.entries));
  CostSpec primary_cost;
  primary_cost.norm = norm;
  const double primary_value = plan_cost(plan, primary_cost);
  return SecondaryOracleResult{std::move(plan), secondary.primal,
                               primary_value};
}

}  // namespace otlab
