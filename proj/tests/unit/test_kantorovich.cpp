#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "helpers.hpp"
#include "otlab/kantorovich.hpp"

using namespace otlab;
using otlab::testing::make_rng;
using otlab::testing::random_measure;

namespace {

// In-test oracle: best permutation coupling of two uniform n-point measures.
double enumerate_permutations(const DiscreteMeasure& mu,
                              const DiscreteMeasure& nu, const CostSpec& spec) {
  const std::size_t n = mu.size();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      total += eval_cost(spec, mu.point(i), nu.point(perm[i])) / n;
    }
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace

TEST_CASE("identical measures couple on the diagonal at zero cost") {
  auto rng = make_rng(11);
  const DiscreteMeasure m = random_measure(rng, 6, 2);
  CostSpec metric;  // euclidean distance
  const SolveReport rep = solve_kantorovich(m, m, metric);
  CHECK(rep.primal_value == doctest::Approx(0.0).epsilon(1e-12));
  REQUIRE(rep.plan.entries().size() == m.size());
  for (const PlanEntry& e : rep.plan.entries()) {
    CHECK(e.source == e.target);
  }
}

TEST_CASE("Dirac source: the polytope is the product plan") {
  const DiscreteMeasure mu({{0.0}}, {1.0});
  const DiscreteMeasure nu({{-1.0}, {1.0}}, {0.5, 0.5});
  CostSpec sq;
  sq.exponent = 2.0;
  const SolveReport rep = solve_kantorovich(mu, nu, sq);
  CHECK(rep.primal_value == doctest::Approx(1.0));
  CHECK(rep.plan.entries() == product_plan(mu, nu).entries());
}

TEST_CASE("three-point monotone matching, value 0.25") {
  const DiscreteMeasure mu({{0.0}, {1.0}, {2.0}}, {1.0, 1.0, 1.0});
  const DiscreteMeasure nu({{0.5}, {1.5}, {2.5}}, {1.0, 1.0, 1.0});
  CostSpec sq;
  sq.exponent = 2.0;
  const SolveReport rep = solve_kantorovich(mu, nu, sq);
  CHECK(rep.primal_value == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(rep.primal_value ==
        doctest::Approx(enumerate_permutations(mu, nu, sq)).epsilon(1e-12));
  for (const PlanEntry& e : rep.plan.entries()) {
    CHECK(e.source == e.target);  // 0->0.5, 1->1.5, 2->2.5
  }
}

TEST_CASE("duality gap certification") {
  auto rng = make_rng(5);
  const DiscreteMeasure mu = random_measure(rng, 5, 2);
  const DiscreteMeasure nu = random_measure(rng, 4, 2);
  CostSpec spec;
  spec.exponent = 1.5;
  const SolveReport rep = solve_kantorovich(mu, nu, spec);

  SUBCASE("the solver's own potentials certify optimality") {
    const double gap = duality_gap(rep, spec);
    CHECK(gap <= 1e-9 * (1.0 + std::abs(rep.primal_value)));
    CHECK(gap >= -1e-12);
  }
  SUBCASE("zero potentials leave the whole primal value as gap") {
    SolveReport zeroed{rep.plan,
                       DualPotentials{std::vector<double>(mu.size(), 0.0),
                                      std::vector<double>(nu.size(), 0.0)},
                       rep.primal_value, 0.0, rep.iterations};
    CHECK(duality_gap(zeroed, spec) == doctest::Approx(rep.primal_value));
  }
  SUBCASE("oversized potentials are dual-infeasible") {
    double cmax = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
      for (std::size_t j = 0; j < nu.size(); ++j) {
        cmax = std::max(cmax, eval_cost(spec, mu.point(i), nu.point(j)));
      }
    }
    SolveReport bad{rep.plan,
                    DualPotentials{std::vector<double>(mu.size(), cmax + 1.0),
                                   std::vector<double>(nu.size(), 0.0)},
                    rep.primal_value, 0.0, rep.iterations};
    CHECK_THROWS_AS(duality_gap(bad, spec), DualInfeasible);
  }
}

TEST_CASE("brute force oracle routes") {
  CostSpec dist;  // euclidean distance

  SUBCASE("2x2 uniform on the line: both extreme couplings cost 1") {
    const DiscreteMeasure mu({{0.0}, {1.0}}, {1.0, 1.0});
    const DiscreteMeasure nu({{1.0}, {2.0}}, {1.0, 1.0});
    CHECK(brute_force_optimum(mu, nu, dist) == doctest::Approx(1.0));
  }
  SUBCASE("Dirac source: unique feasible plan") {
    auto rng = make_rng(23);
    const DiscreteMeasure mu({{0.25, -0.5}}, {1.0});
    const DiscreteMeasure nu = random_measure(rng, 11, 2);
    double expected = 0.0;
    for (std::size_t j = 0; j < nu.size(); ++j) {
      expected += nu.weight(j) * eval_cost(dist, mu.point(0), nu.point(j));
    }
    CHECK(brute_force_optimum(mu, nu, dist) == doctest::Approx(expected));
  }
  SUBCASE("3x3 uniform random agrees with the solver") {
    auto rng = make_rng(31);
    for (int t = 0; t < 10; ++t) {
      const DiscreteMeasure mu = random_measure(rng, 3, 2, true);
      const DiscreteMeasure nu = random_measure(rng, 3, 2, true);
      const SolveReport rep = solve_kantorovich(mu, nu, dist);
      CHECK(std::abs(rep.primal_value - brute_force_optimum(mu, nu, dist)) <=
            1e-9);
    }
  }
  SUBCASE("oversized instances are refused") {
    auto rng = make_rng(37);
    const DiscreteMeasure mu = random_measure(rng, 9, 1);
    const DiscreteMeasure nu = random_measure(rng, 9, 1);
    CHECK_THROWS_AS(brute_force_optimum(mu, nu, dist), BudgetExceeded);
  }
}

TEST_CASE("exactness against brute force across routes") {
  auto rng = make_rng(101);
  std::uniform_int_distribution<int> size(2, 7);
  CostSpec spec;
  for (int t = 0; t < 60; ++t) {
    const int m = size(rng), n = size(rng);
    const bool uniform = t % 3 == 0;
    const DiscreteMeasure mu = random_measure(rng, m, 2, uniform);
    const DiscreteMeasure nu = random_measure(rng, uniform ? m : n, 2, uniform);
    spec.norm.kind = t % 2 == 0 ? Norm::Euclidean : Norm::L1;
    spec.exponent = std::vector<double>{1.0, 1.5, 2.0}[t % 3];
    const SolveReport rep = solve_kantorovich(mu, nu, spec);
    CHECK(std::abs(rep.primal_value - brute_force_optimum(mu, nu, spec)) <=
          1e-9);
    CHECK(rep.plan.entries().size() <= mu.size() + nu.size() - 1);
  }
}

TEST_CASE("weak duality on non-optimal pairs") {
  auto rng = make_rng(211);
  std::uniform_real_distribution<double> hdist(-1.0, 1.0);
  CostSpec spec;
  spec.exponent = 2.0;
  for (int t = 0; t < 20; ++t) {
    const DiscreteMeasure mu = random_measure(rng, 5, 2);
    const DiscreteMeasure nu = random_measure(rng, 6, 2);
    const TransportPlan feasible = product_plan(mu, nu);

    // Any h extended by k_j = min_i (c_ij - h_i) is dual feasible.
    std::vector<double> h(mu.size()), k(nu.size());
    for (double& v : h) v = hdist(rng);
    for (std::size_t j = 0; j < nu.size(); ++j) {
      double lo = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < mu.size(); ++i) {
        lo = std::min(lo, eval_cost(spec, mu.point(i), nu.point(j)) - h[i]);
      }
      k[j] = lo;
    }
    double dual = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) dual += h[i] * mu.weight(i);
    for (std::size_t j = 0; j < nu.size(); ++j) dual += k[j] * nu.weight(j);
    CHECK(plan_cost(feasible, spec) >= dual - 1e-9);
  }
}

TEST_CASE("scaling equivariance of the optimum") {
  auto rng = make_rng(307);
  const DiscreteMeasure mu = random_measure(rng, 6, 2);
  const DiscreteMeasure nu = random_measure(rng, 5, 2);
  CostSpec spec;
  spec.exponent = 2.0;
  const SolveReport base = solve_kantorovich(mu, nu, spec);

  const double s = 3.0;  // scales costs by s^2
  auto scale_points = [&](const DiscreteMeasure& m) {
    std::vector<Point> pts;
    for (Point p : m.points()) {
      for (double& c : p) c *= s;
      pts.push_back(std::move(p));
    }
    return DiscreteMeasure(std::move(pts), m.weights());
  };
  const DiscreteMeasure mu2 = scale_points(mu), nu2 = scale_points(nu);
  const SolveReport scaled = solve_kantorovich(mu2, nu2, spec);
  CHECK(scaled.primal_value ==
        doctest::Approx(s * s * base.primal_value).epsilon(1e-10));
  // The base support stays optimal under the scaled cost.
  const TransportPlan transplanted(mu2, nu2, base.plan.entries());
  CHECK(plan_cost(transplanted, spec) ==
        doctest::Approx(scaled.primal_value).epsilon(1e-10));
}

TEST_CASE("non-finite costs are rejected") {
  const DiscreteMeasure mu({{1e200}}, {1.0});
  const DiscreteMeasure nu({{-1e200}}, {1.0});
  CostSpec sq;
  sq.exponent = 2.0;
  CHECK_THROWS_AS(solve_kantorovich(mu, nu, sq), NumericError);
}

TEST_CASE("dimension mismatch is rejected") {
  const DiscreteMeasure mu({{0.0}}, {1.0});
  const DiscreteMeasure nu({{0.0, 1.0}}, {1.0});
  CHECK_THROWS_AS(solve_kantorovich(mu, nu, CostSpec{}), ValidationError);
}
