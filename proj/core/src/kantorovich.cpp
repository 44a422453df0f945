#include "otlab/kantorovich.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "network_simplex.hpp"
#include "otlab/errors.hpp"

namespace otlab {

namespace {

constexpr double kDualFeasTol = 1e-9;

detail::CostTable build_cost_table(const DiscreteMeasure& mu,
                                   const DiscreteMeasure& nu,
                                   const CostSpec& spec) {
  return detail::CostTable(
      mu.size(), nu.size(), [&mu, &nu, spec](std::int32_t i, std::int32_t j) {
        return eval_cost(spec, mu.point(i), nu.point(j));
      });
}

void require_same_dimension(const DiscreteMeasure& mu,
                            const DiscreteMeasure& nu) {
  if (mu.dimension() != nu.dimension()) {
    throw ValidationError("dimension_mismatch",
                          "measures must share the ambient dimension");
  }
}

// --- brute-force routes ----------------------------------------------------

bool is_uniform(const DiscreteMeasure& m) {
  const double w = 1.0 / static_cast<double>(m.size());
  for (double wi : m.weights()) {
    if (std::abs(wi - w) > 1e-12) return false;
  }
  return true;
}

double permutation_optimum(const std::vector<std::vector<double>>& cost) {
  const std::size_t n = cost.size();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += cost[i][perm[i]];
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / static_cast<double>(n);
}

// Exhaustive vertex enumeration: every spanning tree of K_{m,n} is grown by
// include/skip backtracking over lexicographic edges; feasible tree
// solutions are costed and the minimum kept. Supports are at most 8x8, so
// fixed 16-node scratch buffers keep the per-tree work allocation-free.
class TreeEnumerator {
 public:
  TreeEnumerator(const std::vector<double>& mu, const std::vector<double>& nu,
                 const std::vector<std::vector<double>>& cost)
      : mu_(mu), nu_(nu), cost_(cost), m_(mu.size()), n_(nu.size()),
        nodes_(m_ + n_) {}

  double run() {
    edges_.reserve(m_ * n_);
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) edges_.emplace_back(i, m_ + j);
    }
    uf_parent_.resize(nodes_);
    std::iota(uf_parent_.begin(), uf_parent_.end(), 0);
    chosen_.reserve(nodes_ - 1);
    grow(0);
    return best_;
  }

 private:
  static constexpr std::size_t kMaxNodes = 16;

  std::size_t find(std::size_t v) {
    while (uf_parent_[v] != v) v = uf_parent_[v];
    return v;
  }

  void grow(std::size_t pos) {
    if (chosen_.size() == nodes_ - 1) {
      evaluate();
      return;
    }
    const std::size_t need = nodes_ - 1 - chosen_.size();
    if (edges_.size() - pos < need) return;
    const auto [a, b] = edges_[pos];
    const std::size_t ra = find(a), rb = find(b);
    if (ra != rb) {
      uf_parent_[ra] = rb;  // include edge
      chosen_.push_back(pos);
      grow(pos + 1);
      chosen_.pop_back();
      uf_parent_[ra] = ra;
    }
    grow(pos + 1);  // skip edge
  }

  void evaluate() {
    double residual[kMaxNodes];
    int degree[kMaxNodes] = {};
    bool alive[kMaxNodes];
    bool adj[kMaxNodes][kMaxNodes] = {};
    for (std::size_t i = 0; i < m_; ++i) residual[i] = mu_[i];
    for (std::size_t j = 0; j < n_; ++j) residual[m_ + j] = -nu_[j];
    for (std::size_t v = 0; v < nodes_; ++v) alive[v] = true;
    for (std::size_t e : chosen_) {
      const auto [a, b] = edges_[e];
      adj[a][b] = adj[b][a] = true;
      ++degree[a];
      ++degree[b];
    }
    std::size_t leaves[kMaxNodes];
    std::size_t top = 0;
    for (std::size_t v = 0; v < nodes_; ++v) {
      if (degree[v] == 1) leaves[top++] = v;
    }
    double total = 0.0;
    for (std::size_t done = 0; done + 1 < nodes_; ++done) {
      const std::size_t v = leaves[--top];
      alive[v] = false;
      std::size_t other = nodes_;
      for (std::size_t w = 0; w < nodes_; ++w) {
        if (adj[v][w] && alive[w]) {
          other = w;
          break;
        }
      }
      adj[v][other] = adj[other][v] = false;
      // Flow on the edge: out of v if v is a source, into v otherwise.
      const double f = v < m_ ? residual[v] : -residual[v];
      if (f < -1e-12) return;  // infeasible vertex
      const std::size_t src = v < m_ ? v : other;
      const std::size_t dst = (v < m_ ? other : v) - m_;
      total += f * cost_[src][dst];
      if (total >= best_) return;
      residual[other] += residual[v];
      if (--degree[other] == 1) leaves[top++] = other;
    }
    best_ = std::min(best_, total);
  }

  const std::vector<double>& mu_;
  const std::vector<double>& nu_;
  const std::vector<std::vector<double>>& cost_;
  std::size_t m_, n_, nodes_;
  std::vector<std::pair<std::size_t, std::size_t>> edges_;
  std::vector<std::size_t> uf_parent_;
  std::vector<std::size_t> chosen_;
  double best_ = std::numeric_limits<double>::infinity();
};

// Successive shortest paths with Dijkstra over Johnson-reduced costs; the
// Dijkstra predecessor structure is a tree, so path walks always terminate.
// Exact for real-valued supplies. Independent of the simplex code path.
double ssp_optimum(const std::vector<double>& mu, const std::vector<double>& nu,
                   const std::vector<std::vector<double>>& cost) {
  const std::size_t m = mu.size(), n = nu.size();
  const std::size_t nodes = m + n;
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> supply = mu, demand = nu;
  std::vector<std::vector<double>> flow(m, std::vector<double>(n, 0.0));
  std::vector<double> pi(nodes, 0.0);
  double total = 0.0;
  for (std::size_t round = 0; round < 64 * nodes; ++round) {
    std::vector<double> dist(nodes, inf);
    std::vector<std::int32_t> pred(nodes, -1);
    std::vector<char> done(nodes, 0);
    for (std::size_t i = 0; i < m; ++i) {
      if (supply[i] > 1e-15) dist[i] = 0.0;
    }
    for (std::size_t step = 0; step < nodes; ++step) {
      std::int32_t u = -1;
      for (std::size_t v = 0; v < nodes; ++v) {
        if (!done[v] && dist[v] < inf && (u < 0 || dist[v] < dist[u])) {
          u = static_cast<std::int32_t>(v);
        }
      }
      if (u < 0) break;
      done[u] = 1;
      if (u < static_cast<std::int32_t>(m)) {
        for (std::size_t j = 0; j < n; ++j) {
          const double rc =
              std::max(0.0, cost[u][j] + pi[u] - pi[m + j]);
          if (!done[m + j] && dist[u] + rc < dist[m + j]) {
            dist[m + j] = dist[u] + rc;
            pred[m + j] = u;
          }
        }
      } else {
        const std::size_t j = u - m;
        for (std::size_t i = 0; i < m; ++i) {
          if (flow[i][j] <= 0.0) continue;
          const double rc = std::max(0.0, -cost[i][j] + pi[u] - pi[i]);
          if (!done[i] && dist[u] + rc < dist[i]) {
            dist[i] = dist[u] + rc;
            pred[i] = u;
          }
        }
      }
    }
    std::int32_t sink = -1;
    for (std::size_t j = 0; j < n; ++j) {
      if (demand[j] > 1e-15 && dist[m + j] < inf &&
          (sink < 0 || dist[m + j] < dist[sink])) {
        sink = static_cast<std::int32_t>(m + j);
      }
    }
    if (sink < 0) break;  // all demand served

    const double reach = dist[sink];
    for (std::size_t v = 0; v < nodes; ++v) {
      pi[v] += std::min(dist[v], reach);
    }

    double theta = demand[sink - m];
    for (std::int32_t v = sink; pred[v] >= 0; v = pred[v]) {
      const std::int32_t u = pred[v];
      if (v >= static_cast<std::int32_t>(m)) {
        if (pred[u] < 0) theta = std::min(theta, supply[u]);
      } else {
        theta = std::min(theta, flow[v][u - m]);
      }
    }
    for (std::int32_t v = sink; pred[v] >= 0; v = pred[v]) {
      const std::int32_t u = pred[v];
      if (v >= static_cast<std::int32_t>(m)) {
        flow[u][v - m] += theta;
        total += theta * cost[u][v - m];
      } else {
        flow[v][u - m] -= theta;
        total -= theta * cost[v][u - m];
      }
    }
    demand[sink - m] -= theta;
    std::int32_t origin = sink;
    while (pred[origin] >= 0) origin = pred[origin];
    supply[origin] -= theta;
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (demand[j] > 1e-9) {
      throw NumericError("ssp_incomplete", "residual demand after SSP");
    }
  }
  return total;
}

double tree_count(std::size_t m, std::size_t n) {
  return std::pow(static_cast<double>(m), static_cast<double>(n - 1)) *
         std::pow(static_cast<double>(n), static_cast<double>(m - 1));
}

}  // namespace

SolveReport solve_kantorovich(const DiscreteMeasure& mu,
                              const DiscreteMeasure& nu,
                              const CostSpec& spec) {
  spec.validate();
  require_same_dimension(mu, nu);
  const detail::CostTable cost = build_cost_table(mu, nu, spec);
  detail::SimplexResult res = detail::solve_complete(
      std::span(mu.weights()), std::span(nu.weights()), cost);

  // (h, k) is only determined up to (h + a, k - a); pin the gauge at
  // min h = 0.
  const double hmin = *std::min_element(res.h.begin(), res.h.end());
  for (double& v : res.h) v -= hmin;
  for (double& v : res.k) v += hmin;

  SolveReport report{
      TransportPlan(mu, nu, std::move(res.entries)),
      DualPotentials{std::move(res.h), std::move(res.k)},
      res.primal,
      res.dual,
      res.pivots,
  };
  if (report.primal_value - report.dual_value >
      kDualFeasTol * (1.0 + std::abs(report.primal_value))) {
    throw NumericError("duality_certificate_failed",
                       "simplex terminated without a tight duality gap");
  }
  return report;
}

double duality_gap(const SolveReport& report, const CostSpec& spec) {
  const DiscreteMeasure& mu = report.plan.source();
  const DiscreteMeasure& nu = report.plan.target();
  const std::vector<double>& h = report.potentials.h;
  const std::vector<double>& k = report.potentials.k;
  if (h.size() != mu.size() || k.size() != nu.size()) {
    throw ValidationError("length_mismatch",
                          "potentials do not match the measures");
  }
  for (std::size_t i = 0; i < mu.size(); ++i) {
    for (std::size_t j = 0; j < nu.size(); ++j) {
      const double c = eval_cost(spec, mu.point(i), nu.point(j));
      if (h[i] + k[j] > c + kDualFeasTol) {
        throw DualInfeasible("h(x) + k(y) exceeds c(x,y) on a support pair");
      }
    }
  }
  double dual = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) dual += h[i] * mu.weight(i);
  for (std::size_t j = 0; j < nu.size(); ++j) dual += k[j] * nu.weight(j);
  return report.primal_value - dual;
}

double brute_force_optimum(const DiscreteMeasure& mu,
                           const DiscreteMeasure& nu, const CostSpec& spec) {
  spec.validate();
  require_same_dimension(mu, nu);
  const std::size_t m = mu.size(), n = nu.size();

  std::vector<std::vector<double>> cost(m, std::vector<double>(n));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      cost[i][j] = eval_cost(spec, mu.point(i), nu.point(j));
      if (!std::isfinite(cost[i][j])) {
        throw NumericError("nonfinite_cost", "cost is not finite");
      }
    }
  }

  // Dirac instances have a unique plan regardless of size.
  if (m == 1) {
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) total += nu.weight(j) * cost[0][j];
    return total;
  }
  if (n == 1) {
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) total += mu.weight(i) * cost[i][0];
    return total;
  }
  if (m > 8 || n > 8) {
    throw BudgetExceeded("instance_too_large",
                         "brute force is limited to 8x8 supports");
  }
  if (m == n && is_uniform(mu) && is_uniform(nu)) {
    return permutation_optimum(cost);
  }
  if (tree_count(m, n) <= 5e5) {
    TreeEnumerator e(mu.weights(), nu.weights(), cost);
    return e.run();
  }
  return ssp_optimum(mu.weights(), nu.weights(), cost);
}

}  // namespace otlab
