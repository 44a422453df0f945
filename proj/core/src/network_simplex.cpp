#include "network_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "otlab/errors.hpp"

namespace otlab::detail {

CostTable::CostTable(std::size_t m, std::size_t n,
                     std::function<double(std::int32_t, std::int32_t)> eval,
                     std::size_t dense_limit)
    : m_(m), n_(n), eval_(std::move(eval)) {
  if (m_ * n_ <= dense_limit) {
    dense_.resize(m_ * n_);
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) {
        const double c = eval_(static_cast<std::int32_t>(i),
                               static_cast<std::int32_t>(j));
        if (!std::isfinite(c)) {
          throw NumericError("nonfinite_cost",
                             "cost evaluation produced a non-finite value");
        }
        dense_[i * n_ + j] = c;
        scale_ = std::max(scale_, std::abs(c));
      }
    }
  }
}

double CostTable::checked_eval(std::int32_t i, std::int32_t j) const {
  const double c = eval_(i, j);
  if (!std::isfinite(c)) {
    throw NumericError("nonfinite_cost",
                       "cost evaluation produced a non-finite value");
  }
  scale_ = std::max(scale_, std::abs(c));
  return c;
}

namespace {

// Flows below this fraction of the weight scale count as degenerate pivots.
constexpr double kDegenTol = 1e-14;

class Simplex {
 public:
  // Complete-bipartite mode.
  Simplex(std::span<const double> mu, std::span<const double> nu,
          const CostTable& cost, const SimplexOptions& opts)
      : mu_(mu), nu_(nu), table_(&cost), opts_(opts) {
    init_sizes();
    arc_count_ = static_cast<std::int64_t>(m_) * n_;
    eps_opt_ = opts_.opt_tol_rel * std::max(1.0, cost.scale());
    build_tree(northwest_arcs());
  }

  // Restricted-arc mode with a caller-provided warm-start tree.
  Simplex(std::span<const double> mu, std::span<const double> nu,
          std::span<const Arc> arcs,
          std::span<const std::pair<std::int32_t, std::int32_t>> warm_basis,
          const SimplexOptions& opts)
      : mu_(mu), nu_(nu), arcs_(arcs), opts_(opts) {
    init_sizes();
    arc_count_ = static_cast<std::int64_t>(arcs_.size());
    double scale = 0.0;
    for (const Arc& a : arcs_) {
      if (!std::isfinite(a.cost)) {
        throw NumericError("nonfinite_cost", "restricted arc cost not finite");
      }
      scale = std::max(scale, std::abs(a.cost));
    }
    eps_opt_ = opts_.opt_tol_rel * std::max(1.0, scale);

    std::unordered_map<std::int64_t, std::int64_t> lookup;
    lookup.reserve(arcs_.size());
    for (std::int64_t a = 0; a < arc_count_; ++a) {
      lookup.emplace(key(arcs_[a].source, arcs_[a].target), a);
    }
    std::vector<std::int64_t> tree;
    tree.reserve(warm_basis.size());
    for (const auto& [i, j] : warm_basis) {
      auto it = lookup.find(key(i, j));
      if (it == lookup.end()) {
        throw ValidationError("basis_outside_arcs",
                              "warm basis arc missing from arc set");
      }
      tree.push_back(it->second);
    }
    build_tree(tree);
  }

  SimplexResult run() {
    for (;;) {
      const std::int64_t entering = price();
      if (entering < 0) break;
      pivot(entering);
      if (++pivots_ > opts_.max_pivots) {
        throw NumericError("simplex_stalled",
                           "pivot limit exceeded in network simplex");
      }
    }
    return extract();
  }

 private:
  std::int64_t key(std::int32_t i, std::int32_t j) const {
    return static_cast<std::int64_t>(i) * n_ + j;
  }
  std::int32_t arc_source(std::int64_t a) const {
    return table_ ? static_cast<std::int32_t>(a / n_) : arcs_[a].source;
  }
  std::int32_t arc_target(std::int64_t a) const {
    return table_ ? static_cast<std::int32_t>(a % n_) : arcs_[a].target;
  }
  double arc_cost(std::int64_t a) const {
    return table_ ? (*table_)(arc_source(a), arc_target(a)) : arcs_[a].cost;
  }
  double reduced_cost(std::int64_t a) const {
    return arc_cost(a) - pot_[arc_source(a)] - pot_[m_ + arc_target(a)];
  }

  void init_sizes() {
    m_ = static_cast<std::int32_t>(mu_.size());
    n_ = static_cast<std::int32_t>(nu_.size());
    node_count_ = m_ + n_;
    weight_scale_ = 0.0;
    for (double w : mu_) weight_scale_ = std::max(weight_scale_, w);
    for (double w : nu_) weight_scale_ = std::max(weight_scale_, w);
  }

  // Classic north-west-corner staircase: m+n-1 arcs forming a spanning tree
  // (advances the source side first on ties).
  std::vector<std::int64_t> northwest_arcs() const {
    std::vector<std::int64_t> out;
    out.reserve(node_count_ - 1);
    std::int32_t i = 0, j = 0;
    double ri = mu_[0], rj = nu_[0];
    for (;;) {
      out.push_back(key(i, j));
      if (i == m_ - 1 && j == n_ - 1) break;
      const double t = std::min(ri, rj);
      ri -= t;
      rj -= t;
      if ((ri <= rj && i < m_ - 1) || j == n_ - 1) {
        ++i;
        ri = mu_[i];
      } else {
        ++j;
        rj = nu_[j];
      }
    }
    return out;
  }

  void build_tree(const std::vector<std::int64_t>& tree_arcs) {
    if (tree_arcs.size() != static_cast<std::size_t>(node_count_ - 1)) {
      throw ValidationError("bad_basis", "basis must have m+n-1 arcs");
    }
    parent_.assign(node_count_, -1);
    parent_arc_.assign(node_count_, -1);
    flow_.assign(node_count_, 0.0);
    depth_.assign(node_count_, 0);
    pot_.assign(node_count_, 0.0);
    children_.assign(node_count_, {});

    std::vector<std::vector<std::pair<std::int32_t, std::int64_t>>> adj(
        node_count_);
    for (std::int64_t a : tree_arcs) {
      const std::int32_t u = arc_source(a);
      const std::int32_t v = m_ + arc_target(a);
      adj[u].emplace_back(v, a);
      adj[v].emplace_back(u, a);
    }
    bfs_order_.clear();
    bfs_order_.reserve(node_count_);
    std::vector<char> seen(node_count_, 0);
    bfs_order_.push_back(0);
    seen[0] = 1;
    for (std::size_t q = 0; q < bfs_order_.size(); ++q) {
      const std::int32_t v = bfs_order_[q];
      for (const auto& [w, a] : adj[v]) {
        if (seen[w]) continue;
        seen[w] = 1;
        parent_[w] = v;
        parent_arc_[w] = a;
        depth_[w] = depth_[v] + 1;
        children_[v].push_back(w);
        bfs_order_.push_back(w);
      }
    }
    if (bfs_order_.size() != static_cast<std::size_t>(node_count_)) {
      throw ValidationError("bad_basis", "basis arcs do not span all nodes");
    }
    recompute_flows();
    recompute_potentials();
    for (std::int32_t v = 1; v < node_count_; ++v) {
      if (flow_[v] < 0.0) {
        throw ValidationError("infeasible_basis",
                              "warm-start basis is not feasible");
      }
    }
  }

  // Exact tree solve of the flows from the marginals; overwrites any
  // incremental state, so pivot-time drift never reaches the output.
  void recompute_flows() {
    std::vector<double> sub(node_count_);
    for (std::int32_t v = 0; v < node_count_; ++v) {
      sub[v] = v < m_ ? mu_[v] : -nu_[v - m_];
    }
    for (std::size_t q = bfs_order_.size(); q-- > 1;) {
      const std::int32_t v = bfs_order_[q];
      const std::int32_t p = parent_[v];
      // Physical arc direction is source -> target; the flow carries the
      // subtree imbalance out of (source child) or into (target child) it.
      double f = v < m_ ? sub[v] : -sub[v];
      if (f < 0.0 && f > -1e-9 * std::max(1.0, weight_scale_)) f = 0.0;
      flow_[v] = f;
      sub[p] += sub[v];
    }
  }

  void recompute_potentials() {
    pot_[0] = 0.0;
    for (std::size_t q = 1; q < bfs_order_.size(); ++q) {
      const std::int32_t v = bfs_order_[q];
      pot_[v] = arc_cost(parent_arc_[v]) - pot_[parent_[v]];
    }
  }

  // Entering-arc search. Block pricing over the fixed lexicographic arc
  // order; within a block the most negative reduced cost wins, with the
  // lowest id breaking ties. Bland mode takes the first eligible arc.
  std::int64_t price() {
    if (bland_) {
      for (std::int64_t a = 0; a < arc_count_; ++a) {
        if (reduced_cost(a) < -eps_opt_) return a;
      }
      return -1;
    }
    const std::int64_t block =
        std::max<std::int64_t>(256, (arc_count_ + 63) / 64);
    std::int64_t scanned = 0;
    while (scanned < arc_count_) {
      std::int64_t best = -1;
      double best_r = -eps_opt_;
      const std::int64_t stop = std::min(scan_pos_ + block, arc_count_);
      for (std::int64_t a = scan_pos_; a < stop; ++a) {
        const double r = reduced_cost(a);
        if (r < best_r) {
          best_r = r;
          best = a;
        }
      }
      scanned += stop - scan_pos_;
      scan_pos_ = stop == arc_count_ ? 0 : stop;
      if (best >= 0) return best;
    }
    return -1;
  }

  bool in_subtree_of(std::int32_t node, std::int32_t top) const {
    while (depth_[node] > depth_[top]) node = parent_[node];
    return node == top;
  }

  void pivot(std::int64_t entering) {
    const std::int32_t u = arc_source(entering);
    const std::int32_t v = m_ + arc_target(entering);
    const double r_enter = reduced_cost(entering);

    // Walk both endpoints to their LCA. Signs alternate starting with a
    // decrease on the first tree edge of each walk (bipartite cycle).
    auto collect = [&](std::int32_t from, std::int32_t upto_depth,
                       std::vector<std::int32_t>& nodes) {
      while (depth_[from] > upto_depth) {
        nodes.push_back(from);
        from = parent_[from];
      }
      return from;
    };
    std::vector<std::int32_t> path_u, path_v;
    std::int32_t a = u, b = v;
    const std::int32_t common = std::min(depth_[a], depth_[b]);
    a = collect(a, common, path_u);
    b = collect(b, common, path_v);
    while (a != b) {
      path_u.push_back(a);
      a = parent_[a];
      path_v.push_back(b);
      b = parent_[b];
    }

    double theta = std::numeric_limits<double>::infinity();
    std::int32_t leave_child = -1;
    auto ratio_scan = [&](const std::vector<std::int32_t>& path) {
      int sign = -1;
      for (std::int32_t node : path) {
        if (sign < 0) {
          const double f = flow_[node];
          if (f < theta ||
              (bland_ && f == theta && leave_child >= 0 &&
               parent_arc_[node] < parent_arc_[leave_child])) {
            theta = f;
            leave_child = node;
          }
        }
        sign = -sign;
      }
    };
    ratio_scan(path_u);
    ratio_scan(path_v);
    if (leave_child < 0) {
      throw NumericError("unbounded_pivot",
                         "no leaving arc found; instance is corrupt");
    }

    auto apply = [&](const std::vector<std::int32_t>& path) {
      int sign = -1;
      for (std::int32_t node : path) {
        flow_[node] += sign * theta;
        if (node == leave_child) flow_[node] = 0.0;
        sign = -sign;
      }
    };
    apply(path_u);
    apply(path_v);

    if (theta <= kDegenTol * std::max(1.0, weight_scale_)) {
      if (++degen_streak_ > 2 * node_count_) bland_ = true;
    } else {
      degen_streak_ = 0;
      bland_ = false;
    }

    // Re-root the severed subtree at the entering arc's inside endpoint.
    const std::int32_t x = in_subtree_of(u, leave_child) ? u : v;
    const std::int32_t y = x == u ? v : u;
    detach_child(parent_[leave_child], leave_child);

    std::vector<std::int32_t> chain;
    for (std::int32_t c = x;; c = parent_[c]) {
      chain.push_back(c);
      if (c == leave_child) break;
    }
    for (std::size_t t = chain.size(); t-- > 1;) {
      const std::int32_t hi = chain[t];      // old parent
      const std::int32_t lo = chain[t - 1];  // old child, new parent
      detach_child(hi, lo);
      parent_[hi] = lo;
      parent_arc_[hi] = parent_arc_[lo];
      flow_[hi] = flow_[lo];
      children_[lo].push_back(hi);
    }
    parent_[x] = y;
    parent_arc_[x] = entering;
    flow_[x] = theta;
    children_[y].push_back(x);

    // Potentials in the re-rooted subtree shift by the entering arc's old
    // reduced cost, with the sign split by bipartite side.
    const double shift = r_enter;
    const double sx = x < m_ ? shift : -shift;
    stack_.clear();
    stack_.push_back(x);
    while (!stack_.empty()) {
      const std::int32_t node = stack_.back();
      stack_.pop_back();
      depth_[node] = depth_[parent_[node]] + 1;
      pot_[node] += node < m_ ? sx : -sx;
      for (std::int32_t c : children_[node]) stack_.push_back(c);
    }
  }

  void detach_child(std::int32_t parent, std::int32_t child) {
    auto& list = children_[parent];
    list.erase(std::find(list.begin(), list.end(), child));
  }

  SimplexResult extract() {
    // Rebuild BFS order (the tree changed shape), then resolve flows and
    // potentials exactly from the final basis.
    bfs_order_.clear();
    bfs_order_.push_back(0);
    for (std::size_t q = 0; q < bfs_order_.size(); ++q) {
      for (std::int32_t c : children_[bfs_order_[q]]) bfs_order_.push_back(c);
    }
    recompute_flows();
    recompute_potentials();

    SimplexResult out;
    out.pivots = pivots_;
    out.h.assign(pot_.begin(), pot_.begin() + m_);
    out.k.assign(pot_.begin() + m_, pot_.end());
    for (std::int32_t v = 1; v < node_count_; ++v) {
      const std::int64_t arc = parent_arc_[v];
      out.basis.emplace_back(arc_source(arc), arc_target(arc));
      if (flow_[v] > 0.0) {
        out.entries.push_back({arc_source(arc), arc_target(arc), flow_[v]});
        out.primal += flow_[v] * arc_cost(arc);
      }
    }
    std::sort(out.basis.begin(), out.basis.end());
    std::sort(out.entries.begin(), out.entries.end(),
              [](const PlanEntry& l, const PlanEntry& r) {
                return std::pair{l.source, l.target} <
                       std::pair{r.source, r.target};
              });
    for (std::int32_t i = 0; i < m_; ++i) out.dual += out.h[i] * mu_[i];
    for (std::int32_t j = 0; j < n_; ++j) out.dual += out.k[j] * nu_[j];
    return out;
  }

  std::span<const double> mu_;
  std::span<const double> nu_;
  const CostTable* table_ = nullptr;
  std::span<const Arc> arcs_;
  SimplexOptions opts_;

  std::int32_t m_ = 0, n_ = 0, node_count_ = 0;
  std::int64_t arc_count_ = 0;
  double eps_opt_ = 0.0;
  double weight_scale_ = 0.0;

  std::vector<std::int32_t> parent_;
  std::vector<std::int64_t> parent_arc_;
  std::vector<double> flow_;
  std::vector<std::int32_t> depth_;
  std::vector<double> pot_;
  std::vector<std::vector<std::int32_t>> children_;
  std::vector<std::int32_t> bfs_order_;
  std::vector<std::int32_t> stack_;

  std::int64_t pivots_ = 0;
  std::int64_t scan_pos_ = 0;
  int degen_streak_ = 0;
  bool bland_ = false;
};

}  // namespace

SimplexResult solve_complete(std::span<const double> mu,
                             std::span<const double> nu,
                             const CostTable& cost,
                             const SimplexOptions& opts) {
  Simplex s(mu, nu, cost, opts);
  return s.run();
}

SimplexResult solve_restricted(
    std::span<const double> mu, std::span<const double> nu,
    std::span<const Arc> arcs,
    std::span<const std::pair<std::int32_t, std::int32_t>> warm_basis,
    const SimplexOptions& opts) {
  Simplex s(mu, nu, arcs, warm_basis, opts);
  return s.run();
}

}  // namespace otlab::detail
