#include "otlab/optimality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace otlab {

namespace {

// Cost accessor over support pairs: cross(a, b) = c(x_a, y_b). Dense cache
// when it fits, direct evaluation otherwise.
class SupportCosts {
 public:
  SupportCosts(const TransportPlan& plan, const CostSpec& spec)
      : plan_(plan), spec_(spec), size_(plan.entries().size()) {
    if (size_ * size_ <= 4'000'000) {
      cache_.resize(size_ * size_);
      for (std::size_t a = 0; a < size_; ++a) {
        for (std::size_t b = 0; b < size_; ++b) {
          cache_[a * size_ + b] = eval(a, b);
        }
      }
    }
  }

  double operator()(std::size_t a, std::size_t b) const {
    return cache_.empty() ? eval(a, b) : cache_[a * size_ + b];
  }

 private:
  double eval(std::size_t a, std::size_t b) const {
    return eval_cost(spec_, plan_.source().point(plan_.entries()[a].source),
                     plan_.target().point(plan_.entries()[b].target));
  }

  const TransportPlan& plan_;
  const CostSpec& spec_;
  std::size_t size_;
  std::vector<double> cache_;
};

class CycleSearch {
 public:
  CycleSearch(const SupportCosts& cost, std::size_t size, double tol)
      : cost_(cost), size_(size), tol_(tol) {
    self_.resize(size_);
    min_into_.assign(size_, std::numeric_limits<double>::infinity());
    step_bound_ = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < size_; ++a) self_[a] = cost_(a, a);
    for (std::size_t b = 0; b < size_; ++b) {
      for (std::size_t a = 0; a < size_; ++a) {
        if (a == b) continue;
        min_into_[b] = std::min(min_into_[b], cost_(a, b));
        step_bound_ = std::max(step_bound_, self_[b] - cost_(a, b));
      }
    }
  }

  // First violating cycle of exactly length k, or empty.
  std::optional<CyclicalViolation> find(int k) {
    k_ = k;
    used_.assign(size_, 0);
    stack_.clear();
    for (std::size_t first = 0; first < size_; ++first) {
      used_[first] = 1;
      stack_.push_back(static_cast<std::int32_t>(first));
      if (descend(self_[first], 1)) {
        CyclicalViolation v;
        v.entry_indices = stack_;
        v.gain = gain_;
        return v;
      }
      stack_.pop_back();
      used_[first] = 0;
    }
    return std::nullopt;
  }

 private:
  // partial = sum self(a_t) - sum cross(a_t, a_{t+1}) over the stack prefix.
  bool descend(double partial, int depth) {
    const std::size_t first = stack_.front();
    if (depth == k_) {
      const double total = partial - cost_(stack_.back(), first);
      if (total > tol_) {
        gain_ = total;
        return true;
      }
      return false;
    }
    const double optimistic =
        partial + (k_ - depth) * step_bound_ - min_into_[first];
    if (optimistic <= tol_) return false;
    const std::size_t prev = stack_.back();
    for (std::size_t next = first + 1; next < size_; ++next) {
      if (used_[next]) continue;
      const double p = partial - cost_(prev, next) + self_[next];
      used_[next] = 1;
      stack_.push_back(static_cast<std::int32_t>(next));
      if (descend(p, depth + 1)) return true;
      stack_.pop_back();
      used_[next] = 0;
    }
    return false;
  }

  const SupportCosts& cost_;
  std::size_t size_;
  double tol_;
  int k_ = 0;
  std::vector<double> self_;
  std::vector<double> min_into_;
  double step_bound_;
  std::vector<char> used_;
  std::vector<std::int32_t> stack_;
  double gain_ = 0.0;
};

}  // namespace

MonotonicityReport check_cyclical_monotonicity(const TransportPlan& plan,
                                               const CostSpec& spec,
                                               int max_cycle) {
  spec.validate();
  if (max_cycle < 2 || max_cycle > 6) {
    throw ValidationError("bad_max_cycle", "max_cycle must lie in [2, 6]");
  }
  const std::size_t S = plan.entries().size();
  if (std::pow(static_cast<double>(S), max_cycle) > 1e8) {
    throw BudgetExceeded("cycle_budget",
                         "support^max_cycle exceeds the enumeration budget");
  }
  MonotonicityReport report;
  report.max_cycle_checked = max_cycle;
  if (S < 2) return report;

  const double tol =
      1e-9 * (1.0 + std::abs(plan_cost(plan, spec)));
  SupportCosts costs(plan, spec);
  CycleSearch search(costs, S, tol);
  for (int k = 2; k <= max_cycle && k <= static_cast<int>(S); ++k) {
    if (auto v = search.find(k)) {
      report.ok = false;
      report.violation = std::move(v);
      break;
    }
  }
  return report;
}

double cycle_gain(const TransportPlan& plan, const CostSpec& spec,
                  const std::vector<std::int32_t>& entry_indices) {
  const auto& entries = plan.entries();
  double gain = 0.0;
  const std::size_t k = entry_indices.size();
  for (std::size_t t = 0; t < k; ++t) {
    const PlanEntry& cur = entries[entry_indices[t]];
    const PlanEntry& nxt = entries[entry_indices[(t + 1) % k]];
    gain += eval_cost(spec, plan.source().point(cur.source),
                      plan.target().point(cur.target));
    gain -= eval_cost(spec, plan.source().point(cur.source),
                      plan.target().point(nxt.target));
  }
  return gain;
}

TransportPlan apply_cycle_improvement(const TransportPlan& plan,
                                      const CyclicalViolation& violation) {
  const auto& entries = plan.entries();
  const std::size_t k = violation.entry_indices.size();
  if (k < 2) {
    throw ValidationError("bad_cycle", "a cycle needs at least two pairs");
  }
  double delta = std::numeric_limits<double>::infinity();
  for (std::int32_t idx : violation.entry_indices) {
    delta = std::min(delta, entries[idx].mass);
  }
  std::map<std::pair<std::int32_t, std::int32_t>, double> mass;
  for (const PlanEntry& e : entries) mass[{e.source, e.target}] += e.mass;
  for (std::size_t t = 0; t < k; ++t) {
    const PlanEntry& cur = entries[violation.entry_indices[t]];
    const PlanEntry& nxt = entries[violation.entry_indices[(t + 1) % k]];
    mass[{cur.source, cur.target}] -= delta;
    mass[{cur.source, nxt.target}] += delta;
  }
  std::vector<PlanEntry> out;
  out.reserve(mass.size());
  for (const auto& [key, value] : mass) {
    if (value > 0.0) out.push_back({key.first, key.second, value});
  }
  return TransportPlan(plan.source(), plan.target(), std::move(out));
}

GraphReport is_graph(const TransportPlan& plan) {
  std::vector<int> fanout(plan.source().size(), 0);
  for (const PlanEntry& e : plan.entries()) ++fanout[e.source];
  GraphReport report;
  for (std::size_t i = 0; i < fanout.size(); ++i) {
    if (fanout[i] >= 2) {
      report.graph = false;
      report.split_mass += plan.source().weight(i);
    }
  }
  return report;
}

bool check_quadratic_monotone_support(const TransportPlan& plan) {
  const auto& entries = plan.entries();
  const std::size_t d = plan.source().dimension();
  for (std::size_t a = 0; a < entries.size(); ++a) {
    for (std::size_t b = a + 1; b < entries.size(); ++b) {
      const Point& xa = plan.source().point(entries[a].source);
      const Point& xb = plan.source().point(entries[b].source);
      const Point& ya = plan.target().point(entries[a].target);
      const Point& yb = plan.target().point(entries[b].target);
      double dot = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        dot += (xa[c] - xb[c]) * (ya[c] - yb[c]);
      }
      if (dot < -1e-12) return false;
    }
  }
  return true;
}

}  // namespace otlab
