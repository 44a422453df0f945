#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "otlab/measures.hpp"

namespace otlab::detail {

/// Cost oracle for the complete bipartite instance. Costs are precomputed
/// into a dense m*n array when the entry count stays below `dense_limit`,
/// and evaluated through the callback otherwise. Evaluation must be finite;
/// a non-finite value raises NumericError at construction (dense) or on
/// first touch (callback).
class CostTable {
 public:
  CostTable(std::size_t m, std::size_t n,
            std::function<double(std::int32_t, std::int32_t)> eval,
            std::size_t dense_limit = 10'000'000);

  double operator()(std::int32_t i, std::int32_t j) const {
    if (!dense_.empty()) return dense_[static_cast<std::size_t>(i) * n_ + j];
    return checked_eval(i, j);
  }

  std::size_t rows() const { return m_; }
  std::size_t cols() const { return n_; }
  /// Largest |c| seen; exact in dense mode, running maximum otherwise.
  double scale() const { return scale_; }

 private:
  double checked_eval(std::int32_t i, std::int32_t j) const;

  std::size_t m_;
  std::size_t n_;
  std::function<double(std::int32_t, std::int32_t)> eval_;
  std::vector<double> dense_;
  mutable double scale_ = 0.0;
};

struct Arc {
  std::int32_t source = 0;
  std::int32_t target = 0;
  double cost = 0.0;
};

struct SimplexOptions {
  /// Entering-arc threshold, relative to max(1, |c|_max).
  double opt_tol_rel = 1e-12;
  std::int64_t max_pivots = 2'000'000;
};

struct SimplexResult {
  std::vector<PlanEntry> entries;  ///< strictly positive flows, (i,j)-sorted
  std::vector<double> h;           ///< source potentials
  std::vector<double> k;           ///< target potentials
  double primal = 0.0;
  double dual = 0.0;
  std::int64_t pivots = 0;
  /// Final spanning-tree basis, m+n-1 arcs; every basic arc has zero
  /// reduced cost, so the basis doubles as a warm start on the optimal face.
  std::vector<std::pair<std::int32_t, std::int32_t>> basis;
};

/// Primal network simplex on the complete bipartite transportation problem
/// min sum gamma_ij c_ij with row sums mu and column sums nu. Deterministic:
/// block pricing in lexicographic (i,j) order with a Bland's-rule fallback
/// engaged after a run of degenerate pivots.
SimplexResult solve_complete(std::span<const double> mu,
                             std::span<const double> nu,
                             const CostTable& cost,
                             const SimplexOptions& opts = {});

/// Same machinery on an explicit arc set (used for the lexicographic second
/// stage over an optimal face). `arcs` must be (i,j)-sorted and contain
/// `warm_basis`, which must be a feasible spanning tree.
SimplexResult solve_restricted(
    std::span<const double> mu, std::span<const double> nu,
    std::span<const Arc> arcs,
    std::span<const std::pair<std::int32_t, std::int32_t>> warm_basis,
    const SimplexOptions& opts = {});

}  // namespace otlab::detail
