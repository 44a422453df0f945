#include "otlab/one_dim.hpp"

#include <algorithm>
#include <numeric>

namespace otlab {

TransportPlan monotone_rearrangement(const DiscreteMeasure& mu,
                                     const DiscreteMeasure& nu) {
  if (mu.dimension() != 1 || nu.dimension() != 1) {
    throw ValidationError("dimension_mismatch",
                          "monotone rearrangement is 1-dimensional");
  }
  std::vector<std::size_t> si(mu.size()), sj(nu.size());
  std::iota(si.begin(), si.end(), 0);
  std::iota(sj.begin(), sj.end(), 0);
  std::sort(si.begin(), si.end(), [&](std::size_t a, std::size_t b) {
    return mu.point(a)[0] < mu.point(b)[0];
  });
  std::sort(sj.begin(), sj.end(), [&](std::size_t a, std::size_t b) {
    return nu.point(a)[0] < nu.point(b)[0];
  });

  std::vector<PlanEntry> entries;
  entries.reserve(mu.size() + nu.size());
  std::size_t i = 0, j = 0;
  double ri = mu.weight(si[0]), rj = nu.weight(sj[0]);
  while (i < mu.size() && j < nu.size()) {
    const double t = std::min(ri, rj);
    if (t > 0.0) {
      entries.push_back({static_cast<std::int32_t>(si[i]),
                         static_cast<std::int32_t>(sj[j]), t});
    }
    ri -= t;
    rj -= t;
    if (ri <= 0.0) {
      if (++i < mu.size()) ri = mu.weight(si[i]);
    }
    if (rj <= 0.0) {
      if (++j < nu.size()) rj = nu.weight(sj[j]);
    }
  }
  return TransportPlan(mu, nu, std::move(entries));
}

}  // namespace otlab
