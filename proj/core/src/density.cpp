#include "otlab/density.hpp"

#include <algorithm>
#include <cmath>

namespace otlab {

void GridSpec::validate() const {
  if (!(cell_size > 0.0) || !std::isfinite(cell_size)) {
    throw ValidationError("bad_grid", "cell_size must be positive");
  }
  if (nx < 1 || ny < 1) {
    throw ValidationError("bad_grid", "grid needs nx, ny >= 1");
  }
  if (!std::isfinite(origin[0]) || !std::isfinite(origin[1])) {
    throw ValidationError("bad_grid", "grid origin must be finite");
  }
}

GridField::GridField(GridSpec spec, std::vector<double> values)
    : spec_(spec), values_(std::move(values)) {
  spec_.validate();
  if (values_.size() != static_cast<std::size_t>(spec_.cell_count())) {
    throw ValidationError("bad_grid", "value count does not match the grid");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) {
      throw ValidationError("nonfinite_field", "field values must be finite");
    }
  }
}

double GridField::total() const {
  double s = 0.0;
  for (double v : values_) s += v;
  return s;
}

double GridField::max_value() const {
  double s = values_.front();
  for (double v : values_) s = std::max(s, v);
  return s;
}

namespace {

// Cell index of a coordinate along one axis; points exactly on an interior
// gridline resolve to the lower cell, matching the shared-edge convention.
int axis_cell(double coord, double origin, double h, int count) {
  const double u = (coord - origin) / h;
  int idx = static_cast<int>(std::floor(u));
  if (static_cast<double>(idx) == u && idx >= 1) --idx;
  return std::clamp(idx, 0, count - 1);
}

}  // namespace

SegmentTrace segment_cell_lengths(const std::array<double, 2>& a,
                                  const std::array<double, 2>& b,
                                  const GridSpec& spec) {
  spec.validate();
  SegmentTrace trace;
  const double dx = b[0] - a[0];
  const double dy = b[1] - a[1];
  const double length = std::hypot(dx, dy);
  if (length == 0.0) return trace;

  // Clip the parameter interval to the grid box (a convex slab pair).
  double t0 = 0.0, t1 = 1.0;
  const double lox = spec.origin[0], hix = spec.origin[0] + spec.nx * spec.cell_size;
  const double loy = spec.origin[1], hiy = spec.origin[1] + spec.ny * spec.cell_size;
  auto clip = [&](double p, double d, double lo, double hi) {
    if (d == 0.0) return p >= lo && p <= hi;
    double ta = (lo - p) / d, tb = (hi - p) / d;
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    return true;
  };
  if (!clip(a[0], dx, lox, hix) || !clip(a[1], dy, loy, hiy) || t0 >= t1) {
    trace.outside = length;
    return trace;
  }

  // Parameter values of every gridline crossing inside (t0, t1).
  std::vector<double> cuts;
  cuts.push_back(t0);
  auto add_axis_cuts = [&](double p, double d, double lo, int count) {
    if (d == 0.0) return;
    for (int g = 0; g <= count; ++g) {
      const double t = (lo + g * spec.cell_size - p) / d;
      if (t > t0 && t < t1) cuts.push_back(t);
    }
  };
  add_axis_cuts(a[0], dx, lox, spec.nx);
  add_axis_cuts(a[1], dy, loy, spec.ny);
  cuts.push_back(t1);
  std::sort(cuts.begin(), cuts.end());

  for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
    const double seg = (cuts[s + 1] - cuts[s]) * length;
    if (seg <= 0.0) continue;
    const double tm = 0.5 * (cuts[s] + cuts[s + 1]);
    const double px = a[0] + tm * dx;
    const double py = a[1] + tm * dy;
    const int ci = axis_cell(px, spec.origin[0], spec.cell_size, spec.nx);
    const int cj = axis_cell(py, spec.origin[1], spec.cell_size, spec.ny);
    const std::int64_t cell = spec.cell_index(ci, cj);
    if (!trace.cell_lengths.empty() && trace.cell_lengths.back().first == cell) {
      trace.cell_lengths.back().second += seg;
    } else {
      trace.cell_lengths.emplace_back(cell, seg);
    }
  }
  trace.outside = (t0 - 0.0) * length + (1.0 - t1) * length;
  return trace;
}

TransportDensity transport_density_field(const TransportPlan& plan,
                                         const GridSpec& spec) {
  if (plan.source().dimension() != 2) {
    throw ValidationError("dimension_mismatch",
                          "transport density is computed on 2-D plans");
  }
  TransportDensity out{GridField(spec), 0.0};
  for (const PlanEntry& e : plan.entries()) {
    const Point& x = plan.source().point(e.source);
    const Point& y = plan.target().point(e.target);
    const SegmentTrace trace =
        segment_cell_lengths({x[0], x[1]}, {y[0], y[1]}, spec);
    for (const auto& [cell, len] : trace.cell_lengths) {
      out.field.values()[cell] += e.mass * len;
    }
    out.outside += e.mass * trace.outside;
  }
  return out;
}

}  // namespace otlab
