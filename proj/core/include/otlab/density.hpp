#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "otlab/measures.hpp"

namespace otlab {

/// Uniform rectangular grid over [origin, origin + (nx*h, ny*h)] in R^2.
/// Cell (i, j) covers [ox + i*h, ox + (i+1)*h) x [oy + j*h, oy + (j+1)*h).
struct GridSpec {
  std::array<double, 2> origin{0.0, 0.0};
  double cell_size = 1.0;
  int nx = 1;
  int ny = 1;

  void validate() const;
  std::int64_t cell_count() const {
    return static_cast<std::int64_t>(nx) * ny;
  }
  std::int64_t cell_index(int i, int j) const {
    return static_cast<std::int64_t>(j) * nx + i;
  }
  std::array<double, 2> cell_center(int i, int j) const {
    return {origin[0] + (i + 0.5) * cell_size,
            origin[1] + (j + 0.5) * cell_size};
  }

  bool operator==(const GridSpec&) const = default;
};

/// Scalar field on a grid, stored row-major over y (values[j*nx + i]).
class GridField {
 public:
  explicit GridField(GridSpec spec, double fill = 0.0)
      : spec_(spec), values_(spec.cell_count(), fill) {
    spec_.validate();
  }
  GridField(GridSpec spec, std::vector<double> values);

  const GridSpec& spec() const { return spec_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }
  double at(int i, int j) const { return values_[spec_.cell_index(i, j)]; }
  double& at(int i, int j) { return values_[spec_.cell_index(i, j)]; }
  /// Sum of all cell values.
  double total() const;
  double max_value() const;

 private:
  GridSpec spec_;
  std::vector<double> values_;
};

/// Lengths of a segment clipped to each traversed cell (1-D Hausdorff
/// measure of segment-cell intersections), in traversal order, plus the
/// length falling outside the grid. A segment lying on a shared cell edge
/// credits the lower-index cell. The lengths plus `outside` always sum to
/// the segment length.
struct SegmentTrace {
  std::vector<std::pair<std::int64_t, double>> cell_lengths;
  double outside = 0.0;
};

SegmentTrace segment_cell_lengths(const std::array<double, 2>& a,
                                  const std::array<double, 2>& b,
                                  const GridSpec& spec);

/// Transport density on the grid: cell mass sigma(cell) = sum over plan
/// entries of gamma_ij * length([x_i, y_j] intersect cell). Work outside
/// the grid is reported, never dropped; field total + outside equals the
/// Euclidean cost of the plan.
struct TransportDensity {
  GridField field;
  double outside = 0.0;
};

TransportDensity transport_density_field(const TransportPlan& plan,
                                         const GridSpec& spec);

}  // namespace otlab
