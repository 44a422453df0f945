#include <cmath>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "otlab/pde.hpp"

using namespace otlab;
using otlab::testing::make_rng;
using otlab::testing::random_measure;

namespace {

GridSpec square_grid(int n, double lo, double hi) {
  GridSpec spec;
  spec.origin = {lo, lo};
  spec.cell_size = (hi - lo) / n;
  spec.nx = spec.ny = n;
  return spec;
}

// Dense Gaussian elimination on the interior of the forward-difference
// p = 2 problem: an implementation-independent linear oracle.
std::vector<double> direct_p2_solve(const GridField& rhs) {
  const GridSpec& spec = rhs.spec();
  const int nx = spec.nx, ny = spec.ny;
  auto interior = [&](int i, int j) {
    return i >= 1 && j >= 1 && i <= nx - 2 && j <= ny - 2;
  };
  std::vector<int> id(static_cast<std::size_t>(nx) * ny, -1);
  int count = 0;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      if (interior(i, j)) id[j * nx + i] = count++;
    }
  }
  // Quadratic-form Laplacian over forward-difference edges.
  std::vector<std::vector<double>> A(count, std::vector<double>(count, 0.0));
  std::vector<double> b(count, 0.0);
  auto edge = [&](int ca, int cb) {
    const int a = id[ca], bb = id[cb];
    if (a >= 0) A[a][a] += 1.0;
    if (bb >= 0) A[bb][bb] += 1.0;
    if (a >= 0 && bb >= 0) {
      A[a][bb] -= 1.0;
      A[bb][a] -= 1.0;
    }
  };
  for (int j = 0; j + 1 < ny; ++j) {
    for (int i = 0; i + 1 < nx; ++i) {
      edge(j * nx + i, j * nx + i + 1);
      edge(j * nx + i, (j + 1) * nx + i);
    }
  }
  const double area = spec.cell_size * spec.cell_size;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      if (id[j * nx + i] >= 0) {
        b[id[j * nx + i]] = rhs.at(i, j) * area;
      }
    }
  }
  // In-place Gaussian elimination with partial pivoting.
  for (int col = 0; col < count; ++col) {
    int pivot = col;
    for (int r = col + 1; r < count; ++r) {
      if (std::abs(A[r][col]) > std::abs(A[pivot][col])) pivot = r;
    }
    std::swap(A[col], A[pivot]);
    std::swap(b[col], b[pivot]);
    for (int r = col + 1; r < count; ++r) {
      const double f = A[r][col] / A[col][col];
      for (int c = col; c < count; ++c) A[r][c] -= f * A[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(count, 0.0);
  for (int r = count - 1; r >= 0; --r) {
    double s = b[r];
    for (int c = r + 1; c < count; ++c) s -= A[r][c] * x[c];
    x[r] = s / A[r][r];
  }
  std::vector<double> u(static_cast<std::size_t>(nx) * ny, 0.0);
  for (std::size_t c = 0; c < id.size(); ++c) {
    if (id[c] >= 0) u[c] = x[id[c]];
  }
  return u;
}

}  // namespace

TEST_CASE("rasterization of signed measures") {
  const GridSpec spec = square_grid(8, 0.0, 1.0);
  const double h = spec.cell_size;

  SUBCASE("mu = nu rasterizes to zero") {
    const DiscreteMeasure m({{0.3, 0.3}, {0.7, 0.6}}, {0.5, 0.5});
    const GridField f = rasterize_signed_measure(m, m, spec);
    for (double v : f.values()) CHECK(v == 0.0);
  }
  SUBCASE("two Diracs at cell centers") {
    const auto ca = spec.cell_center(1, 1);
    const auto cb = spec.cell_center(5, 3);
    const DiscreteMeasure m1({{ca[0], ca[1]}}, {1.0});
    const DiscreteMeasure m2({{cb[0], cb[1]}}, {1.0});
    const GridField f = rasterize_signed_measure(m1, m2, spec);
    CHECK(f.at(1, 1) == doctest::Approx(1.0 / (h * h)).epsilon(1e-12));
    CHECK(f.at(5, 3) == doctest::Approx(-1.0 / (h * h)).epsilon(1e-12));
  }
  SUBCASE("random pairs integrate to zero") {
    auto rng = make_rng(139);
    for (int t = 0; t < 10; ++t) {
      const DiscreteMeasure mu = random_measure(rng, 6, 2, false, 0.49);
      const DiscreteMeasure nu = random_measure(rng, 5, 2, false, 0.49);
      auto shift = [](const DiscreteMeasure& m) {
        std::vector<Point> pts;
        for (Point p : m.points()) {
          pts.push_back({p[0] + 0.5, p[1] + 0.5});
        }
        return DiscreteMeasure(pts, m.weights());
      };
      const GridField f = rasterize_signed_measure(shift(mu), shift(nu), spec);
      CHECK(std::abs(f.total() * h * h) <= 1e-12);
    }
  }
  SUBCASE("support outside the grid is rejected") {
    const DiscreteMeasure in({{0.5, 0.5}}, {1.0});
    const DiscreteMeasure out({{1.5, 0.5}}, {1.0});
    CHECK_THROWS_AS(rasterize_signed_measure(in, out, spec), ValidationError);
  }
}

TEST_CASE("smoothing preserves interior mass") {
  const GridSpec spec = square_grid(10, 0.0, 1.0);
  GridField f(spec);
  f.at(4, 5) = 3.0;
  f.at(5, 5) = -1.0;
  const GridField s = smooth_once(f);
  CHECK(s.total() == doctest::Approx(f.total()).epsilon(1e-14));
  CHECK(s.at(4, 5) != f.at(4, 5));
}

TEST_CASE("problem validation") {
  const GridSpec spec = square_grid(6, 0.0, 1.0);
  GridField bad(spec);
  bad.at(2, 2) = 1.0;  // nonzero total
  CHECK_THROWS_AS(PDEProblem(bad, 1.0, 4.0), ValidationError);
  GridField ok(spec);
  ok.at(2, 2) = 1.0;
  ok.at(3, 3) = -1.0;
  CHECK_THROWS_AS(PDEProblem(ok, 1.0, 1.5), ValidationError);
}

TEST_CASE("zero rhs solves to zero") {
  const GridSpec spec = square_grid(12, 0.0, 1.0);
  const PDEProblem problem(GridField(spec), 1.0, 8.0);
  const GridField u = solve_p_laplacian(problem, 1e-12);
  for (double v : u.values()) CHECK(v == 0.0);
}

TEST_CASE("antisymmetric rhs gives an antisymmetric potential") {
  const int n = 16;
  const GridSpec spec = square_grid(n, -1.0, 1.0);
  GridField f(spec);
  // f(i,j) = -f(n-1-i, j): a dipole aligned with the x axis.
  f.at(3, 8) = 1.0;
  f.at(n - 4, 8) = -1.0;
  const PDEProblem problem(f, 1.0, 4.0);
  const double tol = 1e-10;
  const GridField u = solve_p_laplacian(problem, tol);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      CHECK(u.at(i, j) ==
            doctest::Approx(-u.at(n - 1 - i, j)).epsilon(0.0).scale(1.0));
    }
  }
}

TEST_CASE("p = 2 agrees with a direct linear solve") {
  const int n = 10;
  const GridSpec spec = square_grid(n, 0.0, 1.0);
  GridField f(spec);
  f.at(2, 3) = 2.0;
  f.at(6, 6) = -1.5;
  f.at(7, 2) = -0.5;
  const PDEProblem problem(f, 1.0, 2.0);
  const GridField u = solve_p_laplacian(problem, 1e-13);
  const std::vector<double> direct = direct_p2_solve(f);
  for (std::size_t c = 0; c < direct.size(); ++c) {
    CHECK(std::abs(u.values()[c] - direct[c]) <= 1e-8);
  }
}

TEST_CASE("energy decreases monotonically") {
  const int n = 20;
  const GridSpec spec = square_grid(n, -1.0, 1.0);
  GridField f(spec);
  f.at(5, 10) = 1.0;
  f.at(14, 10) = -1.0;
  const PDEProblem problem(f, 1.0, 6.0);
  std::vector<double> energies;
  PLaplaceOptions options;
  options.energy_log = &energies;
  solve_p_laplacian(problem, 1e-9, options);
  REQUIRE(energies.size() >= 2);
  for (std::size_t t = 1; t < energies.size(); ++t) {
    CHECK(energies[t] <= energies[t - 1] + 1e-12 * (1.0 + std::abs(energies[t])));
  }
}

TEST_CASE("non-convergence carries the best iterate") {
  const int n = 16;
  const GridSpec spec = square_grid(n, -1.0, 1.0);
  GridField f(spec);
  f.at(4, 8) = 1.0;
  f.at(11, 8) = -1.0;
  const PDEProblem problem(f, 1.0, 4.0);
  PLaplaceOptions options;
  options.max_iterations = 1;
  CHECK_THROWS_AS(solve_p_laplacian(problem, 1e-14, options), NonConvergence);
  try {
    solve_p_laplacian(problem, 1e-14, options);
  } catch (const NonConvergence& e) {
    CHECK(e.residual > 0.0);
    CHECK(e.best.spec() == spec);
  }
}

TEST_CASE("small two-bump continuation behaves") {
  // Two x-translate bumps, sampled as point measures at cell centers.
  std::vector<Point> pa, pb;
  std::vector<double> wa, wb;
  const int k = 6;
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) {
      const double x = -0.55 + 0.3 * (a + 0.5) / k;
      const double y = -0.15 + 0.3 * (b + 0.5) / k;
      pa.push_back({x, y});
      pb.push_back({x + 0.8, y});
      wa.push_back(1.0);
      wb.push_back(1.0);
    }
  }
  const DiscreteMeasure mu(pa, wa), nu(pb, wb);
  const GridSpec spec = default_grid_for(mu, nu, 32);
  EGOptions options;
  int levels_seen = 0;
  options.on_level = [&](double, const GridField&) { ++levels_seen; };
  const EGReport report = evans_gangbo_limit(mu, nu, spec, {4.0, 8.0, 16.0},
                                             options);
  CHECK(levels_seen == 3);
  CHECK(report.p_final == 16.0);
  for (double v : report.a.values()) CHECK(v >= 0.0);
  CHECK(report.grad_sup <= 1.05 + 1e-12);
  CHECK(std::isfinite(report.residual));
  // Lipschitz excess trend along the schedule (5% slack).
  REQUIRE(report.grad_sup_schedule.size() == 3);
  for (std::size_t t = 1; t < report.grad_sup_schedule.size(); ++t) {
    const double prev = std::max(report.grad_sup_schedule[t - 1] - 1.0, 0.0);
    const double cur = std::max(report.grad_sup_schedule[t] - 1.0, 0.0);
    CHECK(cur <= 1.05 * prev + 1e-9);
  }
}

TEST_CASE("identical measures give a vanishing coefficient") {
  const DiscreteMeasure m({{0.0, 0.0}, {0.2, 0.1}}, {0.5, 0.5});
  const GridSpec spec = default_grid_for(m, m, 24);
  const EGReport report = evans_gangbo_limit(m, m, spec, {4.0, 8.0, 16.0});
  CHECK(report.residual <= 1e-8);
  for (double v : report.a.values()) CHECK(v <= 1e-12);
}

TEST_CASE("schedule validation") {
  const DiscreteMeasure m({{0.0, 0.0}}, {1.0});
  const GridSpec spec = square_grid(8, -1.0, 1.0);
  CHECK_THROWS_AS(evans_gangbo_limit(m, m, spec, {}), ValidationError);
  CHECK_THROWS_AS(evans_gangbo_limit(m, m, spec, {4.0, 4.0}), ValidationError);
  CHECK_THROWS_AS(evans_gangbo_limit(m, m, spec, {1.5, 4.0}), ValidationError);
}
