#include "otlab/pde.hpp"

#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>

namespace otlab {

namespace {

constexpr double kCompatibilityTol = 1e-10;

int locate_cell(double coord, double origin, double h, int count,
                const char* what) {
  const double u = (coord - origin) / h;
  int idx = static_cast<int>(std::floor(u));
  if (static_cast<double>(idx) == u && idx >= 1) --idx;
  if (idx < 0 || idx >= count) {
    throw ValidationError("support_outside_grid", what);
  }
  return idx;
}

}  // namespace

GridField rasterize_signed_measure(const DiscreteMeasure& mu,
                                   const DiscreteMeasure& nu,
                                   const GridSpec& spec) {
  if (mu.dimension() != 2 || nu.dimension() != 2) {
    throw ValidationError("dimension_mismatch",
                          "grid rasterization expects 2-D measures");
  }
  GridField field(spec);
  const double inv_area = 1.0 / (spec.cell_size * spec.cell_size);
  auto splat = [&](const DiscreteMeasure& m, double sign) {
    for (std::size_t idx = 0; idx < m.size(); ++idx) {
      const Point& pt = m.point(idx);
      const int ci = locate_cell(pt[0], spec.origin[0], spec.cell_size,
                                 spec.nx, "support point outside the grid");
      const int cj = locate_cell(pt[1], spec.origin[1], spec.cell_size,
                                 spec.ny, "support point outside the grid");
      field.at(ci, cj) += sign * m.weight(idx) * inv_area;
    }
  };
  splat(mu, +1.0);
  splat(nu, -1.0);
  return field;
}

GridField smooth_once(const GridField& field) {
  const GridSpec& spec = field.spec();
  GridField out(spec);
  static constexpr double kernel[3] = {0.25, 0.5, 0.25};
  for (int j = 0; j < spec.ny; ++j) {
    for (int i = 0; i < spec.nx; ++i) {
      double acc = 0.0;
      for (int dj = -1; dj <= 1; ++dj) {
        for (int di = -1; di <= 1; ++di) {
          const int a = i + di, b = j + dj;
          if (a < 0 || a >= spec.nx || b < 0 || b >= spec.ny) continue;
          acc += kernel[di + 1] * kernel[dj + 1] * field.at(a, b);
        }
      }
      out.at(i, j) = acc;
    }
  }
  return out;
}

PDEProblem::PDEProblem(GridField rhs_field, double radius, double p_value)
    : rhs(std::move(rhs_field)), domain_radius(radius), p(p_value) {
  if (!(p >= 2.0)) {
    throw ValidationError("bad_p", "the p-Laplacian solver needs p >= 2");
  }
  const double area = rhs.spec().cell_size * rhs.spec().cell_size;
  if (std::abs(rhs.total() * area) > kCompatibilityTol) {
    throw ValidationError("incompatible_rhs",
                          "mu - nu must carry zero total mass");
  }
}

namespace {

// Discrete energy machinery shared by the solver and the report assembly.
// u lives on the nx*ny lattice, zero on the border; the gradient uses
// forward differences on cells (i, j) with i < nx-1, j < ny-1.
class Energy {
 public:
  Energy(const GridField& rhs, double p)
      : spec_(rhs.spec()), f_(rhs.values()), p_(p), h_(spec_.cell_size),
        area_(h_ * h_) {}

  double value(const std::vector<double>& u) const {
    double e = 0.0;
    for (int j = 0; j + 1 < spec_.ny; ++j) {
      for (int i = 0; i + 1 < spec_.nx; ++i) {
        const double g = gradient_norm(u, i, j);
        e += std::pow(g, p_) / p_;
      }
    }
    for (std::size_t c = 0; c < f_.size(); ++c) e -= f_[c] * u[c];
    return e * area_;
  }

  // grad_out[c] = dE/du_c; border nodes are pinned to zero.
  void gradient(const std::vector<double>& u, std::vector<double>& grad_out) const {
    grad_out.assign(u.size(), 0.0);
    for (int j = 0; j + 1 < spec_.ny; ++j) {
      for (int i = 0; i + 1 < spec_.nx; ++i) {
        const std::size_t c = idx(i, j);
        const double gx = (u[idx(i + 1, j)] - u[c]) / h_;
        const double gy = (u[idx(i, j + 1)] - u[c]) / h_;
        const double w = weight(std::hypot(gx, gy));
        grad_out[c] -= w * (gx + gy) / h_;
        grad_out[idx(i + 1, j)] += w * gx / h_;
        grad_out[idx(i, j + 1)] += w * gy / h_;
      }
    }
    for (std::size_t c = 0; c < f_.size(); ++c) {
      grad_out[c] = (grad_out[c] - f_[c]) * area_;
    }
    for (int j = 0; j < spec_.ny; ++j) {
      for (int i = 0; i < spec_.nx; ++i) {
        if (border(i, j)) grad_out[idx(i, j)] = 0.0;
      }
    }
  }

  // |grad u|^(p-2) in log space; tiny magnitudes flush to zero.
  double weight(double g) const {
    if (g <= 0.0) return p_ == 2.0 ? 1.0 : 0.0;
    const double lw = (p_ - 2.0) * std::log(g);
    if (lw < -690.0) return 0.0;
    return std::exp(lw);
  }

  double gradient_norm(const std::vector<double>& u, int i, int j) const {
    const double gx = (u[idx(i + 1, j)] - u[idx(i, j)]) / h_;
    const double gy = (u[idx(i, j + 1)] - u[idx(i, j)]) / h_;
    return std::hypot(gx, gy);
  }

  bool border(int i, int j) const {
    return i == 0 || j == 0 || i == spec_.nx - 1 || j == spec_.ny - 1;
  }
  std::size_t idx(int i, int j) const {
    return static_cast<std::size_t>(j) * spec_.nx + i;
  }
  const GridSpec& spec() const { return spec_; }
  double area() const { return area_; }

 private:
  GridSpec spec_;
  const std::vector<double>& f_;
  double p_;
  double h_;
  double area_;
};

double sup_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s = std::max(s, std::abs(x));
  return s;
}

// Sparse Cholesky of the p = 2 stiffness restricted to interior nodes.
class Preconditioner {
 public:
  explicit Preconditioner(const Energy& energy) : energy_(energy) {
    const GridSpec& spec = energy.spec();
    interior_.assign(static_cast<std::size_t>(spec.nx) * spec.ny, -1);
    for (int j = 0; j < spec.ny; ++j) {
      for (int i = 0; i < spec.nx; ++i) {
        if (!energy.border(i, j)) {
          interior_[energy.idx(i, j)] = count_++;
        }
      }
    }
    std::vector<Eigen::Triplet<double>> trips;
    auto couple = [&](std::size_t a, std::size_t b) {
      const int ia = interior_[a], ib = interior_[b];
      if (ia >= 0) trips.emplace_back(ia, ia, 1.0);
      if (ib >= 0) trips.emplace_back(ib, ib, 1.0);
      if (ia >= 0 && ib >= 0) {
        trips.emplace_back(ia, ib, -1.0);
        trips.emplace_back(ib, ia, -1.0);
      }
    };
    for (int j = 0; j + 1 < spec.ny; ++j) {
      for (int i = 0; i + 1 < spec.nx; ++i) {
        couple(energy.idx(i, j), energy.idx(i + 1, j));
        couple(energy.idx(i, j), energy.idx(i, j + 1));
      }
    }
    Eigen::SparseMatrix<double> stiffness(count_, count_);
    stiffness.setFromTriplets(trips.begin(), trips.end());
    solver_.compute(stiffness);
    if (solver_.info() != Eigen::Success) {
      throw NumericError("factorization_failed",
                         "stiffness factorization failed");
    }
  }

  // direction = -P^{ -1 } grad, mapped back to the full lattice.
  void apply(const std::vector<double>& grad, std::vector<double>& dir) const {
    Eigen::VectorXd rhs(count_);
    for (std::size_t c = 0; c < interior_.size(); ++c) {
      if (interior_[c] >= 0) rhs[interior_[c]] = -grad[c];
    }
    const Eigen::VectorXd x = solver_.solve(rhs);
    dir.assign(interior_.size(), 0.0);
    for (std::size_t c = 0; c < interior_.size(); ++c) {
      if (interior_[c] >= 0) dir[c] = x[interior_[c]];
    }
  }

 private:
  const Energy& energy_;
  std::vector<int> interior_;
  int count_ = 0;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver_;
};

}  // namespace

GridField solve_p_laplacian(const PDEProblem& problem, double tol,
                            const PLaplaceOptions& options) {
  const Energy energy(problem.rhs, problem.p);
  const GridSpec& spec = problem.rhs.spec();
  const std::size_t size = static_cast<std::size_t>(spec.cell_count());

  std::vector<double> u(size, 0.0);
  if (options.warm_start) {
    if (options.warm_start->spec() != spec) {
      throw ValidationError("bad_warm_start",
                            "warm start lives on a different grid");
    }
    u = options.warm_start->values();
    for (int j = 0; j < spec.ny; ++j) {
      for (int i = 0; i < spec.nx; ++i) {
        if (energy.border(i, j)) u[energy.idx(i, j)] = 0.0;
      }
    }
  }

  const Preconditioner precond(energy);
  std::vector<double> grad, dir, trial(size);
  double e = energy.value(u);
  double alpha_prev = 1.0;
  if (options.energy_log) options.energy_log->push_back(e);

  for (int it = 0; it < options.max_iterations; ++it) {
    energy.gradient(u, grad);
    if (sup_norm(grad) <= tol) {
      return GridField(spec, std::move(u));
    }
    precond.apply(grad, dir);
    double slope = 0.0;
    for (std::size_t c = 0; c < size; ++c) slope += grad[c] * dir[c];
    if (!(slope < 0.0)) {
      // Preconditioned direction lost descent (numerical floor); fall back
      // to the raw negative gradient.
      dir = grad;
      for (double& v : dir) v = -v;
      slope = 0.0;
      for (std::size_t c = 0; c < size; ++c) slope += grad[c] * dir[c];
      if (!(slope < 0.0)) return GridField(spec, std::move(u));
    }

    double alpha = std::min(4.0 * alpha_prev, 1.0);
    bool accepted = false;
    for (int halving = 0; halving < 60; ++halving) {
      for (std::size_t c = 0; c < size; ++c) trial[c] = u[c] + alpha * dir[c];
      const double et = energy.value(trial);
      if (et <= e + 1e-4 * alpha * slope) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      // No admissible step at the floating-point floor: report the iterate.
      const double res = sup_norm(grad);
      if (res <= 16.0 * tol) return GridField(spec, std::move(u));
      throw NonConvergence(GridField(spec, std::move(u)), res);
    }
    std::swap(u, trial);
    const double e_new = energy.value(u);
    if (e_new > e + 1e-12 * (1.0 + std::abs(e))) {
      throw NumericError("energy_increase",
                         "descent accepted an energy increase");
    }
    e = e_new;
    alpha_prev = alpha;
    if (options.energy_log) options.energy_log->push_back(e);
  }

  energy.gradient(u, grad);
  const double res = sup_norm(grad);
  if (res <= tol) return GridField(spec, std::move(u));
  throw NonConvergence(GridField(spec, std::move(u)), res);
}

EGReport evans_gangbo_limit(const DiscreteMeasure& mu,
                            const DiscreteMeasure& nu, const GridSpec& spec,
                            const std::vector<double>& p_schedule,
                            const EGOptions& options) {
  if (p_schedule.empty()) {
    throw ValidationError("bad_p_schedule", "the p schedule must be nonempty");
  }
  for (std::size_t t = 0; t < p_schedule.size(); ++t) {
    if (!(p_schedule[t] >= 2.0)) {
      throw ValidationError("bad_p_schedule", "p values must be >= 2");
    }
    if (t > 0 && !(p_schedule[t] > p_schedule[t - 1])) {
      throw ValidationError("bad_p_schedule",
                            "the p schedule must be increasing");
    }
  }

  const GridField rhs = smooth_once(rasterize_signed_measure(mu, nu, spec));
  double fmax = 0.0;
  for (double v : rhs.values()) fmax = std::max(fmax, std::abs(v));
  const double tol =
      options.tol_rel * spec.cell_size * spec.cell_size * std::max(1.0, fmax);

  EGReport report{GridField(spec), GridField(spec), p_schedule.back(),
                  0.0,          0.0,          0.0,
                  {}};
  std::optional<GridField> warm;
  for (double p : p_schedule) {
    PDEProblem problem(rhs, 0.5 * spec.cell_size * std::max(spec.nx, spec.ny),
                       p);
    PLaplaceOptions popts;
    popts.max_iterations = options.max_iterations;
    popts.warm_start = warm;
    GridField u = solve_p_laplacian(problem, tol, popts);
    // Track the raw Lipschitz excess along the schedule.
    const Energy energy(rhs, p);
    double gsup = 0.0;
    for (int j = 0; j + 1 < spec.ny; ++j) {
      for (int i = 0; i + 1 < spec.nx; ++i) {
        gsup = std::max(gsup, energy.gradient_norm(u.values(), i, j));
      }
    }
    report.grad_sup_schedule.push_back(gsup);
    if (options.on_level) options.on_level(p, u);
    warm = std::move(u);
  }

  const double p_final = p_schedule.back();
  const GridField& u_raw = *warm;
  const Energy energy(rhs, p_final);

  // Coefficient from the raw gradient, potential rescaled to the Lipschitz
  // budget.
  double gsup_raw = report.grad_sup_schedule.back();
  GridField a(spec);
  for (int j = 0; j + 1 < spec.ny; ++j) {
    for (int i = 0; i + 1 < spec.nx; ++i) {
      const double g = energy.gradient_norm(u_raw.values(), i, j);
      double w = energy.weight(g);
      if (w < 1e-300) w = 0.0;
      a.at(i, j) = w;
    }
  }
  const double lambda =
      gsup_raw > 1.0 + options.lipschitz_slack
          ? (1.0 + options.lipschitz_slack) / gsup_raw
          : 1.0;
  GridField u(spec);
  for (std::size_t c = 0; c < u.values().size(); ++c) {
    u.values()[c] = lambda * u_raw.values()[c];
  }
  report.u = u;
  report.a = a;
  report.p_final = p_final;
  report.grad_sup = lambda * gsup_raw;

  // Residual of -div(a grad u) = rhs in the discrete L1 norm, with the
  // divergence adjoint to the forward-difference gradient.
  const double h = spec.cell_size;
  double residual = 0.0;
  auto gx = [&](int i, int j) {
    return (u.at(i + 1, j) - u.at(i, j)) / h;
  };
  auto gy = [&](int i, int j) {
    return (u.at(i, j + 1) - u.at(i, j)) / h;
  };
  for (int j = 0; j < spec.ny; ++j) {
    for (int i = 0; i < spec.nx; ++i) {
      double div = 0.0;
      if (i + 1 < spec.nx && j + 1 < spec.ny) {
        div -= a.at(i, j) * (gx(i, j) + gy(i, j)) / h;
      }
      if (i >= 1 && j + 1 < spec.ny) div += a.at(i - 1, j) * gx(i - 1, j) / h;
      if (j >= 1 && i + 1 < spec.nx) div += a.at(i, j - 1) * gy(i, j - 1) / h;
      residual += std::abs(-div - rhs.at(i, j)) * h * h;
    }
  }
  report.residual = residual;

  // Eikonal statistics on the high-coefficient region.
  const double a_max = a.max_value();
  std::int64_t high = 0, in_band = 0;
  for (int j = 0; j + 1 < spec.ny; ++j) {
    for (int i = 0; i + 1 < spec.nx; ++i) {
      if (a.at(i, j) > 0.1 * a_max) {
        ++high;
        const double g = lambda * energy.gradient_norm(u_raw.values(), i, j);
        if (g >= 1.0 - options.delta && g <= 1.0 + options.delta) ++in_band;
      }
    }
  }
  report.eikonal_fraction =
      high > 0 ? static_cast<double>(in_band) / static_cast<double>(high) : 1.0;
  return report;
}

GridSpec default_grid_for(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                          int cells) {
  if (mu.dimension() != 2 || nu.dimension() != 2) {
    throw ValidationError("dimension_mismatch", "grids are 2-D");
  }
  double lo[2] = {mu.point(0)[0], mu.point(0)[1]};
  double hi[2] = {lo[0], lo[1]};
  auto absorb = [&](const DiscreteMeasure& m) {
    for (const Point& pt : m.points()) {
      for (int c = 0; c < 2; ++c) {
        lo[c] = std::min(lo[c], pt[c]);
        hi[c] = std::max(hi[c], pt[c]);
      }
    }
  };
  absorb(mu);
  absorb(nu);
  const double diag = std::hypot(hi[0] - lo[0], hi[1] - lo[1]);
  const double radius = 1.5 * std::max(diag, 1e-9);
  const double cx = 0.5 * (lo[0] + hi[0]), cy = 0.5 * (lo[1] + hi[1]);
  GridSpec spec;
  spec.nx = spec.ny = cells;
  spec.cell_size = 2.0 * radius / cells;
  spec.origin = {cx - radius, cy - radius};
  return spec;
}

}  // namespace otlab
