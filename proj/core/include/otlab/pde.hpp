#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "otlab/density.hpp"
#include "otlab/measures.hpp"

namespace otlab {

/// Signed density of mu - nu on the grid (mass per cell divided by cell
/// area). Atoms landing outside the grid raise ValidationError; the total
/// integral is zero by construction.
GridField rasterize_signed_measure(const DiscreteMeasure& mu,
                                   const DiscreteMeasure& nu,
                                   const GridSpec& spec);

/// One 3x3 binomial smoothing pass (zero padding); preserves the integral
/// for fields supported away from the border.
GridField smooth_once(const GridField& field);

/// Discrete p-Laplacian problem on a grid with zero boundary values:
/// minimize sum |grad u|^p / p * h^2 - sum f u h^2 over fields vanishing on
/// the border, with the forward-difference gradient per cell. The rhs must
/// integrate to zero (compatibility of mu - nu), checked at construction.
struct PDEProblem {
  GridField rhs;
  double domain_radius = 0.0;
  double p = 2.0;

  PDEProblem(GridField rhs_field, double radius, double p_value);
};

struct PLaplaceOptions {
  int max_iterations = 20000;
  std::optional<GridField> warm_start;
  /// When set, receives the energy value accepted at every iteration.
  std::vector<double>* energy_log = nullptr;
};

/// Raised when the descent loop exhausts its iteration budget; carries the
/// best iterate and its first-order residual.
class NonConvergence : public Error {
 public:
  NonConvergence(GridField best_iterate, double residual)
      : Error("nonconvergence", "p-Laplacian solve did not reach tolerance"),
        best(std::move(best_iterate)), residual(residual) {}

  GridField best;
  double residual;
};

/// Energy minimization by preconditioned gradient descent (sparse Cholesky
/// of the p = 2 stiffness as the preconditioner) with Armijo line search;
/// the accepted energy is non-increasing by construction and re-checked
/// every iteration. Stops when the energy-gradient sup norm drops to tol.
GridField solve_p_laplacian(const PDEProblem& problem, double tol,
                            const PLaplaceOptions& options = {});

struct EGReport {
  GridField u;  ///< potential at p_final, rescaled so max |grad u| <= 1.05
  GridField a;  ///< |grad u_p|^(p-2) at p_final (raw gradient), >= 0
  double p_final = 0.0;
  double residual = 0.0;   ///< discrete L1 norm of div(a grad u) + rhs
  double grad_sup = 0.0;   ///< max |grad u| of the reported potential
  double eikonal_fraction = 0.0;  ///< share of high-a cells with |grad u| in [0.9, 1.1]
  std::vector<double> grad_sup_schedule;  ///< raw max |grad u_p| per p level
};

struct EGOptions {
  double tol_rel = 1e-6;     ///< gradient tolerance relative to h^2 max|f|
  double delta = 0.1;        ///< eikonal band half-width
  double lipschitz_slack = 0.05;
  int max_iterations = 20000;
  /// Invoked with (p, u_p) after each schedule level, e.g. to dump fields.
  std::function<void(double, const GridField&)> on_level;
};

/// The p -> infinity continuation: solves the schedule warm-started level
/// to level, then extracts the coefficient a = |grad u|^(p-2) and the
/// rescaled potential at the final p. The measures are rasterized and
/// smoothed with one grid-scale pass.
EGReport evans_gangbo_limit(const DiscreteMeasure& mu,
                            const DiscreteMeasure& nu, const GridSpec& spec,
                            const std::vector<double>& p_schedule,
                            const EGOptions& options = {});

/// Grid sized by the 1.5x bounding-box-diagonal rule around both supports
/// (the cheap realization of a large zero-boundary ball), nx = ny = cells.
GridSpec default_grid_for(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                          int cells = 64);

}  // namespace otlab
