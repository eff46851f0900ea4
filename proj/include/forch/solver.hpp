#pragma once

// Backward Euler finite-volume integrator for
//   phi dp/dt = div(K(x, |grad p|) grad p) + f,   p = psi on the boundary,
// with K lagged by Picard iteration.

#include <functional>
#include <string>
#include <vector>

#include "forch/constitutive.hpp"
#include "forch/expr.hpp"
#include "forch/grid.hpp"

namespace forch {

/// Extension Psi(x, y, t) of the boundary values, with symbolic derivatives.
struct BoundaryData {
  Expr psi, psi_x, psi_y, psi_t, psi_xt, psi_yt, psi_tt;

  BoundaryData();
  explicit BoundaryData(Expr e);

  double value(double x, double y, double t) const { return psi.eval(x, y, t); }
  /// True when Psi is the zero constant.
  bool is_zero() const;
  /// Field of Psi at cell centers.
  Field sample(const Grid2D& g, double t) const;
  Field sample_t(const Grid2D& g, double t) const;
  Field sample_tt(const Grid2D& g, double t) const;
  /// |grad Psi| and |grad Psi_t| at cell centers.
  Field sample_grad_norm(const Grid2D& g, double t) const;
  Field sample_grad_t_norm(const Grid2D& g, double t) const;
};

using SourceFn = std::function<double(double, double, double)>;

struct Scenario {
  std::string id = "scenario";
  Grid2D grid;
  ForchheimerLaw law;
  Field phi;
  BoundaryData boundary;
  Field p0;
  double T = 1.0;
  double dt = 1e-2;
  int snapshot_every = 1;
  int picard_max = 50;
  double picard_tol = 1e-9;
  double cg_tol = 1e-12;
  int cg_max = 20000;
  /// Optional volumetric source; only used by manufactured-solution checks.
  SourceFn source;

  /// Throws ValidationError naming the field at fault.
  void validate() const;
  int steps() const;
};

struct StepStats {
  int picard_iterations = 0;
  int cg_iterations = 0;
  std::vector<double> picard_updates;
  // Signed relative margins; negative means the invariant failed on this step.
  double max_principle = 0.0;
  double conservation = 0.0;
  double energy = 0.0;
};

/// One implicit step at a time; owns the face coefficient tables.
class Stepper {
public:
  explicit Stepper(const Scenario& sc);
  /// Advances p from t to t + dt. Throws NumericError on Picard or CG failure.
  Field step(const Field& p, double t, StepStats* stats = nullptr) const;
  /// Padded copy of p with Dirichlet ghosts 2 psi_face - p_cell at time t.
  Padded with_ghosts(const Field& p, double t) const;
  /// Cell-centered |grad p| using the Dirichlet ghosts at time t.
  Field gradient_norm(const Field& p, double t) const;

private:
  const Scenario& sc_;
  std::vector<LocalLaw> xlaw_, ylaw_;
  std::vector<double> xbx_, ybx_;  // boundary face coordinates along each edge
};

struct InvariantSummary {
  bool max_principle_ok = true;
  bool conservation_ok = true;
  bool energy_ok = true;
  double worst_max_principle = 0.0;
  double worst_conservation = 0.0;
  double worst_energy = 0.0;
  bool checked_max_principle = false;
  bool checked_conservation = false;
  bool checked_energy = false;
  bool ok() const { return max_principle_ok && conservation_ok && energy_ok; }
};

struct RunResult {
  SpaceTimeField p, pbar, pbar_t;
  /// Cell-centered |grad p| per snapshot.
  SpaceTimeField grad_p;
  InvariantSummary invariants;
  int steps_done = 0;
  int max_picard = 0;
  long long total_cg = 0;
  bool complete = false;
  std::string error;
  std::vector<double> error_residuals;
};

/// Integrates to T. Step failures stop the run and are reported in the result.
RunResult run(const Scenario& sc);

/// Rebuilds pbar and pbar_t (centered differences, one-sided at the ends) from p snapshots.
void derive_fields(const Scenario& sc, RunResult& r);

}  // namespace forch
