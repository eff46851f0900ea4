#include "forch/solver.hpp"

#include <algorithm>
#include <cmath>

#include "forch/cg.hpp"
#include "forch/error.hpp"
#include "forch/norms.hpp"

namespace forch {

BoundaryData::BoundaryData() : BoundaryData(Expr::constant(0.0)) {}

BoundaryData::BoundaryData(Expr e) : psi(std::move(e)) {
  psi_x = psi.diff(Var::X);
  psi_y = psi.diff(Var::Y);
  psi_t = psi.diff(Var::T);
  psi_xt = psi_x.diff(Var::T);
  psi_yt = psi_y.diff(Var::T);
  psi_tt = psi_t.diff(Var::T);
}

bool BoundaryData::is_zero() const { return psi.is_constant() && psi.constant_value() == 0.0; }

namespace {

Field sample_expr(const Expr& e, const Grid2D& g, double t, const char* name) {
  return Field::sample(g, [&](double x, double y) { return e.eval(x, y, t); }, name);
}

Field sample_norm(const Expr& ex, const Expr& ey, const Grid2D& g, double t, const char* name) {
  return Field::sample(g, [&](double x, double y) { return std::hypot(ex.eval(x, y, t), ey.eval(x, y, t)); },
                       name);
}

}  // namespace

Field BoundaryData::sample(const Grid2D& g, double t) const { return sample_expr(psi, g, t, "boundary.psi"); }
Field BoundaryData::sample_t(const Grid2D& g, double t) const { return sample_expr(psi_t, g, t, "boundary.psi_t"); }
Field BoundaryData::sample_tt(const Grid2D& g, double t) const {
  return sample_expr(psi_tt, g, t, "boundary.psi_tt");
}
Field BoundaryData::sample_grad_norm(const Grid2D& g, double t) const {
  return sample_norm(psi_x, psi_y, g, t, "boundary.grad_psi");
}
Field BoundaryData::sample_grad_t_norm(const Grid2D& g, double t) const {
  return sample_norm(psi_xt, psi_yt, g, t, "boundary.grad_psi_t");
}

int Scenario::steps() const { return static_cast<int>(std::llround(T / dt)); }

void Scenario::validate() const {
  grid.validate();
  if (law.coefficients().empty()) throw ValidationError("law", "missing");
  if (!(law.grid() == grid)) throw ValidationError("law.coefficients", "grid mismatch");
  if (!(phi.grid() == grid)) throw ValidationError("porosity.phi", "grid mismatch");
  for (std::size_t k = 0; k < phi.size(); ++k)
    if (!(phi[k] > 0.0)) throw ValidationError("porosity.phi", "must be positive (cell " + std::to_string(k) + ")");
  if (!(p0.grid() == grid)) throw ValidationError("boundary.initial", "grid mismatch");
  if (!(T > 0.0) || !std::isfinite(T)) throw ValidationError("time.T", "must be positive");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("time.dt", "must be positive");
  const int n = steps();
  if (n < 1 || std::abs(n * dt - T) > 1e-9 * T) throw ValidationError("time.dt", "must divide T");
  if (snapshot_every < 1) throw ValidationError("time.snapshot_every", "must be >= 1");
  if (picard_max < 1) throw ValidationError("time.picard_max", "must be >= 1");
  if (!(picard_tol > 0.0)) throw ValidationError("time.picard_tol", "must be positive");
  if (!(cg_tol > 0.0 && cg_tol <= 1e-10)) throw ValidationError("time.cg_tol", "must lie in (0, 1e-10]");
  if (cg_max < 1) throw ValidationError("time.cg_max", "must be >= 1");
  for (double t : {0.0, T})
    for (double x : {grid.x0, grid.x0 + grid.lx()})
      for (double y : {grid.y0, grid.y0 + grid.ly()})
        if (!std::isfinite(boundary.value(x, y, t))) throw ValidationError("boundary.psi", "not finite on the box");
}

namespace {

// Coefficient values on a boundary face: linear extrapolation from the two nearest
// cells, falling back to the boundary cell when that would not stay positive.
double extrapolate_to_face(double cell, double inner) {
  const double v = 1.5 * cell - 0.5 * inner;
  return v > 0.0 ? v : cell;
}

}  // namespace

Stepper::Stepper(const Scenario& sc) : sc_(sc) {
  const Grid2D& g = sc.grid;
  const int nx = g.nx, ny = g.ny;
  const auto& coefs = sc.law.coefficients();
  const std::size_t terms = coefs.size();
  std::vector<double> vals(terms);
  xlaw_.resize(static_cast<std::size_t>(nx + 1) * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      for (std::size_t m = 0; m < terms; ++m) {
        const Field& a = coefs[m];
        if (i == 0) vals[m] = extrapolate_to_face(a(0, j), a(1, j));
        else if (i == nx) vals[m] = extrapolate_to_face(a(nx - 1, j), a(nx - 2, j));
        else vals[m] = 0.5 * (a(i - 1, j) + a(i, j));
      }
      xlaw_[static_cast<std::size_t>(j) * (nx + 1) + i] = sc.law.with_coefficients(vals.data());
    }
  ylaw_.resize(static_cast<std::size_t>(nx) * (ny + 1));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i < nx; ++i) {
      for (std::size_t m = 0; m < terms; ++m) {
        const Field& a = coefs[m];
        if (j == 0) vals[m] = extrapolate_to_face(a(i, 0), a(i, 1));
        else if (j == ny) vals[m] = extrapolate_to_face(a(i, ny - 1), a(i, ny - 2));
        else vals[m] = 0.5 * (a(i, j - 1) + a(i, j));
      }
      ylaw_[static_cast<std::size_t>(j) * nx + i] = sc.law.with_coefficients(vals.data());
    }
}

Padded Stepper::with_ghosts(const Field& p, double t) const {
  const Grid2D& g = sc_.grid;
  const BoundaryData& b = sc_.boundary;
  const double xl = g.x0, xr = g.x0 + g.lx(), yb = g.y0, yt = g.y0 + g.ly();
  Padded P(g);
  P.fill_interior(p);
  for (int j = 0; j < g.ny; ++j) {
    const double y = g.yc(j);
    P(-1, j) = 2.0 * b.value(xl, y, t) - p(0, j);
    P(g.nx, j) = 2.0 * b.value(xr, y, t) - p(g.nx - 1, j);
  }
  for (int i = 0; i < g.nx; ++i) {
    const double x = g.xc(i);
    P(i, -1) = 2.0 * b.value(x, yb, t) - p(i, 0);
    P(i, g.ny) = 2.0 * b.value(x, yt, t) - p(i, g.ny - 1);
  }
  P.fill_corners();
  return P;
}

Field Stepper::gradient_norm(const Field& p, double t) const {
  return cell_gradient_norm(face_gradients(with_ghosts(p, t)));
}

Field Stepper::step(const Field& pn, double t, StepStats* stats) const {
  const Grid2D& g = sc_.grid;
  const int nx = g.nx, ny = g.ny;
  const double t1 = t + sc_.dt;
  const double A = g.cell_area();
  const BoundaryData& bd = sc_.boundary;
  const double xl = g.x0, xr = g.x0 + g.lx(), yb = g.y0, yt = g.y0 + g.ly();

  // Boundary values at the new time level, one per boundary face.
  std::vector<double> psi_l(ny), psi_r(ny), psi_b(nx), psi_t(nx);
  double psi_max = 0.0;
  for (int j = 0; j < ny; ++j) {
    psi_l[j] = bd.value(xl, g.yc(j), t1);
    psi_r[j] = bd.value(xr, g.yc(j), t1);
    psi_max = std::max({psi_max, std::abs(psi_l[j]), std::abs(psi_r[j])});
  }
  for (int i = 0; i < nx; ++i) {
    psi_b[i] = bd.value(g.xc(i), yb, t1);
    psi_t[i] = bd.value(g.xc(i), yt, t1);
    psi_max = std::max({psi_max, std::abs(psi_b[i]), std::abs(psi_t[i])});
  }

  std::vector<double> base(g.cells());
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const std::size_t c = g.index(i, j);
      base[c] = sc_.phi[c] * A / sc_.dt * pn[c];
      if (sc_.source) base[c] += A * sc_.source(g.xc(i), g.yc(j), t1);
    }

  StencilMatrix M(g);
  std::vector<double> rhs(g.cells());
  std::vector<double> x = pn.values();
  std::vector<double> updates;
  int cg_total = 0;
  Field pk = pn;
  bool converged = false;
  const bool linear = sc_.law.is_darcy();
  int iter = 0;
  for (; iter < sc_.picard_max; ++iter) {
    const FaceGradients fg = face_gradients(with_ghosts(pk, t1));
    rhs = base;
    for (std::size_t c = 0; c < g.cells(); ++c) M.diag[c] = sc_.phi[c] * A / sc_.dt;
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i <= nx; ++i) {
        const std::size_t f = fg.xf(i, j);
        const double K = xlaw_[f].K(std::hypot(fg.xface_dx[f], fg.xface_dy[f]));
        if (i == 0 || i == nx) {
          const double T = K * g.dy / (0.5 * g.dx);
          const std::size_t c = g.index(i == 0 ? 0 : nx - 1, j);
          M.diag[c] += T;
          rhs[c] += T * (i == 0 ? psi_l[j] : psi_r[j]);
          M.tx[f] = T;
        } else {
          const double T = K * g.dy / g.dx;
          M.tx[f] = T;
          M.diag[g.index(i - 1, j)] += T;
          M.diag[g.index(i, j)] += T;
        }
      }
    for (int j = 0; j <= ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const std::size_t f = fg.yf(i, j);
        const double K = ylaw_[f].K(std::hypot(fg.yface_dx[f], fg.yface_dy[f]));
        if (j == 0 || j == ny) {
          const double T = K * g.dx / (0.5 * g.dy);
          const std::size_t c = g.index(i, j == 0 ? 0 : ny - 1);
          M.diag[c] += T;
          rhs[c] += T * (j == 0 ? psi_b[i] : psi_t[i]);
          M.ty[f] = T;
        } else {
          const double T = K * g.dx / g.dy;
          M.ty[f] = T;
          M.diag[g.index(i, j - 1)] += T;
          M.diag[g.index(i, j)] += T;
        }
      }
    x = pk.values();
    const CgResult cr = conjugate_gradient(M, rhs, x, sc_.cg_tol, sc_.cg_max);
    cg_total += cr.iterations;
    double delta = 0.0, scale = 0.0;
    for (std::size_t c = 0; c < x.size(); ++c) {
      delta = std::max(delta, std::abs(x[c] - pk[c]));
      scale = std::max(scale, std::abs(x[c]));
      pk[c] = x[c];
    }
    updates.push_back(delta);
    if (linear || delta <= sc_.picard_tol * std::max(scale, 1e-300)) {
      converged = true;
      ++iter;
      break;
    }
  }
  if (!converged) throw NumericError("Picard iteration did not converge at t=" + std::to_string(t1), updates);

  if (stats) {
    stats->picard_iterations = iter;
    stats->cg_iterations = cg_total;
    stats->picard_updates = updates;
    if (!sc_.source) {
      const double before = std::max(pn.max_abs(), psi_max);
      const double after = pk.max_abs();
      stats->max_principle = before > 0.0 ? (before - after) / before : (after == 0.0 ? 0.0 : -1.0);

      // Storage change against net boundary inflow, both through the last assembled matrix.
      std::vector<double> storage(g.cells()), inflow, magnitude(g.cells());
      for (std::size_t c = 0; c < g.cells(); ++c) {
        storage[c] = sc_.phi[c] * A / sc_.dt * (pk[c] - pn[c]);
        magnitude[c] = sc_.phi[c] * A / sc_.dt * (std::abs(pk[c]) + std::abs(pn[c]));
      }
      for (int j = 0; j < ny; ++j) {
        const double Tl = M.tx[static_cast<std::size_t>(j) * (nx + 1)];
        const double Tr = M.tx[static_cast<std::size_t>(j) * (nx + 1) + nx];
        inflow.push_back(Tl * (psi_l[j] - pk(0, j)));
        inflow.push_back(Tr * (psi_r[j] - pk(nx - 1, j)));
        magnitude.push_back(Tl * (std::abs(psi_l[j]) + std::abs(pk(0, j))));
        magnitude.push_back(Tr * (std::abs(psi_r[j]) + std::abs(pk(nx - 1, j))));
      }
      for (int i = 0; i < nx; ++i) {
        const double Tb = M.ty[static_cast<std::size_t>(i)];
        const double Tt = M.ty[static_cast<std::size_t>(ny) * nx + i];
        inflow.push_back(Tb * (psi_b[i] - pk(i, 0)));
        inflow.push_back(Tt * (psi_t[i] - pk(i, ny - 1)));
        magnitude.push_back(Tb * (std::abs(psi_b[i]) + std::abs(pk(i, 0))));
        magnitude.push_back(Tt * (std::abs(psi_t[i]) + std::abs(pk(i, ny - 1))));
      }
      const double defect = pairwise_sum(storage) - pairwise_sum(inflow);
      const double mag = pairwise_sum(magnitude);
      stats->conservation = mag > 0.0 ? std::abs(defect) / mag : 0.0;

      if (bd.is_zero()) {
        double e0 = 0.0, e1 = 0.0;
        for (std::size_t c = 0; c < g.cells(); ++c) {
          e0 += sc_.phi[c] * pn[c] * pn[c];
          e1 += sc_.phi[c] * pk[c] * pk[c];
        }
        stats->energy = e0 > 0.0 ? (e0 - e1) / e0 : (e1 == 0.0 ? 0.0 : -1.0);
      }
    }
  }
  return pk;
}

void derive_fields(const Scenario& sc, RunResult& r) {
  const Grid2D& g = sc.grid;
  const auto& times = r.p.times();
  std::vector<Field> pbar;
  pbar.reserve(times.size());
  for (std::size_t k = 0; k < times.size(); ++k) {
    Field f = r.p.frame(k);
    const Field psi = sc.boundary.sample(g, times[k]);
    for (std::size_t c = 0; c < f.size(); ++c) f[c] -= psi[c];
    pbar.push_back(std::move(f));
  }
  std::vector<Field> pt;
  pt.reserve(times.size());
  const std::size_t n = times.size();
  for (std::size_t k = 0; k < n; ++k) {
    Field d(g, 0.0);
    if (n > 1) {
      const std::size_t lo = k == 0 ? 0 : k - 1;
      const std::size_t hi = k + 1 == n ? n - 1 : k + 1;
      const double h = times[hi] - times[lo];
      for (std::size_t c = 0; c < d.size(); ++c) d[c] = (pbar[hi][c] - pbar[lo][c]) / h;
    }
    pt.push_back(std::move(d));
  }
  r.pbar = SpaceTimeField(g, times, std::move(pbar));
  r.pbar_t = SpaceTimeField(g, times, std::move(pt));
}

RunResult run(const Scenario& sc) {
  sc.validate();
  const Stepper st(sc);
  const int nsteps = sc.steps();
  std::vector<double> times{0.0};
  std::vector<Field> frames{sc.p0};
  std::vector<Field> grads{st.gradient_norm(sc.p0, 0.0)};
  RunResult r;
  InvariantSummary& inv = r.invariants;
  inv.worst_max_principle = inv.worst_energy = 1e300;
  Field p = sc.p0;
  const bool check_energy = sc.boundary.is_zero() && !sc.source;
  try {
    for (int n = 1; n <= nsteps; ++n) {
      const double t = (n - 1) * sc.dt;
      StepStats s;
      p = st.step(p, t, &s);
      r.steps_done = n;
      r.max_picard = std::max(r.max_picard, s.picard_iterations);
      r.total_cg += s.cg_iterations;
      if (!sc.source) {
        inv.checked_max_principle = inv.checked_conservation = true;
        inv.worst_max_principle = std::min(inv.worst_max_principle, s.max_principle);
        inv.worst_conservation = std::max(inv.worst_conservation, s.conservation);
        if (s.max_principle < -1e-9) inv.max_principle_ok = false;
        if (s.conservation > 1e-9) inv.conservation_ok = false;
        if (check_energy) {
          inv.checked_energy = true;
          inv.worst_energy = std::min(inv.worst_energy, s.energy);
          if (s.energy < -1e-9) inv.energy_ok = false;
        }
      }
      if (n % sc.snapshot_every == 0 || n == nsteps) {
        const double tn = n * sc.dt;
        times.push_back(tn);
        frames.push_back(p);
        grads.push_back(st.gradient_norm(p, tn));
      }
    }
    r.complete = true;
  } catch (const NumericError& e) {
    r.error = e.what();
    r.error_residuals = e.residuals();
  }
  if (!inv.checked_max_principle) inv.worst_max_principle = 0.0;
  if (!inv.checked_energy) inv.worst_energy = 0.0;
  r.p = SpaceTimeField(sc.grid, times, std::move(frames));
  r.grad_p = SpaceTimeField(sc.grid, times, std::move(grads));
  derive_fields(sc, r);
  return r;
}

}  // namespace forch
