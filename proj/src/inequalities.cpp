#include "forch/inequalities.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "forch/error.hpp"
#include "forch/norms.hpp"
#include "forch/rng.hpp"

namespace forch {

Field TestFunction::gradient_norm() const {
  std::vector<double> v(value.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = std::hypot(dx[k], dy[k]);
  return Field(value.grid(), std::move(v), "gradient");
}

namespace {

constexpr double kPi = std::numbers::pi;

TestFunction sine_mode(const Grid2D& g, int kx, int ky) {
  const double lx = g.lx(), ly = g.ly();
  const double wx = kx * kPi / lx, wy = ky * kPi / ly;
  TestFunction f;
  f.kind = "sine";
  f.value = Field::sample(g, [&](double x, double y) { return std::sin(wx * (x - g.x0)) * std::sin(wy * (y - g.y0)); });
  f.dx = Field::sample(g, [&](double x, double y) { return wx * std::cos(wx * (x - g.x0)) * std::sin(wy * (y - g.y0)); });
  f.dy = Field::sample(g, [&](double x, double y) { return wy * std::sin(wx * (x - g.x0)) * std::cos(wy * (y - g.y0)); });
  return f;
}

TestFunction bump(const Grid2D& g, Rng& rng) {
  const double L = std::min(g.lx(), g.ly());
  const double R = rng.uniform(0.15, 0.45) * L;
  const double cx = g.x0 + rng.uniform(R, g.lx() - R);
  const double cy = g.y0 + rng.uniform(R, g.ly() - R);
  const std::size_t n = g.cells();
  std::vector<double> v(n, 0.0), gx(n, 0.0), gy(n, 0.0);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const double ex = g.xc(i) - cx, ey = g.yc(j) - cy;
      const double rho2 = (ex * ex + ey * ey) / (R * R);
      if (rho2 >= 1.0) continue;
      const double u = std::exp(1.0 - 1.0 / (1.0 - rho2));
      if (u == 0.0) continue;
      const double w = 1.0 - rho2;
      const double factor = -2.0 / (R * R * w * w);
      const std::size_t k = g.index(i, j);
      v[k] = u;
      gx[k] = u * factor * ex;
      gy[k] = u * factor * ey;
    }
  TestFunction f;
  f.kind = "bump";
  f.value = Field(g, std::move(v), "bump");
  f.dx = Field(g, std::move(gx), "bump_dx");
  f.dy = Field(g, std::move(gy), "bump_dy");
  return f;
}

void axpy(double c, const Field& x, Field& y) {
  for (std::size_t k = 0; k < x.size(); ++k) y[k] += c * x[k];
}

}  // namespace

std::vector<TestFunction> sobolev_corpus(const Grid2D& g, std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<TestFunction> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    switch (k % 3) {
      case 0:
        out.push_back(k == 0 ? sine_mode(g, 1, 1) : sine_mode(g, rng.integer(1, 4), rng.integer(1, 4)));
        break;
      case 1:
        out.push_back(bump(g, rng));
        break;
      default: {
        TestFunction c;
        c.kind = "combo";
        c.value = Field(g, 0.0);
        c.dx = Field(g, 0.0);
        c.dy = Field(g, 0.0);
        const int parts = rng.integer(2, 4);
        for (int p = 0; p < parts; ++p) {
          const TestFunction part =
              rng.uniform() < 0.5 ? sine_mode(g, rng.integer(1, 4), rng.integer(1, 4)) : bump(g, rng);
          const double w = rng.normal();
          axpy(w, part.value, c.value);
          axpy(w, part.dx, c.dx);
          axpy(w, part.dy, c.dy);
        }
        out.push_back(std::move(c));
      }
    }
  }
  return out;
}

double sobolev_conjugate(double q, int n, double cap) {
  if (q >= n) return cap;
  return std::min(cap, n * q / (n - q));
}

double estimate_c_empirical(const std::vector<TestFunction>& corpus, double q, double cap) {
  if (!(q >= 1.0 && q < 2.0)) throw DomainError("estimate_c_empirical: need 1 <= q < n = 2");
  const double qs = sobolev_conjugate(q, 2, cap);
  double best = 0.0;
  for (const auto& f : corpus) {
    const double num = norm_space(f.value, qs);
    const double den = norm_space(f.gradient_norm(), q);
    if (den > 0.0) best = std::max(best, num / den);
  }
  return best;
}

void PSConfig::validate() const {
  if (!(r > 2.0)) throw ValidationError("ps.r", "must exceed 2");
  if (!(q >= 1.0 && q < r)) throw ValidationError("ps.q", "need 1 <= q < r");
  if (!(q0 >= 1.0 && q0 < q && q0 < n)) throw ValidationError("ps.q0", "need 1 <= q0 < min(q, n)");
  if (!(r < sobolev_conjugate(q0, n, qstar_cap))) throw ValidationError("ps.r", "must be below q0*");
  if (!(c > 0.0)) throw ValidationError("ps.c", "Sobolev constant must be positive");
}

PSConfig default_ps_config(double q, int n, Field gamma1, Field gamma2, double c, double cap) {
  PSConfig cfg;
  cfg.q = q;
  cfg.n = n;
  cfg.qstar_cap = cap;
  const double qs = sobolev_conjugate(q, n, cap);
  cfg.r = 0.5 * (2.0 + qs);
  const double lo = std::max(1.0, n * cfg.r / (n + cfg.r));
  cfg.q0 = 0.5 * (lo + q);
  cfg.gamma1 = std::move(gamma1);
  cfg.gamma2 = std::move(gamma2);
  cfg.c = c;
  cfg.validate();
  return cfg;
}

double estimate_c0_formula(const PSConfig& cfg) {
  cfg.validate();
  require_positive_weight(cfg.gamma1);
  require_positive_weight(cfg.gamma2);
  const double q = cfg.q, q0 = cfg.q0, r = cfg.r;
  const double q0s = sobolev_conjugate(q0, cfg.n, cfg.qstar_cap);
  const double e2 = -q0 / (q - q0);
  const double e1 = q0s / (q0s - r);
  std::vector<double> t2(cfg.gamma2.size()), t1(cfg.gamma1.size());
  for (std::size_t k = 0; k < t2.size(); ++k) {
    t2[k] = std::pow(cfg.gamma2[k], e2);
    t1[k] = std::pow(cfg.gamma1[k], e1);
    if (!std::isfinite(t2[k]) || !std::isfinite(t1[k]) || t2[k] > 1e308 || t1[k] > 1e308)
      throw ValidationError("admissibility", "weight integral diverges at cell " + std::to_string(k));
  }
  const Grid2D& g = cfg.gamma1.grid();
  const double I2 = pairwise_sum(t2) * g.cell_area();
  const double I1 = pairwise_sum(t1) * g.cell_area();
  if (!std::isfinite(I1) || !std::isfinite(I2))
    throw ValidationError("admissibility", "weight integral overflows");
  return cfg.c * std::pow(I2, (q - q0) / (q * q0)) * std::pow(I1, (q0s - r) / (q0s * r));
}

namespace {

double rel(double lhs, double rhs) {
  if (lhs == 0.0 && rhs == 0.0) return 0.0;
  return (rhs - lhs) / std::max(std::abs(rhs), std::abs(lhs));
}

}  // namespace

InterpolationMargin verify_parabolic_interpolation(const SpaceTimeField& u, const SpaceTimeField& grad,
                                                   const Field& gamma1, const Field& gamma2, double r,
                                                   double q, double c0) {
  if (!(r > 2.0 && r > q && q >= 1.0)) throw DomainError("interpolation: need r > 2, r > q >= 1");
  InterpolationMargin m;
  m.p = 2.0 + q * (1.0 - 2.0 / r);
  m.lhs = norm_spacetime(u, gamma1, m.p);
  const double sup = ess_sup_time(u, [&](const Field& f) { return norm_space(f, gamma1, 2.0); });
  const double gr = norm_spacetime(grad, gamma2, q);
  const double th = q / m.p;
  m.rhs_product = std::pow(c0, th) * std::pow(sup, 1.0 - th) * std::pow(gr, th);
  m.rhs_sum = std::pow(c0, th) * (sup + gr);
  m.margin_product = rel(m.lhs, m.rhs_product);
  m.margin_sum = rel(m.lhs, m.rhs_sum);
  return m;
}

CorollaryMargin verify_corollary_K(const SpaceTimeField& u, const SpaceTimeField& grad, const SpaceTimeField& f,
                                   const ForchheimerLaw& law, const Field& phi, const Field& W1, double c0,
                                   double r) {
  if (!(r > 2.0)) throw DomainError("corollary: need r > 2");
  const double a = law.a();
  const double rp = r / (r - 1.0);
  const double p = 4.0 / rp;
  CorollaryMargin m;
  m.lhs = norm_spacetime(u, phi, p);
  const Grid2D& g = u.grid();
  const double BN = integrate(law.aN());
  double sup_w = 0.0, sup_u = 0.0;
  std::vector<double> energy(u.steps());
  for (std::size_t k = 0; k < u.steps(); ++k) {
    const Field& uk = u.frame(k);
    const Field& fk = f.frame(k);
    const Field& gk = grad.frame(k);
    std::vector<double> w(g.cells()), e(g.cells());
    for (std::size_t c = 0; c < g.cells(); ++c) {
      w[c] = uk[c] != 0.0 ? W1[c] * std::pow(fk[c], 2.0 - a) : 0.0;
      e[c] = law.K(c, fk[c]) * gk[c] * gk[c];
    }
    sup_w = std::max(sup_w, pairwise_sum(w) * g.cell_area());
    energy[k] = pairwise_sum(e) * g.cell_area();
    sup_u = std::max(sup_u, norm_space(uk, phi, 2.0));
  }
  const double E = trapezoid(u.times(), energy);
  m.rhs = std::pow(c0, rp / 2.0) * std::pow(BN + sup_w, a * rp / (4.0 * (2.0 - a))) * (sup_u + std::sqrt(E));
  m.margin = rel(m.lhs, m.rhs);
  return m;
}

void RecurrenceSpec::validate() const {
  if (A.empty() || A.size() != mu.size()) throw ValidationError("recurrence", "need matching non-empty A and mu");
  for (double x : A)
    if (!(x > 0.0)) throw ValidationError("recurrence.A", "must be positive");
  for (double x : mu)
    if (!(x > 0.0)) throw ValidationError("recurrence.mu", "must be positive");
  if (!(B > 1.0)) throw ValidationError("recurrence.B", "must exceed 1");
  if (!(Y0 >= 0.0)) throw ValidationError("recurrence.Y0", "must be non-negative");
}

double RecurrenceSpec::mu_min() const { return *std::min_element(mu.begin(), mu.end()); }

RecurrenceTrace run_recurrence(const RecurrenceSpec& spec, int steps, double stop_below) {
  spec.validate();
  if (steps < 1) throw DomainError("run_recurrence: steps must be >= 1");
  RecurrenceTrace tr;
  tr.Y.push_back(spec.Y0);
  double Bi = 1.0;
  for (int i = 0; i < steps; ++i) {
    const double y = tr.Y.back();
    if (y < stop_below) break;
    double next = 0.0;
    for (std::size_t k = 0; k < spec.A.size(); ++k) next += spec.A[k] * Bi * std::pow(y, 1.0 + spec.mu[k]);
    if (!std::isfinite(next) || next > 1e300) {
      tr.diverged = true;
      break;
    }
    tr.Y.push_back(next);
    Bi *= spec.B;
  }
  return tr;
}

double threshold(const RecurrenceSpec& spec) {
  spec.validate();
  const double m = static_cast<double>(spec.A.size());
  const double mu = spec.mu_min();
  double best = 1e300;
  for (std::size_t k = 0; k < spec.A.size(); ++k)
    best = std::min(best, std::pow(1.0 / (m * spec.A[k] * std::pow(spec.B, 1.0 / mu)), 1.0 / spec.mu[k]));
  return best;
}

DecayCheck check_decay_lemma(const std::vector<double>& t, const std::vector<double>& f, double beta) {
  if (t.size() != f.size()) throw DomainError("decay lemma: size mismatch");
  DecayCheck out;
  if (t.size() < 2) {
    out.pass = true;
    return out;
  }
  const double rate = beta + 1.0;
  std::size_t start = t.size() - 1;
  for (std::size_t k = t.size() - 1; k >= 1; --k) {
    const double slope = (f[k] - f[k - 1]) / (t[k] - t[k - 1]);
    if (std::max(0.0, -slope) > rate) break;
    start = k - 1;
  }
  out.T = t[start];
  // For each t2, the worst t1 maximizes f(t1) + rate t1; track it as a running max.
  double best = -1e300;
  std::size_t arg = start;
  out.worst_margin = 1e300;
  double scale = 0.0;
  for (std::size_t k = start; k < t.size(); ++k) scale = std::max(scale, std::abs(f[k]));
  for (std::size_t k = start; k < t.size(); ++k) {
    if (k > start) {
      const double margin = f[k] + rate * t[k] - best;
      if (margin < out.worst_margin) {
        out.worst_margin = margin;
        out.worst_t1 = t[arg];
        out.worst_t2 = t[k];
      }
    }
    if (f[k] + rate * t[k] > best) {
      best = f[k] + rate * t[k];
      arg = k;
    }
  }
  if (out.worst_margin == 1e300) out.worst_margin = 0.0;
  out.pass = out.worst_margin >= -1e-12 * (1.0 + scale);
  return out;
}

}  // namespace forch
