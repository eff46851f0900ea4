#include "forch/norms.hpp"

#include <algorithm>
#include <cmath>

#include "forch/error.hpp"

namespace forch {

double pairwise_sum(const double* x, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += x[k];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

double pairwise_sum(const std::vector<double>& x) { return pairwise_sum(x.data(), x.size()); }

void require_positive_weight(const Field& w) {
  for (std::size_t k = 0; k < w.size(); ++k)
    if (!(w[k] > 0.0) || !std::isfinite(w[k]))
      throw DomainError("weight must be positive at every cell (cell " + std::to_string(k) + ")");
}

double integrate(const Field& u) { return pairwise_sum(u.values()) * u.grid().cell_area(); }

double integrate(const Field& u, const Field& w) {
  std::vector<double> t(u.size());
  for (std::size_t k = 0; k < t.size(); ++k) t[k] = u[k] * w[k];
  return pairwise_sum(t) * u.grid().cell_area();
}

namespace {

double powered_sum(const Field& u, const Field& w, double p) {
  std::vector<double> t(u.size());
  if (p == 2.0) {
    for (std::size_t k = 0; k < t.size(); ++k) t[k] = u[k] * u[k] * w[k];
  } else if (p == 1.0) {
    for (std::size_t k = 0; k < t.size(); ++k) t[k] = std::abs(u[k]) * w[k];
  } else {
    for (std::size_t k = 0; k < t.size(); ++k) t[k] = std::pow(std::abs(u[k]), p) * w[k];
  }
  return pairwise_sum(t) * u.grid().cell_area();
}

void check_p(double p) {
  if (!(p >= 1.0)) throw DomainError("norm exponent must be >= 1");
}

}  // namespace

double norm_space(const Field& u, const Field& w, double p) {
  check_p(p);
  require_positive_weight(w);
  if (std::isinf(p)) return u.max_abs();
  return std::pow(powered_sum(u, w, p), 1.0 / p);
}

double norm_space(const Field& u, double p) { return norm_space(u, Field(u.grid(), 1.0), p); }

double trapezoid(const std::vector<double>& t, const std::vector<double>& f) {
  std::vector<double> parts;
  parts.reserve(t.size());
  for (std::size_t k = 1; k < t.size(); ++k) parts.push_back(0.5 * (t[k] - t[k - 1]) * (f[k] + f[k - 1]));
  return pairwise_sum(parts);
}

double interpolate(const std::vector<double>& t, const std::vector<double>& f, double s) {
  if (t.empty()) throw DomainError("interpolate: no samples");
  if (s <= t.front()) return f.front();
  if (s >= t.back()) return f.back();
  const auto it = std::upper_bound(t.begin(), t.end(), s);
  const std::size_t k = static_cast<std::size_t>(it - t.begin());
  const double w = (s - t[k - 1]) / (t[k] - t[k - 1]);
  return (1.0 - w) * f[k - 1] + w * f[k];
}

double trapezoid_window(const std::vector<double>& t, const std::vector<double>& f, double s, double e) {
  if (t.empty()) return 0.0;
  s = std::max(s, t.front());
  e = std::min(e, t.back());
  if (!(e > s)) return 0.0;
  std::vector<double> tt{s}, ff{interpolate(t, f, s)};
  for (std::size_t k = 0; k < t.size(); ++k)
    if (t[k] > s && t[k] < e) {
      tt.push_back(t[k]);
      ff.push_back(f[k]);
    }
  tt.push_back(e);
  ff.push_back(interpolate(t, f, e));
  return trapezoid(tt, ff);
}

double norm_spacetime(const SpaceTimeField& u, const Field& w, double p) {
  check_p(p);
  require_positive_weight(w);
  if (u.steps() == 0) throw DomainError("space-time norm of an empty field");
  if (std::isinf(p)) {
    double m = 0.0;
    for (const auto& f : u.frames()) m = std::max(m, f.max_abs());
    return m;
  }
  std::vector<double> s(u.steps());
  for (std::size_t k = 0; k < s.size(); ++k) s[k] = powered_sum(u.frame(k), w, p);
  return std::pow(trapezoid(u.times(), s), 1.0 / p);
}

double norm_spacetime(const SpaceTimeField& u, const SpaceTimeField& w, double p) {
  check_p(p);
  if (u.steps() == 0) throw DomainError("space-time norm of an empty field");
  if (w.times() != u.times()) throw DomainError("space-time weight must share the sample times");
  for (const auto& f : w.frames()) require_positive_weight(f);
  if (std::isinf(p)) {
    double m = 0.0;
    for (const auto& f : u.frames()) m = std::max(m, f.max_abs());
    return m;
  }
  std::vector<double> s(u.steps());
  for (std::size_t k = 0; k < s.size(); ++k) s[k] = powered_sum(u.frame(k), w.frame(k), p);
  return std::pow(trapezoid(u.times(), s), 1.0 / p);
}

double ess_sup_time(const SpaceTimeField& u, const std::function<double(const Field&)>& reduce) {
  if (u.steps() == 0) throw DomainError("ess sup over an empty time set");
  double m = -kInf;
  for (const auto& f : u.frames()) m = std::max(m, reduce(f));
  return m;
}

}  // namespace forch
