#pragma once

// Weighted Lebesgue norms by grid quadrature: midpoint rule in space,
// trapezoid rule in time. All sums use a fixed pairwise order.

#include <functional>
#include <limits>
#include <vector>

#include "forch/grid.hpp"

namespace forch {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Deterministic pairwise summation.
double pairwise_sum(const double* x, std::size_t n);
double pairwise_sum(const std::vector<double>& x);

/// Throws DomainError unless every cell of w is positive and finite.
void require_positive_weight(const Field& w);

/// Sum of u over cells times the cell area.
double integrate(const Field& u);
/// Sum of u*w over cells times the cell area.
double integrate(const Field& u, const Field& w);

/// (sum |u|^p w dA)^(1/p); p = kInf gives max |u| over the support of w.
double norm_space(const Field& u, const Field& w, double p);
/// Unit weight.
double norm_space(const Field& u, double p);

/// Trapezoid rule over sample times.
double trapezoid(const std::vector<double>& t, const std::vector<double>& f);
/// Trapezoid over [s, e] clipped to the samples, values linearly interpolated at s and e.
double trapezoid_window(const std::vector<double>& t, const std::vector<double>& f, double s, double e);
/// Linear interpolation of samples at time s (clamped).
double interpolate(const std::vector<double>& t, const std::vector<double>& f, double s);

/// Space-time norm with a time-independent weight.
double norm_spacetime(const SpaceTimeField& u, const Field& w, double p);
/// Space-time norm with a weight sampled at the same times.
double norm_spacetime(const SpaceTimeField& u, const SpaceTimeField& w, double p);

/// Max over time samples of a spatial functional.
double ess_sup_time(const SpaceTimeField& u, const std::function<double(const Field&)>& reduce);

}  // namespace forch
