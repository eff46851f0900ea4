#pragma once

// Generalized Forchheimer law g(x, s) = sum_i a_i(x) s^alpha_i, its inversion
// s g(x, s) = xi, the mobility K(x, xi) = 1 / g(x, s(x, xi)), the weight
// fields that sandwich K, and the degree admissibility test.

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "forch/grid.hpp"

namespace forch {

inline constexpr int kMaxTerms = 8;

/// The law frozen at one point: exponents and coefficient values.
struct LocalLaw {
  int terms = 0;
  std::array<double, kMaxTerms> alpha{};
  std::array<double, kMaxTerms> coef{};

  double g(double s) const;
  /// d/ds g.
  double dg(double s) const;
  /// Unique s >= 0 with s g(s) = xi. Throws NumericError if Newton stalls.
  double solve_s(double xi) const;
  double K(double xi) const;
  /// xi * dK/dxi, analytic.
  double xi_dK(double xi) const;
  /// Integral of K(sqrt(sigma)) for sigma in [0, xi^2], adaptive quadrature.
  double H(double xi, double rel_tol = 1e-8) const;
  /// Same integral in closed form through the substitution u = s g(s).
  double H_closed(double xi) const;
};

class ForchheimerLaw {
public:
  ForchheimerLaw() = default;
  /// Throws ValidationError naming the field at fault.
  ForchheimerLaw(std::vector<double> exponents, std::vector<Field> coefficients);
  /// One-term law g = a0(x), used for manufactured and heat-equation checks only.
  static ForchheimerLaw darcy(Field a0);

  bool is_darcy() const { return darcy_; }
  /// Index of the top term; 0 for the Darcy form.
  int N() const { return static_cast<int>(exponents_.size()) - 1; }
  const Grid2D& grid() const { return coefs_.front().grid(); }
  const std::vector<double>& exponents() const { return exponents_; }
  const std::vector<Field>& coefficients() const { return coefs_; }
  const Field& a0() const { return coefs_.front(); }
  const Field& aN() const { return coefs_.back(); }
  /// alpha_N / (alpha_N + 1).
  double a() const;

  LocalLaw at(std::size_t cell) const;
  /// Law with the given coefficient values and this law's exponents.
  LocalLaw with_coefficients(const double* values) const;

  double g(std::size_t cell, double s) const;
  double solve_s(std::size_t cell, double xi) const;
  double K(std::size_t cell, double xi) const;

private:
  std::vector<double> exponents_;
  std::vector<Field> coefs_;
  bool darcy_ = false;
};

/// Coefficient-derived weights. In the Darcy form M = m = a0, W1 = 1/(2 a0), W2 = 1/a0, a = 0.
struct WeightSet {
  Field M, m, W1, W2;
  double a = 0.0;
};

WeightSet build_weights(const ForchheimerLaw& law);

/// Strict degree condition: alpha_N < 4/(n-2), vacuous when n = 2.
bool check_sdc(const ForchheimerLaw& law, int n);
bool check_sdc(double top_exponent, int n);

struct ConstitutiveCheck {
  std::size_t samples = 0;
  // Worst relative margins (RHS - LHS) / scale; negative means violated.
  double lower_sandwich = 1e300;     // 2 W1/(xi^a + aN^a) <= K
  double upper_sandwich = 1e300;     // K <= W2 xi^-a
  double lower_quadratic = 1e300;    // W1 xi^(2-a) - aN/2 <= K xi^2
  double upper_quadratic = 1e300;    // K xi^2 <= W2 xi^(2-a)
  double derivative = 1e300;         // -a K <= xi K' <= 0, by central differences
  double weight_product = 1e300;     // W1 aN^(2-a) <= aN/2
  double max_residual = 0.0;         // |s g(s) - xi| / (1 + xi)
  bool monotone = true;              // s increasing, K non-increasing along the sample
  std::size_t worst_cell = 0;
  double worst_xi = 0.0;
  std::string worst_check;
  bool pass = false;
};

/// Evaluates every sandwich and derivative bound at each (cell, xi) pair.
ConstitutiveCheck verify_constitutive_bounds(const ForchheimerLaw& law, const WeightSet& w,
                                             const std::vector<std::size_t>& cells,
                                             const std::vector<double>& xis, double slack = 1e-9);

}  // namespace forch
