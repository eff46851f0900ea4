#pragma once

// Numerical checks of the weighted Poincare-Sobolev chain, its parabolic
// interpolation forms, the fast geometric recurrence, and the decay lemma.

#include <cstdint>
#include <string>
#include <vector>

#include "forch/constitutive.hpp"
#include "forch/grid.hpp"

namespace forch {

/// A smooth function vanishing on the boundary, with its gradient sampled at cell centers.
struct TestFunction {
  std::string kind;  // "sine", "bump" or "combo"
  Field value, dx, dy;
  Field gradient_norm() const;
};

/// Sine modes (k <= 4), mollified bumps at random interior centers, and random
/// combinations of those. Deterministic in the seed.
std::vector<TestFunction> sobolev_corpus(const Grid2D& g, std::size_t count, std::uint64_t seed);

/// n q / (n - q), or `cap` when q >= n or the value exceeds it.
double sobolev_conjugate(double q, int n, double cap = 64.0);

/// Largest quotient |f|_{q*} / |grad f|_q over the corpus (unweighted, n = 2).
double estimate_c_empirical(const std::vector<TestFunction>& corpus, double q, double cap = 64.0);

struct PSConfig {
  double r = 0.0;
  double q = 0.0;
  double q0 = 0.0;
  int n = 2;
  Field gamma1, gamma2;
  double c = 0.0;          // unweighted Sobolev constant for exponent q0
  double qstar_cap = 64.0;

  /// Throws ValidationError on r <= 2, q0 outside [1, q), or r >= q0*.
  void validate() const;
};

/// Admissible defaults: r at the middle of (2, q*), q0 at the middle of
/// (max(1, n r/(n + r)), q) so that r < q0* < q*.
PSConfig default_ps_config(double q, int n, Field gamma1, Field gamma2, double c, double cap = 64.0);

/// Two-weight constant from the Holder chain. Throws ValidationError("admissibility", ...)
/// when either weight integral overflows.
double estimate_c0_formula(const PSConfig& cfg);

struct InterpolationMargin {
  double p = 0.0;
  double lhs = 0.0;
  double rhs_product = 0.0;  // c0^(q/p) sup^(1-q/p) grad^(q/p)
  double rhs_sum = 0.0;      // c0^(q/p) (sup + grad)
  double margin_product = 0.0;  // relative (rhs - lhs) / rhs, 0 when both vanish
  double margin_sum = 0.0;
};

/// Space-time interpolation with p = 2 + q(1 - 2/r). `grad` is |grad u| per frame.
InterpolationMargin verify_parabolic_interpolation(const SpaceTimeField& u, const SpaceTimeField& grad,
                                                   const Field& gamma1, const Field& gamma2, double r,
                                                   double q, double c0);

struct CorollaryMargin {
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
};

/// Norm of u in L^{4/r'}_phi against the bracket built from int a_N, W1 f^(2-a) on supp u,
/// and the K(x, f) weighted gradient energy.
CorollaryMargin verify_corollary_K(const SpaceTimeField& u, const SpaceTimeField& grad, const SpaceTimeField& f,
                                   const ForchheimerLaw& law, const Field& phi, const Field& W1, double c0,
                                   double r);

struct RecurrenceSpec {
  std::vector<double> A;   // A_k > 0
  std::vector<double> mu;  // mu_k > 0
  double B = 2.0;          // > 1
  double Y0 = 0.0;

  void validate() const;
  double mu_min() const;
};

struct RecurrenceTrace {
  std::vector<double> Y;
  bool diverged = false;
};

/// Iterates Y_{i+1} = sum_k A_k B^i Y_i^(1 + mu_k), stopping early once Y < stop_below.
/// At the threshold a one-term recurrence is neutrally balanced, so rounding grows like
/// (1 + mu)^i; stopping at a target keeps long runs from amplifying it.
RecurrenceTrace run_recurrence(const RecurrenceSpec& spec, int steps, double stop_below = 0.0);
/// min_k (m^-1 A_k^-1 B^(-1/mu))^(1/mu_k).
double threshold(const RecurrenceSpec& spec);

struct DecayCheck {
  bool pass = false;
  double T = 0.0;  // detected start time
  double worst_t1 = 0.0, worst_t2 = 0.0;
  double worst_margin = 0.0;  // min over pairs of f(t2) + (t2-t1)(beta+1) - f(t1)
};

/// Detects T as the first sample after which every backward slope has negative part
/// <= beta + 1, then checks f(t1) <= f(t2) + (t2 - t1)(beta + 1) for all later pairs.
DecayCheck check_decay_lemma(const std::vector<double>& t, const std::vector<double>& f, double beta);

}  // namespace forch
