#pragma once

// Data functionals of the boundary extension and the right-hand sides of the
// pressure and pressure-rate maximum bounds, evaluated with unit constants and
// compared against the measured left-hand sides of a run.

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "forch/constitutive.hpp"
#include "forch/solver.hpp"

namespace forch {

struct ExponentPack {
  double a = 0, r = 0, rp = 0;
  double r0 = 0, r1 = 0, r1p = 0, r2 = 0, r2p = 0;
  double kappa1 = 0, kappa2 = 0, kappa3 = 0, kappa4 = 0, kappa5 = 0;
  double nu1 = 0, nu2 = 0, delta1 = 0, delta2 = 0;
  double e1 = 0, e2 = 0, e3 = 0, e4 = 0;

  /// r1 defaults to (1 + r0/2)/2 and r2 to 4(r-1)/(r-2) when passed as NaN.
  static ExponentPack make(double a, double r, double r1 = std::numeric_limits<double>::quiet_NaN(),
                           double r2 = std::numeric_limits<double>::quiet_NaN());
  /// Throws ValidationError unless r > 2, r1 in (1, r0/2), r2 > 2(r-1)/(r-2), a in [0, 1).
  void validate() const;
  /// kappa3 > 0, nu2 >= nu1 > 0, 1 + delta2 > delta1 > 0.
  bool signs_hold() const;
  /// Both power-ordering chains and the comparison of their smallest members.
  bool ordering_chains_hold() const;
};

/// Integral of K(x, sqrt(sigma)) over [0, xi^2] at a cell.
double compute_H(const ForchheimerLaw& law, std::size_t cell, double xi);

struct BoundsConfig {
  double r = std::numeric_limits<double>::quiet_NaN();
  double r1 = std::numeric_limits<double>::quiet_NaN();
  double r2 = std::numeric_limits<double>::quiet_NaN();
  double c2 = std::numeric_limits<double>::quiet_NaN();
  double theta = 0.5;
  double window = 5.0;           // trailing window standing in for limsup
  double sobolev_c = std::numeric_limits<double>::quiet_NaN();
  double safety = 2.0;
  std::uint64_t seed = 7;
  int corpus_size = 24;
  double qstar_cap = 64.0;
};

struct DataFunctionals {
  double B1 = 0.0, Bstar = 0.0;
  std::vector<double> t, G, G1, M, A, B;
  double T_detect = 0.0;
  /// Majorant at any time, linear between samples.
  double M_at(double s) const;
};

struct BoundSeries {
  std::string id;
  std::string description;
  std::vector<double> t, lhs, rhs, ratio;
  double c_fit = 0.0;
  bool finite = true;
  bool bounded = true;
};

struct BoundReport {
  ExponentPack pack;
  double c2 = 0.0;
  double sobolev_c = 0.0;
  double A0 = 0.0;
  DataFunctionals data;
  std::vector<BoundSeries> entries;
  std::vector<std::string> notes;
  const BoundSeries* find(const std::string& id) const;
};

/// Fitted constant and boundedness verdict. Growth is judged on samples with t >= 1:
/// the later half may not exceed ten times the earlier half, and the ratio may not
/// rise strictly throughout by more than a factor ten.
void finalize_series(BoundSeries& s);

/// All bound evaluations for one run. Spatial integrals of the analytic extension
/// are cached per time node.
class BoundsContext {
public:
  BoundsContext(const Scenario& sc, const RunResult& run, const BoundsConfig& cfg);

  const ExponentPack& pack() const { return pack_; }
  const DataFunctionals& data() const { return data_; }
  const WeightSet& weights() const { return w_; }
  double c2() const { return c2_; }
  double sobolev_c() const { return sobolev_c_; }

  double G(double t);
  double G1(double t);
  double int_G1(double s, double t);
  double N1(double s, double t);
  double N2(double s, double t);
  double omega(double T0, double T);
  double S(double T0, double T, double theta);
  double Z(double T0, double T);
  double A0();

  BoundReport evaluate();

private:
  struct PsiIntegrals {
    double G = 0, G1 = 0;
    double n1_grad = 0;  // int (W1 |grad Psi|^(2-a) + |grad Psi|^2/a0)^r1' phi^(1-r1')
    double n1_time = 0;  // int |Psi_t|^(2 r1') phi
    double n2_grad = 0;  // int (a0^(-1/2) |grad Psi_t|)^(2 r2) phi
    double n2_tt = 0;    // int |Psi_tt|^(2 r2) phi
  };
  const PsiIntegrals& at(double tau);
  template <class F>
  double time_integral(double s, double t, F field);

  double sup_abs(const SpaceTimeField& f, double s, double e) const;
  double l2_window(const SpaceTimeField& f, double s, double e) const;
  double w1_grad(std::size_t k) const;
  double l2_sq(const SpaceTimeField& f, std::size_t k) const;

  const Scenario& sc_;
  const RunResult& run_;
  BoundsConfig cfg_;
  WeightSet w_;
  ExponentPack pack_;
  DataFunctionals data_;
  double c2_ = 0.0, sobolev_c_ = 0.0;
  double node_h_ = 0.0;
  double aN_r1 = 0.0;  // int a_N^r1' phi^(1-r1')
  double A0_ = -1.0;
  std::map<double, PsiIntegrals> cache_;
};

}  // namespace forch
