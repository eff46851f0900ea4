#include <cmath>
#include <limits>

#include "doctest.h"
#include "forch/bounds.hpp"
#include "forch/error.hpp"
#include "forch/rng.hpp"
#include "support.hpp"

using namespace forch;

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Fixture {
  Scenario sc;
  RunResult run;
  explicit Fixture(const std::string& toml) : sc(testing::scenario_from(toml)), run(forch::run(sc)) {
    REQUIRE(run.complete);
  }
};

std::string toml(const std::string& coefs, const std::string& psi, const std::string& initial,
                 const std::string& phi = "1", int nx = 16, double T = 2.0, double dt = 0.05) {
  return "[grid]\nnx = " + std::to_string(nx) + "\n[law]\nexponents = [0, 1]\ncoefficients = " + coefs +
         "\n[porosity]\nphi = " + phi + "\n[boundary]\npsi = " + psi + "\ninitial = " + initial +
         "\n[time]\nT = " + std::to_string(T) + "\ndt = " + std::to_string(dt) + "\n";
}

BoundsConfig quick_cfg() {
  BoundsConfig c;
  c.corpus_size = 6;
  c.window = 1.0;
  return c;
}

}  // namespace

TEST_SUITE("bounds") {
  TEST_CASE("exponent spot values") {
    const ExponentPack p = ExponentPack::make(0.5, 4.0, kNaN, 4.0);
    CHECK(std::abs(p.r0 - 2.75) < 1e-12);
    CHECK(std::abs(p.kappa1 - 11.0 / 3.0) < 1e-12);
    CHECK(std::abs(p.nu2 - 20.0 / 9.0) < 1e-12);
    CHECK(std::abs(p.delta1 - 1.0 / 3.0) < 1e-12);
    CHECK(std::abs(p.delta2 - 1.0 / 12.0) < 1e-12);
    CHECK(std::abs(p.kappa4 - 5.0 / 6.0) < 1e-12);
    CHECK(std::abs(p.kappa5 - (p.kappa4 - 0.5)) < 1e-15);
    CHECK(std::abs(p.r1 - (1.0 + p.r0 / 2.0) / 2.0) < 1e-15);
    CHECK(std::abs(ExponentPack::make(0.5, 4.0).r2 - 6.0) < 1e-12);
  }

  TEST_CASE("randomized admissible packs keep signs and orderings") {
    Rng rng(17);
    for (int trial = 0; trial < 2000; ++trial) {
      const double a = rng.uniform(0.0, 0.95);
      const double r = rng.uniform(2.05, 40.0);
      const double r0 = 2.0 + (2.0 - a) * (1.0 - 2.0 / r);
      const double r1 = rng.uniform(1.0, r0 / 2.0);
      const double r2 = 2.0 * (r - 1.0) / (r - 2.0) * rng.uniform(1.001, 3.0);
      if (!(r1 > 1.0)) continue;
      const ExponentPack p = ExponentPack::make(a, r, r1, r2);
      CAPTURE(a);
      CAPTURE(r);
      CHECK(p.signs_hold());
      CHECK(p.ordering_chains_hold());
      CHECK(p.kappa3 > 0.0);
    }
  }

  TEST_CASE("inadmissible exponents are rejected") {
    CHECK_THROWS_AS(ExponentPack::make(0.5, 2.0).validate(), ValidationError);
    CHECK_THROWS_AS(ExponentPack::make(0.5, 4.0, 2.0).validate(), ValidationError);
    CHECK_THROWS_AS(ExponentPack::make(0.5, 4.0, kNaN, 3.0).validate(), ValidationError);
  }

  TEST_CASE("H examples") {
    const Grid2D g = Grid2D::box(2, 2);
    const ForchheimerLaw darcy = ForchheimerLaw::darcy(Field(g, 1.0));
    CHECK(compute_H(darcy, 0, 0.0) == 0.0);
    CHECK(compute_H(darcy, 1, 3.0) == doctest::Approx(9.0).epsilon(1e-10));
    const ForchheimerLaw lin({0.0, 1.0}, {Field(g, 1.0), Field(g, 1.0)});
    const double U = 3.0;  // sqrt(1 + 4*2)
    CHECK(compute_H(lin, 2, 2.0) == doctest::Approx(U * U * U / 6 - U * U / 4 + 1.0 / 12).epsilon(1e-8));
  }

  TEST_CASE("H sandwich on random laws") {
    const Grid2D g = Grid2D::box(3, 3);
    Rng rng(4);
    for (int trial = 0; trial < 40; ++trial) {
      const double a0 = rng.log_uniform(0.1, 10), a1 = rng.log_uniform(0.1, 10), al = rng.uniform(0.2, 3);
      const ForchheimerLaw law({0.0, al}, {Field(g, a0), Field(g, a1)});
      for (double xi : {1e-4, 0.3, 5.0, 800.0}) {
        const double H = compute_H(law, 0, xi);
        CHECK(law.K(0, xi) * xi * xi <= H * (1 + 1e-10));
        CHECK(H <= xi * xi / a0 * (1 + 1e-10));
      }
    }
  }

  TEST_CASE("zero data: data functionals collapse and every left side vanishes") {
    Fixture f(toml("[1, 1]", "0", "0"));
    BoundsContext ctx(f.sc, f.run, quick_cfg());
    const DataFunctionals& d = ctx.data();
    CHECK(d.B1 == doctest::Approx(1.0));
    CHECK(d.Bstar == doctest::Approx(1.0));
    for (double G : d.G) CHECK(G == doctest::Approx(1.0).epsilon(1e-14));
    for (double G1 : d.G1) CHECK(G1 == 0.0);
    CHECK(ctx.N1(0.0, 1.0) == doctest::Approx(1.0));
    CHECK(ctx.N2(0.0, 1.0) == doctest::Approx(1.0));
    CHECK(ctx.Z(0.0, 1.0) == 0.0);
    const double r1p = ctx.pack().r1p;
    CHECK(ctx.omega(0.5, 1.0) == doctest::Approx(1.0 * std::pow(1.0, r1p)));
    const BoundReport rep = ctx.evaluate();
    CHECK(rep.entries.size() == 17);
    for (const BoundSeries& s : rep.entries) {
      CAPTURE(s.id);
      CHECK(s.finite);
      CHECK(s.c_fit == 0.0);
      for (double l : s.lhs) CHECK(l == 0.0);
    }
  }

  TEST_CASE("N1 and omega with a constant top coefficient") {
    Fixture f(toml("[1, 2]", "0", "0"));
    BoundsContext ctx(f.sc, f.run, quick_cfg());
    const double r1p = ctx.pack().r1p;
    CHECK(ctx.N1(0.0, 1.5) == doctest::Approx(std::pow(2.0, r1p)).epsilon(1e-13));
    CHECK(ctx.omega(0.0, 1.5) == doctest::Approx(1.5 * std::pow(2.0, r1p)).epsilon(1e-13));
    CHECK(ctx.data().B1 == doctest::Approx(2.0));
  }

  TEST_CASE("steady pressure: S from B1 and vanishing rate") {
    Fixture f(toml("[1, 3]", "2.5", "\"psi\""));
    BoundsContext ctx(f.sc, f.run, quick_cfg());
    const double a = ctx.weights().a, rp = ctx.pack().rp;
    CHECK(ctx.S(0.0, 2.0, 0.5) == doctest::Approx(std::pow(3.0, a * rp / (4 * (2 - a)))).epsilon(1e-12));
    const BoundReport rep = ctx.evaluate();
    for (const char* id : {"pt_linf_local", "pt_linf_small_time", "pt_linf_large_time"})
      for (double l : rep.find(id)->lhs) CHECK(l <= 1e-10);
  }

  TEST_CASE("linear extension: data functionals against hand integrals") {
    const double eps = 0.3;
    Fixture f(toml("[1, 1]", "\"0.3*t*x\"", "\"psi\"", "1", 20));
    BoundsContext ctx(f.sc, f.run, quick_cfg());
    const double dx = f.sc.grid.dx;
    const double ix2 = 1.0 / 3.0 - dx * dx / 12.0;  // midpoint rule for int x^2 is exact up to this term
    for (double t : {0.0, 0.5, 1.7}) {
      const double g = eps * t;
      const double expect = 1.0 + g * g + 0.5 * std::pow(g, 1.5) + std::pow(eps * eps * ix2, 1.5);
      CAPTURE(t);
      CHECK(ctx.G(t) == doctest::Approx(expect).epsilon(1e-12));
      CHECK(ctx.G1(t) == doctest::Approx(eps * eps).epsilon(1e-12));
    }
    CHECK(ctx.int_G1(0.0, 2.0) == doctest::Approx(2 * eps * eps).epsilon(1e-12));
  }

  TEST_CASE("majorant is monotone and dominates") {
    Fixture f(toml("[\"1 + 0.5*sin(2*pi*x)\", \"0.5 + y\"]", "\"0.4*cos(2*t)*(x - y)\"", "0", "\"0.5 + 0.2*x\"", 16,
                   3.0, 0.05));
    BoundsContext ctx(f.sc, f.run, quick_cfg());
    const DataFunctionals& d = ctx.data();
    for (std::size_t k = 0; k < d.t.size(); ++k) {
      CHECK(d.M[k] >= d.G[k]);
      CHECK(d.M[k] >= 1.0);
      CHECK(d.M[k] >= d.B1);
      if (k) CHECK(d.M[k] >= d.M[k - 1]);
    }
    CHECK(d.M_at(0.5 * (d.t[3] + d.t[4])) >= d.M[3]);

    // Small-time right side times t^kappa3 shrinks as t decreases.
    const BoundReport rep = ctx.evaluate();
    const BoundSeries* s = rep.find("p_linf_small_time");
    REQUIRE(s);
    REQUIRE(s->t.size() >= 3);
    for (std::size_t k = 1; k < s->t.size(); ++k)
      CHECK(s->rhs[k] * std::pow(s->t[k], ctx.pack().kappa3) >=
            s->rhs[k - 1] * std::pow(s->t[k - 1], ctx.pack().kappa3) * (1 - 1e-12));
    for (const BoundSeries& e : rep.entries) {
      CAPTURE(e.id);
      CHECK(e.finite);
      for (std::size_t k = 0; k < e.t.size(); ++k) CHECK(e.rhs[k] > 0.0);
    }
  }

  TEST_CASE("Darcy decay: finite ratios and energy below its initial value") {
    Fixture f(R"toml(
[grid]
nx = 24
[law]
exponents = [0]
coefficients = [1]
[boundary]
psi = 0
initial = "sin(pi*x)*sin(pi*y)"
[time]
T = 0.2
dt = 0.002
snapshot_every = 5
)toml");
    BoundsContext ctx(f.sc, f.run, quick_cfg());
    const BoundReport rep = ctx.evaluate();
    for (const BoundSeries& e : rep.entries) CHECK(e.finite);
    const BoundSeries* l2 = rep.find("l2_energy");
    REQUIRE(l2);
    CHECK(l2->c_fit <= 1.0);
    CHECK(l2->c_fit > 0.0);
  }

  TEST_CASE("series verdicts") {
    BoundSeries s;
    s.t = {0.1, 0.5, 1.0, 2.0, 3.0, 4.0};
    s.lhs = {0.0, 1.0, 1.0, 1.0, 1.0, 1.0};
    s.rhs = {1.0, 100.0, 2.0, 2.0, 4.0, 4.0};
    s.ratio = {0.0, 0.01, 0.5, 0.5, 0.25, 0.25};
    finalize_series(s);
    CHECK(s.c_fit == 0.5);
    CHECK(s.bounded);

    s.ratio = {0.0, 0.0, 0.01, 0.1, 1.0, 10.0};
    finalize_series(s);
    CHECK_FALSE(s.bounded);

    // Rise before t = 1 is not growth.
    s.ratio = {0.0, 0.001, 1.0, 1.0, 1.0, 1.0};
    finalize_series(s);
    CHECK(s.bounded);

    s.rhs[3] = std::numeric_limits<double>::infinity();
    s.ratio[3] = 0.0;
    finalize_series(s);
    CHECK_FALSE(s.finite);
    CHECK_FALSE(s.bounded);
  }
}
