#include <cmath>

#include "doctest.h"
#include "forch/constitutive.hpp"
#include "forch/error.hpp"
#include "forch/rng.hpp"
#include "support.hpp"

using namespace forch;

namespace {

LocalLaw local(std::initializer_list<double> exps, std::initializer_list<double> coefs) {
  LocalLaw L;
  int i = 0;
  for (double e : exps) L.alpha[i++] = e;
  L.terms = i;
  i = 0;
  for (double c : coefs) L.coef[i++] = c;
  return L;
}

// K for g = 1 + s from the quadratic formula.
double K_linear(double xi) { return 2.0 / (1.0 + std::sqrt(1.0 + 4.0 * xi)); }

ForchheimerLaw uniform_law(const Grid2D& g, std::vector<double> exps, std::vector<double> coefs) {
  std::vector<Field> f;
  for (double c : coefs) f.emplace_back(g, c);
  return ForchheimerLaw(std::move(exps), std::move(f));
}

ForchheimerLaw heterogeneous_law(const Grid2D& g) {
  return ForchheimerLaw({0.0, 0.5, 1.0}, {Field::sample(g, [](double x, double y) { return 1.0 + 0.5 * std::sin(6 * x) * y; }),
                                         Field::sample(g, [](double x, double) { return 0.3 * x; }),
                                         Field::sample(g, [](double x, double y) { return 0.2 + x * y; })});
}

}  // namespace

TEST_SUITE("constitutive") {
  TEST_CASE("g evaluation") {
    CHECK(local({0, 1}, {1, 1}).g(0.0) == 1.0);
    CHECK(local({0, 1, 2}, {1, 1, 1}).g(1.0) == 3.0);
    CHECK(local({0, 1.5}, {2, 3}).g(4.0) == doctest::Approx(26.0).epsilon(1e-15));
    CHECK_THROWS_AS(local({0, 1}, {1, 1}).g(-1.0), DomainError);
  }

  TEST_CASE("inversion on exact roots") {
    CHECK(local({0}, {2}).solve_s(6.0) == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(local({0, 1}, {1, 1}).solve_s(2.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(local({0, 1, 2}, {1, 1, 1}).solve_s(3.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(local({0, 1}, {1, 1}).solve_s(0.0) == 0.0);
    CHECK_THROWS_AS(local({0, 1}, {1, 1}).solve_s(-1.0), DomainError);
  }

  TEST_CASE("mobility values") {
    const LocalLaw L = local({0, 1}, {1, 1});
    CHECK(local({0, 0.7, 2}, {2.5, 1, 3}).K(0.0) == doctest::Approx(1.0 / 2.5).epsilon(1e-15));
    CHECK(L.K(2.0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(L.K(12.0) == doctest::Approx(0.25).epsilon(1e-14));
  }

  TEST_CASE("two-term closed-form root agreement on random laws") {
    Rng rng(21);
    for (int trial = 0; trial < 2000; ++trial) {
      const double al = rng.log_uniform(1e-3, 1e3), be = rng.log_uniform(1e-3, 1e3), xi = rng.log_uniform(1e-8, 1e8);
      const double exact = 2.0 * xi / (al + std::sqrt(al * al + 4.0 * be * xi));
      const double s = local({0, 1}, {al, be}).solve_s(xi);
      CHECK(testing::rel_err(s, exact) <= 1e-10);
    }
  }

  TEST_CASE("inversion residual and monotonicity on random laws") {
    Rng rng(22);
    for (int trial = 0; trial < 200; ++trial) {
      const int terms = rng.integer(2, 5);
      LocalLaw L;
      L.terms = terms;
      double e = 0.0;
      for (int i = 0; i < terms; ++i) {
        L.alpha[i] = e;
        e += rng.uniform(0.1, 1.0);
        L.coef[i] = (i == 0 || i == terms - 1) ? rng.log_uniform(0.05, 20) : rng.uniform(0, 2);
      }
      double prev_s = -1.0, prev_K = 1e300;
      for (int k = 0; k <= 60; ++k) {
        const double xi = k == 0 ? 0.0 : std::pow(10.0, -6.0 + 12.0 * k / 60.0);
        const double s = L.solve_s(xi), K = L.K(xi);
        CHECK(std::abs(s * L.g(s) - xi) <= 1e-10 * (1 + xi));
        CHECK(s > prev_s);
        CHECK(K <= prev_K);
        prev_s = s;
        prev_K = K;
      }
    }
  }

  TEST_CASE("weights") {
    const Grid2D g = Grid2D::box(4, 4);
    const WeightSet w1 = build_weights(uniform_law(g, {0, 1}, {1, 1}));
    CHECK(w1.a == 0.5);
    CHECK(w1.M[3] == doctest::Approx(1.0));
    CHECK(w1.m[3] == doctest::Approx(1.0));
    CHECK(w1.W1[3] == doctest::Approx(0.5));
    CHECK(w1.W2[3] == doctest::Approx(1.0));
    const WeightSet w2 = build_weights(uniform_law(g, {0, 1}, {4, 1}));
    CHECK(w2.M[0] == doctest::Approx(4.0));
    CHECK(w2.m[0] == doctest::Approx(1.0));
    CHECK(w2.W1[0] == doctest::Approx(1.0 / 8.0));
    CHECK(w2.W2[0] == doctest::Approx(4.0));
    CHECK(uniform_law(g, {0, 2}, {1, 1}).a() == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  }

  TEST_CASE("strict degree condition") {
    CHECK(check_sdc(2.0, 3));
    CHECK_FALSE(check_sdc(4.0, 3));
    CHECK(check_sdc(100.0, 2));
    CHECK_THROWS_AS(check_sdc(1.0, 1), DomainError);
  }

  TEST_CASE("sandwich at xi = 2 for g = 1 + s") {
    const Grid2D g = Grid2D::box(2, 2);
    const ForchheimerLaw law = uniform_law(g, {0, 1}, {1, 1});
    const WeightSet w = build_weights(law);
    const double xi = 2.0, a = w.a, K = law.K(0, xi);
    const double lower = 2 * w.W1[0] / (std::pow(xi, a) + std::pow(law.aN()[0], a));
    const double upper = w.W2[0] * std::pow(xi, -a);
    CHECK(lower == doctest::Approx(1.0 / (std::sqrt(2.0) + 1.0)).epsilon(1e-14));
    CHECK(upper == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
    CHECK(lower <= K);
    CHECK(K <= upper);
  }

  TEST_CASE("derivative at xi = 2 for g = 1 + s") {
    const LocalLaw L = local({0, 1}, {1, 1});
    // d/dxi of 2/(1 + sqrt(1 + 4 xi)) at 2 is -1/12.
    CHECK(L.xi_dK(2.0) == doctest::Approx(-2.0 / 12.0).epsilon(1e-12));
    const double h = 1e-4;
    const double fd = (L.K(2 + h) - L.K(2 - h)) / (2 * h);
    CHECK(fd == doctest::Approx((K_linear(2 + h) - K_linear(2 - h)) / (2 * h)).epsilon(1e-8));
    CHECK(2 * fd >= -0.5 * L.K(2.0));
    CHECK(fd <= 0.0);
  }

  TEST_CASE("H against the closed form and its sandwich") {
    const LocalLaw L = local({0, 1}, {1, 1});
    CHECK(L.H(0.0) == 0.0);
    CHECK(local({0}, {1}).H(3.0) == doctest::Approx(9.0).epsilon(1e-10));
    // Independent closed form for g = 1 + s: with v = sqrt(sigma) and u = sqrt(1 + 4v),
    // H = int_1^U (u - 1) u / 2 du, U = sqrt(1 + 4 xi).
    auto H_exact = [](double xi) {
      const double U = std::sqrt(1.0 + 4.0 * xi);
      return U * U * U / 6.0 - U * U / 4.0 + 1.0 / 12.0;
    };
    for (double xi : {1e-3, 0.5, 2.0, 30.0, 1e4}) {
      CAPTURE(xi);
      CHECK(testing::rel_err(L.H(xi), H_exact(xi)) < 1e-7);
      CHECK(L.K(xi) * xi * xi <= L.H(xi) * (1 + 1e-12));
      CHECK(L.H(xi) <= xi * xi / L.coef[0] * (1 + 1e-12));
    }
  }

  TEST_CASE("law validation names the field") {
    const Grid2D g = Grid2D::box(3, 3);
    auto field_of = [&](std::vector<double> e, std::vector<double> c) {
      try {
        uniform_law(g, e, c);
      } catch (const ValidationError& err) {
        return err.field();
      }
      return std::string("none");
    };
    CHECK(field_of({0, 2, 1}, {1, 1, 1}) == "law.exponents");
    CHECK(field_of({0.5, 1}, {1, 1}) == "law.exponents");
    CHECK(field_of({0, 1}, {0, 1}) == "law.coefficients[0]");
    CHECK(field_of({0, 1}, {1, -1}) == "law.coefficients[1]");
    CHECK(field_of({0, 1, 2}, {1, 0, 1}) == "none");
  }

  TEST_CASE("all bounds hold on a heterogeneous field") {
    const Grid2D g = Grid2D::box(16, 16);
    const ForchheimerLaw law = heterogeneous_law(g);
    const WeightSet w = build_weights(law);
    std::vector<std::size_t> cells(g.cells());
    for (std::size_t c = 0; c < cells.size(); ++c) cells[c] = c;
    std::vector<double> xis{0.0};
    for (int k = 0; k < 40; ++k) xis.push_back(std::pow(10.0, -6.0 + 12.0 * k / 39.0));
    const ConstitutiveCheck chk = verify_constitutive_bounds(law, w, cells, xis);
    CHECK(chk.pass);
    CHECK(chk.monotone);
    CHECK(chk.lower_sandwich >= -1e-9);
    CHECK(chk.upper_sandwich >= -1e-9);
    CHECK(chk.lower_quadratic >= -1e-9);
    CHECK(chk.upper_quadratic >= -1e-9);
    CHECK(chk.weight_product >= -1e-9);
    CHECK(chk.max_residual <= 1e-10);
  }
}
