#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "doctest.h"
#include "forch/error.hpp"
#include "forch/expr.hpp"
#include "forch/grid.hpp"
#include "forch/norms.hpp"
#include "forch/raster.hpp"
#include "forch/rng.hpp"
#include "support.hpp"

using namespace forch;
using std::numbers::pi;

TEST_SUITE("expr") {
  TEST_CASE("evaluates arithmetic, functions and constants") {
    const Expr e = Expr::parse("2*x^2 + sin(pi*y) - t/4 + pow(e, 0) + sqrt(9) - -1");
    CHECK(e.eval(3.0, 0.5, 2.0) == doctest::Approx(18.0 + 1.0 - 0.5 + 1.0 + 3.0 + 1.0));
    CHECK(Expr::parse("exp(log(5))").eval(0, 0, 0) == doctest::Approx(5.0));
    CHECK(Expr::parse("2^3^2").eval(0, 0, 0) == doctest::Approx(512.0));
  }

  TEST_CASE("constant detection") {
    CHECK(Expr::parse("3*pi").is_constant());
    CHECK_FALSE(Expr::parse("x").is_constant());
    CHECK(Expr::parse("sin(t)*x").depends_on(Var::T));
    CHECK_FALSE(Expr::parse("sin(t)*x").depends_on(Var::Y));
  }

  TEST_CASE("malformed input names the expression field") {
    for (const char* bad : {"", "1 +", "sin(", "foo(x)", "x y", "3 ) "}) {
      CAPTURE(bad);
      try {
        Expr::parse(bad);
        FAIL("accepted malformed input");
      } catch (const ValidationError& err) {
        CHECK(err.field() == "expression");
      }
    }
  }

  TEST_CASE("symbolic derivatives agree with fourth-order differences") {
    const char* texts[] = {"0.5*sin(t)*(x + y)", "cos(t)*(1 + x) - 0.5*y*sin(2*t)",
                           "exp(-x*t)*sqrt(1 + y^2)", "pow(1 + x*x, 1.5)/(2 + cos(3*y + t))",
                           "log(2 + x*y*t)"};
    Rng rng(11);
    for (const char* text : texts) {
      const Expr e = Expr::parse(text);
      const Expr derivs[] = {e.diff(Var::X), e.diff(Var::Y), e.diff(Var::T), e.diff(Var::T).diff(Var::T)};
      for (int trial = 0; trial < 20; ++trial) {
        const double x = rng.uniform(0.1, 0.9), y = rng.uniform(0.1, 0.9), t = rng.uniform(0.1, 2.0);
        const double h = 1e-3;
        auto d5 = [&](auto f) { return (-f(2 * h) + 8 * f(h) - 8 * f(-h) + f(-2 * h)) / (12 * h); };
        const double fx = d5([&](double s) { return e.eval(x + s, y, t); });
        const double fy = d5([&](double s) { return e.eval(x, y + s, t); });
        const double ft = d5([&](double s) { return e.eval(x, y, t + s); });
        const double ftt = d5([&](double s) { return derivs[2].eval(x, y, t + s); });
        CAPTURE(text);
        CHECK(std::abs(derivs[0].eval(x, y, t) - fx) < 1e-9);
        CHECK(std::abs(derivs[1].eval(x, y, t) - fy) < 1e-9);
        CHECK(std::abs(derivs[2].eval(x, y, t) - ft) < 1e-9);
        CHECK(std::abs(derivs[3].eval(x, y, t) - ftt) < 1e-8);
      }
    }
  }
}

TEST_SUITE("grid") {
  TEST_CASE("rejects degenerate grids and non-finite values") {
    CHECK_THROWS_AS(Grid2D::box(1, 4).validate(), ValidationError);
    const Grid2D g = Grid2D::box(4, 4);
    CHECK_THROWS_AS(Field(g, std::vector<double>(16, NAN)), ValidationError);
    CHECK_THROWS_AS(Field(g, std::vector<double>(15, 1.0)), ValidationError);
  }

  TEST_CASE("gradient of x is exactly one at interior faces") {
    const Grid2D g = Grid2D::box(8, 6);
    const FaceGradients fg = gradient_field(Field::sample(g, [](double x, double) { return x; }));
    for (int j = 0; j < g.ny; ++j)
      for (int i = 1; i < g.nx; ++i) {
        CHECK(fg.xface_dx[fg.xf(i, j)] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::abs(fg.xface_dy[fg.xf(i, j)]) < 1e-12);
      }
  }

  TEST_CASE("gradient of a constant vanishes") {
    const Grid2D g = Grid2D::box(5, 7);
    const FaceGradients fg = gradient_field(Field(g, 3.25));
    for (double v : fg.xface_dx) CHECK(v == 0.0);
    for (double v : fg.yface_dy) CHECK(v == 0.0);
    for (double v : fg.xface_dy) CHECK(v == 0.0);
  }

  TEST_CASE("central difference of x^2 at x = 0.5 on dx = 0.1 is 1") {
    const Grid2D g = Grid2D::box(10, 10);
    const FaceGradients fg = gradient_field(Field::sample(g, [](double x, double) { return x * x; }));
    CHECK(fg.xface_dx[fg.xf(5, 3)] == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_SUITE("norms") {
  TEST_CASE("spatial norms of simple fields") {
    const Grid2D g = Grid2D::box(40, 40);
    CHECK(norm_space(Field(g, 1.0), 2.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(norm_space(Field(g, 2.0), 2.0) == doctest::Approx(2.0).epsilon(1e-14));
    const double nx = norm_space(Field::sample(g, [](double x, double) { return x; }), 2.0);
    CHECK(std::abs(nx - 1.0 / std::sqrt(3.0)) <= g.dx * g.dx);
    CHECK(norm_space(Field(g, -3.0), kInf) == 3.0);
  }

  TEST_CASE("space-time norms") {
    const Grid2D g = Grid2D::box(8, 8);
    const int nt = 101;
    std::vector<double> t(nt);
    std::vector<Field> ones, lin, neg;
    for (int k = 0; k < nt; ++k) {
      t[k] = k / double(nt - 1);
      ones.emplace_back(g, 1.0);
      lin.emplace_back(g, t[k]);
      neg.emplace_back(g, -3.0);
    }
    const Field w(g, 1.0);
    CHECK(norm_spacetime(SpaceTimeField(g, t, ones), w, 2.0) == doctest::Approx(1.0).epsilon(1e-13));
    const double dt = t[1] - t[0];
    CHECK(std::abs(norm_spacetime(SpaceTimeField(g, t, lin), w, 2.0) - 1.0 / std::sqrt(3.0)) <= dt * dt);
    CHECK(norm_spacetime(SpaceTimeField(g, t, neg), w, kInf) == 3.0);
  }

  TEST_CASE("ess sup in time") {
    const Grid2D g = Grid2D::box(4, 4);
    std::vector<double> t;
    std::vector<Field> f, z;
    for (int k = 0; k <= 1000; ++k) {
      t.push_back(pi * k / 1000.0);
      f.emplace_back(g, std::sin(t.back()));
      z.emplace_back(g, 0.0);
    }
    auto sup = [](const Field& u) { return norm_space(u, kInf); };
    CHECK(ess_sup_time(SpaceTimeField(g, t, f), sup) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(ess_sup_time(SpaceTimeField(g, t, z), sup) == 0.0);
    CHECK(ess_sup_time(SpaceTimeField(g, {0.3}, {Field(g, 1.5)}), sup) == 1.5);
  }

  TEST_CASE("nonpositive weights are a domain error") {
    const Grid2D g = Grid2D::box(4, 4);
    Field w(g, 1.0);
    w[5] = 0.0;
    CHECK_THROWS_AS(norm_space(Field(g, 1.0), w, 2.0), DomainError);
  }

  TEST_CASE("homogeneity, triangle inequality, weight monotonicity") {
    const Grid2D g = Grid2D::box(12, 9);
    Rng rng(3);
    auto random_field = [&](double lo, double hi) {
      Field f(g);
      for (std::size_t c = 0; c < f.size(); ++c) f[c] = rng.uniform(lo, hi);
      return f;
    };
    for (int trial = 0; trial < 50; ++trial) {
      const Field u = random_field(-2, 2), v = random_field(-2, 2);
      const Field w1 = random_field(0.1, 1.0);
      Field w2 = w1;
      for (std::size_t c = 0; c < w2.size(); ++c) w2[c] += rng.uniform(0, 1);
      const double k = rng.uniform(-5, 5);
      for (double p : {1.0, 2.0, 4.0, kInf}) {
        Field ku = u, sum = u;
        for (std::size_t c = 0; c < u.size(); ++c) {
          ku[c] *= k;
          sum[c] += v[c];
        }
        CHECK(testing::rel_err(norm_space(ku, w1, p), std::abs(k) * norm_space(u, w1, p)) < 1e-12);
        CHECK(norm_space(sum, w1, p) <= norm_space(u, w1, p) + norm_space(v, w1, p) + 1e-12);
        if (p < kInf) CHECK(norm_space(u, w1, p) <= norm_space(u, w2, p));
      }
    }
  }

  TEST_CASE("midpoint quadrature is second order") {
    const double exact = (std::exp(1.0) - 1.0) * (std::exp(1.0) - 1.0);
    auto err = [&](int n) {
      const Grid2D g = Grid2D::box(n, n);
      return std::abs(integrate(Field::sample(g, [](double x, double y) { return std::exp(x + y); })) -
                      exact);
    };
    const double e1 = err(16), e2 = err(32), e3 = err(64);
    CHECK(e1 / e2 >= 3.0);
    CHECK(e1 / e2 <= 5.0);
    CHECK(e2 / e3 >= 3.0);
    CHECK(e2 / e3 <= 5.0);
  }

  TEST_CASE("trapezoid windows and interpolation") {
    const std::vector<double> t{0, 1, 2, 3};
    const std::vector<double> f{0, 1, 2, 3};
    CHECK(trapezoid(t, f) == doctest::Approx(4.5));
    CHECK(trapezoid_window(t, f, 0.5, 2.5) == doctest::Approx(3.0));
    CHECK(interpolate(t, f, 1.25) == doctest::Approx(1.25));
  }

  TEST_CASE("elementary scalar inequalities on random samples") {
    Rng rng(5);
    for (int trial = 0; trial < 5000; ++trial) {
      const double x = rng.log_uniform(1e-4, 1e4), y = rng.log_uniform(1e-4, 1e4);
      const double small_p = rng.uniform(0.05, 1.0), big_p = rng.uniform(1.0, 6.0);
      auto le = [](double a, double b) { return a <= b * (1 + 1e-12) + 1e-300; };
      CHECK(le(std::pow(x + y, small_p), std::pow(x, small_p) + std::pow(y, small_p)));
      CHECK(le(std::pow(x + y, big_p), std::pow(2.0, big_p - 1) * (std::pow(x, big_p) + std::pow(y, big_p))));
      double al = rng.uniform(0, 3), be = rng.uniform(0, 3), ga = rng.uniform(0, 3);
      if (al > be) std::swap(al, be);
      if (be > ga) std::swap(be, ga);
      if (al > be) std::swap(al, be);
      CHECK(le(std::pow(x, be), std::pow(x, al) + std::pow(x, ga)));
      CHECK(le(std::pow(x, be), 1.0 + std::pow(x, ga)));
      const double sx = rng.uniform(-10, 10), sy = rng.uniform(-10, 10);
      const double lhs = std::pow(std::abs(sx - sy), big_p);
      const double rhs = std::pow(2.0, 1 - big_p) * std::pow(std::abs(sx), big_p) - std::pow(std::abs(sy), big_p);
      CHECK(lhs >= rhs - 1e-12 * (1 + std::abs(rhs)));
    }
  }
}

TEST_SUITE("raster") {
  TEST_CASE("round trip preserves grid and bits") {
    const Grid2D g = Grid2D::box(7, 5, 2.0, 1.0, -1.0, 0.5);
    const Field f = Field::sample(g, [](double x, double y) { return std::sin(3 * x) * y + 1e-17; });
    const std::string dir = testing::scratch_dir("raster");
    write_raster(dir + "/f.bin", f);
    const Field back = read_raster(dir + "/f.bin");
    CHECK(back.grid() == g);
    CHECK(back.values() == f.values());
  }

  TEST_CASE("bad magic and missing files are io errors") {
    const std::string dir = testing::scratch_dir("raster_bad");
    CHECK_THROWS_AS(read_raster(dir + "/none.bin"), IoError);
    { std::ofstream(dir + "/bad.bin") << "NOTARASTER............................................"; }
    CHECK_THROWS_AS(read_raster(dir + "/bad.bin"), IoError);
  }
}
