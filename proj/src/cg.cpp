#include "forch/cg.hpp"

#include <cmath>

#include "forch/error.hpp"
#include "forch/norms.hpp"

namespace forch {

StencilMatrix::StencilMatrix(const Grid2D& g)
    : grid(g),
      diag(g.cells(), 0.0),
      tx(static_cast<std::size_t>(g.nx + 1) * g.ny, 0.0),
      ty(static_cast<std::size_t>(g.nx) * (g.ny + 1), 0.0) {}

void StencilMatrix::apply(const std::vector<double>& x, std::vector<double>& y) const {
  const int nx = grid.nx, ny = grid.ny;
  y.resize(x.size());
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const std::size_t c = static_cast<std::size_t>(j) * nx + i;
      double v = diag[c] * x[c];
      if (i > 0) v -= tx[static_cast<std::size_t>(j) * (nx + 1) + i] * x[c - 1];
      if (i + 1 < nx) v -= tx[static_cast<std::size_t>(j) * (nx + 1) + i + 1] * x[c + 1];
      if (j > 0) v -= ty[c] * x[c - nx];
      if (j + 1 < ny) v -= ty[c + nx] * x[c + nx];
      y[c] = v;
    }
}

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> t(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) t[k] = a[k] * b[k];
  return pairwise_sum(t);
}

}  // namespace

CgResult conjugate_gradient(const StencilMatrix& A, const std::vector<double>& b, std::vector<double>& x,
                            double tol, int max_iter) {
  const std::size_t n = b.size();
  x.resize(n, 0.0);
  std::vector<double> r(n), z(n), p(n), q(n);
  A.apply(x, q);
  for (std::size_t k = 0; k < n; ++k) r[k] = b[k] - q[k];
  const double bnorm = std::sqrt(dot(b, b));
  CgResult res;
  if (bnorm == 0.0) {
    // Only x = 0 solves a homogeneous SPD system.
    std::fill(x.begin(), x.end(), 0.0);
    return res;
  }
  double rnorm = std::sqrt(dot(r, r));
  std::vector<double> history{rnorm / bnorm};
  if (rnorm <= tol * bnorm) {
    res.relative_residual = rnorm / bnorm;
    return res;
  }
  for (std::size_t k = 0; k < n; ++k) z[k] = r[k] / A.diag[k];
  p = z;
  double rz = dot(r, z);
  for (int it = 1; it <= max_iter; ++it) {
    A.apply(p, q);
    const double pq = dot(p, q);
    if (!(pq > 0.0) || !std::isfinite(pq)) throw NumericError("conjugate gradient breakdown", history);
    const double alpha = rz / pq;
    for (std::size_t k = 0; k < n; ++k) {
      x[k] += alpha * p[k];
      r[k] -= alpha * q[k];
    }
    rnorm = std::sqrt(dot(r, r));
    history.push_back(rnorm / bnorm);
    if (rnorm <= tol * bnorm) {
      res.iterations = it;
      res.relative_residual = rnorm / bnorm;
      return res;
    }
    for (std::size_t k = 0; k < n; ++k) z[k] = r[k] / A.diag[k];
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t k = 0; k < n; ++k) p[k] = z[k] + beta * p[k];
  }
  throw NumericError("conjugate gradient hit the iteration cap", history);
}

}  // namespace forch
