#pragma once

// Five-point symmetric stencil on a cell grid and a Jacobi-preconditioned
// conjugate gradient solver for it.

#include <vector>

#include "forch/grid.hpp"

namespace forch {

/// Row c reads diag[c] p_c - sum over interior faces T_f p_neighbor.
struct StencilMatrix {
  Grid2D grid;
  std::vector<double> diag;
  std::vector<double> tx;  // x-face couplings, (nx+1)*ny, index j*(nx+1)+i; boundary entries unused
  std::vector<double> ty;  // y-face couplings, nx*(ny+1), index j*nx+i

  explicit StencilMatrix(const Grid2D& g);
  void apply(const std::vector<double>& x, std::vector<double>& y) const;
};

struct CgResult {
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Solves A x = b starting from x; stops at |r| <= tol |b| (2-norm).
/// Throws NumericError with the residual history on breakdown or when max_iter is hit.
CgResult conjugate_gradient(const StencilMatrix& A, const std::vector<double>& b, std::vector<double>& x,
                            double tol, int max_iter);

}  // namespace forch
