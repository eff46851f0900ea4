#include "forch/grid.hpp"

#include <algorithm>
#include <cmath>

#include "forch/error.hpp"

namespace forch {

Grid2D Grid2D::box(int nx, int ny, double lx, double ly, double x0, double y0) {
  Grid2D g;
  g.nx = nx;
  g.ny = ny;
  g.dx = nx > 0 ? lx / nx : 0.0;
  g.dy = ny > 0 ? ly / ny : 0.0;
  g.x0 = x0;
  g.y0 = y0;
  g.validate();
  return g;
}

void Grid2D::validate() const {
  if (nx < 2 || ny < 2) throw ValidationError("grid", "need at least 2 cells per axis");
  if (!(dx > 0.0) || !(dy > 0.0) || !std::isfinite(dx) || !std::isfinite(dy))
    throw ValidationError("grid", "cell sizes must be positive");
  if (!std::isfinite(x0) || !std::isfinite(y0)) throw ValidationError("grid", "origin must be finite");
}

Field::Field(const Grid2D& g, double value) : grid_(g), v_(g.cells(), value) {
  if (!std::isfinite(value)) throw DomainError("field: non-finite fill value");
}

Field::Field(const Grid2D& g, std::vector<double> values, const std::string& name)
    : grid_(g), v_(std::move(values)) {
  if (v_.size() != g.cells())
    throw ValidationError(name, "expected " + std::to_string(g.cells()) + " values, got " +
                                    std::to_string(v_.size()));
  for (std::size_t k = 0; k < v_.size(); ++k)
    if (!std::isfinite(v_[k]))
      throw ValidationError(name, "non-finite value at cell " + std::to_string(k));
}

Field Field::sample(const Grid2D& g, const std::function<double(double, double)>& f,
                    const std::string& name) {
  std::vector<double> v(g.cells());
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) v[g.index(i, j)] = f(g.xc(i), g.yc(j));
  return Field(g, std::move(v), name);
}

double Field::min() const { return *std::min_element(v_.begin(), v_.end()); }
double Field::max() const { return *std::max_element(v_.begin(), v_.end()); }
double Field::max_abs() const {
  double m = 0.0;
  for (double x : v_) m = std::max(m, std::abs(x));
  return m;
}

SpaceTimeField::SpaceTimeField(const Grid2D& g, std::vector<double> times, std::vector<Field> frames)
    : grid_(g), times_(std::move(times)), frames_(std::move(frames)) {
  if (times_.size() != frames_.size()) throw ValidationError("times", "one frame per time required");
  for (std::size_t k = 0; k < times_.size(); ++k) {
    if (!std::isfinite(times_[k])) throw ValidationError("times", "non-finite time");
    if (k > 0 && !(times_[k] > times_[k - 1])) throw ValidationError("times", "times must increase strictly");
    if (!(frames_[k].grid() == g)) throw ValidationError("frames", "frame grid mismatch");
  }
}

Padded::Padded(const Grid2D& g) : g_(g), v_(static_cast<std::size_t>(g.nx + 2) * (g.ny + 2), 0.0) {}

void Padded::fill_interior(const Field& f) {
  for (int j = 0; j < g_.ny; ++j)
    for (int i = 0; i < g_.nx; ++i) (*this)(i, j) = f(i, j);
}

void Padded::fill_corners() {
  const int nx = g_.nx, ny = g_.ny;
  auto& P = *this;
  P(-1, -1) = P(-1, 0) + P(0, -1) - P(0, 0);
  P(nx, -1) = P(nx, 0) + P(nx - 1, -1) - P(nx - 1, 0);
  P(-1, ny) = P(-1, ny - 1) + P(0, ny) - P(0, ny - 1);
  P(nx, ny) = P(nx, ny - 1) + P(nx - 1, ny) - P(nx - 1, ny - 1);
}

Padded pad_extrapolate(const Field& u) {
  const Grid2D& g = u.grid();
  Padded P(g);
  P.fill_interior(u);
  for (int j = 0; j < g.ny; ++j) {
    P(-1, j) = 2.0 * u(0, j) - u(1, j);
    P(g.nx, j) = 2.0 * u(g.nx - 1, j) - u(g.nx - 2, j);
  }
  for (int i = 0; i < g.nx; ++i) {
    P(i, -1) = 2.0 * u(i, 0) - u(i, 1);
    P(i, g.ny) = 2.0 * u(i, g.ny - 1) - u(i, g.ny - 2);
  }
  P.fill_corners();
  return P;
}

double FaceGradients::xface_norm(int i, int j) const {
  const std::size_t k = xf(i, j);
  return std::hypot(xface_dx[k], xface_dy[k]);
}

double FaceGradients::yface_norm(int i, int j) const {
  const std::size_t k = yf(i, j);
  return std::hypot(yface_dx[k], yface_dy[k]);
}

FaceGradients face_gradients(const Padded& P) {
  const Grid2D& g = P.grid();
  const int nx = g.nx, ny = g.ny;
  FaceGradients out;
  out.grid = g;
  out.xface_dx.resize(static_cast<std::size_t>(nx + 1) * ny);
  out.xface_dy.resize(out.xface_dx.size());
  out.yface_dx.resize(static_cast<std::size_t>(nx) * (ny + 1));
  out.yface_dy.resize(out.yface_dx.size());
  const double rdx = 1.0 / g.dx, rdy = 1.0 / g.dy;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      const std::size_t k = out.xf(i, j);
      out.xface_dx[k] = (P(i, j) - P(i - 1, j)) * rdx;
      out.xface_dy[k] = 0.25 * rdy * (P(i - 1, j + 1) - P(i - 1, j - 1) + P(i, j + 1) - P(i, j - 1));
    }
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const std::size_t k = out.yf(i, j);
      out.yface_dy[k] = (P(i, j) - P(i, j - 1)) * rdy;
      out.yface_dx[k] = 0.25 * rdx * (P(i + 1, j - 1) - P(i - 1, j - 1) + P(i + 1, j) - P(i - 1, j));
    }
  return out;
}

FaceGradients gradient_field(const Field& u) { return face_gradients(pad_extrapolate(u)); }

std::vector<FaceGradients> gradient_field(const SpaceTimeField& u) {
  std::vector<FaceGradients> out;
  out.reserve(u.steps());
  for (const auto& f : u.frames()) out.push_back(gradient_field(f));
  return out;
}

Field cell_gradient_norm(const FaceGradients& fg) {
  const Grid2D& g = fg.grid;
  std::vector<double> v(g.cells());
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const double gx = 0.5 * (fg.xface_dx[fg.xf(i, j)] + fg.xface_dx[fg.xf(i + 1, j)]);
      const double gy = 0.5 * (fg.yface_dy[fg.yf(i, j)] + fg.yface_dy[fg.yf(i, j + 1)]);
      v[g.index(i, j)] = std::hypot(gx, gy);
    }
  return Field(g, std::move(v), "gradient");
}

}  // namespace forch
