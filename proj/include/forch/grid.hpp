#pragma once

// Cell-centered rectangular grids, scalar fields on them, and face gradients.

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace forch {

struct Grid2D {
  int nx = 0, ny = 0;
  double dx = 0.0, dy = 0.0;
  double x0 = 0.0, y0 = 0.0;

  /// Grid covering [x0, x0+lx] x [y0, y0+ly] with nx*ny cells.
  static Grid2D box(int nx, int ny, double lx = 1.0, double ly = 1.0, double x0 = 0.0, double y0 = 0.0);

  /// Throws ValidationError unless nx, ny >= 2 and dx, dy > 0.
  void validate() const;

  std::size_t cells() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx + i; }
  double xc(int i) const { return x0 + (i + 0.5) * dx; }
  double yc(int j) const { return y0 + (j + 0.5) * dy; }
  double cell_area() const { return dx * dy; }
  double lx() const { return nx * dx; }
  double ly() const { return ny * dy; }
  double area() const { return lx() * ly(); }

  bool operator==(const Grid2D& o) const {
    return nx == o.nx && ny == o.ny && dx == o.dx && dy == o.dy && x0 == o.x0 && y0 == o.y0;
  }
};

/// One value per cell, row-major (index j*nx + i).
class Field {
public:
  Field() = default;
  explicit Field(const Grid2D& g, double value = 0.0);
  /// Rejects size mismatch and non-finite entries.
  Field(const Grid2D& g, std::vector<double> values, const std::string& name = "field");

  static Field sample(const Grid2D& g, const std::function<double(double, double)>& f,
                      const std::string& name = "field");

  const Grid2D& grid() const { return grid_; }
  std::size_t size() const { return v_.size(); }
  double operator[](std::size_t k) const { return v_[k]; }
  double& operator[](std::size_t k) { return v_[k]; }
  double operator()(int i, int j) const { return v_[grid_.index(i, j)]; }
  double& operator()(int i, int j) { return v_[grid_.index(i, j)]; }
  const std::vector<double>& values() const { return v_; }
  std::vector<double>& values() { return v_; }

  double min() const;
  double max() const;
  double max_abs() const;

private:
  Grid2D grid_;
  std::vector<double> v_;
};

/// Snapshots of a cell field at strictly increasing times.
class SpaceTimeField {
public:
  SpaceTimeField() = default;
  SpaceTimeField(const Grid2D& g, std::vector<double> times, std::vector<Field> frames);

  const Grid2D& grid() const { return grid_; }
  const std::vector<double>& times() const { return times_; }
  const std::vector<Field>& frames() const { return frames_; }
  const Field& frame(std::size_t k) const { return frames_[k]; }
  std::size_t steps() const { return times_.size(); }

private:
  Grid2D grid_;
  std::vector<double> times_;
  std::vector<Field> frames_;
};

/// Cell array with one layer of ghost cells, indices i in [-1, nx], j in [-1, ny].
class Padded {
public:
  explicit Padded(const Grid2D& g);
  double operator()(int i, int j) const { return v_[off(i, j)]; }
  double& operator()(int i, int j) { return v_[off(i, j)]; }
  const Grid2D& grid() const { return g_; }
  /// Interior from a field; ghosts untouched.
  void fill_interior(const Field& f);
  /// Corner ghosts from the bilinear rule P[-1,-1] = P[-1,0] + P[0,-1] - P[0,0].
  void fill_corners();

private:
  std::size_t off(int i, int j) const {
    return static_cast<std::size_t>(j + 1) * (g_.nx + 2) + static_cast<std::size_t>(i + 1);
  }
  Grid2D g_;
  std::vector<double> v_;
};

/// Ghosts by linear extrapolation 2u0 - u1; reproduces affine fields exactly.
Padded pad_extrapolate(const Field& u);

/// Full gradient sampled on faces. x-faces are (nx+1)*ny, stored j*(nx+1)+i for the
/// face at x0 + i*dx; y-faces are nx*(ny+1), stored j*nx+i for the face at y0 + j*dy.
struct FaceGradients {
  Grid2D grid;
  std::vector<double> xface_dx, xface_dy;  // normal and tangential components on x-faces
  std::vector<double> yface_dx, yface_dy;  // tangential and normal components on y-faces

  std::size_t xf(int i, int j) const { return static_cast<std::size_t>(j) * (grid.nx + 1) + i; }
  std::size_t yf(int i, int j) const { return static_cast<std::size_t>(j) * grid.nx + i; }
  double xface_norm(int i, int j) const;
  double yface_norm(int i, int j) const;
};

/// Normal difference across the face plus the 4-point transverse average.
FaceGradients face_gradients(const Padded& p);

/// Gradient of a cell field, ghosts extrapolated.
FaceGradients gradient_field(const Field& u);
std::vector<FaceGradients> gradient_field(const SpaceTimeField& u);

/// Cell gradient magnitude: each component is the mean of its two face normals.
Field cell_gradient_norm(const FaceGradients& g);

}  // namespace forch
