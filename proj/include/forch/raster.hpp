#pragma once

// Binary raster format for cell fields:
//   8 bytes magic "FORCHRS1", int32 nx, int32 ny, float64 dx, dy, x0, y0,
//   then nx*ny float64 values in row-major order (index j*nx + i), little endian.

#include <string>

#include "forch/grid.hpp"

namespace forch {

void write_raster(const std::string& path, const Field& f);
Field read_raster(const std::string& path);
/// Columns x, y, value; one row per cell center.
void write_field_csv(const std::string& path, const Field& f);

}  // namespace forch
