#include "forch/raster.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>

#include "forch/error.hpp"

namespace forch {

namespace {
constexpr char kMagic[8] = {'F', 'O', 'R', 'C', 'H', 'R', 'S', '1'};

template <class T>
void put(std::ofstream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& is, const std::string& path) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) throw IoError("truncated raster: " + path);
  return v;
}
}  // namespace

void write_raster(const std::string& path, const Field& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write " + path);
  const Grid2D& g = f.grid();
  os.write(kMagic, sizeof kMagic);
  put<std::int32_t>(os, g.nx);
  put<std::int32_t>(os, g.ny);
  put(os, g.dx);
  put(os, g.dy);
  put(os, g.x0);
  put(os, g.y0);
  os.write(reinterpret_cast<const char*>(f.values().data()),
           static_cast<std::streamsize>(f.size() * sizeof(double)));
  if (!os) throw IoError("write failed: " + path);
}

Field read_raster(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  char magic[8];
  if (!is.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0)
    throw IoError("not a raster file: " + path);
  Grid2D g;
  g.nx = get<std::int32_t>(is, path);
  g.ny = get<std::int32_t>(is, path);
  g.dx = get<double>(is, path);
  g.dy = get<double>(is, path);
  g.x0 = get<double>(is, path);
  g.y0 = get<double>(is, path);
  g.validate();
  std::vector<double> v(g.cells());
  if (!is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double))))
    throw IoError("truncated raster: " + path);
  return Field(g, std::move(v), path);
}

void write_field_csv(const std::string& path, const Field& f) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path);
  const Grid2D& g = f.grid();
  os << "x,y,value\n" << std::setprecision(17);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) os << g.xc(i) << ',' << g.yc(j) << ',' << f(i, j) << '\n';
}

}  // namespace forch
