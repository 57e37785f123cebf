#include "llg/field_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

static_assert(std::endian::native == std::endian::little,
              "LLGF I/O assumes a little-endian host");

namespace llg {

namespace {

constexpr char kMagic[4] = {'L', 'L', 'G', 'F'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void write_raw(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T read_raw(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("llgf: truncated file");
  return v;
}

}  // namespace

void write_llgf(const std::string& path, const VectorField& u) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("llgf: cannot open " + path);
  os.write(kMagic, 4);
  write_raw(os, kVersion);
  write_raw(os, static_cast<std::uint32_t>(u.spec.nx));
  write_raw(os, static_cast<std::uint32_t>(u.spec.ny));
  write_raw(os, u.spec.h);
  write_raw(os, static_cast<std::uint8_t>(u.spec.boundary));
  for (const Vec3& v : u.values) {
    write_raw(os, v.x);
    write_raw(os, v.y);
    write_raw(os, v.z);
  }
  if (!os) throw std::runtime_error("llgf: write failed for " + path);
}

VectorField read_llgf(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("llgf: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("llgf: bad magic in " + path);
  const auto version = read_raw<std::uint32_t>(is);
  if (version != kVersion) throw std::runtime_error("llgf: unknown version");
  GridSpec spec;
  spec.nx = static_cast<int>(read_raw<std::uint32_t>(is));
  spec.ny = static_cast<int>(read_raw<std::uint32_t>(is));
  spec.h = read_raw<double>(is);
  const auto b = read_raw<std::uint8_t>(is);
  if (b > 1) throw std::runtime_error("llgf: unknown boundary code");
  spec.boundary = static_cast<Boundary>(b);
  spec.validate();
  VectorField u(spec);
  for (Vec3& v : u.values) {
    v.x = read_raw<double>(is);
    v.y = read_raw<double>(is);
    v.z = read_raw<double>(is);
  }
  return u;
}

double write_pgm(const std::string& path, const ScalarField& density) {
  double scale = 0.0;
  for (double v : density.values) scale = std::max(scale, v);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("pgm: cannot open " + path);
  os << "P5\n"
     << density.spec.nx << " " << density.spec.ny << "\n255\n";
  for (int iy = 0; iy < density.spec.ny; ++iy) {
    for (int ix = 0; ix < density.spec.nx; ++ix) {
      double v = density.node(ix, iy);
      int b = scale > 0.0 ? static_cast<int>(255.0 * v / scale + 0.5) : 0;
      if (b < 0) b = 0;
      if (b > 255) b = 255;
      const char c = static_cast<char>(static_cast<unsigned char>(b));
      os.write(&c, 1);
    }
  }
  if (!os) throw std::runtime_error("pgm: write failed for " + path);
  return scale;
}

}  // namespace llg
