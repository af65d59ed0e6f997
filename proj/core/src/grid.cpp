#include "roughflow/grid.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>

namespace roughflow::fpe {

double GridFunction::mass() const {
  double cell_volume = std::pow(grid.spacing, grid.d);
  double total = 0.0;
  for (double v : values) total += v;
  return total * cell_volume;
}

double GridFunction::max_value() const {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : values) m = v > m ? v : m;
  return m;
}

double GridFunction::min_value() const {
  double m = std::numeric_limits<double>::infinity();
  for (double v : values) m = v < m ? v : m;
  return m;
}

double GridFunction::max_abs() const {
  double m = 0.0;
  for (double v : values) {
    double a = std::fabs(v);
    m = a > m ? a : m;
  }
  return m;
}

bool GridFunction::all_finite() const {
  for (double v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void GridFunction::normalize_mass() {
  double m = mass();
  if (m == 0.0) return;
  for (double& v : values) v /= m;
}

GridFunction sample_on_grid(const GridSpec& grid,
                            const std::function<double(const double*)>& fn, double time) {
  GridFunction f(grid, time);
  int idx[3] = {0, 0, 0};
  double x[3] = {0.0, 0.0, 0.0};
  std::int64_t n = grid.cell_count();
  for (std::int64_t c = 0; c < n; ++c) {
    grid.unflatten(c, idx);
    for (int k = 0; k < grid.d; ++k) x[k] = grid.coord(k, idx[k]);
    f.values[static_cast<std::size_t>(c)] = fn(x);
  }
  return f;
}

GridFunction gaussian_density(const GridSpec& grid, double variance,
                              const std::array<double, 3>& mean) {
  double norm = std::pow(6.283185307179586 * variance, -0.5 * grid.d);
  GridFunction f = sample_on_grid(grid, [&](const double* x) {
    double q = 0.0;
    for (int k = 0; k < grid.d; ++k) {
      double dxk = x[k] - mean[static_cast<std::size_t>(k)];
      q += dxk * dxk;
    }
    return norm * std::exp(-0.5 * q / variance);
  });
  f.normalize_mass();
  return f;
}

void write_csv(const GridFunction& f, const std::string& path) {
  std::FILE* out = std::fopen(path.c_str(), "w");
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  std::fprintf(out, "cell");
  for (int k = 0; k < f.grid.d; ++k) std::fprintf(out, ",x%d", k);
  std::fprintf(out, ",value\n");
  int idx[3] = {0, 0, 0};
  std::int64_t n = f.grid.cell_count();
  for (std::int64_t c = 0; c < n; ++c) {
    f.grid.unflatten(c, idx);
    std::fprintf(out, "%lld", static_cast<long long>(c));
    for (int k = 0; k < f.grid.d; ++k) std::fprintf(out, ",%.17g", f.grid.coord(k, idx[k]));
    std::fprintf(out, ",%.17g\n", f.values[static_cast<std::size_t>(c)]);
  }
  std::fclose(out);
}

namespace {

void put_u32(unsigned char* dst, std::uint32_t v) {
  dst[0] = static_cast<unsigned char>(v);
  dst[1] = static_cast<unsigned char>(v >> 8);
  dst[2] = static_cast<unsigned char>(v >> 16);
  dst[3] = static_cast<unsigned char>(v >> 24);
}

std::uint32_t get_u32(const unsigned char* src) {
  return static_cast<std::uint32_t>(src[0]) | (static_cast<std::uint32_t>(src[1]) << 8) |
         (static_cast<std::uint32_t>(src[2]) << 16) |
         (static_cast<std::uint32_t>(src[3]) << 24);
}

void put_f64(unsigned char* dst, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  for (int i = 0; i < 8; ++i) dst[i] = static_cast<unsigned char>(bits >> (8 * i));
}

double get_f64(const unsigned char* src) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(src[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, sizeof v);
  return v;
}

}  // namespace

void write_binary(const GridFunction& f, const std::string& path) {
  unsigned char header[64] = {0};
  std::memcpy(header, "FPE1", 4);
  put_u32(header + 4, 1u);
  put_u32(header + 8, static_cast<std::uint32_t>(f.grid.d));
  int n = f.grid.cells_per_dim();
  for (int k = 0; k < 3; ++k) {
    put_u32(header + 12 + 4 * k, k < f.grid.d ? static_cast<std::uint32_t>(n) : 0u);
  }
  put_f64(header + 24, f.grid.spacing);
  put_f64(header + 32, f.time);
  for (int k = 0; k < 3; ++k) put_f64(header + 40 + 8 * k, f.grid.center[static_cast<std::size_t>(k)]);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(header), sizeof header);
  std::vector<unsigned char> buf(f.values.size() * 8);
  for (std::size_t i = 0; i < f.values.size(); ++i) put_f64(buf.data() + 8 * i, f.values[i]);
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

GridFunction read_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  unsigned char header[64];
  in.read(reinterpret_cast<char*>(header), sizeof header);
  if (in.gcount() != 64 || std::memcmp(header, "FPE1", 4) != 0) {
    throw std::runtime_error(path + ": not an FPE1 snapshot");
  }
  std::uint32_t version = get_u32(header + 4);
  if (version != 1) throw std::runtime_error(path + ": unsupported snapshot version");
  GridSpec grid;
  grid.d = static_cast<int>(get_u32(header + 8));
  if (grid.d < 1 || grid.d > 3) throw std::runtime_error(path + ": bad dimension");
  std::uint32_t n = get_u32(header + 12);
  grid.spacing = get_f64(header + 24);
  double time = get_f64(header + 32);
  for (int k = 0; k < 3; ++k) grid.center[static_cast<std::size_t>(k)] = get_f64(header + 40 + 8 * k);
  grid.half_width = 0.5 * n * grid.spacing;

  GridFunction f(grid, time);
  std::vector<unsigned char> buf(f.values.size() * 8);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (in.gcount() != static_cast<std::streamsize>(buf.size())) {
    throw std::runtime_error(path + ": truncated snapshot payload");
  }
  for (std::size_t i = 0; i < f.values.size(); ++i) f.values[i] = get_f64(buf.data() + 8 * i);
  return f;
}

}  // namespace roughflow::fpe
