#include "ballbot/terrain.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "ballbot/errors.hpp"

namespace ballbot {

void TerrainParams::validate() const {
  if (octaves < 1) throw InvalidParameter("terrain: octaves must be >= 1");
  if (!(lacunarity > 1.0)) throw InvalidParameter("terrain: lacunarity must be > 1");
  if (!(persistence > 0.0 && persistence <= 1.0))
    throw InvalidParameter("terrain: persistence must be in (0, 1]");
  if (!(amplitude >= 0.0)) throw InvalidParameter("terrain: amplitude must be >= 0");
  if (!(scale > 0.0)) throw InvalidParameter("terrain: scale must be > 0");
}

double TerrainParams::height_bound() const {
  double bound = 0.0, p = 1.0;
  for (int k = 0; k < octaves; ++k) {
    bound += p;
    p *= persistence;
  }
  return amplitude * bound;
}

std::array<std::uint8_t, 256> simplex_permutation(std::uint64_t seed) {
  std::array<std::uint8_t, 256> perm;
  for (int i = 0; i < 256; ++i) perm[i] = static_cast<std::uint8_t>(i);
  std::mt19937_64 rng(seed);
  for (int i = 255; i > 0; --i) {
    const auto j = static_cast<int>(rng() % static_cast<std::uint64_t>(i + 1));
    std::swap(perm[i], perm[j]);
  }
  return perm;
}

namespace {

// x,y components of the classic 12-entry gradient set.
constexpr double kGrad2[12][2] = {
    {1, 1}, {-1, 1}, {1, -1}, {-1, -1}, {1, 0}, {-1, 0},
    {1, 0}, {-1, 0}, {0, 1},  {0, -1},  {0, 1}, {0, -1},
};

constexpr double kSkew2 = 0.36602540378443864676;    // (sqrt(3)-1)/2
constexpr double kUnskew2 = 0.21132486540518711775;  // (3-sqrt(3))/6
constexpr double kNorm2 = 70.0;                      // scales output into [-1, 1]

inline int hash_grad(const std::array<std::uint8_t, 256>& perm, int i, int j) {
  return perm[(static_cast<unsigned>(i) + perm[static_cast<unsigned>(j) & 255u]) & 255u] % 12;
}

}  // namespace

double simplex_noise2(const std::array<std::uint8_t, 256>& perm, double x, double y) {
  double value, dx, dy;
  simplex_noise2_grad(perm, x, y, value, dx, dy);
  return value;
}

void simplex_noise2_grad(const std::array<std::uint8_t, 256>& perm, double x, double y,
                         double& value, double& dx, double& dy) {
  const double s = (x + y) * kSkew2;
  const int i = static_cast<int>(std::floor(x + s));
  const int j = static_cast<int>(std::floor(y + s));
  const double t = (i + j) * kUnskew2;

  // Displacements from the three simplex corners.
  const double x0 = x - (i - t);
  const double y0 = y - (j - t);
  const int i1 = (x0 > y0) ? 1 : 0;
  const int j1 = 1 - i1;
  const double x1 = x0 - i1 + kUnskew2;
  const double y1 = y0 - j1 + kUnskew2;
  const double x2 = x0 - 1.0 + 2.0 * kUnskew2;
  const double y2 = y0 - 1.0 + 2.0 * kUnskew2;

  const int g0 = hash_grad(perm, i, j);
  const int g1 = hash_grad(perm, i + i1, j + j1);
  const int g2 = hash_grad(perm, i + 1, j + 1);

  value = 0.0;
  dx = 0.0;
  dy = 0.0;
  const double cx[3] = {x0, x1, x2};
  const double cy[3] = {y0, y1, y2};
  const int gi[3] = {g0, g1, g2};
  for (int c = 0; c < 3; ++c) {
    const double t_c = 0.5 - cx[c] * cx[c] - cy[c] * cy[c];
    if (t_c <= 0.0) continue;
    const double gx = kGrad2[gi[c]][0];
    const double gy = kGrad2[gi[c]][1];
    const double dot = gx * cx[c] + gy * cy[c];
    const double t2 = t_c * t_c;
    const double t4 = t2 * t2;
    value += t4 * dot;
    // d/dx [t^4 (g.d)] = t^3 (t gx - 8 x (g.d))
    const double t3 = t2 * t_c;
    dx += t3 * (t_c * gx - 8.0 * cx[c] * dot);
    dy += t3 * (t_c * gy - 8.0 * cy[c] * dot);
  }
  value *= kNorm2;
  dx *= kNorm2;
  dy *= kNorm2;
}

Vec3 HeightField::surface_normal(double x, double y) const {
  const Vec2 g = gradient(x, y);
  Vec3 n(-g.x(), -g.y(), 1.0);
  n.normalize();
  return n;
}

TerrainField::TerrainField(const TerrainParams& params) : params_(params) {
  params_.validate();
  perm_ = simplex_permutation(params_.seed);
}

double TerrainField::height(double x, double y) const {
  if (params_.amplitude == 0.0) return 0.0;
  double sum = 0.0, freq = 1.0 / params_.scale, amp = 1.0;
  for (int k = 0; k < params_.octaves; ++k) {
    sum += amp * simplex_noise2(perm_, x * freq, y * freq);
    freq *= params_.lacunarity;
    amp *= params_.persistence;
  }
  return params_.amplitude * sum;
}

Vec2 TerrainField::gradient(double x, double y) const {
  if (params_.amplitude == 0.0) return Vec2::Zero();
  double gx = 0.0, gy = 0.0, freq = 1.0 / params_.scale, amp = 1.0;
  for (int k = 0; k < params_.octaves; ++k) {
    double v, dx, dy;
    simplex_noise2_grad(perm_, x * freq, y * freq, v, dx, dy);
    gx += amp * freq * dx;
    gy += amp * freq * dy;
    freq *= params_.lacunarity;
    amp *= params_.persistence;
  }
  return {params_.amplitude * gx, params_.amplitude * gy};
}

TerrainGrid TerrainField::rasterize(double extent, int resolution) const {
  if (resolution < 2) throw InvalidParameter("terrain raster: resolution must be >= 2");
  if (!(extent > 0.0)) throw InvalidParameter("terrain raster: extent must be > 0");
  TerrainGrid grid;
  grid.extent = extent;
  grid.resolution = resolution;
  grid.heights.resize(static_cast<std::size_t>(resolution) * resolution);
  const double step = extent / (resolution - 1);
  for (int iy = 0; iy < resolution; ++iy) {
    const double y = -0.5 * extent + iy * step;
    for (int ix = 0; ix < resolution; ++ix) {
      const double x = -0.5 * extent + ix * step;
      grid.heights[static_cast<std::size_t>(iy) * resolution + ix] = height(x, y);
    }
  }
  return grid;
}

void TerrainGrid::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "x,y,z\n";
  const double step = extent / (resolution - 1);
  char buf[96];
  for (int iy = 0; iy < resolution; ++iy) {
    const double y = -0.5 * extent + iy * step;
    for (int ix = 0; ix < resolution; ++ix) {
      const double x = -0.5 * extent + ix * step;
      std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%.9f\n", x, y,
                    heights[static_cast<std::size_t>(iy) * resolution + ix]);
      out << buf;
    }
  }
}

void TerrainGrid::write_pgm16(const std::string& path, double height_bound) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "P5\n" << resolution << " " << resolution << "\n65535\n";
  const double span = (height_bound > 0.0) ? 2.0 * height_bound : 1.0;
  for (double h : heights) {
    const double unit = (h + (span * 0.5)) / span;
    const auto v = static_cast<std::uint16_t>(
        std::lround(std::clamp(unit, 0.0, 1.0) * 65535.0));
    // PGM stores 16-bit samples big-endian.
    const unsigned char bytes[2] = {static_cast<unsigned char>(v >> 8),
                                    static_cast<unsigned char>(v & 0xff)};
    out.write(reinterpret_cast<const char*>(bytes), 2);
  }
}

}  // namespace ballbot
