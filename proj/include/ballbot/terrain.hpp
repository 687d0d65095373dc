#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ballbot/geometry.hpp"

namespace ballbot {

struct TerrainParams {
  double scale = 25.0;        // length units per noise cell
  int octaves = 4;
  double persistence = 0.2;
  double lacunarity = 2.0;
  double amplitude = 0.8;     // meters; vertical scaling of unit noise
  std::uint64_t seed = 0;

  void validate() const;
  // Upper bound on |h|: amplitude * sum_k persistence^k.
  double height_bound() const;
};

// Deterministic permutation table derivation shared by the field and any
// reference implementation: Fisher-Yates over 0..255 driven by raw
// mt19937_64 draws (modulo indexing), fully pinned by the C++ standard.
std::array<std::uint8_t, 256> simplex_permutation(std::uint64_t seed);

// Raw 2-D simplex noise over a permutation table, in [-1, 1].
double simplex_noise2(const std::array<std::uint8_t, 256>& perm, double x, double y);
// Value plus analytic partial derivatives.
void simplex_noise2_grad(const std::array<std::uint8_t, 256>& perm, double x, double y,
                         double& value, double& dx, double& dy);

// Continuous height function interface used by dynamics and sensors.
class HeightField {
 public:
  virtual ~HeightField() = default;
  virtual double height(double x, double y) const = 0;
  virtual Vec2 gradient(double x, double y) const = 0;
  // normalize([-dh/dx, -dh/dy, 1]); unit norm, positive z.
  Vec3 surface_normal(double x, double y) const;
};

struct TerrainGrid {
  double extent = 0.0;      // grid spans [-extent/2, extent/2]^2
  int resolution = 0;       // samples per side
  std::vector<double> heights;  // row-major, y-major rows

  void write_csv(const std::string& path) const;
  // 16-bit grayscale PGM (P5, maxval 65535), normalized by the height bound.
  void write_pgm16(const std::string& path, double height_bound) const;
};

// Immutable seeded heightfield; thread-safe for concurrent reads.
class TerrainField final : public HeightField {
 public:
  explicit TerrainField(const TerrainParams& params);

  double height(double x, double y) const override;
  Vec2 gradient(double x, double y) const override;

  const TerrainParams& params() const { return params_; }
  TerrainGrid rasterize(double extent, int resolution) const;

 private:
  TerrainParams params_;
  std::array<std::uint8_t, 256> perm_;
};

inline TerrainField generate_terrain(const TerrainParams& params) {
  return TerrainField(params);
}

// Flat plane z = offset + gx*x + gy*y; used for flat/inclined scenarios.
class PlaneField final : public HeightField {
 public:
  explicit PlaneField(double offset = 0.0, double gx = 0.0, double gy = 0.0)
      : offset_(offset), gx_(gx), gy_(gy) {}
  double height(double x, double y) const override { return offset_ + gx_ * x + gy_ * y; }
  Vec2 gradient(double, double) const override { return {gx_, gy_}; }

 private:
  double offset_, gx_, gy_;
};

}  // namespace ballbot
