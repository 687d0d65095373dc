#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "ballbot/errors.hpp"
#include "ballbot/terrain.hpp"

using namespace ballbot;

namespace {

// Independent reference implementation of 2-D simplex noise, written
// directly from the algorithm description. Shares only the seed->permutation
// derivation with the production code.
double reference_snoise2(const std::array<std::uint8_t, 256>& perm, double xin,
                         double yin) {
  static const int grad[12][2] = {{1, 1}, {-1, 1}, {1, -1}, {-1, -1}, {1, 0}, {-1, 0},
                                  {1, 0}, {-1, 0}, {0, 1},  {0, -1},  {0, 1}, {0, -1}};
  const double f2 = 0.5 * (std::sqrt(3.0) - 1.0);
  const double g2 = (3.0 - std::sqrt(3.0)) / 6.0;

  const double skew = (xin + yin) * f2;
  const int i = static_cast<int>(std::floor(xin + skew));
  const int j = static_cast<int>(std::floor(yin + skew));

  int corner_offsets[3][2] = {{0, 0}, {0, 1}, {1, 1}};
  {
    const double unskew = (i + j) * g2;
    if (xin - (i - unskew) > yin - (j - unskew)) {
      corner_offsets[1][0] = 1;
      corner_offsets[1][1] = 0;
    }
  }

  double total = 0.0;
  for (int c = 0; c < 3; ++c) {
    const int ci = i + corner_offsets[c][0];
    const int cj = j + corner_offsets[c][1];
    // World position of this lattice corner, then the displacement to it.
    const double unskew_c = (ci + cj) * g2;
    const double dx = xin - (ci - unskew_c);
    const double dy = yin - (cj - unskew_c);
    const double att = 0.5 - dx * dx - dy * dy;
    if (att <= 0.0) continue;
    const int gi = perm[(static_cast<unsigned>(ci) +
                         perm[static_cast<unsigned>(cj) & 255u]) & 255u] % 12;
    const double t4 = att * att * att * att;
    total += t4 * (grad[gi][0] * dx + grad[gi][1] * dy);
  }
  return 70.0 * total;
}

double reference_height(const TerrainParams& p, double x, double y) {
  const auto perm = simplex_permutation(p.seed);
  double sum = 0.0, amp = 1.0, freq = 1.0 / p.scale;
  for (int k = 0; k < p.octaves; ++k) {
    sum += amp * reference_snoise2(perm, x * freq, y * freq);
    freq *= p.lacunarity;
    amp *= p.persistence;
  }
  return p.amplitude * sum;
}

}  // namespace

TEST_CASE("terrain: parameter validation") {
  TerrainParams p;
  p.octaves = 0;
  CHECK_THROWS_AS(generate_terrain(p), InvalidParameter);
  p = TerrainParams{};
  p.lacunarity = 1.0;
  CHECK_THROWS_AS(generate_terrain(p), InvalidParameter);
  p = TerrainParams{};
  p.persistence = 0.0;
  CHECK_THROWS_AS(generate_terrain(p), InvalidParameter);
  p = TerrainParams{};
  p.amplitude = -0.1;
  CHECK_THROWS_AS(generate_terrain(p), InvalidParameter);
}

TEST_CASE("terrain: repeated queries are bitwise identical") {
  TerrainParams p;
  p.seed = 42;
  const TerrainField field = generate_terrain(p);
  const double a = field.height(1.3, -2.7);
  const double b = field.height(1.3, -2.7);
  CHECK(a == b);

  const TerrainField field2 = generate_terrain(p);
  CHECK(field2.height(1.3, -2.7) == a);
  CHECK(field2.height(17.9, 33.1) == field.height(17.9, 33.1));
}

TEST_CASE("terrain: amplitude zero gives a flat field") {
  TerrainParams p;
  p.amplitude = 0.0;
  const TerrainField field = generate_terrain(p);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  for (int k = 0; k < 100; ++k) {
    const double x = u(rng), y = u(rng);
    CHECK(field.height(x, y) == 0.0);
    CHECK(field.gradient(x, y).norm() == 0.0);
    CHECK(field.surface_normal(x, y).isApprox(Vec3(0, 0, 1)));
  }
}

TEST_CASE("terrain: octave amplitude bound over 1e6 samples") {
  TerrainParams p;
  p.seed = 42;
  const TerrainField field = generate_terrain(p);
  const double bound = p.amplitude * (1.0 + 0.2 + 0.04 + 0.008);
  CHECK(field.params().height_bound() == doctest::Approx(bound).epsilon(1e-12));
  std::mt19937_64 rng(123);
  std::uniform_real_distribution<double> u(-500.0, 500.0);
  double worst = 0.0;
  for (int k = 0; k < 1000000; ++k) {
    const double h = field.height(u(rng), u(rng));
    worst = std::max(worst, std::abs(h));
    REQUIRE(std::abs(h) <= bound);
  }
  CHECK(worst > 0.1 * bound);  // the field actually uses its range
}

TEST_CASE("terrain: matches the independent reference implementation") {
  TerrainParams p;
  p.seed = 7;
  const TerrainField field = generate_terrain(p);
  CHECK(field.height(0.0, 0.0) ==
        doctest::Approx(reference_height(p, 0.0, 0.0)).epsilon(1e-6));

  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-200.0, 200.0);
  for (int k = 0; k < 2000; ++k) {
    const double x = u(rng), y = u(rng);
    const double got = field.height(x, y);
    const double want = reference_height(p, x, y);
    REQUIRE(got == doctest::Approx(want).epsilon(1e-9));
  }
}

TEST_CASE("terrain: analytic gradient matches central differences") {
  TerrainParams p;
  p.seed = 3;
  const TerrainField field = generate_terrain(p);
  const double step = 1e-4;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  double max_rel = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double x = u(rng), y = u(rng);
    const Vec2 g = field.gradient(x, y);
    const double fdx = (field.height(x + step, y) - field.height(x - step, y)) / (2 * step);
    const double fdy = (field.height(x, y + step) - field.height(x, y - step)) / (2 * step);
    const double scale = std::max({std::abs(fdx), std::abs(fdy), 1e-6});
    max_rel = std::max(max_rel, std::abs(g.x() - fdx) / scale);
    max_rel = std::max(max_rel, std::abs(g.y() - fdy) / scale);
  }
  CHECK(max_rel < 1e-3);
}

TEST_CASE("terrain: gradient scales linearly with amplitude") {
  TerrainParams p1;
  p1.seed = 11;
  p1.amplitude = 1.0;
  TerrainParams p2 = p1;
  p2.amplitude = 2.0;
  const TerrainField f1 = generate_terrain(p1);
  const TerrainField f2 = generate_terrain(p2);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int k = 0; k < 200; ++k) {
    const double x = u(rng), y = u(rng);
    CHECK(f2.gradient(x, y).x() == doctest::Approx(2.0 * f1.gradient(x, y).x()));
    CHECK(f2.gradient(x, y).y() == doctest::Approx(2.0 * f1.gradient(x, y).y()));
    CHECK(f2.height(x, y) == doctest::Approx(2.0 * f1.height(x, y)));
  }
}

TEST_CASE("terrain: surface normals are unit length with positive z") {
  TerrainParams p;
  p.seed = 21;
  const TerrainField field = generate_terrain(p);
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  for (int k = 0; k < 1000; ++k) {
    const Vec3 n = field.surface_normal(u(rng), u(rng));
    REQUIRE(std::abs(n.norm() - 1.0) < 1e-9);
    REQUIRE(n.z() > 0.0);
  }
  // Closed form: plane with gradient (1, 0).
  const PlaneField plane(0.0, 1.0, 0.0);
  const Vec3 n = plane.surface_normal(3.0, -4.0);
  CHECK(n.x() == doctest::Approx(-1.0 / std::sqrt(2.0)));
  CHECK(n.y() == doctest::Approx(0.0));
  CHECK(n.z() == doctest::Approx(1.0 / std::sqrt(2.0)));
}

TEST_CASE("terrain: raster export") {
  TerrainParams p;
  p.seed = 5;
  const TerrainField field = generate_terrain(p);
  const TerrainGrid grid = field.rasterize(20.0, 16);
  CHECK(grid.heights.size() == 16u * 16u);

  const auto dir = std::filesystem::temp_directory_path() / "bb_terrain_test";
  std::filesystem::create_directories(dir);
  const std::string csv = (dir / "t.csv").string();
  const std::string pgm = (dir / "t.pgm").string();
  grid.write_csv(csv);
  grid.write_pgm16(pgm, field.params().height_bound());

  std::ifstream fcsv(csv);
  std::string line;
  std::getline(fcsv, line);
  CHECK(line == "x,y,z");
  int rows = 0;
  while (std::getline(fcsv, line)) ++rows;
  CHECK(rows == 16 * 16);

  std::ifstream fpgm(pgm, std::ios::binary);
  std::string magic;
  fpgm >> magic;
  CHECK(magic == "P5");
  int w, h, maxval;
  fpgm >> w >> h >> maxval;
  CHECK(w == 16);
  CHECK(h == 16);
  CHECK(maxval == 65535);
}
