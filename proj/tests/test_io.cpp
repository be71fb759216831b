#include <catch2/catch_amalgamated.hpp>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include <entroreg/grid.hpp>
#include <entroreg/io.hpp>

using namespace entroreg;
using Catch::Approx;

namespace {

namespace fs = std::filesystem;

fs::path scratch() {
  fs::path dir = fs::temp_directory_path() / "entroreg_test_io";
  fs::create_directories(dir);
  return dir;
}

std::string slurp_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void spew_bytes(const fs::path& p, const std::string& bytes) {
  std::ofstream os(p, std::ios::binary | std::ios::trunc);
  os.write(bytes.data(), (std::streamsize)bytes.size());
  REQUIRE(os.good());
}

std::mt19937_64 eng(727272);

ScalarField random_field(const Grid& g) {
  ScalarField f = ScalarField::zeros(g);
  for (double& x : f.values) x = -4.0 + ((eng() >> 11) * 0x1.0p-53) * 8.0;
  return f;
}

}  // namespace

TEST_CASE("fld round trip is bit identical") {
  const fs::path path = scratch() / "roundtrip.fld";
  Grid g = Grid::make({4, 5}, {1.5, 1.0});
  ScalarField f = random_field(g);
  f.values[3] = 0.1 + 0.2;  // keep a value with a non-terminating binary expansion

  write_fld(path.string(), f);
  ScalarField back = read_fld(path.string());

  REQUIRE(back.grid.dim() == 2);
  REQUIRE(back.grid.extent(0) == 4);
  REQUIRE(back.grid.extent(1) == 5);
  REQUIRE(back.grid.length(0) == 1.5);
  REQUIRE(back.grid.length(1) == 1.0);
  REQUIRE(back.values.size() == f.values.size());
  for (std::size_t i = 0; i < f.values.size(); ++i) REQUIRE(back.values[i] == f.values[i]);

  // rewriting the same field produces the same bytes
  const std::string first = slurp_bytes(path);
  write_fld(path.string(), back);
  REQUIRE(slurp_bytes(path) == first);
}

TEST_CASE("fld layout is little-endian with the documented header") {
  const fs::path path = scratch() / "layout.fld";
  Grid g = Grid::make({2}, {1.0});
  ScalarField f{g, {1.5, -2.25}};
  write_fld(path.string(), f);

  const std::string bytes = slurp_bytes(path);
  REQUIRE(bytes.size() == 4 + 4 + 8 + 8 + 2 * 8);
  REQUIRE(bytes.compare(0, 4, "FLD1") == 0);

  auto u32at = [&](std::size_t off) {
    std::uint32_t v = 0;
    for (int b = 3; b >= 0; --b) v = (v << 8) | (unsigned char)bytes[off + (std::size_t)b];
    return v;
  };
  auto f64at = [&](std::size_t off) {
    std::uint64_t v = 0;
    for (int b = 7; b >= 0; --b) v = (v << 8) | (unsigned char)bytes[off + (std::size_t)b];
    double x;
    std::memcpy(&x, &v, 8);
    return x;
  };
  REQUIRE(u32at(4) == 1);                              // dimension
  REQUIRE(u32at(8) == 2);                              // node count (low half of the u64)
  REQUIRE(u32at(12) == 0);
  REQUIRE(f64at(16) == 1.0);                           // axis length
  REQUIRE(f64at(24) == 1.5);
  REQUIRE(f64at(32) == -2.25);
}

TEST_CASE("fld reader rejects malformed files") {
  const fs::path dir = scratch();
  const fs::path good = dir / "good.fld";
  Grid g = Grid::make({3, 3}, {1.0, 1.0});
  write_fld(good.string(), random_field(g));
  const std::string bytes = slurp_bytes(good);

  SECTION("missing file") {
    REQUIRE_THROWS_AS(read_fld((dir / "absent.fld").string()), InputError);
  }
  SECTION("bad magic") {
    std::string bad = bytes;
    bad[0] = 'X';
    spew_bytes(dir / "magic.fld", bad);
    REQUIRE_THROWS_AS(read_fld((dir / "magic.fld").string()), InputError);
  }
  SECTION("dimension out of range") {
    std::string bad = bytes;
    bad[4] = 0;
    spew_bytes(dir / "dim0.fld", bad);
    REQUIRE_THROWS_AS(read_fld((dir / "dim0.fld").string()), InputError);
    bad[4] = 4;
    spew_bytes(dir / "dim4.fld", bad);
    REQUIRE_THROWS_AS(read_fld((dir / "dim4.fld").string()), InputError);
  }
  SECTION("axis with fewer than 2 nodes") {
    std::string bad = bytes;
    bad[8] = 1;  // first axis node count -> 1
    spew_bytes(dir / "thin.fld", bad);
    REQUIRE_THROWS_AS(read_fld((dir / "thin.fld").string()), InputError);
  }
  SECTION("truncated payload") {
    std::string bad = bytes.substr(0, bytes.size() - 8);
    spew_bytes(dir / "short.fld", bad);
    REQUIRE_THROWS_AS(read_fld((dir / "short.fld").string()), InputError);
  }
  SECTION("trailing garbage") {
    std::string bad = bytes + std::string(8, '\0');
    spew_bytes(dir / "long.fld", bad);
    REQUIRE_THROWS_AS(read_fld((dir / "long.fld").string()), InputError);
  }
  SECTION("non-finite payload") {
    std::string bad = bytes;
    // first node value -> quiet NaN (little-endian f64)
    const std::size_t off = bytes.size() - 9 * 8;
    const unsigned char nan_bytes[8] = {0, 0, 0, 0, 0, 0, 0xf8, 0x7f};
    for (int b = 0; b < 8; ++b) bad[off + (std::size_t)b] = (char)nan_bytes[b];
    spew_bytes(dir / "nan.fld", bad);
    REQUIRE_THROWS_AS(read_fld((dir / "nan.fld").string()), InputError);
  }
  SECTION("writer refuses shifted-origin grids") {
    Grid off = Grid::make({3}, {1.0}, {0.5, 0.0, 0.0});
    ScalarField f = ScalarField::zeros(off);
    REQUIRE_THROWS_AS(write_fld((dir / "origin.fld").string(), f), InputError);
  }
  SECTION("writer refuses non-finite values") {
    ScalarField f = ScalarField::zeros(g);
    f.values[2] = std::nan("");
    REQUIRE_THROWS_AS(write_fld((dir / "nanval.fld").string(), f), InputError);
  }
}

TEST_CASE("pgm ingestion") {
  const fs::path dir = scratch();

  SECTION("P2 with comments, linear [0,1] mapping") {
    spew_bytes(dir / "a.pgm",
               "P2\n# a comment\n3 2\n255\n0 128 255\n64 32 16\n");
    ScalarField f = read_pgm((dir / "a.pgm").string());
    REQUIRE(f.grid.dim() == 2);
    REQUIRE(f.grid.extent(0) == 2);  // rows
    REQUIRE(f.grid.extent(1) == 3);  // columns
    REQUIRE(f.grid.length(1) == 1.0);
    REQUIRE(f.grid.length(0) == 0.5);  // pixel aspect ratio kept
    REQUIRE(f.values[0] == 0.0);
    REQUIRE(f.values[1] == Approx(128.0 / 255.0));
    REQUIRE(f.values[2] == 1.0);
    REQUIRE(f.values[3] == Approx(64.0 / 255.0));
    REQUIRE(f.values[5] == Approx(16.0 / 255.0));
  }
  SECTION("P5 matches the equivalent P2") {
    spew_bytes(dir / "b2.pgm", "P2\n3 2\n255\n0 128 255\n64 32 16\n");
    std::string raw = "P5\n3 2\n255\n";
    const unsigned char pix[6] = {0, 128, 255, 64, 32, 16};
    raw.append((const char*)pix, 6);
    spew_bytes(dir / "b5.pgm", raw);
    ScalarField a = read_pgm((dir / "b2.pgm").string());
    ScalarField b = read_pgm((dir / "b5.pgm").string());
    REQUIRE(a.values.size() == b.values.size());
    for (std::size_t i = 0; i < a.values.size(); ++i) REQUIRE(a.values[i] == b.values[i]);
  }
  SECTION("16-bit P5 uses big-endian pairs") {
    std::string raw = "P5\n2 2\n65535\n";
    const unsigned char pix[8] = {0x00, 0x00, 0xff, 0xff, 0x80, 0x00, 0x00, 0x01};
    raw.append((const char*)pix, 8);
    spew_bytes(dir / "wide.pgm", raw);
    ScalarField f = read_pgm((dir / "wide.pgm").string());
    REQUIRE(f.values[0] == 0.0);
    REQUIRE(f.values[1] == 1.0);
    REQUIRE(f.values[2] == Approx(32768.0 / 65535.0));
    REQUIRE(f.values[3] == Approx(1.0 / 65535.0));
  }
  SECTION("tall image: longer side gets unit length") {
    spew_bytes(dir / "tall.pgm", "P2\n2 4\n255\n0 0 0 0 0 0 0 0\n");
    ScalarField f = read_pgm((dir / "tall.pgm").string());
    REQUIRE(f.grid.extent(0) == 4);
    REQUIRE(f.grid.length(0) == 1.0);
    REQUIRE(f.grid.length(1) == Approx(1.0 / 3.0));
  }
  SECTION("malformed images are rejected") {
    spew_bytes(dir / "p3.pgm", "P3\n2 2\n255\n0 0 0 0\n");
    REQUIRE_THROWS_AS(read_pgm((dir / "p3.pgm").string()), InputError);
    spew_bytes(dir / "small.pgm", "P2\n1 2\n255\n0 0\n");
    REQUIRE_THROWS_AS(read_pgm((dir / "small.pgm").string()), InputError);
    spew_bytes(dir / "maxval.pgm", "P2\n2 2\n0\n0 0 0 0\n");
    REQUIRE_THROWS_AS(read_pgm((dir / "maxval.pgm").string()), InputError);
    spew_bytes(dir / "maxbig.pgm", "P2\n2 2\n70000\n0 0 0 0\n");
    REQUIRE_THROWS_AS(read_pgm((dir / "maxbig.pgm").string()), InputError);
    spew_bytes(dir / "over.pgm", "P2\n2 2\n255\n0 0 0 300\n");
    REQUIRE_THROWS_AS(read_pgm((dir / "over.pgm").string()), InputError);
    spew_bytes(dir / "trunc.pgm", "P5\n2 2\n255\nab");
    REQUIRE_THROWS_AS(read_pgm((dir / "trunc.pgm").string()), InputError);
    spew_bytes(dir / "text.pgm", "P2\n2 2\n255\n0 0 0 x\n");
    REQUIRE_THROWS_AS(read_pgm((dir / "text.pgm").string()), InputError);
  }
}
