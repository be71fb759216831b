#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include <entroreg/grid.hpp>

using namespace entroreg;
using Catch::Approx;

namespace {

std::mt19937_64 eng(91201);

double urand(double lo, double hi) {
  return lo + ((eng() >> 11) * 0x1.0p-53) * (hi - lo);
}

ScalarField random_field(const Grid& g, double amp) {
  ScalarField f = ScalarField::zeros(g);
  for (double& x : f.values) x = urand(-amp, amp);
  return f;
}

double weight_sum(const Grid& g) {
  double s = 0.0;
  for_each_node(g, [&](std::size_t, const std::size_t mi[kMaxDim]) { s += g.weight(mi); });
  return s;
}

}  // namespace

TEST_CASE("grid geometry") {
  Grid g = Grid::make({5, 9}, {2.0, 1.0});
  REQUIRE(g.dim() == 2);
  REQUIRE(g.extent(0) == 5);
  REQUIRE(g.extent(1) == 9);
  REQUIRE(g.spacing(0) == 0.5);
  REQUIRE(g.spacing(1) == 0.125);
  REQUIRE(g.node_count() == 45);
  REQUIRE(g.cell_count() == 32);
  REQUIRE(g.domain_measure() == 2.0);
  REQUIRE(g.cell_measure() == 0.0625);
  REQUIRE(g.min_spacing() == 0.125);

  // nodes sit at origin + integer multiples of the spacing
  REQUIRE(g.coordinate(0, 3) == 1.5);
  REQUIRE(g.coordinate(1, 5) == 0.625);
  std::size_t mi[kMaxDim] = {3, 5, 0};
  Point p = g.node_point(mi);
  REQUIRE(p[0] == 1.5);
  REQUIRE(p[1] == 0.625);

  Grid shifted = Grid::make({3}, {1.0}, {0.25, 0.0, 0.0});
  REQUIRE(shifted.coordinate(0, 2) == 1.25);

  // linear / unravel round-trip
  std::size_t out[kMaxDim];
  for (std::size_t lin = 0; lin < g.node_count(); ++lin) {
    g.unravel(lin, out);
    REQUIRE(g.linear(out) == lin);
  }
}

TEST_CASE("grid construction errors") {
  REQUIRE_THROWS_AS(Grid::make({}, {}), InputError);
  REQUIRE_THROWS_AS(Grid::make({4, 4, 4, 4}, {1, 1, 1, 1}), InputError);
  REQUIRE_THROWS_AS(Grid::make({1}, {1.0}), InputError);
  REQUIRE_THROWS_AS(Grid::make({4}, {0.0}), InputError);
  REQUIRE_THROWS_AS(Grid::make({4}, {-2.0}), InputError);
  REQUIRE_THROWS_AS(Grid::make({4}, {std::nan("")}), InputError);
  REQUIRE_THROWS_AS(Grid::make({4}, {1.0, 1.0}), InputError);
  REQUIRE_THROWS_AS(Grid::make({4}, {1.0}, {std::nan(""), 0.0, 0.0}), InputError);
}

TEST_CASE("trapezoid weights sum to the domain measure") {
  const Grid grids[] = {
      Grid::make({2}, {0.7}),
      Grid::make({5, 9}, {1.3, 0.9}),
      Grid::make({3, 4, 5}, {1.0, 2.0, 0.5}),
      Grid::make({17, 17}, {1.0, 1.0}),
  };
  for (const Grid& g : grids) {
    REQUIRE(weight_sum(g) == Approx(g.domain_measure()).epsilon(1e-14));
  }
}

TEST_CASE("quadrature on closed forms") {
  SECTION("constant field") {
    Grid g = Grid::make({7, 5}, {1.5, 1.0});
    ScalarField f = sample(g, [](const Point&) { return -2.25; });
    REQUIRE(quadrature_mean(f) == Approx(-2.25).epsilon(1e-14));
    REQUIRE(l2_norm_sq(f) == Approx(2.25 * 2.25 * 1.5).epsilon(1e-14));
    REQUIRE(integral(f) == Approx(-2.25 * 1.5).epsilon(1e-14));
  }
  SECTION("trapezoid is exact for linear integrands") {
    for (std::size_t n : {2u, 3u, 7u, 33u}) {
      Grid g = Grid::make({n}, {1.0});
      ScalarField f = sample(g, [](const Point& p) { return p[0]; });
      REQUIRE(quadrature_mean(f) == Approx(0.5).epsilon(1e-14));
    }
  }
  SECTION("x^2 on 1001 nodes") {
    Grid g = Grid::make({1001}, {1.0});
    ScalarField f = sample(g, [](const Point& p) { return p[0] * p[0]; });
    REQUIRE(quadrature_mean(f) == Approx(1.0 / 3.0).margin(1e-6));
  }
  SECTION("mean of the product with 1 equals the mean") {
    Grid g = Grid::make({6, 7}, {1.0, 2.0});
    ScalarField f = random_field(g, 3.0);
    ScalarField prod = f;
    for (double& x : prod.values) x *= 1.0;
    REQUIRE(quadrature_mean(prod) == quadrature_mean(f));
  }
}

TEST_CASE("interpolation basics") {
  SECTION("constant field is reproduced exactly") {
    Grid g = Grid::make({4, 4, 4}, {1.0, 1.0, 1.0});
    ScalarField f = sample(g, [](const Point&) { return 3.875; });
    for (int k = 0; k < 50; ++k) {
      Point p = {urand(-0.2, 1.2), urand(-0.2, 1.2), urand(-0.2, 1.2)};
      REQUIRE(interpolate(f, p) == 3.875);
    }
  }
  SECTION("two-node segment") {
    Grid g = Grid::make({2}, {1.0});
    ScalarField f{g, {0.0, 1.0}};
    REQUIRE(interpolate(f, {0.25, 0.0, 0.0}) == 0.25);
    REQUIRE(interpolate(f, {1.0, 0.0, 0.0}) == 1.0);
    REQUIRE(interpolate(f, {0.0, 0.0, 0.0}) == 0.0);
  }
  SECTION("linear fields are reproduced") {
    Grid g = Grid::make({6, 9}, {1.0, 2.0});
    ScalarField f = sample(g, [](const Point& p) { return 0.75 * p[0] - 1.25 * p[1] + 0.5; });
    for (int k = 0; k < 200; ++k) {
      Point p = {urand(0.0, 1.0), urand(0.0, 2.0), 0.0};
      const double want = 0.75 * p[0] - 1.25 * p[1] + 0.5;
      REQUIRE(interpolate(f, p) == Approx(want).margin(1e-13));
    }
  }
  SECTION("points outside the domain are clamped") {
    Grid g = Grid::make({5}, {1.0});
    ScalarField f = random_field(g, 1.0);
    REQUIRE(interpolate(f, {-3.0, 0.0, 0.0}) == f.values[0]);
    REQUIRE(interpolate(f, {42.0, 0.0, 0.0}) == f.values[4]);
  }
  SECTION("non-finite point is rejected") {
    Grid g = Grid::make({5}, {1.0});
    ScalarField f = random_field(g, 1.0);
    REQUIRE_THROWS_AS(interpolate(f, {std::nan(""), 0.0, 0.0}), InputError);
    REQUIRE_THROWS_AS(interpolate(f, {HUGE_VAL, 0.0, 0.0}), InputError);
  }
}

TEST_CASE("interpolation stays inside the enclosing cell's value range") {
  // brute-force corner bounds, independent of the library's cell location
  for (int d = 1; d <= 3; ++d) {
    std::vector<std::size_t> ext;
    std::vector<double> len;
    for (int a = 0; a < d; ++a) {
      ext.push_back(3 + (std::size_t)(eng() % 4));
      len.push_back(urand(0.5, 2.0));
    }
    Grid g = Grid::make(ext, len);
    for (int rep = 0; rep < 50; ++rep) {
      ScalarField f = random_field(g, 5.0);
      for (int k = 0; k < 20; ++k) {
        Point p = {0.0, 0.0, 0.0};
        for (int a = 0; a < d; ++a) p[a] = urand(-0.3 * len[a], 1.3 * len[a]);
        const double got = interpolate(f, p);

        std::size_t ci[kMaxDim] = {0, 0, 0};
        for (int a = 0; a < d; ++a) {
          double q = std::min(std::max(p[a], 0.0), g.length(a));
          double c = std::floor(q / g.spacing(a));
          ci[a] = (std::size_t)std::min(std::max(c, 0.0), (double)(g.extent(a) - 2));
        }
        double lo = HUGE_VAL, hi = -HUGE_VAL;
        for (int m = 0; m < (1 << d); ++m) {
          std::size_t idx[kMaxDim] = {0, 0, 0};
          for (int a = 0; a < d; ++a) idx[a] = ci[a] + ((m >> a) & 1);
          const double c = f.values[g.linear(idx)];
          lo = std::min(lo, c);
          hi = std::max(hi, c);
        }
        REQUIRE(got >= lo);
        REQUIRE(got <= hi);
      }
    }
  }
}

TEST_CASE("per-cell forward-difference gradients") {
  SECTION("x^2 on three nodes") {
    Grid g = Grid::make({3}, {1.0});
    ScalarField f{g, {0.0, 0.25, 1.0}};
    auto grad = gradient_fd(f);
    REQUIRE(grad.size() == 1);
    REQUIRE(grad[0].values.size() == 2);
    REQUIRE(grad[0].values[0] == 0.5);
    REQUIRE(grad[0].values[1] == 1.5);
  }
  SECTION("constant field") {
    Grid g = Grid::make({4, 5}, {1.0, 1.0});
    ScalarField f = sample(g, [](const Point&) { return 7.0; });
    auto grad = gradient_fd(f);
    REQUIRE(grad.size() == 2);
    for (const CellField& c : grad)
      for (double x : c.values) REQUIRE(x == 0.0);
  }
  SECTION("linear field gives the slope in every cell") {
    Grid g = Grid::make({4, 6, 3}, {1.0, 2.0, 1.0});
    const double a0 = 1.5, a1 = -0.75, a2 = 0.25;
    ScalarField f =
        sample(g, [&](const Point& p) { return a0 * p[0] + a1 * p[1] + a2 * p[2] - 2.0; });
    auto grad = gradient_fd(f);
    const double want[3] = {a0, a1, a2};
    for (int axis = 0; axis < 3; ++axis)
      for (double x : grad[(std::size_t)axis].values)
        REQUIRE(x == Approx(want[axis]).margin(1e-12));
  }
}

TEST_CASE("nested transfer") {
  Grid coarse = Grid::make({5, 5}, {1.0, 1.0});
  Grid fine = Grid::make({9, 9}, {1.0, 1.0});

  SECTION("constants survive both directions") {
    ScalarField c = sample(coarse, [](const Point&) { return 1.25; });
    ScalarField up = prolong_field(c, fine);
    for (double x : up.values) REQUIRE(x == 1.25);
    ScalarField down = restrict_field(up, coarse);
    for (double x : down.values) REQUIRE(x == 1.25);
  }
  SECTION("prolongation reproduces linear fields") {
    ScalarField c = sample(coarse, [](const Point& p) { return 2.0 * p[0] - p[1]; });
    ScalarField up = prolong_field(c, fine);
    ScalarField want = sample(fine, [](const Point& p) { return 2.0 * p[0] - p[1]; });
    for (std::size_t i = 0; i < up.values.size(); ++i)
      REQUIRE(up.values[i] == Approx(want.values[i]).margin(1e-14));
  }
  SECTION("prolong then restrict is the identity") {
    ScalarField hat = ScalarField::zeros(coarse);
    std::size_t mid[kMaxDim] = {2, 2, 0};
    hat.values[coarse.linear(mid)] = 1.0;
    ScalarField back = restrict_field(prolong_field(hat, fine), coarse);
    for (std::size_t i = 0; i < hat.values.size(); ++i)
      REQUIRE(back.values[i] == hat.values[i]);

    ScalarField r = random_field(coarse, 2.0);
    ScalarField rback = restrict_field(prolong_field(r, fine), coarse);
    for (std::size_t i = 0; i < r.values.size(); ++i)
      REQUIRE(rback.values[i] == r.values[i]);
  }
  SECTION("prolongation preserves the nodal max norm") {
    for (int rep = 0; rep < 20; ++rep) {
      ScalarField r = random_field(coarse, 3.0);
      REQUIRE(max_abs(prolong_field(r, fine)) == max_abs(r));
    }
  }
  SECTION("non-nested grids are rejected") {
    ScalarField f9 = random_field(fine, 1.0);
    REQUIRE_THROWS_AS(restrict_field(f9, Grid::make({6, 6}, {1.0, 1.0})), InputError);
    REQUIRE_THROWS_AS(restrict_field(f9, Grid::make({5, 5}, {2.0, 1.0})), InputError);
    ScalarField c = random_field(coarse, 1.0);
    REQUIRE_THROWS_AS(prolong_field(c, Grid::make({12, 12}, {1.0, 1.0})), InputError);
  }
  SECTION("vector fields transfer componentwise") {
    VectorField v = VectorField::zeros(coarse);
    v.comp[0] = random_field(coarse, 1.0);
    v.comp[1] = random_field(coarse, 1.0);
    VectorField up = prolong_field(v, fine);
    REQUIRE(up.comp.size() == 2);
    VectorField down = restrict_field(up, coarse);
    for (int a = 0; a < 2; ++a)
      for (std::size_t i = 0; i < v.comp[(std::size_t)a].values.size(); ++i)
        REQUIRE(down.comp[(std::size_t)a].values[i] == v.comp[(std::size_t)a].values[i]);
  }
}

TEST_CASE("vector field helpers") {
  Grid g = Grid::make({5, 5}, {1.0, 1.0});
  VectorField v = VectorField::zeros(g);
  REQUIRE(v.comp.size() == 2);
  REQUIRE(v.dim() == 2);
  REQUIRE(v.boundary_is_zero());
  REQUIRE(v.max_speed() == 0.0);

  for (double& x : v.comp[0].values) x = 3.0;
  for (double& x : v.comp[1].values) x = -4.0;
  REQUIRE(v.max_speed() == 5.0);
  REQUIRE_FALSE(v.boundary_is_zero());

  v.project_boundary();
  REQUIRE(v.boundary_is_zero());
  REQUIRE(v.max_speed() == 5.0);  // interior nodes keep their values

  // max_abs_diff guards against geometry mixups
  ScalarField a = random_field(g, 1.0);
  ScalarField b = a;
  b.values[7] += 0.5;
  REQUIRE(max_abs_diff(a, b) == 0.5);
  REQUIRE_THROWS_AS(max_abs_diff(a, ScalarField::zeros(Grid::make({5, 6}, {1.0, 1.0}))),
                    InputError);
}
