#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include <entroreg/grid.hpp>
#include <entroreg/sobolev.hpp>

using namespace entroreg;
using Catch::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

std::mt19937_64 eng(60601);

double urand(double lo, double hi) {
  return lo + ((eng() >> 11) * 0x1.0p-53) * (hi - lo);
}

ScalarField random_interior(const Grid& g, double amp) {
  ScalarField f = ScalarField::zeros(g);
  for_each_node(g, [&](std::size_t lin, const std::size_t mi[kMaxDim]) {
    if (!g.on_boundary(mi)) f.values[lin] = urand(-amp, amp);
  });
  return f;
}

double nodal_dot(const ScalarField& a, const ScalarField& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) s += a.values[i] * b.values[i];
  return s;
}

}  // namespace

TEST_CASE("fractional penalty closed forms") {
  SECTION("zero field") {
    Grid g = Grid::make({9, 9}, {1.0, 1.0});
    REQUIRE(hs_norm_sq(ScalarField::zeros(g), 0.25) == 0.0);
    REQUIRE(hs_norm_sq(VectorField::zeros(g), 0.25) == 0.0);
  }
  SECTION("first sine mode on the unit interval") {
    Grid g = Grid::make({257}, {1.0});
    ScalarField v = sample(g, [](const Point& p) { return std::sin(kPi * p[0]); });
    const double w = 1.0 + kPi * kPi;
    REQUIRE(hs_norm_sq(v, 0.0) == Approx(0.5 * w).epsilon(1e-3));
    REQUIRE(hs_norm_sq(v, 0.25) == Approx(0.5 * std::pow(w, 1.25)).epsilon(1e-3));
  }
  SECTION("higher mode picks up its own multiplier") {
    Grid g = Grid::make({257}, {1.0});
    ScalarField v = sample(g, [](const Point& p) { return std::sin(3.0 * kPi * p[0]); });
    const double w = 1.0 + 9.0 * kPi * kPi;
    REQUIRE(hs_norm_sq(v, 0.25) == Approx(0.5 * std::pow(w, 1.25)).epsilon(1e-3));
  }
}

TEST_CASE("diagonal gradient") {
  SECTION("single mode stays a single mode") {
    Grid g = Grid::make({33}, {1.0});
    ScalarField v = sample(g, [](const Point& p) { return std::sin(2.0 * kPi * p[0]); });
    ScalarField grad = hs_grad(v, 0.25);
    // gradient is a scalar multiple of the input at every interior node
    const std::size_t ref = 5;
    const double lambda = grad.values[ref] / v.values[ref];
    for (std::size_t i = 1; i + 1 < g.node_count(); ++i)
      REQUIRE(grad.values[i] == Approx(lambda * v.values[i]).margin(1e-10));
    REQUIRE(grad.values[0] == 0.0);
    REQUIRE(grad.values[g.node_count() - 1] == 0.0);
  }
  SECTION("euler identity for the quadratic form") {
    for (const Grid& g : {Grid::make({9}, {1.0}), Grid::make({8, 9}, {1.0, 1.5})}) {
      ScalarField v = random_interior(g, 1.0);
      for (double sigma : {0.0, 0.1, 0.25, 0.49}) {
        ScalarField grad = hs_grad(v, sigma);
        REQUIRE(nodal_dot(grad, v) == Approx(2.0 * hs_norm_sq(v, sigma)).epsilon(1e-12));
      }
    }
  }
  SECTION("directional derivatives match finite differences") {
    Grid g = Grid::make({8, 8}, {1.0, 1.0});
    ScalarField v = random_interior(g, 1.0);
    ScalarField grad = hs_grad(v, 0.25);
    for (int k = 0; k < 10; ++k) {
      ScalarField dir = random_interior(g, 1.0);
      const double eps = 1e-6;
      ScalarField vp = v, vm = v;
      for (std::size_t i = 0; i < v.values.size(); ++i) {
        vp.values[i] += eps * dir.values[i];
        vm.values[i] -= eps * dir.values[i];
      }
      const double fd = (hs_norm_sq(vp, 0.25) - hs_norm_sq(vm, 0.25)) / (2.0 * eps);
      const double an = nodal_dot(grad, dir);
      REQUIRE(std::abs(fd - an) / std::max(std::abs(an), 1e-12) <= 1e-7);
    }
  }
}

TEST_CASE("penalty ordering") {
  Grid g = Grid::make({9, 9}, {1.0, 1.0});
  for (int rep = 0; rep < 30; ++rep) {
    ScalarField v = random_interior(g, 2.0);
    const double s0 = hs_norm_sq(v, 0.0);
    const double s1 = hs_norm_sq(v, 0.1);
    const double s2 = hs_norm_sq(v, 0.3);
    const double s3 = hs_norm_sq(v, 0.49);
    REQUIRE(s0 <= s1);
    REQUIRE(s1 <= s2);
    REQUIRE(s2 <= s3);
    // every multiplier is >= 1, so the penalty dominates the L2 norm
    REQUIRE(s0 >= l2_norm_sq(v) - 1e-12 * std::max(1.0, l2_norm_sq(v)));
  }
}

TEST_CASE("vanishing-sigma limit recovers the H1 norm under refinement") {
  // v = sin(pi x)^2: |v|_L2^2 = 3/8, |v'|_L2^2 = pi^2 / 2
  const double exact = 3.0 / 8.0 + kPi * kPi / 2.0;
  double err[3];
  const std::size_t sizes[3] = {17, 33, 65};
  for (int k = 0; k < 3; ++k) {
    Grid g = Grid::make({sizes[k]}, {1.0});
    ScalarField v = sample(g, [](const Point& p) {
      const double s = std::sin(kPi * p[0]);
      return s * s;
    });
    err[k] = std::abs(hs_norm_sq(v, 1e-9) - exact);
  }
  for (int k = 0; k + 1 < 3; ++k) {
    const double order = std::log2(err[k] / err[k + 1]);
    REQUIRE(order >= 1.8);
  }
}

TEST_CASE("argument validation") {
  Grid g = Grid::make({9}, {1.0});
  ScalarField v = random_interior(g, 1.0);
  REQUIRE_THROWS_AS(hs_norm_sq(v, 0.5), InputError);
  REQUIRE_THROWS_AS(hs_norm_sq(v, 0.55), InputError);
  REQUIRE_THROWS_AS(hs_norm_sq(v, -0.01), InputError);
  REQUIRE_THROWS_AS(hs_grad(v, 0.5), InputError);

  ScalarField bad = v;
  bad.values[0] = 0.125;
  REQUIRE_THROWS_AS(hs_norm_sq(bad, 0.25), InputError);
  REQUIRE_THROWS_AS(hs_grad(bad, 0.25), InputError);
}

TEST_CASE("vector penalty sums the components") {
  Grid g = Grid::make({9, 9}, {1.0, 1.0});
  ScalarField a = random_interior(g, 1.0);
  ScalarField b = random_interior(g, 1.0);
  VectorField v = VectorField::zeros(g);
  v.comp[0] = a;
  v.comp[1] = b;
  REQUIRE(hs_norm_sq(v, 0.25) ==
          Approx(hs_norm_sq(a, 0.25) + hs_norm_sq(b, 0.25)).epsilon(1e-14));
  VectorField grad = hs_grad(v, 0.25);
  ScalarField ga = hs_grad(a, 0.25);
  for (std::size_t i = 0; i < ga.values.size(); ++i)
    REQUIRE(grad.comp[0].values[i] == ga.values[i]);
}
