#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <functional>

#include "test_helpers.hpp"

using namespace sysrisk;
using Catch::Matchers::WithinAbs;

TEST_CASE("Simpson quadrature examples") {
  REQUIRE_THAT(integrate_unit_interval([](double g) { return g; }),
               WithinAbs(0.5, 1e-12));
  REQUIRE_THAT(integrate_unit_interval([](double g) { return g * g; }),
               WithinAbs(1.0 / 3.0, 1e-12));
  REQUIRE_THAT(integrate_unit_interval([](double g) { return std::exp(g); }),
               WithinAbs(1.718281828459045, 1e-8));
}

TEST_CASE("Simpson is exact for cubics at any node count") {
  Rng rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const double a = rng.uniform(-2, 2), b = rng.uniform(-2, 2);
    const double c = rng.uniform(-2, 2), d = rng.uniform(-2, 2);
    const auto f = [&](double g) { return ((a * g + b) * g + c) * g + d; };
    const double exact = a / 4 + b / 3 + c / 2 + d;
    for (int nodes : {3, 5, 11, 201}) {
      QuadratureConfig cfg;
      cfg.initial_nodes = nodes;
      cfg.tol = 1e-13;
      REQUIRE_THAT(integrate_unit_interval(f, cfg), WithinAbs(exact, 1e-12));
    }
  }
}

TEST_CASE("quadrature flags non-convergence") {
  QuadratureConfig cfg;
  cfg.initial_nodes = 3;
  cfg.max_nodes = 5;
  cfg.tol = 1e-15;
  // high-frequency integrand cannot settle with five nodes
  REQUIRE_THROWS_AS(
      integrate_unit_interval([](double g) { return std::sin(500.0 * g); }, cfg),
      NoConvergence);
}

TEST_CASE("central differences on smooth functions") {
  const auto square = [](std::span<const double> x) { return x[0] * x[0]; };
  const std::array<double, 1> x{1.0}, u{1.0};
  REQUIRE_THAT(directional_derivative_fd(square, x, u), WithinAbs(2.0, 1e-8));
}

TEST_CASE("central differences are exact for linear maps") {
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t d = 1 + rng.uniform_int(0, 4);
    const std::vector<double> coef = rng.uniform_vector(d, -3.0, 3.0);
    const auto lin = [&](std::span<const double> z) {
      double s = 0.0;
      for (std::size_t i = 0; i < d; ++i) s += coef[i] * z[i];
      return s;
    };
    const std::vector<double> x = rng.uniform_vector(d, -2.0, 2.0);
    const std::vector<double> u = rng.uniform_vector(d, -2.0, 2.0);
    double expected = 0.0;
    for (std::size_t i = 0; i < d; ++i) expected += coef[i] * u[i];
    REQUIRE_THAT(directional_derivative_fd(lin, x, u), WithinAbs(expected, 1e-9));
  }
}

TEST_CASE("one-sided forward difference resolves the hinge at zero") {
  const auto pos = [](std::span<const double> x) { return std::max(x[0], 0.0); };
  const std::array<double, 1> x{0.0};
  const std::array<double, 1> up{1.0}, down{-1.0};
  REQUIRE_THAT(directional_derivative_fd_right(pos, x, up), WithinAbs(1.0, 1e-9));
  REQUIRE_THAT(directional_derivative_fd_right(pos, x, down), WithinAbs(0.0, 1e-9));
}

TEST_CASE("bisection examples") {
  REQUIRE_THAT(bisect_root([](double m) { return m - 2.0; }, 0.0, 1.0),
               WithinAbs(2.0, 1e-9));
  REQUIRE_THAT(bisect_root([](double m) { return std::exp(m) - 1.0; }, -3.0, 5.0),
               WithinAbs(0.0, 1e-9));
  REQUIRE_THROWS_AS(bisect_root([](double) { return 1.0; }, 0.0, 1.0), NoBracket);
}

TEST_CASE("grid minimize finds a quadratic minimum") {
  Box box;
  box.bounds = {{-5.0, 5.0}};
  const auto f = [](std::span<const double> z) {
    return (z[0] - 1.0) * (z[0] - 1.0);
  };
  const GridResult r = grid_minimize(f, box, 101, 3);
  REQUIRE(r.value <= 1e-6);
  REQUIRE_THAT(r.argmin[0], WithinAbs(1.0, 1e-3));
}

TEST_CASE("grid minimize handles multiple dimensions") {
  Box box;
  box.bounds = {{-4.0, 4.0}, {-4.0, 4.0}, {-4.0, 4.0}};
  const auto f = [](std::span<const double> z) {
    return (z[0] + 1.0) * (z[0] + 1.0) + (z[1] - 2.0) * (z[1] - 2.0) +
           z[2] * z[2] + 0.5;
  };
  const GridResult r = grid_minimize(f, box, 21, 8);
  REQUIRE_THAT(r.value, WithinAbs(0.5, 1e-6));
  REQUIRE_THAT(r.argmin[0], WithinAbs(-1.0, 1e-3));
  REQUIRE_THAT(r.argmin[1], WithinAbs(2.0, 1e-3));
}

// Randomized smooth triples for the differential calculus rules: sums,
// products and compositions built from coordinate polynomials and
// exponentials.
namespace {

using VecFn = std::function<std::vector<double>(std::span<const double>)>;

VecFn random_smooth_map(Rng& rng, std::size_t dim_in, std::size_t dim_out) {
  std::vector<std::vector<double>> lin(dim_out);
  std::vector<double> curve(dim_out), offset(dim_out);
  for (std::size_t j = 0; j < dim_out; ++j) {
    lin[j] = rng.uniform_vector(dim_in, -1.0, 1.0);
    curve[j] = rng.uniform(-0.5, 0.5);
    offset[j] = rng.uniform(-1.0, 1.0);
  }
  return [=](std::span<const double> x) {
    std::vector<double> out(dim_out);
    for (std::size_t j = 0; j < dim_out; ++j) {
      double s = offset[j];
      for (std::size_t i = 0; i < dim_in; ++i) s += lin[j][i] * x[i];
      out[j] = s + curve[j] * std::sin(s) + 0.1 * std::exp(0.3 * s);
    }
    return out;
  };
}

}  // namespace

TEST_CASE("Gateaux calculus rules hold numerically on smooth triples") {
  Rng rng(77);
  double worst_sum = 0.0, worst_prod = 0.0, worst_chain = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t d = 2 + rng.uniform_int(0, 2);
    const VecFn F = random_smooth_map(rng, d, d);
    const VecFn G = random_smooth_map(rng, d, d);
    const VecFn H = random_smooth_map(rng, d, d);
    const std::vector<double> x = rng.uniform_vector(d, -1.0, 1.0);
    const std::vector<double> u = rng.uniform_vector(d, -1.0, 1.0);

    const auto dF = directional_derivative_fd_vec(F, x, u);
    const auto dG = directional_derivative_fd_vec(G, x, u);

    {  // sum rule
      const auto sum_fn = [&](std::span<const double> z) {
        auto a = F(z);
        const auto b = G(z);
        for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
        return a;
      };
      const auto ds = directional_derivative_fd_vec(sum_fn, x, u);
      for (std::size_t i = 0; i < d; ++i)
        worst_sum = std::max(worst_sum, std::abs(ds[i] - (dF[i] + dG[i])));
    }

    {  // product rule (element-wise product)
      const auto prod_fn = [&](std::span<const double> z) {
        auto a = F(z);
        const auto b = G(z);
        for (std::size_t i = 0; i < a.size(); ++i) a[i] *= b[i];
        return a;
      };
      const auto dp = directional_derivative_fd_vec(prod_fn, x, u);
      const auto fx = F(x);
      const auto gx = G(x);
      for (std::size_t i = 0; i < d; ++i)
        worst_prod =
            std::max(worst_prod, std::abs(dp[i] - (dF[i] * gx[i] + fx[i] * dG[i])));
    }

    {  // chain rule: d(G o H)(x, u) = dG(H(x), dH(x, u))
      const auto comp_fn = [&](std::span<const double> z) { return G(H(z)); };
      const auto dc = directional_derivative_fd_vec(comp_fn, x, u);
      const auto hx = H(x);
      const auto dH = directional_derivative_fd_vec(H, x, u);
      const auto expected = directional_derivative_fd_vec(G, hx, dH);
      for (std::size_t i = 0; i < d; ++i)
        worst_chain = std::max(worst_chain, std::abs(dc[i] - expected[i]));
    }
  }
  REQUIRE(worst_sum <= 1e-5);
  REQUIRE(worst_prod <= 1e-5);
  REQUIRE(worst_chain <= 1e-5);
}
