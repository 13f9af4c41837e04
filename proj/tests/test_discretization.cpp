#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>

#include "discretization.hpp"
#include "oracles.hpp"

using parabulk::BulkSurfaceField;
using parabulk::DiscreteOperators;
using parabulk::Error;
using parabulk::Geometry;

namespace {

BulkSurfaceField random_field(const DiscreteOperators& ops, std::mt19937_64& eng) {
  BulkSurfaceField z(ops.geometry());
  for (int i = 0; i < ops.size(); ++i) z.data[i] = oracles::uniform(eng, -1.0, 1.0);
  return z;
}

BulkSurfaceField cosine_mode(const DiscreteOperators& ops, int k) {
  const Geometry& g = ops.geometry();
  BulkSurfaceField z(g);
  const double kappa = 2.0 * std::numbers::pi * k / g.lx;
  for (int i = 0; i < ops.size(); ++i) z.data[i] = std::cos(kappa * ops.node_x(i));
  return z;
}

} // namespace

TEST_CASE("strip weights, volumes and stiffness kernel") {
  const auto ops = DiscreteOperators::build(Geometry::make_strip(1.0, 4, 2));
  CHECK(ops.vol_omega() == doctest::Approx(1.0));
  CHECK(ops.vol_gamma() == doctest::Approx(2.0));
  // base product of spacings
  const double hx = 0.25, hy = 1.0 / 3.0;
  CHECK(hx * hy == doctest::Approx(0.25 * (1.0 / 3.0)));
  // boundary weight
  CHECK(ops.weights()[ops.n_bulk()] == doctest::Approx(0.25));
  // bulk weights sum exactly to |Omega|, surface to |Gamma|
  double wb = 0.0, ws = 0.0;
  for (int i = 0; i < ops.n_bulk(); ++i) wb += ops.weights()[i];
  for (int i = ops.n_bulk(); i < ops.size(); ++i) ws += ops.weights()[i];
  CHECK(wb == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(ws == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(bool((ops.weights().array() > 0.0).all()));

  SUBCASE("constants are annihilated exactly") {
    const auto big = DiscreteOperators::build(Geometry::make_strip(2.0, 8, 4));
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(big.size());
    Eigen::VectorXd y = big.apply_stiffness(ones);
    CHECK(y.lpNorm<Eigen::Infinity>() == 0.0); // edge differences of constants are exact zeros
    // assembled matrix row sums at rounding level
    Eigen::VectorXd ym = big.stiffness() * ones;
    CHECK(ym.lpNorm<Eigen::Infinity>() <= 1e-12 * big.stiffness().coeffs().abs().maxCoeff());
  }

  SUBCASE("assembled stiffness is exactly symmetric") {
    Eigen::MatrixXd a = Eigen::MatrixXd(ops.stiffness());
    CHECK((a - a.transpose()).lpNorm<Eigen::Infinity>() == 0.0);
  }
}

TEST_CASE("interval geometry") {
  const auto ops = DiscreteOperators::build(Geometry::make_interval(3));
  CHECK(ops.vol_omega() == doctest::Approx(1.0));
  CHECK(ops.vol_gamma() == doctest::Approx(2.0));
  // no boundary-boundary coupling
  for (const auto& e : ops.edges()) CHECK_FALSE(bool(e.a >= ops.n_bulk() && e.b >= ops.n_bulk()));
  CHECK_THROWS_AS(Geometry::make_interval(1), Error);
  CHECK_THROWS_AS(Geometry::make_strip(1.0, 2, 2), Error);
}

TEST_CASE("mean and projection") {
  const auto ops = DiscreteOperators::build(Geometry::make_strip(1.0, 8, 4));
  BulkSurfaceField ones(ops.geometry());
  ones.data.setOnes();
  CHECK(ops.mean(ones) == doctest::Approx(1.0).epsilon(1e-14));

  BulkSurfaceField mix(ops.geometry());
  mix.bulk().setConstant(2.0);
  mix.surface().setConstant(-1.0);
  CHECK(ops.mean(mix) == doctest::Approx(0.0).epsilon(1e-14));
  // already mean-zero fields are fixed points of the projection
  const BulkSurfaceField p = ops.project(mix);
  CHECK((p.data - mix.data).lpNorm<Eigen::Infinity>() <= 1e-14);

  std::mt19937_64 eng(9);
  for (int trial = 0; trial < 50; ++trial) {
    BulkSurfaceField z = random_field(ops, eng);
    const BulkSurfaceField pz = ops.project(z);
    CHECK(std::abs(ops.mean(pz)) <= 1e-14);
    const BulkSurfaceField ppz = ops.project(pz);
    CHECK((ppz.data - pz.data).lpNorm<Eigen::Infinity>() <= 1e-14);
  }

  BulkSurfaceField c(ops.geometry());
  c.data.setConstant(3.25);
  CHECK(ops.project(c).data.lpNorm<Eigen::Infinity>() <= 1e-14);
}

TEST_CASE("gradient form") {
  const auto ops = DiscreteOperators::build(Geometry::make_strip(1.0, 16, 8));
  std::mt19937_64 eng(31);

  SUBCASE("constants in the kernel, bilinearity, symmetry") {
    BulkSurfaceField ones(ops.geometry());
    ones.data.setOnes();
    BulkSurfaceField z = random_field(ops, eng);
    CHECK(ops.a_form(ones, z) == 0.0);
    BulkSurfaceField u = random_field(ops, eng);
    BulkSurfaceField v = random_field(ops, eng);
    BulkSurfaceField uv(ops.geometry());
    uv.data = u.data + v.data;
    CHECK(ops.a_form(uv, z) ==
          doctest::Approx(ops.a_form(u, z) + ops.a_form(v, z)).epsilon(1e-13));
    CHECK(ops.a_form(u, z) == ops.a_form(z, u));
    CHECK(ops.a_form(z, z) >= 0.0);
  }

  SUBCASE("cosine mode energy matches the analytic value and a direct sum") {
    const BulkSurfaceField u = cosine_mode(ops, 1);
    const double measured = ops.a_form(u, u);
    const double kappa = 2.0 * std::numbers::pi;
    const double analytic = 0.5 * kappa * kappa * (ops.vol_omega() + ops.vol_gamma());
    CHECK(measured == doctest::Approx(analytic).epsilon(0.02)); // symbol deficit is O(hx^2)

    // independent quadrature: sum row by row over grid differences
    const auto& g = ops.geometry();
    const double hx = g.lx / g.nx, hy = 1.0 / (g.ny + 1);
    double direct = 0.0;
    auto val = [&](int ix) { return std::cos(kappa * hx * ix); };
    for (int iy = 1; iy <= g.ny; ++iy) {
      double mu = hy + (iy == 1 ? 0.5 * hy : 0.0) + (iy == g.ny ? 0.5 * hy : 0.0);
      for (int ix = 0; ix < g.nx; ++ix) {
        const double d = val((ix + 1) % g.nx) - val(ix);
        direct += mu / hx * d * d;
      }
    }
    for (int row = 0; row < 2; ++row)
      for (int ix = 0; ix < g.nx; ++ix) {
        const double d = val((ix + 1) % g.nx) - val(ix);
        direct += d * d / hx;
      }
    CHECK(measured == doctest::Approx(direct).epsilon(1e-13));
  }

  SUBCASE("nullspace of the form is exactly the constants") {
    Eigen::MatrixXd a = Eigen::MatrixXd(ops.stiffness());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    int zeros = 0;
    for (int i = 0; i < a.rows(); ++i)
      if (std::abs(es.eigenvalues()[i]) < 1e-9 * es.eigenvalues().cwiseAbs().maxCoeff()) ++zeros;
    CHECK(zeros == 1);
  }
}

TEST_CASE("weighted inner product") {
  const auto ops = DiscreteOperators::build(Geometry::make_strip(1.0, 16, 8));
  BulkSurfaceField ones(ops.geometry());
  ones.data.setOnes();
  CHECK(ops.inner_h(ones, ones) == doctest::Approx(3.0).epsilon(1e-14));

  SUBCASE("discrete orthogonality of distinct x-modes") {
    const BulkSurfaceField u = cosine_mode(ops, 1);
    const BulkSurfaceField v = cosine_mode(ops, 2);
    CHECK(std::abs(ops.inner_h(u, v)) <= 1e-12);
  }

  SUBCASE("Cauchy-Schwarz") {
    std::mt19937_64 eng(4);
    for (int trial = 0; trial < 100; ++trial) {
      BulkSurfaceField u = random_field(ops, eng);
      BulkSurfaceField z = random_field(ops, eng);
      CHECK(std::abs(ops.inner_h(u, z)) <= ops.norm_h(u) * ops.norm_h(z) + 1e-12);
    }
  }

  SUBCASE("shape mismatch is rejected") {
    const auto small = DiscreteOperators::build(Geometry::make_strip(1.0, 4, 2));
    BulkSurfaceField z(small.geometry());
    CHECK_THROWS_AS(ops.inner_h(z, z), Error);
  }
}
