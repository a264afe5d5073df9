#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "plap/error.hpp"
#include "plap/radial.hpp"
#include "plap/spectral.hpp"

using namespace plap;
using geometry::Disk;
using geometry::DomainSpec;

namespace {

MeshPtr disk_mesh(double h, double radius = 1.0) {
  return geometry::build_mesh(DomainSpec{Disk{radius}, Vec2::Zero()}, h, 1.0);
}

}  // namespace

TEST(FirstEigenvalue, DiskMatchesBesselRootAndDecreases) {
  const double j0 = oracle::bessel_j0_root();
  double last = INFINITY;
  for (double h : {0.2, 0.1, 0.05}) {
    const auto res = first_eigenvalue(2.0, disk_mesh(h));
    EXPECT_GT(res.lambda1, j0 * j0);
    EXPECT_LT(res.lambda1, last);
    last = res.lambda1;
    EXPECT_NEAR(lq_norm(res.eigenfunction, 2.0), 1.0, 1e-12);
    EXPECT_NEAR(rayleigh_quotient(res.eigenfunction, 2.0), res.lambda1, 1e-8 * res.lambda1);
    const auto free = free_vertices(res.eigenfunction.mesh());
    for (std::size_t v = 0; v < free.size(); ++v)
      if (free[v]) EXPECT_GT(res.eigenfunction[v], -1e-9);
  }
  EXPECT_NEAR(last, j0 * j0, 0.01 * j0 * j0);
}

TEST(FirstEigenvalue, ExactScalingOfTheQuotient) {
  const auto base = disk_mesh(0.15);
  auto scaled = std::make_shared<geometry::Mesh>(*base);
  for (auto& x : scaled->vertices) x *= 2.0;
  scaled->pole *= 2.0;
  scaled->domain.reset();
  scaled->finalize();
  for (double p : {2.0, 1.6}) {
    const double l1 = first_eigenvalue(p, base).lambda1;
    const double l2 = first_eigenvalue(p, scaled).lambda1;
    EXPECT_NEAR(l2, std::pow(2.0, -p) * l1, 1e-6 * l1) << p;
  }
}

TEST(FirstEigenvalue, QuasilinearMatchesRadialValue) {
  const double p = 1.6;
  const auto res = first_eigenvalue(p, disk_mesh(0.05));
  const double exact = radial::radial_eigen(p, 2.0, 1.0);
  EXPECT_GT(res.lambda1, exact);
  EXPECT_NEAR(res.lambda1, exact, 0.02 * exact);
  EXPECT_NEAR(first_eigenvalue(2.0, geometry::RadialBall{3.0, 1.0}), M_PI * M_PI, 1e-7);
  const auto free = free_vertices(res.eigenfunction.mesh());
  for (std::size_t v = 0; v < free.size(); ++v)
    if (free[v]) EXPECT_GT(res.eigenfunction[v], 0.0);
}

TEST(FirstEigenvalue, QuotientIsBoundedBelow) {
  const auto mesh = disk_mesh(0.1);
  const auto free = free_vertices(*mesh);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  for (double p : {2.0, 1.5}) {
    const double l1 = first_eigenvalue(p, mesh).lambda1;
    for (int trial = 0; trial < 20; ++trial) {
      const double a = coef(rng), b = coef(rng), c = coef(rng);
      auto v = ScalarField::interpolate(mesh, [&](const Vec2& x) {
        return (1 - x.squaredNorm()) * (1 + a * x.x() + b * std::sin(3 * x.y()) + c * x.x() * x.y());
      });
      Eigen::VectorXd vals = v.values();
      for (std::size_t i = 0; i < free.size(); ++i)
        if (!free[i]) vals[static_cast<Eigen::Index>(i)] = 0.0;
      EXPECT_GE(rayleigh_quotient(ScalarField(mesh, vals), p), l1 * (1 - 1e-8));
    }
  }
  EXPECT_THROW(rayleigh_quotient(ScalarField::zeros(mesh), 2.0), Error);
  EXPECT_THROW(first_eigenvalue(1.0, mesh), Error);
}
