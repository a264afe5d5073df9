#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "plap/core.hpp"
#include "plap/error.hpp"

using namespace plap;
using geometry::DomainSpec;
using geometry::Disk;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::IoError;
}

const DomainSpec kDisk{Disk{1.0}, Vec2::Zero()};

MeshPtr disk_mesh(double h, double gamma = 1.0) {
  static std::map<std::pair<double, double>, MeshPtr> cache;
  auto& m = cache[{h, gamma}];
  if (!m) m = geometry::build_mesh(kDisk, h, gamma);
  return m;
}

ProblemSpec torsion_spec(double p, MeshPtr mesh, double f = 1.0) {
  ProblemSpec s;
  s.p = p;
  s.domain = kDisk;
  s.mesh = std::move(mesh);
  s.source = constant_source(f);
  return s;
}

double max_error(const ScalarField& u, const std::function<double(const Vec2&)>& exact) {
  double e = 0;
  for (std::size_t i = 0; i < u.mesh().num_vertices(); ++i)
    e = std::max(e, std::abs(u[i] - exact(u.mesh().vertices[i])));
  return e;
}

}  // namespace

TEST(Admissibility, Thresholds) {
  auto r = admissibility(2.0, 3.0, 1.0);
  EXPECT_NEAR(r.threshold, std::sqrt(3.0), 1e-15);
  EXPECT_TRUE(r.admissible);
  EXPECT_NEAR(r.q_bar, 1.5, 1e-15);
  EXPECT_NEAR(r.q_bar_star, 3.0, 1e-15);
  EXPECT_NEAR(r.p_star, 6.0, 1e-15);

  r = admissibility(1.6, 2.0, 1.0);
  EXPECT_NEAR(r.threshold, 1.5, 1e-15);
  EXPECT_TRUE(r.admissible);

  r = admissibility(2.0, 5.0, 1.0);
  EXPECT_NEAR(r.threshold, 2.5, 1e-15);
  EXPECT_FALSE(r.admissible);

  r = admissibility(1.2, 2.0, 0.0);
  EXPECT_EQ(r.threshold, 1.0);
  EXPECT_TRUE(r.admissible);
  EXPECT_TRUE(std::isinf(admissibility(2.0, 2.0, 0.0).p_star));

  EXPECT_EQ(code_of([] { admissibility(1.0, 2.0, 0.0); }), ErrorCode::InvalidExponent);
  EXPECT_EQ(code_of([] { admissibility(2.5, 2.0, 0.0); }), ErrorCode::InvalidExponent);
}

TEST(Field, InvariantsAndCsv) {
  auto mesh = disk_mesh(0.2);
  EXPECT_EQ(code_of([&] { ScalarField(mesh, Eigen::VectorXd::Zero(3)); }), ErrorCode::MeshMismatch);
  Eigen::VectorXd bad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh->num_vertices()));
  bad[1] = std::nan("");
  EXPECT_EQ(code_of([&] { ScalarField(mesh, bad); }), ErrorCode::PreconditionViolation);

  const auto u = ScalarField::interpolate(mesh, [](const Vec2& x) { return x.x(); });
  std::ostringstream os;
  write_field_csv(os, u);
  EXPECT_EQ(os.str().rfind("vertex_id,x,y,value\n", 0), 0u);
  std::ostringstream tr;
  write_trace_csv(tr, {{0, 1.0, 2.0, 0.5, 1e-3}});
  EXPECT_EQ(tr.str().rfind("iteration,energy,gradient_norm,step_length,eps_reg\n", 0), 0u);
}

TEST(Energy, SimpleValues) {
  auto mesh = disk_mesh(0.1);
  const auto zero = ScalarField::zeros(mesh);
  EXPECT_EQ(energy(zero, torsion_spec(3.0, mesh)), 0.0);

  // Linear field with ∫|∇u|^2 = 2 over the polygonal disk.
  const double c = std::sqrt(2.0 / mesh->total_area());
  const auto lin = ScalarField::interpolate(mesh, [c](const Vec2& x) { return c * x.y(); });
  ProblemSpec quad = torsion_spec(2.0, mesh, 0.0);
  quad.source = nullptr;
  EXPECT_NEAR(energy(lin, quad), 1.0, 1e-12);

  // Torsion function: J = -(1/2)∫u, from 1D quadrature.
  const double exact = -0.5 * oracle::simpson([](double r) { return 2 * M_PI * r * (1 - r * r) / 4; }, 0, 1);
  const auto fine = disk_mesh(0.03);
  const auto interp = ScalarField::interpolate(fine, [](const Vec2& x) { return (1 - x.squaredNorm()) / 4; });
  EXPECT_NEAR(energy(interp, torsion_spec(2.0, fine)), exact, 2e-3 * std::abs(exact));
  EXPECT_NEAR(exact, -M_PI / 16, 1e-12);

  auto other = disk_mesh(0.2);
  EXPECT_EQ(code_of([&] { energy(ScalarField::zeros(other), quad); }), ErrorCode::MeshMismatch);
}

TEST(Energy, GradientMatchesFiniteDifferences) {
  auto mesh = disk_mesh(0.2);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> uni(-1, 1);
  for (double p : {2.0, 2.5, 3.0, 1.6}) {
    ProblemSpec spec = torsion_spec(p, mesh);
    spec.lambda = 0.7;
    // Away from critical points: a tilted bump with nonzero gradient everywhere.
    const auto u = ScalarField::interpolate(mesh, [](const Vec2& x) {
      return 0.3 * x.x() + 0.2 + 0.1 * std::sin(2 * x.y()) * (1 - x.squaredNorm());
    });
    const Eigen::VectorXd g = energy_gradient(u, spec);
    for (int trial = 0; trial < 5; ++trial) {
      Eigen::VectorXd dir(u.values().size());
      for (Eigen::Index i = 0; i < dir.size(); ++i) dir[i] = uni(rng);
      const double step = 1e-6;
      const double jp = energy(ScalarField(mesh, u.values() + step * dir), spec);
      const double jm = energy(ScalarField(mesh, u.values() - step * dir), spec);
      const double fd = (jp - jm) / (2 * step);
      EXPECT_NEAR(fd, g.dot(dir), 1e-5 * std::abs(g.dot(dir))) << "p=" << p;
    }
  }
}

TEST(Solver, PoissonTorsionConvergesQuadratically) {
  const auto exact = [](const Vec2& x) { return (1 - x.squaredNorm()) / 4; };
  double prev = 0;
  for (double h : {0.1, 0.05}) {
    const auto res = solve_dirichlet(torsion_spec(2.0, disk_mesh(h)));
    const double err = max_error(res.u, exact);
    EXPECT_LE(err, 0.5 * h * h) << h;
    EXPECT_LE(res.gradient_norm, 1e-9);
    if (prev > 0) EXPECT_LT(err, prev / 2.5);
    prev = err;
  }
}

TEST(Solver, QuasilinearTorsion) {
  for (double p : {3.0, 1.8}) {
    const auto res = solve_dirichlet(torsion_spec(p, disk_mesh(0.05)));
    const double err = max_error(res.u, [p](const Vec2& x) { return oracle::torsion(x.norm(), p, 2.0); });
    const double scale = oracle::torsion(0.0, p, 2.0);
    EXPECT_LE(err, 0.02 * scale) << "p=" << p;
    EXPECT_LE(res.gradient_norm, 1e-9);
  }
}

TEST(Solver, ZeroDataGivesZero) {
  ProblemSpec spec = torsion_spec(2.5, disk_mesh(0.1), 0.0);
  spec.source = nullptr;
  const auto res = solve_dirichlet(spec);
  EXPECT_EQ(res.u.values().cwiseAbs().maxCoeff(), 0.0);
}

TEST(Solver, EnergyDescentAndContinuation) {
  auto mesh = disk_mesh(0.1);
  const auto res = solve_dirichlet(torsion_spec(2.7, mesh));
  for (std::size_t k = 1; k < res.trace.size(); ++k) {
    const auto& a = res.trace[k - 1];
    const auto& b = res.trace[k];
    if (a.eps_reg != b.eps_reg || b.step_length == 0.0) continue;
    EXPECT_LE(b.energy, a.energy + 1e-13 * std::abs(a.energy)) << k;
  }
  // Solutions at successive regularization floors approach each other.
  std::vector<Eigen::VectorXd> sols;
  for (double floor : {1e-1, 1e-2, 1e-3, 1e-4}) {
    ProblemSpec s = torsion_spec(2.7, mesh);
    s.controls.eps_start = floor;
    s.controls.eps_end = floor;
    s.controls.newton_tol = 1e-10;
    s.controls.polish_true_energy = false;
    const auto r = solve_dirichlet(s);
    sols.push_back(r.u.values());
  }
  double prev = 1e300;
  for (std::size_t k = 1; k < sols.size(); ++k) {
    const double d = lq_norm(ScalarField(mesh, sols[k] - sols[k - 1]), 2.0);
    EXPECT_LT(d, prev);
    prev = d;
  }
}

TEST(Solver, DiscreteComparisonAndPositivity) {
  auto mesh = disk_mesh(0.1);
  for (double p : {2.0, 2.5, 3.0}) {
    ProblemSpec s1 = torsion_spec(p, mesh);
    s1.source = analytic_source([](const Vec2& x) { return 0.5 + 0.4 * std::sin(3 * x.x()); });
    ProblemSpec s2 = torsion_spec(p, mesh);
    s2.source = analytic_source([](const Vec2& x) { return 1.0 + 0.2 * std::cos(2 * x.y()); });
    const auto u1 = solve_dirichlet(s1).u;
    const auto u2 = solve_dirichlet(s2).u;
    EXPECT_GE(u1.values().minCoeff(), -1e-9);
    EXPECT_LE((u1.values() - u2.values()).maxCoeff(), 1e-9) << p;
  }
}

TEST(Solver, LambdaGate) {
  ProblemSpec s = torsion_spec(2.0, disk_mesh(0.2));
  s.lambda = 5.8;
  s.lambda1 = 5.8;
  EXPECT_EQ(code_of([&] { solve_dirichlet(s); }), ErrorCode::SupercriticalLambda);
}

TEST(Coercivity, Examples) {
  Eigen::VectorXd x(2), y(2);
  x << 0.3, -1.2;
  y << 2.0, 0.5;
  EXPECT_NEAR(coercivity_ratio(x, y, 2.0), 1.0, 1e-14);
  Eigen::VectorXd a(2), b(2);
  a << 2.0, 0.0;
  b << 1.0, 0.0;
  EXPECT_NEAR(coercivity_ratio(a, b, 3.0), 1.5, 1e-14);
  EXPECT_NEAR(coercivity_ratio(3.0 * x, 3.0 * y, 2.7), coercivity_ratio(x, y, 2.7), 1e-12);
  EXPECT_EQ(code_of([&] { coercivity_ratio(x, x, 2.0); }), ErrorCode::EqualArguments);

  std::mt19937 rng(11);
  std::normal_distribution<double> n(0, 1);
  for (int k = 0; k < 100000; ++k) {
    Eigen::VectorXd u(3), v(3);
    for (int i = 0; i < 3; ++i) {
      u[i] = n(rng);
      v[i] = n(rng);
    }
    ASSERT_GT(coercivity_ratio(u, v, 2.5), 0.0);
  }
}

TEST(Seminorm, Examples) {
  auto mesh = disk_mesh(0.05);
  const auto lin = ScalarField::interpolate(mesh, [](const Vec2& x) { return 0.6 * x.x() + 0.8 * x.y(); });
  EXPECT_NEAR(wkq_seminorm(lin, 2.0), std::sqrt(mesh->total_area()), 1e-12);
  EXPECT_NEAR(wkq_seminorm(lin, 2.0), std::sqrt(M_PI), 1e-3);
  const auto c = ScalarField::interpolate(mesh, [](const Vec2&) { return 4.2; });
  EXPECT_NEAR(wkq_seminorm(c, 3.0), 0.0, 1e-12);
  const double ring = wkq_seminorm(lin, 2.0, Annulus2{Vec2::Zero(), 0.5, 0.6});
  EXPECT_NEAR(ring, std::sqrt(M_PI * 0.11), 0.01 * std::sqrt(M_PI * 0.11));
  EXPECT_EQ(code_of([&] { wkq_seminorm(lin, 0.5); }), ErrorCode::PreconditionViolation);
}
