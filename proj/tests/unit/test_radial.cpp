#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "plap/error.hpp"
#include "plap/radial.hpp"

using namespace plap;
using namespace plap::radial;
using plap::geometry::Vec2;

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

// p = 2, N = 3 unit-ball Green function with parameter λ = k².
double ball_green(double r, double lambda) {
  if (lambda == 0.0) return (1.0 / r - 1.0) / (4 * M_PI);
  if (lambda < 0.0) {
    const double k = std::sqrt(-lambda);
    const double b = -std::cosh(k) / (4 * M_PI * std::sinh(k));
    return (std::cosh(k * r) / (4 * M_PI) + b * std::sinh(k * r)) / r;
  }
  const double k = std::sqrt(lambda);
  const double b = -std::cos(k) / (4 * M_PI * std::sin(k));
  return (std::cos(k * r) / (4 * M_PI) + b * std::sin(k * r)) / r;
}

}  // namespace

TEST(Fundamental, ValuesAndFlux) {
  const Vec2 pole(0.1, -0.2);
  EXPECT_NEAR(fundamental_solution(pole + Vec2(1, 0), pole, 2.0, 3.0), 1 / (4 * M_PI), 1e-15);
  EXPECT_NEAR(fundamental_solution(pole + Vec2(0, 1), pole, 2.0, 2.0), 0.0, 1e-15);
  EXPECT_NEAR(FundamentalSolutionParams::make(1.8, 2.0).c0, 4 * std::pow(2 * M_PI, -1.25), 1e-14);
  EXPECT_NEAR(unit_ball_volume(3.0), 4 * M_PI / 3, 1e-14);
  for (double p : {1.5, 2.0, 2.5}) {
    for (double n : {2.0, 3.0, 3.5, 4.0}) {
      if (p > n) continue;
      const auto fs = FundamentalSolutionParams::make(p, n);
      EXPECT_GT(fs.c0, 0.0);
      for (double r : {1e-3, 0.3, 2.0}) {
        const double flux = fs.sphere_area() * std::pow(r, n - 1) * std::pow(std::abs(fs.slope(r)), p - 1);
        EXPECT_NEAR(flux, 1.0, 1e-12) << p << ' ' << n << ' ' << r;
      }
    }
  }
  const Vec2 x = pole + Vec2(0.3, 0.4);
  const Vec2 g = fundamental_solution_gradient(x, pole, 2.5, 3.0);
  const double d = 1e-6;
  EXPECT_NEAR(g.x(),
              (fundamental_solution(x + Vec2(d, 0), pole, 2.5, 3.0) - fundamental_solution(x - Vec2(d, 0), pole, 2.5, 3.0)) /
                  (2 * d),
              1e-7);
  EXPECT_EQ(code_of([&] { fundamental_solution(pole, pole, 2.0, 3.0); }), ErrorCode::AtPole);
  EXPECT_EQ(code_of([] { FundamentalSolutionParams::make(3.0, 2.0); }), ErrorCode::InvalidExponent);
}

TEST(RadialLambda0, TorsionClosedForms) {
  const auto prof = radial_solve_lambda0(2.0, 3.0, 1.0, [](double) { return 1.0; });
  EXPECT_EQ(prof.r.front(), 0.0);
  EXPECT_LE(prof.r[1], 1e-6);
  for (std::size_t i = 0; i < prof.r.size(); ++i)
    EXPECT_NEAR(prof.values[i], (1 - prof.r[i] * prof.r[i]) / 6, 1e-12);
  EXPECT_EQ(prof.values.back(), 0.0);

  for (auto [p, n] : {std::pair{3.0, 2.0}, {1.8, 2.0}, {2.5, 4.5}, {1.3, 3.0}}) {
    const auto u = radial_solve_lambda0(p, n, 1.0, [](double) { return 1.0; });
    for (std::size_t i = 0; i < u.r.size(); i += 7)
      EXPECT_NEAR(u.values[i], oracle::torsion(u.r[i], p, n), 1e-10) << p << ' ' << n;
  }

  const auto zero = radial_solve_lambda0(2.5, 3.0, 1.0, {});
  for (double v : zero.values) EXPECT_EQ(v, 0.0);
}

TEST(RadialLambda0, IntegratedResidual) {
  const double p = 2.6, n = 3.0;
  auto f = [](double r) { return 1.0 + std::cos(3 * r); };
  const auto u = radial_solve_lambda0(p, n, 1.0, f);
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < u.r.size(); i += 5) {
    const double r = u.r[i];
    const double mass = oracle::simpson([&](double s) { return std::pow(s, n - 1) * f(s); }, 0.0, r, 2000);
    const double flux = std::pow(r, n - 1) * std::pow(std::abs(u.slopes[i]), p - 1) * (u.slopes[i] < 0 ? -1 : 1);
    worst = std::max(worst, std::abs(flux + mass));
  }
  EXPECT_LE(worst, 1e-8);
  // Hermite interpolation between grid points stays on the curve.
  const auto q = radial_solve_lambda0(2.0, 3.0, 1.0, [](double) { return 1.0; });
  EXPECT_NEAR(q.at(0.4321), (1 - 0.4321 * 0.4321) / 6, 1e-9);
}

TEST(RadialEigen, AnalyticValues) {
  EXPECT_NEAR(radial_eigen(2.0, 3.0, 1.0), M_PI * M_PI, 1e-7);
  const double j0 = oracle::bessel_j0_root();
  EXPECT_NEAR(radial_eigen(2.0, 2.0, 1.0), j0 * j0, 1e-7);
  EXPECT_NEAR(j0 * j0, 5.7832, 1e-4);
  for (double p : {1.5, 2.0, 3.0}) {
    const double l1 = radial_eigen(p, 3.0, 1.0);
    EXPECT_NEAR(radial_eigen(p, 3.0, 2.0), std::pow(2.0, -p) * l1, 1e-8 * l1);
  }
  EXPECT_EQ(code_of([] { radial_eigen(3.5, 3.0, 1.0); }), ErrorCode::InvalidExponent);
}

TEST(RadialDirichlet, ShootingMatchesAnalytic) {
  RadialProblem pr;
  pr.p = 2.0;
  pr.dimension = 3.0;
  pr.lambda = 1.0;
  pr.source = [](double) { return 1.0; };
  pr.moments = {[](double, double u, double) { return u; }};
  const auto sol = radial_dirichlet(pr);
  // -u'' - 2u'/r - u = 1 on the unit ball: u = -1 + sin(r) / (r sin 1).
  auto exact = [](double r) { return r == 0.0 ? -1 + 1 / std::sin(1.0) : -1 + std::sin(r) / (r * std::sin(1.0)); };
  for (std::size_t i = 0; i < sol.u.r.size(); i += 9) EXPECT_NEAR(sol.u.values[i], exact(sol.u.r[i]), 1e-9);
  const double moment = oracle::simpson([&](double r) { return r * r * exact(r); }, 0.0, 1.0);
  EXPECT_NEAR(sol.moments[0], moment, 1e-9);

  pr.p = 2.5;
  pr.lambda = 0.0;
  const auto torsion = radial_dirichlet(pr);
  for (std::size_t i = 0; i < torsion.u.r.size(); i += 9)
    EXPECT_NEAR(torsion.u.values[i], oracle::torsion(torsion.u.r[i], 2.5, 3.0), 1e-9);

  pr.lambda = 1.0;
  const auto nonlinear = radial_dirichlet(pr);
  EXPECT_GT(nonlinear.u.values[0], torsion.u.values[0]);
  EXPECT_NEAR(nonlinear.u.values.back(), 0.0, 1e-12);

  pr.p = 2.0;
  pr.lambda = M_PI * M_PI + 0.1;
  EXPECT_EQ(code_of([&] { radial_dirichlet(pr); }), ErrorCode::SupercriticalLambda);
}

TEST(RadialGreen, ClosedFormsAtZeroLambda) {
  const auto g3 = radial_green(2.0, 3.0, 1.0, 0.0);
  EXPECT_NEAR(g3.h0, -1 / (4 * M_PI), 1e-15);
  for (std::size_t i = 1; i < g3.g.size(); i += 11) EXPECT_NEAR(g3.g[i], ball_green(g3.h.r[i], 0.0), 1e-9 * g3.g[i] + 1e-15);
  const auto st = g3.state_at(0.5);
  EXPECT_NEAR(st.mass, (0.5 - 0.25 + 0.125 / 3) / (4 * M_PI), 1e-10);
  EXPECT_EQ(st.flux, 1.0);

  const auto g18 = radial_green(1.8, 2.0, 1.0, 0.0);
  EXPECT_NEAR(g18.h0, -4 * std::pow(2 * M_PI, -1.25), 1e-14);
  for (double v : g18.h.values) EXPECT_EQ(v, g18.h0);
  EXPECT_NEAR(radial_green(2.0, 2.0, 1.0, 0.0).h0, 0.0, 1e-15);
  EXPECT_NEAR(radial_green(2.0, 2.0, 2.0, 0.0).h0, std::log(2.0) / (2 * M_PI), 1e-14);
  EXPECT_EQ(code_of([] { radial_green(3.0, 3.0, 1.0, 0.0); }), ErrorCode::InvalidExponent);
}

TEST(RadialGreen, ShootingMatchesAnalytic) {
  for (double lambda : {0.5, 1.0, 2.0, M_PI * M_PI / 4, 5.0, -3.0}) {
    const auto g = radial_green(2.0, 3.0, 1.0, lambda);
    EXPECT_NEAR(g.h0, oracle::ball_h0(lambda), 1e-9) << lambda;
    EXPECT_NEAR(g.start_flux, 1.0, 1e-6);
    for (double r : {1e-7, 1e-3, 0.1, 0.37, 0.9}) {
      const auto st = g.state_at(r);
      EXPECT_NEAR(st.g, ball_green(r, lambda), 1e-9 * std::abs(st.g)) << lambda << ' ' << r;
    }
  }
  EXPECT_NEAR(radial_green(2.0, 3.0, 1.0, 1.0).h0, -0.05110, 1e-5);
  EXPECT_NEAR(radial_green(2.0, 3.0, 1.0, M_PI * M_PI / 4).h0, 0.0, 1e-9);
  EXPECT_EQ(code_of([] { radial_green(2.0, 3.0, 1.0, M_PI * M_PI); }), ErrorCode::SupercriticalLambda);
}

TEST(RadialGreen, FluxConservation) {
  for (auto [p, n, lambda] : {std::tuple{2.0, 3.0, 2.0}, {2.5, 4.0, 3.0}, {1.8, 2.0, 1.0}, {2.0, 2.0, 2.0}}) {
    const auto g = radial_green(p, n, 1.0, lambda);
    const double area = FundamentalSolutionParams::make(p, n).sphere_area();
    for (double r : {0.2, 0.6, 1.0}) {
      const double lo = 1e-4;
      const double inner = g.lambda * area *
                           oracle::simpson([&](double s) { return std::pow(s, n - 1) * std::pow(std::max(g.state_at(s).g, 0.0), p - 1); },
                                           lo, r, 4000);
      // ∫_0^lo is below the Simpson accuracy; add it from the pole asymptotics.
      const double head = g.state_at(lo).flux - 1.0;
      EXPECT_NEAR(g.state_at(r).flux, 1.0 + head + inner, 1e-6) << p << ' ' << n << ' ' << r;
    }
    EXPECT_NEAR(g.state_at(1.0).g, 0.0, 1e-9);
  }
}

TEST(RadialGreen, ProfileCsv) {
  std::ostringstream os;
  write_profile_csv(os, radial_green(2.0, 3.0, 1.0, 1.0));
  EXPECT_EQ(os.str().rfind("r,G,H\n0,inf,", 0), 0u);
}
