#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "plap/convexity.hpp"
#include "plap/error.hpp"
#include "plap/radial.hpp"
#include "plap/spectral.hpp"

using namespace plap;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::PreconditionViolation;
}

MeshPtr disk(double h, double gamma = 1.0) {
  return geometry::build_mesh(geometry::DomainSpec{geometry::Disk{1.0}, Vec2::Zero()}, h, gamma);
}

/// Random truncated trigonometric sum c + amp Σ a_k sin(m_k·x + s_k), |a_k| <= 1/3.
class TrigField {
 public:
  TrigField(std::mt19937& rng, double offset, double amplitude) : offset_(offset), amplitude_(amplitude) {
    std::uniform_real_distribution<double> coef(-1.0 / 3.0, 1.0 / 3.0), freq(-3.0, 3.0), shift(0.0, 2 * M_PI);
    for (int k = 0; k < 3; ++k) terms_.push_back({coef(rng), Vec2(freq(rng), freq(rng)), shift(rng)});
  }
  double operator()(const Vec2& x) const {
    double s = offset_;
    for (const auto& t : terms_) s += amplitude_ * t.a * std::sin(t.m.dot(x) + t.s);
    return s;
  }

 private:
  struct Term {
    double a;
    Vec2 m;
    double s;
  };
  double offset_, amplitude_;
  std::vector<Term> terms_;
};

ScalarField sample(const MeshPtr& mesh, const std::function<double(const Vec2&)>& fn) {
  return ScalarField::interpolate(mesh, fn);
}

double central_difference(const std::function<double(double)>& f, double step) {
  return (f(step) - f(-step)) / (2 * step);
}

}  // namespace

TEST(ConvexityConstants, ValuesAndDiscriminant) {
  const auto k2 = ConvexityConstants::make(2.0);
  EXPECT_DOUBLE_EQ(k2.c1, 0.5);
  EXPECT_DOUBLE_EQ(k2.c2, 1.0);
  EXPECT_DOUBLE_EQ(k2.c3_base, 0.5);
  EXPECT_DOUBLE_EQ(k2.c3_cos2, 0.0);
  for (double p : {1.2, 1.5, 2.0, 2.5, 3.0, 4.5}) {
    const auto k = ConvexityConstants::make(p);
    EXPECT_GT(k.c1, 0.0);
    for (double c : {-1.0, -0.6, 0.0, 0.3, 1.0}) {
      EXPECT_NEAR(k.discriminant(c), 4 * (p - 1) * (1 - c * c) / (p * p), 1e-14);
      EXPECT_GE(k.discriminant(c), -1e-15);
    }
  }
  EXPECT_THROW(ConvexityConstants::make(1.0), Error);
}

TEST(IEnergy, SubstitutionIdentities) {
  EXPECT_NEAR(I_energy(sample(disk(0.2), [](const Vec2&) { return 1.0; }), 2.0), 0.0, 1e-24);
  // w = (1 - r²)², p = 2: ∫|∇(1 - r²)|² = 2π.
  double last = INFINITY;
  for (double h : {0.1, 0.05, 0.025}) {
    const auto w = sample(disk(h), [](const Vec2& x) { return std::pow(std::max(0.0, 1 - x.squaredNorm()), 2); });
    const double err = std::abs(I_energy(w, 2.0) - 2 * M_PI);
    EXPECT_LT(err, last);
    last = err;
  }
  EXPECT_LT(last, 0.01 * 2 * M_PI);
  // w = u^p, u = 1 - r², p = 2.5: ∫|∇u|^p = 2π 2^p/(p + 2).
  // Interpolating w rather than u loses accuracy in the boundary layer where w ~ (1 - r)^p,
  // so the error halves with h instead of quartering.
  const double p = 2.5;
  const double exact = 2 * M_PI * std::pow(2.0, p) / (p + 2);
  std::vector<double> errors;
  for (double h : {0.1, 0.05, 0.025, 0.0125}) {
    const auto w = sample(disk(h), [p](const Vec2& x) { return std::pow(std::max(0.0, 1 - x.squaredNorm()), p); });
    errors.push_back(std::abs(I_energy(w, p) - exact));
  }
  for (std::size_t i = 1; i < errors.size(); ++i) EXPECT_LT(errors[i], 0.7 * errors[i - 1]) << i;
  EXPECT_LT(errors.back(), 0.015 * exact);
  const auto negative = sample(disk(0.2), [](const Vec2& x) { return x.x(); });
  EXPECT_EQ(code_of([&] { I_energy(negative, 2.0); }), ErrorCode::NegativeField);
}

TEST(IPrime, MatchesFiniteDifferences) {
  const auto mesh = disk(0.1);
  std::mt19937 rng(11);
  for (double p : {1.6, 2.0, 2.5, 3.0}) {
    const TrigField wf(rng, 1.1, 1.0), pf(rng, 0.0, 1.0);
    const auto w = sample(mesh, wf);
    const auto phi = sample(mesh, pf);
    for (const auto* dir : {&phi, &w}) {
      const double fd = central_difference(
          [&](double t) { return I_energy(ScalarField(mesh, w.values() + t * dir->values()), p); }, 1e-6);
      const double exact = I_prime(w, *dir, p);
      EXPECT_NEAR(exact, fd, 1e-6 * std::max(1.0, std::abs(fd))) << p;
    }
    EXPECT_EQ(I_prime(w, ScalarField::zeros(mesh), p), 0.0);
  }
  // w = max(0, x - 0.2) vanishes on whole triangles where the direction is 1.
  const auto w0 = sample(mesh, [](const Vec2& x) { return std::max(0.0, x.x() - 0.2); });
  const auto one = sample(mesh, [](const Vec2&) { return 1.0; });
  EXPECT_EQ(code_of([&] { I_prime(w0, one, 2.0); }), ErrorCode::DegenerateBase);
  EXPECT_EQ(code_of([&] { rho_density(w0, one, 2.0); }), ErrorCode::DegenerateBase);
}

TEST(RhoDensity, SecondVariationMatchesFiniteDifferences) {
  const auto mesh = disk(0.1);
  std::mt19937 rng(5);
  for (double p : {1.6, 2.0, 2.5, 3.0}) {
    for (int trial = 0; trial < 3; ++trial) {
      const auto w = sample(mesh, TrigField(rng, 1.1, 1.0));
      const auto phi = sample(mesh, TrigField(rng, 0.0, 1.0));
      const double fd = central_difference(
          [&](double t) { return I_prime(ScalarField(mesh, w.values() + t * phi.values()), phi, p); }, 1e-5);
      const double exact = I_second(w, phi, p);
      EXPECT_NEAR(exact, fd, 1e-4 * std::abs(fd)) << p;
    }
  }
}

TEST(RhoDensity, TrivialDirections) {
  const auto mesh = disk(0.15);
  std::mt19937 rng(3);
  const auto w = sample(mesh, TrigField(rng, 1.1, 1.0));
  const auto zero = rho_density(w, ScalarField::zeros(mesh), 2.5);
  for (double v : zero.values) EXPECT_EQ(v, 0.0);
  // Constant direction: only the c1 term survives.
  const auto k = ConvexityConstants::make(2.5);
  const auto flat = rho_density(w, sample(mesh, [](const Vec2&) { return 0.7; }), 2.5);
  std::size_t i = 0;
  for_each_quad_point(*mesh, [&](const QuadPoint& q) {
    const double v = w.at(q.tri, q.bary);
    const double gw = w.gradient(q.tri).norm();
    const double prefactor = std::pow(v, -1.5 / 2.5 * 2) * std::pow(std::pow(v, 0.4 - 1.0) * gw / 2.5, 0.5);
    const double expected = prefactor * k.c1 * gw * gw / (v * v) * 0.49;
    EXPECT_NEAR(flat.values[i], expected, 1e-12 * std::max(1.0, expected));
    EXPECT_GE(flat.values[i], 0.0);
    ++i;
  });
}

TEST(RhoDensity, NonnegativeAndAboveSquareCompletionForLargeExponents) {
  const auto mesh = disk(0.35);
  std::mt19937 rng(2024);
  std::size_t negatives_below_two = 0, samples_below_two = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const TrigField wf(rng, 1.1, 1.0), pf(rng, 0.0, 1.0);
    const auto w = sample(mesh, wf);
    const auto phi = sample(mesh, pf);
    ASSERT_GE(w.values().minCoeff(), 0.1);
    for (double p : {2.0, 2.5, 3.0}) {
      const auto k = ConvexityConstants::make(p);
      const auto rho = rho_density(w, phi, p);
      EXPECT_GE(rho.min(), 0.0) << p;
      std::size_t i = 0;
      for_each_quad_point(*mesh, [&](const QuadPoint& q) {
        const double bound = rho_lower_bound(k, w.at(q.tri, q.bary), w.gradient(q.tri), phi.at(q.tri, q.bary),
                                             phi.gradient(q.tri));
        EXPECT_GE(rho.values[i] + 1e-12 * std::abs(rho.values[i]), bound);
        ++i;
      });
    }
    const auto rho = rho_density(w, phi, 1.5);
    for (double v : rho.values) negatives_below_two += v < 0.0;
    samples_below_two += rho.values.size();
  }
  RecordProperty("p15_negative_fraction",
                 std::to_string(static_cast<double>(negatives_below_two) / static_cast<double>(samples_below_two)));
}

TEST(RhoDensity, SquareCompletionRemainder) {
  std::mt19937 rng(9);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> base(0.1, 3.0);
  for (double p : {1.5, 2.0, 2.7}) {
    const auto k = ConvexityConstants::make(p);
    for (int i = 0; i < 1000; ++i) {
      const double w = base(rng), phi = g(rng);
      const Vec2 gw(g(rng), g(rng)), gphi(g(rng), g(rng));
      const double c = gw.dot(gphi) / (gw.norm() * gphi.norm());
      const double prefactor = std::pow(p, 2 - p) * std::pow(w, 1 - p) * std::pow(gw.norm(), p - 2);
      const double remainder = prefactor * (1 - c * c) / p * gphi.squaredNorm();
      const double rho = rho_pointwise(k, w, gw, phi, gphi);
      EXPECT_NEAR(rho, rho_lower_bound(k, w, gw, phi, gphi) + remainder, 1e-10 * std::max(1.0, std::abs(rho)));
    }
  }
}

TEST(RhoDensity, IntegratesToFirstVariationDifference) {
  const auto mesh = disk(0.1);
  std::mt19937 rng(17);
  for (double p : {2.0, 2.5, 3.0}) {
    const auto w1 = sample(mesh, TrigField(rng, 1.1, 1.0));
    const auto w2 = sample(mesh, TrigField(rng, 1.1, 1.0));
    const ScalarField phi(mesh, w1.values() - w2.values());
    // |∇w_s|^{p-2} has kinks in s where a triangle gradient vanishes, so the s-quadrature is adaptive.
    const double integral = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        [&](double s) { return I_second(ScalarField(mesh, s * w1.values() + (1 - s) * w2.values()), phi, p); }, 0.0,
        1.0, 15, 1e-11);
    const double direct = I_prime(w1, phi, p) - I_prime(w2, phi, p);
    EXPECT_NEAR(integral, direct, 1e-8 * std::abs(direct)) << p;
    EXPECT_GE(direct, 0.0);
  }
}

namespace {

ProblemSpec disk_problem(const MeshPtr& mesh, double p, double lambda, Source f) {
  ProblemSpec s;
  s.p = p;
  s.lambda = lambda;
  s.domain = *mesh->domain;
  s.mesh = mesh;
  s.source = std::move(f);
  if (lambda != 0.0) s.lambda1 = first_eigenvalue(p, mesh).lambda1;
  return s;
}

}  // namespace

TEST(ComparisonHarness, FixedExamples) {
  const auto mesh = disk(0.1);
  const auto same = comparison_harness(disk_problem(mesh, 2.0, 0.0, constant_source(1.0)),
                                       disk_problem(mesh, 2.0, 0.0, constant_source(1.0)));
  EXPECT_TRUE(same.pass);
  EXPECT_NEAR((same.u1.values() - same.u2.values()).cwiseAbs().maxCoeff(), 0.0, 1e-12);

  const auto linear = comparison_harness(disk_problem(mesh, 2.0, 0.0, constant_source(0.5)),
                                         disk_problem(mesh, 2.0, 0.0, constant_source(1.0)));
  EXPECT_TRUE(linear.pass);
  EXPECT_NEAR((linear.u1.values() - 0.5 * linear.u2.values()).cwiseAbs().maxCoeff(), 0.0, 1e-9);

  const auto quasi = comparison_harness(disk_problem(mesh, 2.5, 1.0, constant_source(0.5)),
                                        disk_problem(mesh, 2.5, 1.0, constant_source(1.0)));
  EXPECT_TRUE(quasi.pass);
  double centers[2];
  for (int i = 0; i < 2; ++i) {
    radial::RadialProblem rp;
    rp.p = 2.5;
    rp.dimension = 2.0;
    rp.lambda = 1.0;
    const double f = i == 0 ? 0.5 : 1.0;
    rp.source = [f](double) { return f; };
    rp.lambda1 = first_eigenvalue(2.5, mesh).lambda1;
    centers[i] = radial::radial_dirichlet(rp).u.values[0];
  }
  EXPECT_LT(centers[0], centers[1]);
  const geometry::PointLocator loc(*mesh);
  const auto hit = loc.locate(Vec2::Zero());
  ASSERT_TRUE(hit);
  EXPECT_NEAR(quasi.u1.at(hit->first, hit->second), centers[0], 0.02 * centers[0]);
  EXPECT_NEAR(quasi.u2.at(hit->first, hit->second), centers[1], 0.02 * centers[1]);
}

TEST(ComparisonHarness, RandomOrderedInstances) {
  const auto mesh = disk(0.12);
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  int instance = 0;
  for (double p : {2.0, 2.5}) {
    for (int trial = 0; trial < 10; ++trial, ++instance) {
      const TrigField base(rng, 0.0, 1.0), gap(rng, 1.0, 1.0);
      const double lambda = trial % 2 ? 0.5 * u01(rng) : 0.0;
      auto f2 = analytic_source([=](const Vec2& x) { return 1.0 + 0.9 * base(x); });
      auto f1 = analytic_source([=](const Vec2& x) { return 1.0 + 0.9 * base(x) - gap(x) - 0.5; });
      auto first = disk_problem(mesh, p, lambda, f1);
      auto second = disk_problem(mesh, p, lambda, f2);
      const TrigField trace(rng, 0.0, 0.3);
      Eigen::VectorXd g1(static_cast<Eigen::Index>(mesh->num_vertices())), g2 = g1;
      for (std::size_t v = 0; v < mesh->num_vertices(); ++v) {
        g2[static_cast<Eigen::Index>(v)] = trace(mesh->vertices[v]);
        g1[static_cast<Eigen::Index>(v)] = g2[static_cast<Eigen::Index>(v)] - 0.2 * u01(rng);
      }
      first.boundary_values = g1;
      second.boundary_values = g2;
      first.controls.verify_positivity = second.controls.verify_positivity = false;
      const auto verdict = comparison_harness(first, second);
      EXPECT_TRUE(verdict.pass) << "instance " << instance << " excess " << verdict.max_excess;
    }
  }
  EXPECT_EQ(instance, 20);
}

TEST(ComparisonHarness, RejectsUnorderedInputs) {
  const auto mesh = disk(0.2);
  const auto lo = disk_problem(mesh, 2.0, 0.0, constant_source(0.5));
  const auto hi = disk_problem(mesh, 2.0, 0.0, constant_source(1.0));
  EXPECT_EQ(code_of([&] { comparison_harness(hi, lo); }), ErrorCode::HypothesisViolated);
  EXPECT_EQ(code_of([&] { comparison_harness(disk_problem(mesh, 2.0, 0.0, constant_source(-2.0)),
                                             disk_problem(mesh, 2.0, 0.0, constant_source(-1.0))); }),
            ErrorCode::HypothesisViolated);
  auto raised = lo;
  raised.boundary_values = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(mesh->num_vertices()), 0.1);
  EXPECT_EQ(code_of([&] { comparison_harness(raised, hi); }), ErrorCode::HypothesisViolated);
  EXPECT_EQ(code_of([&] { comparison_harness(disk_problem(mesh, 1.8, 0.0, constant_source(0.5)),
                                             disk_problem(mesh, 1.8, 0.0, constant_source(1.0))); }),
            ErrorCode::HypothesisViolated);
  EXPECT_EQ(code_of([&] { comparison_harness(lo, disk_problem(disk(0.25), 2.0, 0.0, constant_source(1.0))); }),
            ErrorCode::MeshMismatch);
}
