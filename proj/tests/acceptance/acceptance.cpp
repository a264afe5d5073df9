// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "../unit/oracles.hpp"
#include "plap/brezis_nirenberg.hpp"
#include "plap/convexity.hpp"
#include "plap/error.hpp"
#include "plap/green.hpp"
#include "plap/regularity.hpp"
#include "plap/spectral.hpp"

using namespace plap;

namespace {

constexpr double kPi = std::numbers::pi;

/// Accumulates named sub-checks; a criterion passes when all of them do.
class Verdict {
 public:
  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass_ = false;
      failures_ << (failures_.tellp() > 0 ? "; " : "") << what;
    }
  }
  void note(const std::string& text) { notes_ << (notes_.tellp() > 0 ? ", " : "") << text; }
  bool pass() const { return pass_; }
  std::string detail() const { return pass_ ? notes_.str() : failures_.str() + " | " + notes_.str(); }

 private:
  bool pass_ = true;
  std::ostringstream failures_, notes_;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

ProblemSpec disk_problem(double p, const Vec2& pole, double h, double gamma, double lambda = 0.0) {
  ProblemSpec s;
  s.p = p;
  s.lambda = lambda;
  s.domain = geometry::DomainSpec{geometry::Disk{1.0}, pole};
  s.mesh = geometry::build_mesh(s.domain, h, gamma);
  return s;
}

/// c + amp Σ a_k sin(m_k·x + s_k) with three random terms, |a_k| <= 1/3.
class TrigField {
 public:
  TrigField(std::mt19937& rng, double offset, double amplitude) : offset_(offset), amplitude_(amplitude) {
    std::uniform_real_distribution<double> coef(-1.0 / 3.0, 1.0 / 3.0), freq(-3.0, 3.0), shift(0.0, 2 * kPi);
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

void disk_identity(Verdict& v) {
  const auto gs = green_function(disk_problem(2.0, Vec2::Zero(), 0.02, 0.05));
  v.note("max|H| " + num(gs.diagnostics.max_abs_h));
  v.check(gs.diagnostics.max_abs_h <= 5e-3, "max|H| above 5e-3");
}

void off_center_pole(Verdict& v) {
  const auto gs = green_function(disk_problem(2.0, Vec2(0.5, 0.0), 0.05, 0.1));
  const double exact = std::log(0.75) / (2 * kPi);
  v.note("H " + num(gs.h_pole.value) + " vs " + num(exact));
  v.check(std::abs(gs.h_pole.value - exact) <= 5e-3, "pole value off by more than 5e-3");
}

void quasilinear_radial(Verdict& v) {
  const double exact = -4.0 * std::pow(2 * kPi, -1.25);
  const auto gs = green_function(disk_problem(1.8, Vec2::Zero(), 0.05, 0.1));
  const double shooting = radial::radial_green(1.8, 2.0, 1.0, 0.0).h0;
  v.note("mesh " + num(gs.h_pole.value) + ", shooting " + num(shooting) + ", exact " + num(exact));
  v.check(std::abs(gs.h_pole.value - exact) <= 0.01 * std::abs(exact), "mesh value off by more than 1%");
  v.check(std::abs(shooting - exact) <= 0.01 * std::abs(exact), "shooting value off by more than 1%");
}

void ball_threshold(Verdict& v) {
  const double lambda1 = radial::radial_eigen(2.0, 3.0, 1.0);
  const auto res = lambda_star(BallProblem{2.0, 3.0, 1.0, 0.0, lambda1}, 0.0, 0.99 * lambda1);
  const double exact = kPi * kPi / 4.0;
  v.note("lambda* " + num(res.lambda_star) + ", lambda1 " + num(lambda1));
  v.check(std::abs(res.lambda_star - exact) <= 1e-3, "threshold off by more than 1e-3");
  v.check(std::abs(lambda1 - kPi * kPi) <= 1e-6 * kPi * kPi, "first eigenvalue is not pi^2");
  for (double frac : {0.1, 0.2, 0.3, 0.5, 0.9}) {
    const double lambda = frac * lambda1;
    const double h = radial::radial_green(2.0, 3.0, 1.0, lambda, lambda1).h0;
    v.check((h > 0.0) == (frac > 0.25), "sign of H wrong at lambda = " + num(lambda));
    v.check((oracle::ball_h0(lambda) > 0.0) == (frac > 0.25), "oracle sign wrong at lambda = " + num(lambda));
  }
}

void pohozaev_invariance(Verdict& v) {
  const std::vector<double> deltas{0.1, 0.2, 0.3, 0.4, 0.5};
  for (double lambda : {0.0, 1.0, 2.0}) {
    const auto rep = pohozaev_residue(radial::radial_green(2.0, 3.0, 1.0, lambda), deltas);
    const double exact = oracle::ball_h0(lambda);
    v.note("lambda " + num(lambda) + ": spread " + num(rep.spread) + ", mean " + num(rep.mean));
    v.check(rep.estimates.size() == deltas.size(), "residue grid size");
    v.check(rep.spread <= 0.01, "spread above 1% at lambda = " + num(lambda));
    v.check(std::abs(rep.mean - exact) <= 0.02 * std::abs(exact), "estimate off by more than 2% at lambda = " + num(lambda));
  }
}

void pohozaev_constant_identity(Verdict& v) {
  for (auto [p, n] : {std::pair{2.0, 3.0}, std::pair{2.0, 3.5}, std::pair{2.5, 4.0}}) {
    const auto c = pohozaev_constant(p, n);
    const double rel = std::abs(c.direct_integral - c.reduced_integral) / std::abs(c.reduced_integral);
    const double beta_form = oracle::pohozaev_reduced_integral(p, n);
    v.note("(" + num(p) + "," + num(n) + "): C " + num(c.value) + ", rel " + num(rel));
    v.check(rel <= 1e-8, "integral forms disagree at (" + num(p) + "," + num(n) + ")");
    v.check(std::abs(c.reduced_integral - beta_form) <= 1e-8 * beta_form, "Beta form mismatch");
    v.check(c.value > 0.0, "constant not positive");
  }
}

void regular_part_monotone(Verdict& v) {
  const std::vector<double> grid{0.0, 0.5, 1.0, 1.5, 2.0, 2.4};
  std::vector<double> analytic, shooting;
  double solver_error = 0.0;
  for (double lambda : grid) {
    analytic.push_back(oracle::ball_h0(lambda));
    shooting.push_back(radial::radial_green(2.0, 3.0, 1.0, lambda).h0);
    solver_error = std::max({solver_error, std::abs(shooting.back() - analytic.back()), 1e-10 * std::abs(analytic.back())});
  }
  double min_gap = INFINITY;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    v.check(analytic[i] > analytic[i - 1], "analytic values not increasing at " + num(grid[i]));
    v.check(shooting[i] > shooting[i - 1], "shooting values not increasing at " + num(grid[i]));
    min_gap = std::min(min_gap, shooting[i] - shooting[i - 1]);
  }
  v.note("min gap " + num(min_gap) + ", solver error " + num(solver_error));
  v.check(min_gap > 10.0 * solver_error, "gaps not resolved above 10x solver error");
}

void bubble_and_sobolev(Verdict& v) {
  for (auto [p, n] : {std::pair{2.0, 3.0}, std::pair{2.2, 4.0}}) {
    auto grid = radial::radial_grid(50.0);
    grid.erase(grid.begin());
    const double residual = bubble_residual(BubbleParams::make(1.0, p, n), grid);
    const auto s0 = sobolev_constant(p, n);
    const double gap = std::abs(s0.quotient - s0.power_form) / s0.power_form;
    const double closed = oracle::sobolev_best_constant(p, n);
    v.note("(" + num(p) + "," + num(n) + "): residual " + num(residual) + ", forms " + num(gap));
    v.check(residual <= 1e-8, "bubble residual above 1e-8");
    v.check(gap <= 1e-6, "the two S0 forms disagree");
    v.check(std::abs(s0.value() - closed) <= 1e-6 * closed, "S0 differs from the Gamma-function value");
  }
}

void expansion_slope(Verdict& v) {
  const double p = 2.0, n = 3.0, lambda = 5.0;
  const auto grid = default_epsilon_grid(p, 2.0);
  const auto rep = expansion_sweep(BallProblem{p, n, 1.0, lambda, {}}, grid);
  // Closed forms for p = 2, N = 3: amplitude 3^{1/4}, Γ = 1/(4π r).
  const double s0 = 3.0 * std::pow(kPi / 2.0, 4.0 / 3.0);
  const double amplitude = std::pow(3.0, 0.25);
  const double source_integral = 4.0 * kPi * amplitude;
  const double predicted =
      -(p - 1.0) * std::pow(s0, (p - n) / p) * source_integral * (amplitude * 4.0 * kPi) * oracle::ball_h0(lambda);
  const double deviation = std::abs(rep.slope - predicted) / std::abs(predicted);
  v.note("slope " + num(rep.slope) + " vs " + num(predicted) + " (" + num(100 * deviation) + "%)");
  v.check(deviation <= 0.1, "slope deviates by more than 10%");
  v.check(std::abs(rep.s0 - s0) <= 1e-8 * s0, "Sobolev constant mismatch");

  const auto below = expansion_sweep(BallProblem{p, n, 1.0, 1.0, {}}, grid);
  double min_q = INFINITY;
  for (double q : below.quotient) min_q = std::min(min_q, q);
  v.note("lambda 1: min Q - S0 " + num(min_q - s0));
  v.check(min_q > s0, "quotient dips below S0 at lambda = 1");
}

void property_suites(Verdict& v) {
  std::mt19937_64 rng(20261014);
  std::uniform_real_distribution<double> unit(-1.0, 1.0), positive(0.05, 3.0);

  for (double p : {2.0, 2.5, 3.0}) {
    double worst = INFINITY;
    for (int i = 0; i < 100000; ++i) {
      const int dim = 2 + i % 2;
      Eigen::VectorXd x(dim), y(dim);
      for (int k = 0; k < dim; ++k) x[k] = unit(rng), y[k] = unit(rng);
      if ((x - y).norm() == 0.0) continue;
      worst = std::min(worst, coercivity_ratio(x, y, p));
    }
    v.note("coercivity min p=" + num(p) + " " + num(worst));
    v.check(worst > 0.0, "coercivity ratio not positive at p = " + num(p));
  }

  for (double p : {2.0, 2.5, 3.0}) {
    const auto k = ConvexityConstants::make(p);
    double worst = INFINITY;
    for (int i = 0; i < 1000; ++i) {
      const double w = positive(rng), phi = unit(rng);
      worst = std::min(worst, rho_pointwise(k, w, Vec2(unit(rng), unit(rng)), phi, Vec2(unit(rng), unit(rng))));
    }
    v.note("rho min p=" + num(p) + " " + num(worst));
    v.check(worst >= 0.0, "rho negative at p = " + num(p));
  }

  {
    const auto mesh = geometry::build_mesh(geometry::DomainSpec{geometry::Disk{1.0}, Vec2::Zero()}, 0.1, 1.0);
    std::mt19937 trig(5);
    double worst = 0.0;
    for (double p : {2.0, 2.5, 3.0}) {
      for (int trial = 0; trial < 3; ++trial) {
        const auto w = ScalarField::interpolate(mesh, TrigField(trig, 1.1, 1.0));
        const auto phi = ScalarField::interpolate(mesh, TrigField(trig, 0.0, 1.0));
        const double step = 1e-5;
        const auto at = [&](double t) { return I_prime(ScalarField(mesh, w.values() + t * phi.values()), phi, p); };
        const double fd = (at(step) - at(-step)) / (2 * step);
        worst = std::max(worst, std::abs(I_second(w, phi, p) - fd) / std::abs(fd));
      }
    }
    v.note("I'' vs differences " + num(worst));
    v.check(worst <= 1e-4, "second variation disagrees with finite differences");
  }

  {
    const auto mesh = geometry::build_mesh(geometry::DomainSpec{geometry::Disk{1.0}, Vec2::Zero()}, 0.12, 1.0);
    std::mt19937 trig(31);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    int passed = 0, total = 0;
    for (double p : {2.0, 2.5}) {
      const double lambda1 = first_eigenvalue(p, mesh).lambda1;
      for (int trial = 0; trial < 10; ++trial, ++total) {
        const TrigField base(trig, 0.0, 1.0), gap(trig, 1.0, 1.0), trace(trig, 0.0, 0.3);
        const double lambda = trial % 2 ? 0.5 * u01(trig) : 0.0;
        auto make = [&](const std::function<double(const Vec2&)>& f) {
          ProblemSpec s;
          s.p = p;
          s.lambda = lambda;
          s.domain = *mesh->domain;
          s.mesh = mesh;
          s.source = analytic_source(f);
          s.lambda1 = lambda1;
          s.controls.verify_positivity = false;
          return s;
        };
        auto first = make([=](const Vec2& x) { return 0.5 + 0.9 * base(x) - gap(x); });
        auto second = make([=](const Vec2& x) { return 1.0 + 0.9 * base(x); });
        Eigen::VectorXd g1(static_cast<Eigen::Index>(mesh->num_vertices())), g2 = g1;
        for (Eigen::Index i = 0; i < g1.size(); ++i) {
          g2[i] = trace(mesh->vertices[static_cast<std::size_t>(i)]);
          g1[i] = g2[i] - 0.2 * u01(trig);
        }
        first.boundary_values = g1;
        second.boundary_values = g2;
        if (comparison_harness(first, second).pass) ++passed;
      }
    }
    v.note("comparison " + std::to_string(passed) + "/" + std::to_string(total));
    v.check(total == 20 && passed == total, "comparison harness failed on a random instance");
  }

  {
    const auto off = green_function(disk_problem(2.0, Vec2(0.5, 0.0), 0.05, 0.1));
    const FemRegularPart h_off(off);
    const auto rep_off = harnack_report(h_off, -1, 0.0, geometric_radii(1.2 * off.resolved_radius, 0.4, 6));
    const auto helm = green_function(disk_problem(2.0, Vec2::Zero(), 0.05, 0.1, 2.0));
    const FemRegularPart h_helm(helm);
    const auto rep_helm = harnack_report(h_helm, 1, 2.0 * std::abs(helm.h_pole.value),
                                         geometric_radii(1.2 * helm.resolved_radius, 0.45, 6));
    const auto ball = radial::radial_green(2.5, 3.0, 1.0, 1.0);
    const RadialRegularPart h_ball(ball);
    const auto rep_ball = harnack_report(h_ball, 1, 2.0 * std::abs(ball.h0), geometric_radii(1e-3, 0.3, 8));
    for (const auto* rep : {&rep_off, &rep_helm, &rep_ball}) {
      v.check(!rep->growth_flag, "Harnack quotient grows toward the pole");
      for (double q : rep->quotient) v.check(std::isfinite(q) && q > 0.0, "Harnack quotient not finite");
      v.note("Harnack max " + num(*std::max_element(rep->quotient.begin(), rep->quotient.end())));
    }
  }

  {
    const auto s = disk_problem(2.0, Vec2(0.1, 0.3), 0.05, 0.1);
    GreenControls a, b;
    a.extrapolate = b.extrapolate = false;
    a.schedule = {0.12, 0.06, 0.03};
    b.schedule = {0.16, 0.1, 0.05, 0.025};
    const auto ga = green_function(s, a);
    const auto gb = green_function(s, b);
    const double d2 = lq_norm(ScalarField(s.mesh, ga.g.values() - gb.g.values()), 1.0);
    const double tol2 = ga.stages.back().change + gb.stages.back().change;
    v.note("schedules p=2 " + num(d2) + " <= " + num(tol2));
    v.check(d2 <= tol2, "two schedules disagree at p = 2");

    const auto ra = radial_mollified_green(2.5, 3.0, 1.0, 1.0, {0.2, 0.1, 0.05, 0.025});
    const auto rb = radial_mollified_green(2.5, 3.0, 1.0, 1.0, {0.15, 0.07, 0.03});
    const double d25 = radial_lq_distance(ra.stages.back(), rb.stages.back(), 1.5);
    const double tol25 = ra.changes.back() + rb.changes.back();
    v.note("schedules p=2.5 " + num(d25) + " <= " + num(tol25));
    v.check(d25 <= tol25, "two schedules disagree at p = 2.5");
  }
}

struct Criterion {
  int id;
  const char* title;
  std::function<void(Verdict&)> body;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "centered disk, zero regular part", disk_identity},
      {2, "off-center disk pole", off_center_pole},
      {3, "quasi-linear centered disk", quasilinear_radial},
      {4, "threshold on the unit ball", ball_threshold},
      {5, "flux residue invariance", pohozaev_invariance},
      {6, "flux constant identity", pohozaev_constant_identity},
      {7, "monotone regular part", regular_part_monotone},
      {8, "bubble and Sobolev constant", bubble_and_sobolev},
      {9, "energy expansion slope", expansion_slope},
      {10, "property suites", property_suites},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Verdict v;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.body(v);
    } catch (const Error& e) {
      v.check(false, std::string("error: ") + e.what());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %d: %s  %s [%s] (%.1fs)\n", c.id, v.pass() ? "PASS" : "FAIL", c.title, v.detail().c_str(),
                seconds);
    std::fflush(stdout);
    if (!v.pass()) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
