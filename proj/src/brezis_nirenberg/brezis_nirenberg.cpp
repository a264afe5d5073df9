#include "plap/brezis_nirenberg.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <ostream>

#include "plap/error.hpp"
#include "plap/fundamental.hpp"
#include "plap/green.hpp"
#include "plap/spectral.hpp"

namespace plap {
namespace {

constexpr double kQuadTol = 1e-13;
constexpr double kQuadAccept = 1e-12;
constexpr double kFormAgreement = 1e-6;
constexpr double kFinestScale = 1e-4;
constexpr double kCoarsestScale = 0.5;
constexpr int kPoleEdges = 5;

double conjugate(double p) { return p / (p - 1.0); }

double sphere_area(double dimension) { return dimension * unit_ball_volume(dimension); }

double checked(double value, double err, const char* what) {
  require(std::isfinite(value) && err <= kQuadAccept * std::abs(value) + 1e-300, ErrorCode::NonconvergentQuadrature,
          what);
  return value;
}

/// ∫_0^upper s^{N-1} g(s) ds, with the part beyond `split` mapped to t = 1/s.
double radial_integral(const std::function<double(double)>& g, double dimension, double upper, double split,
                       const char* what) {
  boost::math::quadrature::tanh_sinh<double> ts;
  const double inner_end = std::min(upper, split);
  double err = 0.0;
  double total = checked(
      ts.integrate([&](double s) { return std::pow(s, dimension - 1.0) * g(s); }, 0.0, inner_end, kQuadTol, &err),
      err, what);
  if (upper > split) {
    const double t_lo = std::isinf(upper) ? 0.0 : 1.0 / upper;
    auto outer = [&](double t) {
      const double v = t > 0.0 ? g(1.0 / t) : 0.0;
      return v == 0.0 ? 0.0 : std::exp(std::log(v) - (dimension + 1.0) * std::log(t));
    };
    total += checked(ts.integrate(outer, t_lo, 1.0 / split, kQuadTol, &err), err, what);
  }
  return total;
}

double phi(double s, double p) { return s == 0.0 ? 0.0 : std::copysign(std::pow(std::abs(s), p - 1.0), s); }

}  // namespace

BubbleParams BubbleParams::make(double epsilon, double p, double dimension, const Vec2& center) {
  require(epsilon > 0.0 && std::isfinite(epsilon), ErrorCode::PreconditionViolation, "bubble scale must be positive");
  return {epsilon, center, p, dimension, bubble_amplitude(p, dimension)};
}

double bubble(const BubbleParams& b, double r) {
  const double base = b.epsilon / (std::pow(b.epsilon, b.p) + std::pow(r, conjugate(b.p)));
  return b.amplitude * std::pow(base, (b.dimension - b.p) / b.p);
}

double bubble(const BubbleParams& b, const Vec2& x) { return bubble(b, (x - b.center).norm()); }

double bubble_slope(const BubbleParams& b, double r) {
  if (r == 0.0) return 0.0;
  const double k = (b.dimension - b.p) / b.p, q = conjugate(b.p);
  const double scale = std::pow(b.epsilon, b.p), power = std::pow(r, q);
  const double share = 1.0 / (1.0 + scale / power);
  return -b.amplitude * k * std::pow(b.epsilon, k) * std::pow(scale + power, -k) * q * share / r;
}

double bubble_residual(const BubbleParams& b, const std::vector<double>& radii) {
  const double power = b.critical_exponent() - 1.0;
  boost::math::quadrature::tanh_sinh<double> ts;
  double worst = 0.0;
  for (double r : radii) {
    require(r > 0.0, ErrorCode::PreconditionViolation, "residual radii must be positive");
    double err = 0.0;
    const double mass = checked(
        ts.integrate([&](double s) { return std::pow(s, b.dimension - 1.0) * std::pow(bubble(b, s), power); }, 0.0, r,
                     kQuadTol, &err),
        err, "bubble source integral did not converge");
    const double flux = std::pow(r, b.dimension - 1.0) * phi(bubble_slope(b, r), b.p);
    worst = std::max(worst, std::abs(flux + mass) / mass);
  }
  return worst;
}

SobolevConstant sobolev_constant(double p, double dimension, double cutoff) {
  require(cutoff > 0.0, ErrorCode::PreconditionViolation, "cutoff must be positive");
  const auto b = BubbleParams::make(1.0, p, dimension);
  const double crit = b.critical_exponent();
  const double area = sphere_area(dimension);
  const double inf = std::numeric_limits<double>::infinity();
  SobolevConstant s;
  s.gradient_integral = area * radial_integral([&](double r) { return std::pow(std::abs(bubble_slope(b, r)), p); },
                                               dimension, inf, cutoff, "gradient integral did not converge");
  s.critical_integral = area * radial_integral([&](double r) { return std::pow(bubble(b, r), crit); }, dimension, inf,
                                               cutoff, "critical integral did not converge");
  s.source_integral = area * radial_integral([&](double r) { return std::pow(bubble(b, r), crit - 1.0); }, dimension,
                                             inf, cutoff, "source integral did not converge");
  s.quotient = s.gradient_integral / std::pow(s.critical_integral, p / crit);
  s.power_form = std::pow(s.critical_integral, p / dimension);
  require(std::abs(s.quotient - s.power_form) <= kFormAgreement * s.power_form, ErrorCode::NonconvergentQuadrature,
          "the two Sobolev constant expressions disagree");
  return s;
}

double ConcentratedSource::operator()(double r) const {
  const double n = bubble.dimension, p = bubble.p;
  const double base = std::pow(bubble.epsilon, p) + std::pow(r, conjugate(p));
  return amplitude * std::pow(bubble.epsilon, p) * std::pow(base, -n + (n - p) / p);
}

double ConcentratedSource::operator()(const Vec2& x) const { return (*this)((x - bubble.center).norm()); }

double ConcentratedSource::mass(double radius) const {
  require(radius > 0.0, ErrorCode::PreconditionViolation, "mass radius must be positive");
  const double scale = std::pow(bubble.epsilon, bubble.p - 1.0);
  return sphere_area(bubble.dimension) *
         radial_integral([this](double r) { return (*this)(r); }, bubble.dimension, radius, scale,
                         "source mass did not converge");
}

ConcentratedSource f_epsilon(double epsilon, const Vec2& center, double p, double dimension) {
  ConcentratedSource f;
  f.bubble = BubbleParams::make(epsilon, p, dimension, center);
  const double c0 = FundamentalSolutionParams::make(p, dimension).c0;
  f.amplitude = std::pow(c0, p - 1.0) * std::pow(f.bubble.amplitude, p * p / (dimension - p));
  return f;
}

double rayleigh_Q(const QuotientIntegrals& parts, double p, double dimension, double lambda) {
  require(p > 1.0 && p < dimension, ErrorCode::InvalidExponent, "the critical quotient needs 1 < p < N");
  require(parts.critical > 0.0, ErrorCode::ZeroField, "the quotient of the zero field is undefined");
  const double crit = dimension * p / (dimension - p);
  return (parts.gradient - lambda * parts.lp) / std::pow(parts.critical, p / crit);
}

QuotientIntegrals quotient_integrals(const ScalarField& u, double p) {
  require(p > 1.0 && p < 2.0, ErrorCode::InvalidExponent, "planar critical quotients need 1 < p < 2");
  const double crit = 2.0 * p / (2.0 - p);
  return {std::pow(wkq_seminorm(u, p), p), std::pow(lq_norm(u, p), p), std::pow(lq_norm(u, crit), crit)};
}

QuotientIntegrals quotient_integrals(const radial::RadialFunction& u, const radial::RadialFunction& du, double p,
                                     double dimension, double radius) {
  require(p > 1.0 && p < dimension, ErrorCode::InvalidExponent, "the critical quotient needs 1 < p < N");
  const double crit = dimension * p / (dimension - p);
  const double area = sphere_area(dimension);
  auto integral = [&](const std::function<double(double)>& g) {
    return area * radial_integral(g, dimension, radius, radius, "quotient integral did not converge");
  };
  return {integral([&](double r) { return std::pow(std::abs(du(r)), p); }),
          integral([&](double r) { return std::pow(std::abs(u(r)), p); }),
          integral([&](double r) { return std::pow(std::abs(u(r)), crit); })};
}

double rayleigh_Q(const ScalarField& u, double p, double lambda) {
  return rayleigh_Q(quotient_integrals(u, p), p, 2.0, lambda);
}

ProjectedBubble project_bubble(const BallProblem& ball, double epsilon) {
  ProjectedBubble out;
  out.bubble = BubbleParams::make(epsilon, ball.p, ball.dimension);
  const double crit = out.bubble.critical_exponent();
  const double p = ball.p;
  radial::RadialProblem pr;
  pr.p = p;
  pr.dimension = ball.dimension;
  pr.radius = ball.radius;
  pr.lambda = ball.lambda;
  pr.lambda1 = ball.lambda1;
  const BubbleParams b = out.bubble;
  pr.source = [b, crit](double r) { return std::pow(bubble(b, r), crit - 1.0); };
  pr.moments = {[p](double, double, double du) { return std::pow(std::abs(du), p); },
                [p](double, double u, double) { return std::pow(std::abs(u), p); },
                [crit](double, double u, double) { return std::pow(std::abs(u), crit); }};
  pr.center_guess = bubble(b, 0.0);
  auto sol = radial::radial_dirichlet(pr);
  for (std::size_t i = 0; i + 1 < sol.u.values.size(); ++i)
    require(sol.u.values[i] > 0.0, ErrorCode::NegativeField, "projected bubble is not positive");
  const double area = sphere_area(ball.dimension);
  out.parts = {area * sol.moments[0], area * sol.moments[1], area * sol.moments[2]};
  out.profile = std::move(sol.u);
  out.quotient = rayleigh_Q(out.parts, p, ball.dimension, ball.lambda);
  return out;
}

ScalarField project_bubble(const ProblemSpec& spec, double epsilon) {
  require(spec.mesh != nullptr, ErrorCode::PreconditionViolation, "projection needs a mesh");
  const auto b = BubbleParams::make(epsilon, spec.p, spec.dimension, spec.mesh->pole);
  require(std::pow(epsilon, spec.p - 1.0) >= kPoleEdges * spec.mesh->edge_length_near_pole(),
          ErrorCode::UnresolvableEpsilonRange, "bubble scale is below five pole edges");
  const double crit = b.critical_exponent();
  ProblemSpec s = spec;
  s.source = analytic_source([b, crit](const Vec2& x) { return std::pow(bubble(b, x), crit - 1.0); });
  return solve_dirichlet(s).u;
}

std::vector<double> default_epsilon_grid(double p, double diameter, int count, double decades) {
  require(p > 1.0 && diameter > 0.0 && count >= 2 && decades > 0.0, ErrorCode::PreconditionViolation,
          "invalid scale grid request");
  const double top = std::pow(diameter / 10.0, 1.0 / (p - 1.0));
  std::vector<double> out;
  for (int i = 0; i < count; ++i) out.push_back(top * std::pow(10.0, -decades * i / (count - 1)));
  return out;
}

ExpansionReport expansion_sweep(const BallProblem& ball, const std::vector<double>& epsilon) {
  const double p = ball.p, n = ball.dimension;
  require(p >= 2.0 && p < n && p > std::max(std::sqrt(n), n / 2.0), ErrorCode::InvalidExponent,
          "the expansion needs 2 <= p < N and p > max(sqrt N, N/2)");
  for (std::size_t i = 0; i < epsilon.size(); ++i)
    require(epsilon[i] > 0.0 && (i == 0 || epsilon[i] < epsilon[i - 1]), ErrorCode::PreconditionViolation,
            "scales must be positive and strictly decreasing");
  BallProblem solved = ball;
  if (ball.lambda > 0.0 && !solved.lambda1) solved.lambda1 = radial::radial_eigen(p, n, ball.radius);

  ExpansionReport rep;
  for (double e : epsilon) {
    const double scale = std::pow(e, p - 1.0);
    if (scale < kFinestScale * ball.radius || scale > kCoarsestScale * ball.radius) {
      ++rep.dropped;
      continue;
    }
    rep.epsilon.push_back(e);
  }
  require(rep.epsilon.size() >= 2, ErrorCode::UnresolvableEpsilonRange, "fewer than two resolvable scales");

  std::vector<std::future<double>> jobs;
  for (double e : rep.epsilon)
    jobs.push_back(std::async(std::launch::async, [&solved, e] { return project_bubble(solved, e).quotient; }));
  for (auto& j : jobs) rep.quotient.push_back(j.get());

  const auto s0 = sobolev_constant(p, n);
  rep.s0 = s0.value();
  const double order = n - p;
  for (std::size_t i = 0; i < rep.epsilon.size(); ++i)
    rep.scaled_gap.push_back((rep.quotient[i] - rep.s0) / std::pow(rep.epsilon[i], order));

  const std::size_t m = rep.epsilon.size();
  const double xa = std::pow(rep.epsilon[m - 2], order), xb = std::pow(rep.epsilon[m - 1], order);
  rep.slope = (rep.scaled_gap[m - 1] * xa - rep.scaled_gap[m - 2] * xb) / (xa - xb);

  rep.regular_part = radial::radial_green(p, n, ball.radius, ball.lambda, solved.lambda1).h0;
  const double c0 = FundamentalSolutionParams::make(p, n).c0;
  rep.predicted_slope = -(p - 1.0) * std::pow(rep.s0, (p - n) / p) * s0.source_integral *
                        (bubble_amplitude(p, n) / c0) * rep.regular_part;
  rep.deviation = std::abs(rep.slope - rep.predicted_slope) / std::abs(rep.predicted_slope);
  return rep;
}

void write_expansion_csv(std::ostream& os, const ExpansionReport& report) {
  os << "epsilon,Q,scaled_gap\n";
  os.precision(12);
  for (std::size_t i = 0; i < report.epsilon.size(); ++i)
    os << report.epsilon[i] << ',' << report.quotient[i] << ',' << report.scaled_gap[i] << '\n';
}

LambdaStarResult lambda_star(const RegularPartMax& max_regular_part, double lo, double hi, double tol, int checks) {
  require(lo < hi && tol > 0.0 && checks >= 2, ErrorCode::PreconditionViolation, "invalid bisection bracket");
  LambdaStarResult out;
  std::vector<double> grid;
  for (int i = 0; i < checks; ++i) grid.push_back(lo + (hi - lo) * i / (checks - 1));
  std::vector<std::future<double>> jobs;
  for (double l : grid) jobs.push_back(std::async(std::launch::async, [&max_regular_part, l] { return max_regular_part(l); }));
  std::vector<double> values;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    values.push_back(jobs[i].get());
    out.samples.emplace_back(grid[i], values.back());
  }
  for (std::size_t i = 1; i < values.size(); ++i)
    require(values[i] > values[i - 1], ErrorCode::PreconditionViolation,
            "the regular part is not strictly increasing on the bracket");
  require(values.front() < 0.0 && values.back() > 0.0, ErrorCode::NoSignChange,
          "the bracket does not straddle a sign change");

  std::size_t k = 1;
  while (values[k] <= 0.0) ++k;
  double a = grid[k - 1], b = grid[k];
  while (b - a > tol) {
    const double mid = 0.5 * (a + b);
    const double v = max_regular_part(mid);
    out.samples.emplace_back(mid, v);
    (v < 0.0 ? a : b) = mid;
  }
  out.lo = a;
  out.hi = b;
  out.lambda_star = 0.5 * (a + b);
  return out;
}

LambdaStarResult lambda_star(const BallProblem& ball, double lo, double hi, double tol) {
  const double lambda1 = ball.lambda1.value_or(radial::radial_eigen(ball.p, ball.dimension, ball.radius));
  require(hi < lambda1, ErrorCode::SupercriticalLambda, "the bracket reaches the first eigenvalue");
  const double step = tol > 0.0 ? tol : 1e-6 * lambda1;
  return lambda_star(
      [&](double l) { return radial::radial_green(ball.p, ball.dimension, ball.radius, l, lambda1).h0; }, lo, hi,
      step);
}

std::vector<Vec2> default_pole_grid(const geometry::DomainSpec& domain, double h, int max_poles) {
  require(h > 0.0 && max_poles >= 1, ErrorCode::PreconditionViolation, "invalid pole grid request");
  const auto mesh = geometry::build_mesh(domain, h, 1.0);
  std::vector<std::pair<double, Vec2>> candidates;
  std::pair<double, Vec2> deepest{-1.0, Vec2::Zero()};
  for (const auto& v : mesh->vertices) {
    const double d = domain.distance_to_boundary(v);
    if (d >= 10.0 * h) candidates.emplace_back(d, v);
    if (d > deepest.first) deepest = {d, v};
  }
  if (candidates.empty()) return {deepest.second};
  // Farthest-point thinning, seeded with the deepest candidate.
  std::sort(candidates.begin(), candidates.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
  std::vector<Vec2> poles{candidates.front().second};
  while (static_cast<int>(poles.size()) < max_poles && poles.size() < candidates.size()) {
    double best = -1.0;
    Vec2 pick = Vec2::Zero();
    for (const auto& [d, v] : candidates) {
      double gap = std::numeric_limits<double>::infinity();
      for (const auto& q : poles) gap = std::min(gap, (v - q).norm());
      if (gap > best) best = gap, pick = v;
    }
    if (best <= 0.0) break;
    poles.push_back(pick);
  }
  return poles;
}

LambdaStarResult lambda_star(const PlanarThresholdProblem& problem, double lo, double hi, double tol) {
  const auto poles = problem.poles.empty() ? default_pole_grid(problem.domain, problem.h) : problem.poles;
  std::vector<ProblemSpec> setups;
  for (const auto& x : poles) {
    ProblemSpec s;
    s.p = problem.p;
    s.dimension = 2.0;
    s.domain = problem.domain;
    s.domain.pole = x;
    s.mesh = geometry::build_mesh(s.domain, problem.h, problem.gamma);
    s.lambda1 = first_eigenvalue(problem.p, s.mesh).lambda1;
    setups.push_back(std::move(s));
  }
  auto max_h = [&setups](double l) {
    std::vector<std::future<double>> jobs;
    for (const auto& st : setups)
      jobs.push_back(std::async(std::launch::async, [&st, l] {
        ProblemSpec s = st;
        s.lambda = l;
        return green_function(s).h_pole.value;
      }));
    double best = -std::numeric_limits<double>::infinity();
    for (auto& j : jobs) best = std::max(best, j.get());
    return best;
  };
  return lambda_star(max_h, lo, hi, tol);
}

void write_lambda_csv(std::ostream& os, const LambdaStarResult& result) {
  os << "lambda,max_H\n";
  os.precision(12);
  for (const auto& [l, v] : result.samples) os << l << ',' << v << '\n';
}

}  // namespace plap
