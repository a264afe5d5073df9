#pragma once

// Critical-growth problem -Δ_p u = λ u^{p-1} + u^{p*-1}: Sobolev bubbles, their
// projections on balls and meshes, the quotient Q_λ and its small-scale
// expansion, and the threshold λ_* where the regular part changes sign.

#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "plap/core.hpp"
#include "plap/radial.hpp"

namespace plap {

struct BubbleParams {
  double epsilon = 1.0;
  Vec2 center = Vec2::Zero();
  double p = 2.0;
  double dimension = 3.0;
  double amplitude = 0.0;

  /// Raises InvalidExponent unless 1 < p < N, PreconditionViolation unless ε > 0.
  static BubbleParams make(double epsilon, double p, double dimension, const Vec2& center = Vec2::Zero());
  /// Np/(N - p).
  double critical_exponent() const { return dimension * p / (dimension - p); }
};

/// U_ε at distance r from the center.
double bubble(const BubbleParams& b, double r);
double bubble(const BubbleParams& b, const Vec2& x);
double bubble_slope(const BubbleParams& b, double r);

/// Largest relative defect of r^{N-1} φ_p(U') = -∫_0^r s^{N-1} U^{p*-1} over the radii,
/// the right side by adaptive quadrature.
double bubble_residual(const BubbleParams& b, const std::vector<double>& radii);

/// Whole-space integrals of U_1 and the two expressions of the Sobolev constant.
struct SobolevConstant {
  double gradient_integral = 0.0;  ///< ∫|∇U_1|^p
  double critical_integral = 0.0;  ///< ∫U_1^{p*}
  double source_integral = 0.0;    ///< ∫U_1^{p*-1}
  double quotient = 0.0;           ///< gradient / critical^{p/p*}
  double power_form = 0.0;         ///< critical^{p/N}

  double value() const { return quotient; }
};

/// Radial integrals split at `cutoff`, the outer part after t = 1/r. Raises
/// NonconvergentQuadrature when an integral misses 1e-12 or the two forms
/// disagree beyond 1e-6 relative.
SobolevConstant sobolev_constant(double p, double dimension, double cutoff = 1.0);

/// The normalized concentrating source (C0/C1)^{p-1} ε^{-(N-p)(p-1)/p} U_ε^{p*-1}.
struct ConcentratedSource {
  BubbleParams bubble;
  double amplitude = 0.0;

  double operator()(double r) const;
  double operator()(const Vec2& x) const;
  /// ∫ over the ball of the given radius around the center; infinity gives the whole space.
  double mass(double radius) const;
};

ConcentratedSource f_epsilon(double epsilon, const Vec2& center, double p, double dimension);

struct BallProblem {
  double p = 2.0;
  double dimension = 3.0;
  double radius = 1.0;
  double lambda = 0.0;
  std::optional<double> lambda1;
};

/// ∫|∇u|^p, ∫|u|^p and ∫|u|^{p*}.
struct QuotientIntegrals {
  double gradient = 0.0;
  double lp = 0.0;
  double critical = 0.0;
};

/// (gradient - λ lp) / critical^{p/p*}. Raises ZeroField when critical vanishes.
double rayleigh_Q(const QuotientIntegrals& parts, double p, double dimension, double lambda);
/// Planar P1 field, so p* = 2p/(2 - p); raises InvalidExponent for p >= 2.
QuotientIntegrals quotient_integrals(const ScalarField& u, double p);
QuotientIntegrals quotient_integrals(const radial::RadialFunction& u, const radial::RadialFunction& du, double p,
                                     double dimension, double radius);
double rayleigh_Q(const ScalarField& u, double p, double lambda);

struct ProjectedBubble {
  BubbleParams bubble;
  radial::RadialProfile profile;
  QuotientIntegrals parts;
  double quotient = 0.0;  ///< Q_λ of the profile
};

/// Solves -Δ_p v = λ v^{p-1} + U_ε^{p*-1} on the ball with v = 0 on the sphere.
/// Raises SupercriticalLambda, ShootingDivergence.
ProjectedBubble project_bubble(const BallProblem& ball, double epsilon);

/// The same problem on the mesh of `spec`, centered at the pole. Raises
/// UnresolvableEpsilonRange when ε^{p-1} spans fewer than five pole edges,
/// and the solver errors.
ScalarField project_bubble(const ProblemSpec& spec, double epsilon);

/// `count` geometric scales from ε^{p-1} = diameter/10 down over `decades` decades of ε.
std::vector<double> default_epsilon_grid(double p, double diameter, int count = 8, double decades = 2.0);

struct ExpansionReport {
  std::vector<double> epsilon;     ///< strictly decreasing
  std::vector<double> quotient;    ///< Q_λ(PU_ε)
  std::vector<double> scaled_gap;  ///< (Q - S_0)/ε^{N-p}
  double s0 = 0.0;
  double regular_part = 0.0;  ///< H_λ at the center
  double slope = 0.0;         ///< scaled gap extrapolated to ε = 0 from the two smallest scales
  double predicted_slope = 0.0;
  double deviation = 0.0;  ///< |slope - predicted| / |predicted|
  int dropped = 0;         ///< scales outside the resolvable range
};

/// Needs 2 <= p < N and p > max(√N, N/2). Scales with ε^{p-1} below 1e-4 R or above R/2
/// are dropped; UnresolvableEpsilonRange when fewer than two remain.
ExpansionReport expansion_sweep(const BallProblem& ball, const std::vector<double>& epsilon);

void write_expansion_csv(std::ostream& os, const ExpansionReport& report);

struct LambdaStarResult {
  double lambda_star = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<std::pair<double, double>> samples;  ///< (λ, max_x H_λ(x, x)) in evaluation order
};

using RegularPartMax = std::function<double(double lambda)>;

/// Bisection on a map that must increase strictly across `checks` equispaced
/// points of [lo, hi] (PreconditionViolation otherwise) and change sign
/// (NoSignChange otherwise), until hi - lo <= tol.
LambdaStarResult lambda_star(const RegularPartMax& max_regular_part, double lo, double hi, double tol,
                             int checks = 5);

/// Ball version: the maximum sits at the center. tol = 0 means 1e-6 λ1.
LambdaStarResult lambda_star(const BallProblem& ball, double lo, double hi, double tol = 0.0);

struct PlanarThresholdProblem {
  geometry::DomainSpec domain;
  double h = 0.1;
  double gamma = 0.1;
  double p = 2.0;
  std::vector<Vec2> poles;  ///< empty means default_pole_grid
};

/// Mesh vertices at least ten edge lengths from the boundary, thinned to at most `max_poles`.
std::vector<Vec2> default_pole_grid(const geometry::DomainSpec& domain, double h, int max_poles = 9);

/// Planar version: the maximum runs over the pole grid, one graded mesh per pole.
LambdaStarResult lambda_star(const PlanarThresholdProblem& problem, double lo, double hi, double tol);

void write_lambda_csv(std::ostream& os, const LambdaStarResult& result);

}  // namespace plap
