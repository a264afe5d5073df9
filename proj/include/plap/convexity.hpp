#pragma once

// The functional I(w) = ∫|∇w^{1/p}|^p on nonnegative P1 fields, its first
// and second variations, and a weak-comparison harness for paired solves.

#include <vector>

#include "plap/core.hpp"

namespace plap {

/// Coefficients of the second-variation density
///   ρ = w^{2(1-p)/p} |∇w^{1/p}|^{p-2} [c1 |∇w|²φ²/w² - c2 cosα |∇w|φ|∇φ|/w + c3(α) |∇φ|²],
/// with c3(α) = c3_base + c3_cos2 cos²α and α the angle between ∇w and ∇φ.
struct ConvexityConstants {
  double p = 2.0;
  double c1 = 0.5;
  double c2 = 1.0;
  double c3_base = 0.5;
  double c3_cos2 = 0.0;

  static ConvexityConstants make(double p);
  double c3(double cos_alpha) const { return c3_base + c3_cos2 * cos_alpha * cos_alpha; }
  /// 4 c1 c3(α) - c2² cos²α, which equals 4(p-1)(1-cos²α)/p².
  double discriminant(double cos_alpha) const;
};

/// Pointwise density at one point from the values and gradients of w and φ.
double rho_pointwise(const ConvexityConstants& k, double w, const Vec2& grad_w, double phi, const Vec2& grad_phi);
/// Square-completion lower bound: the prefactor times c1 |∇w|² (φ/w - ⟨∇w,∇φ⟩/|∇w|²)².
double rho_lower_bound(const ConvexityConstants& k, double w, const Vec2& grad_w, double phi, const Vec2& grad_phi);

/// p^{-p} ∫ w^{1-p}|∇w|^p by the mesh quadrature; +∞ when w = 0 with ∇w ≠ 0
/// at a quadrature point. Raises NegativeField.
double I_energy(const ScalarField& w, double p);

/// d/dt I(w + tφ) at t = 0. Raises DegenerateBase when w <= 1e-10 at a
/// quadrature point of a triangle where φ is not identically zero.
double I_prime(const ScalarField& w, const ScalarField& phi, double p);

/// ρ(w, φ) at every quadrature point, in for_each_quad_point order.
struct QuadratureField {
  std::vector<double> values;
  std::vector<double> weights;

  double integral() const;
  double min() const;
};

/// Raises DegenerateBase as I_prime does.
QuadratureField rho_density(const ScalarField& w, const ScalarField& phi, double p);

/// ∫ρ, the second variation I''(w)[φ, φ].
double I_second(const ScalarField& w, const ScalarField& phi, double p);

struct ComparisonVerdict {
  bool pass = false;
  double max_excess = 0.0;  ///< max over nodes of u1 - u2
  double tolerance = 0.0;
  ScalarField u1;
  ScalarField u2;
};

/// Solves both problems and checks u1 <= u2 + τ nodewise, with τ the Newton
/// tolerance scaled by max(1, ‖u2‖∞). Raises HypothesisViolated unless
/// p >= 2, p and λ agree, f1 <= f2 and f2 >= 0 at quadrature points and
/// g1 <= g2 on the boundary; MeshMismatch for different meshes.
ComparisonVerdict comparison_harness(const ProblemSpec& first, const ProblemSpec& second);

}  // namespace plap
