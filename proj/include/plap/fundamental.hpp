#pragma once

// Radial fundamental solution of the p-Laplacian in R^N.

#include "plap/geometry.hpp"

namespace plap {

/// Volume of the unit ball in R^N (real N allowed).
double unit_ball_volume(double dimension);

struct FundamentalSolutionParams {
  double p = 2.0;
  double dimension = 2.0;
  /// Power-law amplitude for p < N, log amplitude for p = N.
  double c0 = 0.0;
  bool logarithmic = false;

  /// Raises InvalidExponent unless 1 < p <= N.
  static FundamentalSolutionParams make(double p, double dimension);

  /// Surface area N ω_N of the unit sphere.
  double sphere_area() const;
  /// (N - p)/(p - 1); zero in the logarithmic case.
  double decay() const;
  double value(double r) const;
  /// dΓ/dr (negative).
  double slope(double r) const;
};

/// Amplitude of the extremal profile of the Sobolev inequality, 1 < p < N.
double bubble_amplitude(double p, double dimension);

/// Γ(|x - pole|). Raises AtPole when x coincides with the pole.
double fundamental_solution(const geometry::Vec2& x, const geometry::Vec2& pole, double p, double dimension);
geometry::Vec2 fundamental_solution_gradient(const geometry::Vec2& x, const geometry::Vec2& pole, double p,
                                             double dimension);

}  // namespace plap
