#include "plap/fundamental.hpp"

#include <cmath>

#include "plap/error.hpp"

namespace plap {

double unit_ball_volume(double dimension) {
  return std::pow(M_PI, 0.5 * dimension) / std::tgamma(0.5 * dimension + 1.0);
}

FundamentalSolutionParams FundamentalSolutionParams::make(double p, double dimension) {
  require(dimension >= 2.0, ErrorCode::InvalidExponent, "dimension must be at least 2");
  require(p > 1.0 && p <= dimension, ErrorCode::InvalidExponent, "fundamental solution needs 1 < p <= N");
  FundamentalSolutionParams f;
  f.p = p;
  f.dimension = dimension;
  const double area = dimension * unit_ball_volume(dimension);
  f.logarithmic = p == dimension;
  if (f.logarithmic)
    f.c0 = std::pow(area, -1.0 / (dimension - 1.0));
  else
    f.c0 = (p - 1.0) / (dimension - p) * std::pow(area, -1.0 / (p - 1.0));
  return f;
}

double FundamentalSolutionParams::sphere_area() const { return dimension * unit_ball_volume(dimension); }

double FundamentalSolutionParams::decay() const { return logarithmic ? 0.0 : (dimension - p) / (p - 1.0); }

double FundamentalSolutionParams::value(double r) const {
  require(r > 0.0, ErrorCode::AtPole, "fundamental solution evaluated at the pole");
  return logarithmic ? -c0 * std::log(r) : c0 * std::pow(r, -decay());
}

double FundamentalSolutionParams::slope(double r) const {
  require(r > 0.0, ErrorCode::AtPole, "fundamental solution evaluated at the pole");
  return logarithmic ? -c0 / r : -c0 * decay() * std::pow(r, -decay() - 1.0);
}

double bubble_amplitude(double p, double dimension) {
  require(p > 1.0 && p < dimension, ErrorCode::InvalidExponent, "bubbles need 1 < p < N");
  const double n = dimension;
  return std::pow(n, (n - p) / (p * p)) * std::pow((n - p) / (p - 1.0), (p - 1.0) * (n - p) / (p * p));
}

double fundamental_solution(const geometry::Vec2& x, const geometry::Vec2& pole, double p, double dimension) {
  return FundamentalSolutionParams::make(p, dimension).value((x - pole).norm());
}

geometry::Vec2 fundamental_solution_gradient(const geometry::Vec2& x, const geometry::Vec2& pole, double p,
                                             double dimension) {
  const geometry::Vec2 d = x - pole;
  const double r = d.norm();
  return FundamentalSolutionParams::make(p, dimension).slope(r) / r * d;
}

}  // namespace plap
