#pragma once

// One-dimensional reference solvers for radial problems on balls of any
// dimension N >= 2 (N need not be an integer).

#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "plap/fundamental.hpp"

namespace plap::radial {

using RadialFunction = std::function<double(double)>;

struct RadialProfile {
  std::vector<double> r;  ///< r[0] = 0, strictly increasing
  std::vector<double> values;
  std::vector<double> slopes;  ///< d/dr of values
  double p = 2.0;
  double dimension = 2.0;

  double radius() const { return r.back(); }
  /// Cubic Hermite interpolation between grid radii.
  double at(double x) const;
};

/// 0, then geometric spacing from 1e-6 R up to R/10, then uniform up to R.
std::vector<double> radial_grid(double radius, int points_per_decade = 40, int uniform_points = 200);

/// -(r^{N-1} φ_p(u'))' = r^{N-1} f with u(R) = 0, by quadrature inversion.
/// Raises QuadratureFailure when an integral does not converge.
RadialProfile radial_solve_lambda0(double p, double dimension, double radius, const RadialFunction& f);

double radial_eigen(double p, double dimension, double radius);

/// Integrand m(r, u, u') of a radial moment ∫_0^R r^{N-1} m dr.
using Moment = std::function<double(double r, double u, double du)>;

struct RadialProblem {
  double p = 2.0;
  double dimension = 3.0;
  double radius = 1.0;
  double lambda = 0.0;
  RadialFunction source;  ///< empty means zero
  std::vector<Moment> moments;
  std::optional<double> lambda1;  ///< computed with radial_eigen when absent
  std::optional<double> center_guess;
};

struct RadialSolution {
  RadialProfile u;
  std::vector<double> moments;
  int shots = 0;
};

/// -(r^{N-1} φ_p(u'))' = r^{N-1} (λ φ_p(u) + f), u'(0) = 0, u(R) = 0, by shooting on u(0).
/// Raises SupercriticalLambda and ShootingDivergence.
RadialSolution radial_dirichlet(const RadialProblem& problem, const std::vector<double>& grid = {});

struct GreenState {
  double g = 0.0;
  double dg = 0.0;
  double h = 0.0;
  double flux = 0.0;  ///< -N ω_N r^{N-1} φ_p(G')
  double mass = 0.0;  ///< ∫_{B_r} G^p
};

/// Radial Green function with the pole at the center, and its regular part.
class RadialGreen {
 public:
  double p = 2.0;
  double dimension = 3.0;
  double radius = 1.0;
  double lambda = 0.0;
  double h0 = 0.0;
  RadialProfile h;        ///< regular part on the grid; h.values[0] = h0
  std::vector<double> g;  ///< G on the same grid; g[0] is +infinity
  double start_radius = 0.0;
  double start_flux = 1.0;
  int shots = 0;

  GreenState state_at(double r) const;

 private:
  friend RadialGreen radial_green(double, double, double, double, std::optional<double>);
  std::vector<std::vector<double>> checkpoints_;
};

/// Requires p < N or p = N = 2. Raises SupercriticalLambda, ShootingDivergence.
RadialGreen radial_green(double p, double dimension, double radius, double lambda,
                         std::optional<double> lambda1 = {});

void write_profile_csv(std::ostream& os, const RadialGreen& green);
void write_profile_csv(std::ostream& os, const RadialProfile& profile);

}  // namespace plap::radial
