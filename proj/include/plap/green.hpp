#pragma once

// Green functions of -Δ_p - λ|u|^{p-2}u with a point source, their regular
// parts H = G - Γ, and two independent estimators of H at the pole.

#include <string>
#include <vector>

#include "plap/core.hpp"
#include "plap/fundamental.hpp"
#include "plap/radial.hpp"

namespace plap {

/// Nodal bump (1 - (r/ρ)^2)^3 around the pole with unit discrete mass.
/// Raises UnresolvedMollifier when ρ is below three pole-edge lengths.
ScalarField mollified_delta(double rho, const Vec2& pole, const MeshPtr& mesh);

/// ρ_n = ρ_0 2^{-n} from a quarter of the pole-boundary distance down to
/// the last radius still covering six pole-edge lengths.
std::vector<double> default_schedule(const geometry::Mesh& mesh, double pole_distance, int min_pole_edges = 6);

struct PoleEstimate {
  double value = 0.0;
  double uncertainty = 0.0;
  std::string method;
};

/// Ring values fitted by H0 + c r^alpha with alpha in (0, 1].
struct PoleFit {
  std::vector<double> radii;
  std::vector<double> values;
  double h0 = 0.0;
  double coefficient = 0.0;
  double alpha = 1.0;
  double residual = 0.0;  ///< root-mean-square misfit
  double uncertainty = 0.0;  ///< misfit plus the extrapolated drift when the outermost ring is dropped
  bool degenerate = false;  ///< ring spread below the noise floor: constant model
};

/// Raises PoorFit when the misfit exceeds a tenth of the value spread.
PoleFit fit_pole_model(const std::vector<double>& radii, const std::vector<double>& values,
                       double noise_floor = 0.0);

struct GreenStage {
  double rho = 0.0;
  ScalarField g;
  double change = 0.0;  ///< L^{p-1} distance to the previous stage (0 for the first)
  int newton_iterations = 0;
};

struct GreenDiagnostics {
  double min_g = 0.0;
  double max_abs_h = 0.0;           ///< over resolved nodes
  double max_abs_h_last = 0.0;      ///< same statistic from the last stage alone
  double max_abs_h_previous = 0.0;  ///< and from the next-to-last stage
  double q_bar = 0.0;
  double q_bar_norm = 0.0;  ///< ‖∇H‖_{q̄} outside the resolved radius
  double q_bar_norm_previous = 0.0;
  double two_sided_c = 0.0;  ///< smallest C with Γ/C <= G <= CΓ near the pole
};

struct GreenControls {
  std::vector<double> schedule;  ///< empty selects default_schedule
  int min_pole_edges = 6;
  bool extrapolate = true;  ///< first-order Richardson over the last two stages
  SolverControls solver;
};

struct GreenSolution {
  ProblemSpec spec;
  FundamentalSolutionParams gamma;
  std::vector<GreenStage> stages;
  ScalarField g;               ///< last stage
  ScalarField g_extrapolated;  ///< 2 G_N - G_{N-1} (equals g with a single stage)
  ScalarField h;               ///< nodal regular part; the pole node carries h_pole
  std::vector<char> resolved;  ///< nodes outside every mollifier support used, pole excluded
  double resolved_radius = 0.0;
  double lambda1 = 0.0;  ///< eigenvalue estimate used by the gate (0 when λ = 0)
  PoleEstimate h_pole;
  PoleFit pole_fit;
  GreenDiagnostics diagnostics;

  const Vec2& pole() const { return spec.mesh->pole; }
  /// H at a point given by its triangle and barycentric coordinates.
  double regular_part(int tri, const std::array<double, 3>& bary) const;
};

/// Raises InvalidExponent, SupercriticalLambda, UnresolvedMollifier,
/// ScheduleTooAggressive and propagated solver errors.
GreenSolution green_function(const ProblemSpec& spec, const GreenControls& controls = {});

/// Geometric ring radii between the resolved radius (at least five pole edges)
/// and half the pole-boundary distance.
std::vector<double> default_pole_rings(const GreenSolution& gs, int count = 6);
/// Relative width of the annuli used for ring averages.
inline constexpr double kRingWidth = 0.1;

PoleFit regular_part_at_pole(const GreenSolution& gs, const std::vector<double>& radii);
PoleFit regular_part_at_pole(const radial::RadialGreen& green, const std::vector<double>& radii = {});

/// The same mollifier schedule on a ball with the pole at the center,
/// solved by shooting: stages share the radial grid.
struct RadialMollifiedGreen {
  std::vector<double> rho;
  std::vector<radial::RadialProfile> stages;
  std::vector<double> changes;  ///< L^{p-1}(B_R) distance to the previous stage (0 for the first)
};

/// Raises ScheduleTooAggressive when the stage changes stop decreasing.
RadialMollifiedGreen radial_mollified_green(double p, double dimension, double radius, double lambda,
                                            const std::vector<double>& schedule);

/// (∫_{B_R} |a - b|^q)^{1/q} by the trapezoid rule on the shared grid.
double radial_lq_distance(const radial::RadialProfile& a, const radial::RadialProfile& b, double q);

/// p-harmonic field on a punctured mesh with Γ on the hole boundary and zero
/// on the outer boundary. Requires λ = 0 and a mesh built with a hole.
ScalarField punctured_green(const ProblemSpec& spec);

struct PohozaevConstant {
  double value = 0.0;
  double direct_integral = 0.0;
  double reduced_integral = 0.0;
};

/// Requires 2 <= p < N. Raises NonconvergentQuadrature when the two integral
/// forms disagree beyond 1e-8 relative.
PohozaevConstant pohozaev_constant(double p, double dimension);

struct PohozaevReport {
  std::vector<double> deltas;
  std::vector<double> residues;
  std::vector<double> estimates;  ///< residue / constant
  double constant = 0.0;
  double mean = 0.0;
  double spread = 0.0;  ///< max |estimate - mean| / |mean|
  double abs_spread = 0.0;
};

/// Radial Pohozaev residue on spheres of radius δ about the center.
PohozaevReport pohozaev_residue(const radial::RadialGreen& green, const std::vector<double>& deltas);

}  // namespace plap
