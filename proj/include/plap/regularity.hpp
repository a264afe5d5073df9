#pragma once

// Harnack quotients and oscillation decay of the regular part H near the pole.

#include <functional>
#include <iosfwd>
#include <utility>
#include <vector>

#include "plap/green.hpp"

namespace plap {

/// Exponent σ of the rescaled Harnack inequality. Raises NonpositiveSigma.
double sigma_exponent(double p, double dimension, double q0);

/// Midpoint of (N/p, N/(N-p)) for p < N, and 2 at p = N.
double default_q0(double p, double dimension);

struct Extremes {
  double sup = 0.0;
  double inf = 0.0;
};

/// Read-only view of a regular part H around its pole.
class RegularPartSampler {
 public:
  virtual ~RegularPartSampler() = default;
  virtual double p() const = 0;
  virtual double dimension() const = 0;
  virtual double lambda() const = 0;
  /// Smallest radius at which H is meaningful.
  virtual double min_radius() const = 0;
  /// Oscillations at or below this level are indistinguishable from zero.
  virtual double noise_floor() const = 0;
  /// sup and inf of H over B_R without the pole.
  virtual Extremes extremes(double radius) const = 0;
  /// ‖G^{p-1}‖_{L^q(B_R)}, with G = 0 outside the domain.
  virtual double source_norm(double radius, double q) const = 0;
};

/// Resolved nodes and quadrature points of fully resolved triangles. Keeps a
/// reference to the solution.
class FemRegularPart final : public RegularPartSampler {
 public:
  explicit FemRegularPart(const GreenSolution& gs);
  double p() const override { return gs_->spec.p; }
  double dimension() const override { return gs_->spec.dimension; }
  double lambda() const override { return gs_->spec.lambda; }
  double min_radius() const override { return min_radius_; }
  double noise_floor() const override { return noise_; }
  Extremes extremes(double radius) const override;
  double source_norm(double radius, double q) const override;

 private:
  const GreenSolution* gs_;
  std::vector<std::pair<double, double>> samples_;  ///< (distance to pole, H), sorted by distance
  double min_radius_ = 0.0;
  double noise_ = 0.0;
};

class RadialRegularPart final : public RegularPartSampler {
 public:
  explicit RadialRegularPart(const radial::RadialGreen& green);
  double p() const override { return green_->p; }
  double dimension() const override { return green_->dimension; }
  double lambda() const override { return green_->lambda; }
  double min_radius() const override { return green_->h.r[1]; }
  double noise_floor() const override;
  Extremes extremes(double radius) const override;
  double source_norm(double radius, double q) const override;

 private:
  const radial::RadialGreen* green_;
};

/// Analytic radial profile H(r) with λ = 0.
class ProfileRegularPart final : public RegularPartSampler {
 public:
  ProfileRegularPart(std::function<double(double)> profile, double p, double dimension, double noise_floor = 1e-12);
  double p() const override { return p_; }
  double dimension() const override { return dimension_; }
  double lambda() const override { return 0.0; }
  double min_radius() const override { return 0.0; }
  double noise_floor() const override { return noise_; }
  Extremes extremes(double radius) const override;
  double source_norm(double, double) const override { return 0.0; }

 private:
  std::function<double(double)> profile_;
  double p_, dimension_, noise_;
};

struct HarnackReport {
  int sign = 1;  ///< the shifted field is sign·H + shift
  double shift = 0.0;
  double q0 = 0.0;
  std::vector<double> radii;
  std::vector<double> sup;  ///< of R^β(sign·H + shift) over B_R, β = (N-p)/(p-1)
  std::vector<double> inf;
  std::vector<double> lambda_term;
  std::vector<double> quotient;  ///< sup / (inf + Λ)
  bool growth_flag = false;  ///< C(R) grows monotonically past 2 max(C(R_max), 1) as R decreases
};

/// Raises NegativeShiftedField when sign·H + shift < 0 on the largest ball,
/// PreconditionViolation for radii below the sampler's resolution.
HarnackReport harnack_report(const RegularPartSampler& h, int sign, double shift, std::vector<double> radii,
                             double q0 = 0.0);

struct HolderFit {
  std::vector<double> radii;
  std::vector<double> omega;
  std::vector<double> theta_radii;  ///< radii R whose half R/2 is also resolved
  std::vector<double> theta_hat;    ///< ω(R/2)/ω(R)
  double alpha = 1.0;
  double c0 = 0.0;        ///< smallest constant with ω(R) <= c0 R^α on the radii
  double residual = 0.0;  ///< root-mean-square misfit of the unclamped log-log line
  bool degenerate = false;
};

/// Raises PoorFit when the log-log misfit exceeds 0.25, PreconditionViolation
/// for fewer than five radii.
HolderFit oscillation_decay(const RegularPartSampler& h, std::vector<double> radii);

/// n radii in geometric progression on [lo, hi].
std::vector<double> geometric_radii(double lo, double hi, int n);

void write_harnack_csv(std::ostream& os, const HarnackReport& rep);
void write_holder_csv(std::ostream& os, const HolderFit& fit);

}  // namespace plap
