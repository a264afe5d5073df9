#pragma once

// P1 scalar fields, the regularized p-Dirichlet energy and its damped-Newton
// minimizer.

#include <Eigen/Core>

#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "plap/geometry.hpp"

namespace plap {

using geometry::MeshPtr;
using geometry::Vec2;

class ScalarField {
 public:
  ScalarField() = default;
  /// Raises MeshMismatch on a length mismatch and PreconditionViolation on
  /// non-finite coefficients.
  ScalarField(MeshPtr mesh, Eigen::VectorXd values);

  static ScalarField zeros(MeshPtr mesh);
  static ScalarField interpolate(MeshPtr mesh, const std::function<double(const Vec2&)>& fn);

  const geometry::Mesh& mesh() const { return *mesh_; }
  const MeshPtr& mesh_ptr() const { return mesh_; }
  const Eigen::VectorXd& values() const { return values_; }
  double operator[](std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }

  double at(int tri, const std::array<double, 3>& bary) const;
  Vec2 gradient(int tri) const;

 private:
  MeshPtr mesh_;
  Eigen::VectorXd values_;
};

struct QuadPoint {
  Vec2 x;
  int tri = -1;
  std::array<double, 3> bary{};
  double weight = 0.0;  ///< includes the triangle area
};

/// Visits every quadrature point of the mesh using each triangle's own order.
void for_each_quad_point(const geometry::Mesh& mesh, const std::function<void(const QuadPoint&)>& fn);

/// Right-hand sides are sampled at quadrature points, so analytic, nodal and
/// field-dependent sources share one representation.
using Source = std::function<double(const QuadPoint&)>;
Source analytic_source(std::function<double(const Vec2&)> fn);
Source nodal_source(const ScalarField& f);
Source constant_source(double c);

struct SolverControls {
  double eps_start = 1e-1;
  double eps_end = 1e-8;
  double eps_factor = 0.1;
  double newton_tol = 1e-9;
  int max_iterations = 60;  ///< per regularization level
  double p_step = 0.5;      ///< largest exponent change between continuation solves
  bool verify_positivity = true;
  bool polish_true_energy = true;  ///< finish with Newton on the unregularized energy
};

struct ProblemSpec {
  double p = 2.0;
  double lambda = 0.0;
  double dimension = 2.0;
  geometry::DomainSpec domain;
  MeshPtr mesh;
  /// Nodal Dirichlet data; only boundary (and hole) entries are read.
  std::optional<Eigen::VectorXd> boundary_values;
  Source source;  ///< empty means f = 0
  SolverControls controls;
  std::optional<double> lambda1;  ///< first-eigenvalue estimate for the gate
};

struct AdmissibilityReport {
  bool admissible = false;
  double threshold = 1.0;
  double q_bar = 0.0;
  double q_bar_star = 0.0;
  double p_star = 0.0;
};

/// Raises InvalidExponent for p <= 1, p > N or N < 2.
AdmissibilityReport admissibility(double p, double dimension, double lambda);

/// Dirichlet energies on P1 fields. eps = 0 is the true energy.
double energy(const ScalarField& u, const ProblemSpec& spec, double eps = 0.0);
/// Gradient of energy() with respect to every nodal value (boundary rows included).
Eigen::VectorXd energy_gradient(const ScalarField& u, const ProblemSpec& spec, double eps = 0.0);
/// Load vector b_i = ∫ f φ_i.
Eigen::VectorXd load_vector(const geometry::Mesh& mesh, const Source& f);

struct TraceRow {
  int iteration = 0;
  double energy = 0.0;
  double gradient_norm = 0.0;
  double step_length = 0.0;
  double eps_reg = 0.0;
};

struct SolveResult {
  ScalarField u;
  std::vector<TraceRow> trace;
  double gradient_norm = 0.0;  ///< true-energy gradient over free vertices
};

/// Minimizes the energy over fields with the prescribed boundary trace.
/// Raises NewtonDivergence, SupercriticalLambda, NegativeField (positivity check).
SolveResult solve_dirichlet(const ProblemSpec& spec, const ScalarField* initial = nullptr);

/// Free (non-Dirichlet) vertex mask.
std::vector<char> free_vertices(const geometry::Mesh& mesh);

/// ⟨|X|^{p-2}X - |Y|^{p-2}Y, X-Y⟩ / ((|X-Y| + |Y|)^{p-2} |X-Y|^2). Raises EqualArguments.
double coercivity_ratio(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double p);

struct Annulus2 {
  Vec2 center = Vec2::Zero();
  double r1 = 0.0;
  double r2 = 0.0;
};

/// (∫ |∇u|^q)^{1/q} over the mesh, or over an annulus via ring quadrature.
double wkq_seminorm(const ScalarField& u, double q, const std::optional<Annulus2>& region = {});
/// (∫ |u|^q)^{1/q}.
double lq_norm(const ScalarField& u, double q);
double integrate(const geometry::Mesh& mesh, const Source& f);

void write_field_csv(std::ostream& os, const ScalarField& u);
void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& trace);

}  // namespace plap
