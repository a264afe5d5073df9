#include "plap/convexity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "plap/error.hpp"

namespace plap {

namespace {

constexpr double kBaseMargin = 1e-10;
constexpr double kAngleGuard = 1e-14;

void require_nonnegative(const ScalarField& w) {
  require(w.values().minCoeff() >= 0.0, ErrorCode::NegativeField, "I is defined on nonnegative fields only");
}

bool touches_support(const ScalarField& phi, int tri) {
  const auto& t = phi.mesh().triangles[static_cast<std::size_t>(tri)];
  return phi[static_cast<std::size_t>(t[0])] != 0.0 || phi[static_cast<std::size_t>(t[1])] != 0.0 ||
         phi[static_cast<std::size_t>(t[2])] != 0.0;
}

void require_same_mesh(const ScalarField& a, const ScalarField& b) {
  require(a.mesh_ptr() == b.mesh_ptr(), ErrorCode::MeshMismatch, "w and phi live on different meshes");
}

}  // namespace

ConvexityConstants ConvexityConstants::make(double p) {
  require(p > 1.0, ErrorCode::InvalidExponent, "convexity constants need p > 1");
  return {p, (p - 1.0) / p, 2.0 * (p - 1.0) / p, 1.0 / p, (p - 2.0) / p};
}

double ConvexityConstants::discriminant(double cos_alpha) const {
  return 4.0 * c1 * c3(cos_alpha) - c2 * c2 * cos_alpha * cos_alpha;
}

double rho_pointwise(const ConvexityConstants& k, double w, const Vec2& grad_w, double phi, const Vec2& grad_phi) {
  const double p = k.p;
  const double gw = grad_w.norm(), gphi = grad_phi.norm();
  const double cos_alpha = gw * gphi < kAngleGuard ? 0.0 : grad_w.dot(grad_phi) / (gw * gphi);
  const double prefactor = std::pow(p, 2.0 - p) * std::pow(w, 1.0 - p) * std::pow(gw, p - 2.0);
  const double mixed = gw * gphi < kAngleGuard ? 0.0 : k.c2 * cos_alpha * gw / w * phi * gphi;
  const double bracket = k.c1 * gw * gw / (w * w) * phi * phi - mixed + k.c3(cos_alpha) * gphi * gphi;
  return bracket == 0.0 ? 0.0 : prefactor * bracket;
}

double rho_lower_bound(const ConvexityConstants& k, double w, const Vec2& grad_w, double phi, const Vec2& grad_phi) {
  const double p = k.p;
  const double gw = grad_w.norm();
  if (gw == 0.0) return 0.0;
  const double prefactor = std::pow(p, 2.0 - p) * std::pow(w, 1.0 - p) * std::pow(gw, p - 2.0);
  const double square = phi / w - grad_w.dot(grad_phi) / (gw * gw);
  return prefactor * k.c1 * gw * gw * square * square;
}

double I_energy(const ScalarField& w, double p) {
  require(p > 1.0, ErrorCode::InvalidExponent, "I needs p > 1");
  require_nonnegative(w);
  const auto& mesh = w.mesh();
  double sum = 0.0;
  bool infinite = false;
  for_each_quad_point(mesh, [&](const QuadPoint& q) {
    const double gw = w.gradient(q.tri).norm();
    if (gw == 0.0) return;
    const double v = w.at(q.tri, q.bary);
    if (v <= 0.0) {
      infinite = true;
      return;
    }
    sum += q.weight * std::pow(v, 1.0 - p) * std::pow(gw, p);
  });
  return infinite ? std::numeric_limits<double>::infinity() : std::pow(p, -p) * sum;
}

double I_prime(const ScalarField& w, const ScalarField& phi, double p) {
  require(p > 1.0, ErrorCode::InvalidExponent, "I needs p > 1");
  require_same_mesh(w, phi);
  require_nonnegative(w);
  double sum = 0.0;
  for_each_quad_point(w.mesh(), [&](const QuadPoint& q) {
    if (!touches_support(phi, q.tri)) return;
    const double v = w.at(q.tri, q.bary);
    require(v > kBaseMargin, ErrorCode::DegenerateBase, "w vanishes on the support of the direction");
    const Vec2 gw = w.gradient(q.tri);
    const double n = gw.norm();
    if (n == 0.0) return;
    const double f = phi.at(q.tri, q.bary);
    sum += q.weight * (std::pow(v, -p) * std::pow(n, p - 2.0) *
                       ((1.0 - p) * n * n * f + p * v * gw.dot(phi.gradient(q.tri))));
  });
  return std::pow(p, -p) * sum;
}

double QuadratureField::integral() const {
  double s = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) s += weights[i] * values[i];
  return s;
}

double QuadratureField::min() const {
  return values.empty() ? 0.0 : *std::min_element(values.begin(), values.end());
}

QuadratureField rho_density(const ScalarField& w, const ScalarField& phi, double p) {
  require_same_mesh(w, phi);
  require_nonnegative(w);
  const auto k = ConvexityConstants::make(p);
  QuadratureField out;
  for_each_quad_point(w.mesh(), [&](const QuadPoint& q) {
    out.weights.push_back(q.weight);
    if (!touches_support(phi, q.tri)) {
      out.values.push_back(0.0);
      return;
    }
    const double v = w.at(q.tri, q.bary);
    require(v > kBaseMargin, ErrorCode::DegenerateBase, "w vanishes on the support of the direction");
    out.values.push_back(rho_pointwise(k, v, w.gradient(q.tri), phi.at(q.tri, q.bary), phi.gradient(q.tri)));
  });
  return out;
}

double I_second(const ScalarField& w, const ScalarField& phi, double p) {
  return rho_density(w, phi, p).integral();
}

ComparisonVerdict comparison_harness(const ProblemSpec& first, const ProblemSpec& second) {
  require(first.mesh != nullptr && first.mesh == second.mesh, ErrorCode::MeshMismatch,
          "comparison needs both problems on one mesh");
  require(first.p >= 2.0, ErrorCode::HypothesisViolated, "weak comparison needs p >= 2");
  require(first.p == second.p && first.lambda == second.lambda, ErrorCode::HypothesisViolated,
          "p and lambda must agree");
  const auto& mesh = *first.mesh;
  bool ordered = true, nonnegative = true;
  for_each_quad_point(mesh, [&](const QuadPoint& q) {
    const double f1 = first.source ? first.source(q) : 0.0;
    const double f2 = second.source ? second.source(q) : 0.0;
    ordered = ordered && f1 <= f2;
    nonnegative = nonnegative && f2 >= 0.0;
  });
  require(ordered, ErrorCode::HypothesisViolated, "sources are not ordered f1 <= f2");
  require(nonnegative, ErrorCode::HypothesisViolated, "second source is negative somewhere");
  const auto trace = [&mesh](const ProblemSpec& s, std::size_t v) {
    return s.boundary_values ? (*s.boundary_values)[static_cast<Eigen::Index>(v)] : 0.0;
  };
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v)
    if (mesh.boundary[v] || (!mesh.inner_boundary.empty() && mesh.inner_boundary[v]))
      require(trace(first, v) <= trace(second, v), ErrorCode::HypothesisViolated,
              "boundary data are not ordered g1 <= g2");

  ComparisonVerdict out;
  out.u1 = solve_dirichlet(first).u;
  out.u2 = solve_dirichlet(second).u;
  out.max_excess = (out.u1.values() - out.u2.values()).maxCoeff();
  out.tolerance = second.controls.newton_tol * std::max(1.0, out.u2.values().cwiseAbs().maxCoeff());
  out.pass = out.max_excess <= out.tolerance;
  return out;
}

}  // namespace plap
