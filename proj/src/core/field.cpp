#include <cmath>
#include <iomanip>
#include <ostream>

#include "plap/core.hpp"
#include "plap/error.hpp"

namespace plap {

ScalarField::ScalarField(MeshPtr mesh, Eigen::VectorXd values)
    : mesh_(std::move(mesh)), values_(std::move(values)) {
  require(mesh_ != nullptr, ErrorCode::MeshMismatch, "field without a mesh");
  require(static_cast<std::size_t>(values_.size()) == mesh_->num_vertices(), ErrorCode::MeshMismatch,
          "coefficient count differs from vertex count");
  require(values_.allFinite(), ErrorCode::PreconditionViolation, "field has non-finite coefficients");
}

ScalarField ScalarField::zeros(MeshPtr mesh) {
  const auto n = static_cast<Eigen::Index>(mesh->num_vertices());
  return ScalarField(std::move(mesh), Eigen::VectorXd::Zero(n));
}

ScalarField ScalarField::interpolate(MeshPtr mesh, const std::function<double(const Vec2&)>& fn) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(mesh->num_vertices()));
  for (std::size_t i = 0; i < mesh->num_vertices(); ++i) v[static_cast<Eigen::Index>(i)] = fn(mesh->vertices[i]);
  return ScalarField(std::move(mesh), std::move(v));
}

double ScalarField::at(int tri, const std::array<double, 3>& bary) const {
  const auto& t = mesh_->triangles[tri];
  return bary[0] * values_[t[0]] + bary[1] * values_[t[1]] + bary[2] * values_[t[2]];
}

Vec2 ScalarField::gradient(int tri) const {
  const auto& t = mesh_->triangles[tri];
  const auto& g = mesh_->grad_bary[tri];
  return values_[t[0]] * g[0] + values_[t[1]] * g[1] + values_[t[2]] * g[2];
}

void for_each_quad_point(const geometry::Mesh& mesh, const std::function<void(const QuadPoint&)>& fn) {
  QuadPoint q;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto& rule = geometry::triangle_rule(mesh.quad_order[t]);
    q.tri = static_cast<int>(t);
    for (std::size_t k = 0; k < rule.weights.size(); ++k) {
      q.bary = rule.bary[k];
      q.x = mesh.point(q.tri, q.bary);
      q.weight = rule.weights[k] * mesh.area[t];
      fn(q);
    }
  }
}

Source analytic_source(std::function<double(const Vec2&)> fn) {
  return [fn = std::move(fn)](const QuadPoint& q) { return fn(q.x); };
}

Source nodal_source(const ScalarField& f) {
  return [f](const QuadPoint& q) { return f.at(q.tri, q.bary); };
}

Source constant_source(double c) {
  return [c](const QuadPoint&) { return c; };
}

double integrate(const geometry::Mesh& mesh, const Source& f) {
  double s = 0.0;
  for_each_quad_point(mesh, [&](const QuadPoint& q) { s += q.weight * f(q); });
  return s;
}

double lq_norm(const ScalarField& u, double q) {
  double s = 0.0;
  for_each_quad_point(u.mesh(), [&](const QuadPoint& qp) {
    s += qp.weight * std::pow(std::abs(u.at(qp.tri, qp.bary)), q);
  });
  return std::pow(s, 1.0 / q);
}

double wkq_seminorm(const ScalarField& u, double q, const std::optional<Annulus2>& region) {
  require(q >= 1.0, ErrorCode::PreconditionViolation, "seminorm exponent must be >= 1");
  const auto& mesh = u.mesh();
  double s = 0.0;
  if (!region) {
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t)
      s += mesh.area[t] * std::pow(u.gradient(static_cast<int>(t)).norm(), q);
  } else {
    for (const auto& p : geometry::extract_ring(mesh, region->center, region->r1, region->r2))
      s += p.weight * std::pow(u.gradient(p.tri).norm(), q);
  }
  return std::pow(s, 1.0 / q);
}

double coercivity_ratio(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double p) {
  require(x.size() == y.size(), ErrorCode::PreconditionViolation, "dimension mismatch");
  const Eigen::VectorXd d = x - y;
  const double dn = d.norm();
  require(dn > 0.0, ErrorCode::EqualArguments, "coercivity ratio needs X != Y");
  const auto phi = [p](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    const double n = v.norm();
    return n > 0 ? Eigen::VectorXd(std::pow(n, p - 2.0) * v) : Eigen::VectorXd::Zero(v.size());
  };
  const double num = (phi(x) - phi(y)).dot(d);
  const double den = std::pow(dn + y.norm(), p - 2.0) * dn * dn;
  return num / den;
}

void write_field_csv(std::ostream& os, const ScalarField& u) {
  os << "vertex_id,x,y,value\n" << std::setprecision(17);
  const auto& m = u.mesh();
  for (std::size_t i = 0; i < m.num_vertices(); ++i)
    os << i << "," << m.vertices[i].x() << "," << m.vertices[i].y() << "," << u[i] << "\n";
}

void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& trace) {
  os << "iteration,energy,gradient_norm,step_length,eps_reg\n" << std::setprecision(17);
  for (const auto& r : trace)
    os << r.iteration << "," << r.energy << "," << r.gradient_norm << "," << r.step_length << ","
       << r.eps_reg << "\n";
}

AdmissibilityReport admissibility(double p, double dimension, double lambda) {
  require(dimension >= 2.0, ErrorCode::InvalidExponent, "dimension must be >= 2");
  require(p > 1.0 && p <= dimension, ErrorCode::InvalidExponent, "exponent p must lie in (1, N]");
  const double n = dimension;
  AdmissibilityReport r;
  r.threshold = lambda != 0.0 ? std::max({2.0 - 1.0 / n, std::sqrt(n), n / 2.0}) : 1.0;
  r.q_bar = n * (p - 1.0) / (n - 1.0);
  const double inf = std::numeric_limits<double>::infinity();
  r.q_bar_star = p < n ? n * (p - 1.0) / (n - p) : inf;
  r.p_star = p < n ? n * p / (n - p) : inf;
  r.admissible = p > r.threshold;
  return r;
}

}  // namespace plap
