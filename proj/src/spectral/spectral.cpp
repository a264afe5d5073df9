#include "plap/spectral.hpp"

#include <cmath>

#include "plap/error.hpp"
#include "plap/radial.hpp"

namespace plap {

double rayleigh_quotient(const ScalarField& u, double p) {
  const double den = lq_norm(u, p);
  require(den > 0.0, ErrorCode::ZeroField, "Rayleigh quotient of the zero field");
  return std::pow(wkq_seminorm(u, p) / den, p);
}

RayleighResult first_eigenvalue(double p, const MeshPtr& mesh, const EigenControls& controls) {
  require(mesh != nullptr, ErrorCode::MeshMismatch, "eigenvalue problem has no mesh");
  require(p > 1.0, ErrorCode::InvalidExponent, "eigenvalue needs p > 1");
  const auto mask = free_vertices(*mesh);
  Eigen::VectorXd start(static_cast<Eigen::Index>(mesh->num_vertices()));
  for (Eigen::Index v = 0; v < start.size(); ++v) start[v] = mask[static_cast<std::size_t>(v)] ? 1.0 : 0.0;
  ScalarField u(mesh, start);
  u = ScalarField(mesh, u.values() / lq_norm(u, p));

  ProblemSpec spec;
  spec.p = p;
  spec.mesh = mesh;
  spec.controls = controls.inner;

  RayleighResult out;
  double previous = rayleigh_quotient(u, p);
  for (int it = 0; it < controls.max_iterations; ++it) {
    spec.source = [&u, p](const QuadPoint& q) {
      const double v = u.at(q.tri, q.bary);
      return v == 0.0 ? 0.0 : std::copysign(std::pow(std::abs(v), p - 1.0), v);
    };
    const ScalarField guess(mesh, u.values() * std::pow(previous, -1.0 / (p - 1.0)));
    const ScalarField next = solve_dirichlet(spec, p == 2.0 ? nullptr : &guess).u;
    u = ScalarField(mesh, next.values() / lq_norm(next, p));
    const double q = rayleigh_quotient(u, p);
    out.history.push_back(q);
    const bool done = std::abs(q - previous) < controls.rtol * q;
    previous = q;
    if (done) break;
  }
  require(out.history.size() < 2 ||
              std::abs(out.history.back() - out.history[out.history.size() - 2]) < controls.rtol * previous,
          ErrorCode::NewtonDivergence, "inverse iteration did not settle");
  out.lambda1 = previous;
  out.eigenfunction = std::move(u);
  return out;
}

double first_eigenvalue(double p, const geometry::RadialBall& ball) {
  return radial::radial_eigen(p, ball.dimension, ball.radius);
}

}  // namespace plap
