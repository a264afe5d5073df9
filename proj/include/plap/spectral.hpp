#pragma once

// First Dirichlet eigenpair of the p-Laplacian.

#include <vector>

#include "plap/core.hpp"

namespace plap {

struct RayleighResult {
  double lambda1 = 0.0;
  ScalarField eigenfunction;   ///< positive, unit L^p norm
  std::vector<double> history;  ///< quotient after each inverse step
};

struct EigenControls {
  double rtol = 1e-8;
  int max_iterations = 200;
  SolverControls inner;
};

/// ∫|∇u|^p / ∫|u|^p. Raises ZeroField when u vanishes.
double rayleigh_quotient(const ScalarField& u, double p);

/// Inverse power iteration -Δ_p v = φ_p(u_k), normalized in L^p.
RayleighResult first_eigenvalue(double p, const MeshPtr& mesh, const EigenControls& controls = {});

/// Radially symmetric balls of any dimension go through the shooting solver.
double first_eigenvalue(double p, const geometry::RadialBall& ball);

}  // namespace plap
