#include <Eigen/CholmodSupport>
#include <Eigen/Sparse>

#include <cmath>
#include <memory>
#include <mutex>

#include "plap/core.hpp"
#include "plap/error.hpp"

namespace plap {
namespace {

using geometry::Mesh;
using SpMat = Eigen::SparseMatrix<double>;

// Sparsity pattern over free vertices (lower triangle) with per-triangle
// slots into the value array, plus a reusable Cholesky factor.
struct Pattern {
  std::vector<int> dof;
  int n_free = 0;
  SpMat matrix;
  std::vector<std::array<int, 9>> slot;
  Eigen::CholmodSimplicialLLT<SpMat, Eigen::Lower> llt;
  bool analyzed = false;
  std::optional<double> quadratic_lambda;  // factor currently holds the p = 2 operator for this λ
  std::mutex mutex;
};

std::shared_ptr<Pattern> build_pattern(const Mesh& mesh) {
  auto pat = std::make_shared<Pattern>();
  const auto mask = free_vertices(mesh);
  pat->dof.assign(mesh.num_vertices(), -1);
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v)
    if (mask[v]) pat->dof[v] = pat->n_free++;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(mesh.num_triangles() * 6);
  for (const auto& t : mesh.triangles)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const int a = pat->dof[t[i]], b = pat->dof[t[j]];
        if (a >= 0 && b >= 0 && a >= b) trip.emplace_back(a, b, 0.0);
      }
  pat->matrix.resize(pat->n_free, pat->n_free);
  pat->matrix.setFromTriplets(trip.begin(), trip.end());
  pat->matrix.makeCompressed();
  pat->slot.resize(mesh.num_triangles());
  const int* outer = pat->matrix.outerIndexPtr();
  const int* inner = pat->matrix.innerIndexPtr();
  for (std::size_t k = 0; k < mesh.num_triangles(); ++k) {
    const auto& t = mesh.triangles[k];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        int a = pat->dof[t[i]], b = pat->dof[t[j]];
        int s = -1;
        if (a >= 0 && b >= 0 && a >= b) {
          const int* lo = inner + outer[b];
          const int* hi = inner + outer[b + 1];
          s = static_cast<int>(std::lower_bound(lo, hi, a) - inner);
        }
        pat->slot[k][3 * i + j] = s;
      }
  }
  return pat;
}

std::shared_ptr<Pattern> pattern_for(const MeshPtr& mesh) {
  static std::mutex cache_mutex;
  static std::vector<std::pair<std::weak_ptr<const Mesh>, std::shared_ptr<Pattern>>> cache;
  std::lock_guard<std::mutex> lock(cache_mutex);
  for (auto it = cache.begin(); it != cache.end();) {
    if (it->first.expired()) {
      it = cache.erase(it);
      continue;
    }
    if (it->first.lock() == mesh) return it->second;
    ++it;
  }
  auto pat = build_pattern(*mesh);
  cache.emplace_back(mesh, pat);
  if (cache.size() > 4) cache.erase(cache.begin());
  return pat;
}

struct EnergyParts {
  double value = 0.0;
  double magnitude = 0.0;  // sum of absolute contributions, for roundoff slack
};

// Gradient weight (ε² + |g|²)^{(p-2)/2}, with the g = 0, ε = 0 limit set to 0.
double weight(double s, double p) {
  if (p == 2.0) return 1.0;
  if (s <= 0.0) return 0.0;
  return std::pow(s, 0.5 * (p - 2.0));
}

Vec2 grad_of(const Mesh& m, const Eigen::VectorXd& u, std::size_t t) {
  const auto& tr = m.triangles[t];
  const auto& g = m.grad_bary[t];
  return u[tr[0]] * g[0] + u[tr[1]] * g[1] + u[tr[2]] * g[2];
}

double value_at(const Mesh& m, const Eigen::VectorXd& u, std::size_t t, const std::array<double, 3>& w) {
  const auto& tr = m.triangles[t];
  return w[0] * u[tr[0]] + w[1] * u[tr[1]] + w[2] * u[tr[2]];
}

EnergyParts energy_parts(const Mesh& m, const Eigen::VectorXd& u, double p, double lambda, double eps,
                         const Eigen::VectorXd& b) {
  EnergyParts e;
  double grad_part = 0.0, lambda_part = 0.0;
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    const double s = eps * eps + grad_of(m, u, t).squaredNorm();
    grad_part += m.area[t] * (p == 2.0 ? 0.5 * s : std::pow(s, 0.5 * p) / p);
    if (lambda != 0.0) {
      const auto& rule = geometry::triangle_rule(m.quad_order[t]);
      for (std::size_t k = 0; k < rule.weights.size(); ++k)
        lambda_part += rule.weights[k] * m.area[t] * std::pow(std::abs(value_at(m, u, t, rule.bary[k])), p);
    }
  }
  const double load = b.dot(u);
  e.value = grad_part - lambda / p * lambda_part - load;
  e.magnitude = std::abs(grad_part) + std::abs(lambda / p * lambda_part) + std::abs(load);
  return e;
}

Eigen::VectorXd gradient_values(const Mesh& m, const Eigen::VectorXd& u, double p, double lambda,
                                double eps, const Eigen::VectorXd& b) {
  Eigen::VectorXd g = -b;
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    const auto& tr = m.triangles[t];
    const Vec2 gu = grad_of(m, u, t);
    const double a = weight(eps * eps + gu.squaredNorm(), p) * m.area[t];
    for (int i = 0; i < 3; ++i) g[tr[i]] += a * gu.dot(m.grad_bary[t][i]);
    if (lambda != 0.0) {
      const auto& rule = geometry::triangle_rule(m.quad_order[t]);
      for (std::size_t k = 0; k < rule.weights.size(); ++k) {
        const double uq = value_at(m, u, t, rule.bary[k]);
        const double phi = uq == 0.0 ? 0.0 : std::pow(std::abs(uq), p - 2.0) * uq;
        const double c = lambda * rule.weights[k] * m.area[t] * phi;
        for (int i = 0; i < 3; ++i) g[tr[i]] -= c * rule.bary[k][i];
      }
    }
  }
  return g;
}

void assemble_hessian(Pattern& pat, const Mesh& m, const Eigen::VectorXd& u, double p, double lambda,
                      double eps) {
  double* val = pat.matrix.valuePtr();
  std::fill(val, val + pat.matrix.nonZeros(), 0.0);
  const double umax = u.cwiseAbs().maxCoeff();
  const double floor2 = std::pow(std::max(eps, 1e-12) * std::max(umax, 1e-300), 2);
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    const auto& slot = pat.slot[t];
    const auto& gb = m.grad_bary[t];
    const Vec2 gu = grad_of(m, u, t);
    const double s = eps * eps + gu.squaredNorm();
    const double a = weight(s, p) * m.area[t];
    const double aniso = (p == 2.0 || s <= 0.0) ? 0.0 : (p - 2.0) / s;
    std::array<double, 3> proj{gu.dot(gb[0]), gu.dot(gb[1]), gu.dot(gb[2])};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const int sl = slot[3 * i + j];
        if (sl < 0) continue;
        val[sl] += a * (gb[i].dot(gb[j]) + aniso * proj[i] * proj[j]);
      }
    if (lambda != 0.0) {
      const auto& rule = geometry::triangle_rule(m.quad_order[t]);
      for (std::size_t k = 0; k < rule.weights.size(); ++k) {
        const double uq = value_at(m, u, t, rule.bary[k]);
        const double w = p == 2.0 ? 1.0 : std::pow(uq * uq + floor2, 0.5 * (p - 2.0));
        const double c = lambda * (p - 1.0) * rule.weights[k] * m.area[t] * w;
        const auto& bq = rule.bary[k];
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) {
            const int sl = slot[3 * i + j];
            if (sl >= 0) val[sl] -= c * bq[i] * bq[j];
          }
      }
    }
  }
}

double free_norm(const Pattern& pat, const Eigen::VectorXd& g) {
  double s = 0.0;
  for (std::size_t v = 0; v < pat.dof.size(); ++v)
    if (pat.dof[v] >= 0) s += g[static_cast<Eigen::Index>(v)] * g[static_cast<Eigen::Index>(v)];
  return std::sqrt(s);
}

bool factorize(Pattern& pat) {
  if (!pat.analyzed) {
    pat.llt.analyzePattern(pat.matrix);
    pat.analyzed = true;
  }
  pat.llt.factorize(pat.matrix);
  return pat.llt.info() == Eigen::Success;
}

Eigen::VectorXd boundary_vector(const ProblemSpec& spec) {
  const auto& m = *spec.mesh;
  Eigen::VectorXd u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m.num_vertices()));
  if (spec.boundary_values) {
    require(spec.boundary_values->size() == u.size(), ErrorCode::MeshMismatch,
            "boundary data length differs from vertex count");
    const auto mask = free_vertices(m);
    for (Eigen::Index v = 0; v < u.size(); ++v)
      if (!mask[static_cast<std::size_t>(v)]) u[v] = (*spec.boundary_values)[v];
  }
  return u;
}

class Newton {
 public:
  Newton(const ProblemSpec& spec, Pattern& pat, Eigen::VectorXd b)
      : spec_(spec), m_(*spec.mesh), pat_(pat), b_(std::move(b)) {}

  // Runs one regularization level; returns the final free gradient norm.
  double level(Eigen::VectorXd& u, double eps, double hess_eps, double tol, int max_it, bool final_level);

  std::vector<TraceRow> trace;

 private:
  const ProblemSpec& spec_;
  const Mesh& m_;
  Pattern& pat_;
  Eigen::VectorXd b_;
  int iteration_ = 0;

  bool solve_direction(const Eigen::VectorXd& u, double hess_eps, const Eigen::VectorXd& g,
                       Eigen::VectorXd& dir);
};

bool Newton::solve_direction(const Eigen::VectorXd& u, double hess_eps, const Eigen::VectorXd& g,
                             Eigen::VectorXd& dir) {
  const double p = spec_.p;
  Eigen::VectorXd rhs(pat_.n_free);
  for (std::size_t v = 0; v < pat_.dof.size(); ++v)
    if (pat_.dof[v] >= 0) rhs[pat_.dof[v]] = -g[static_cast<Eigen::Index>(v)];

  auto attempt = [&](double lam) -> bool {
    const bool reuse = p == 2.0 && pat_.quadratic_lambda && *pat_.quadratic_lambda == lam;
    if (!reuse) {
      pat_.quadratic_lambda.reset();
      assemble_hessian(pat_, m_, u, p, lam, hess_eps);
      if (!factorize(pat_)) return false;
      if (p == 2.0) pat_.quadratic_lambda = lam;
    }
    const Eigen::VectorXd d = pat_.llt.solve(rhs);
    if (!d.allFinite() || d.dot(rhs) <= 0.0) return false;
    dir.setZero(static_cast<Eigen::Index>(pat_.dof.size()));
    for (std::size_t v = 0; v < pat_.dof.size(); ++v)
      if (pat_.dof[v] >= 0) dir[static_cast<Eigen::Index>(v)] = d[pat_.dof[v]];
    return true;
  };
  if (spec_.lambda != 0.0 && attempt(spec_.lambda)) return true;
  return attempt(0.0);
}

double Newton::level(Eigen::VectorXd& u, double eps, double hess_eps, double tol, int max_it,
                     bool final_level) {
  const double p = spec_.p, lam = spec_.lambda;
  Eigen::VectorXd g = gradient_values(m_, u, p, lam, eps, b_);
  double gn = free_norm(pat_, g);
  EnergyParts e = energy_parts(m_, u, p, lam, eps, b_);
  trace.push_back({iteration_, e.value, gn, 0.0, eps});
  Eigen::VectorXd dir;
  for (int it = 0; it < max_it && gn > tol; ++it) {
    if (!solve_direction(u, hess_eps, g, dir)) {
      if (final_level) raise(ErrorCode::NewtonDivergence, "Newton system is not positive definite");
      break;
    }
    const double slope = g.dot(dir);
    double t = 1.0;
    Eigen::VectorXd trial;
    EnergyParts et;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
      trial = u + t * dir;
      et = energy_parts(m_, trial, p, lam, eps, b_);
      const double slack = 1e-13 * std::max(e.magnitude, et.magnitude);
      if (et.value <= e.value + 1e-4 * t * slope) {
        accepted = true;
        break;
      }
      // Below roundoff the energy cannot discriminate; fall back to the gradient.
      if (std::abs(et.value - e.value) <= slack) {
        const Eigen::VectorXd gt = gradient_values(m_, trial, p, lam, eps, b_);
        if (free_norm(pat_, gt) < gn) {
          accepted = true;
          break;
        }
      }
    }
    if (!accepted) {
      if (final_level)
        raise(ErrorCode::NewtonDivergence,
              "line search stalled at gradient norm " + std::to_string(gn));
      break;
    }
    u = std::move(trial);
    e = et;
    g = gradient_values(m_, u, p, lam, eps, b_);
    gn = free_norm(pat_, g);
    trace.push_back({++iteration_, e.value, gn, t, eps});
  }
  if (final_level && gn > tol)
    raise(ErrorCode::NewtonDivergence, "no convergence within the iteration limit; gradient norm " +
                                           std::to_string(gn));
  return gn;
}

}  // namespace

std::vector<char> free_vertices(const geometry::Mesh& mesh) {
  std::vector<char> mask(mesh.num_vertices(), 1);
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
    if (mesh.boundary[v]) mask[v] = 0;
    if (!mesh.inner_boundary.empty() && mesh.inner_boundary[v]) mask[v] = 0;
  }
  return mask;
}

Eigen::VectorXd load_vector(const geometry::Mesh& mesh, const Source& f) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.num_vertices()));
  if (!f) return b;
  for_each_quad_point(mesh, [&](const QuadPoint& q) {
    const double c = q.weight * f(q);
    const auto& t = mesh.triangles[q.tri];
    for (int i = 0; i < 3; ++i) b[t[i]] += c * q.bary[i];
  });
  return b;
}

double energy(const ScalarField& u, const ProblemSpec& spec, double eps) {
  require(spec.mesh != nullptr && u.mesh_ptr() == spec.mesh, ErrorCode::MeshMismatch,
          "field and problem live on different meshes");
  const Eigen::VectorXd b = load_vector(*spec.mesh, spec.source);
  return energy_parts(*spec.mesh, u.values(), spec.p, spec.lambda, eps, b).value;
}

Eigen::VectorXd energy_gradient(const ScalarField& u, const ProblemSpec& spec, double eps) {
  require(spec.mesh != nullptr && u.mesh_ptr() == spec.mesh, ErrorCode::MeshMismatch,
          "field and problem live on different meshes");
  const Eigen::VectorXd b = load_vector(*spec.mesh, spec.source);
  return gradient_values(*spec.mesh, u.values(), spec.p, spec.lambda, eps, b);
}

SolveResult solve_dirichlet(const ProblemSpec& spec, const ScalarField* initial) {
  require(spec.mesh != nullptr, ErrorCode::MeshMismatch, "problem has no mesh");
  require(spec.p > 1.0, ErrorCode::InvalidExponent, "exponent p must exceed 1");
  require(spec.dimension == 2.0, ErrorCode::PreconditionViolation,
          "finite-element solves are two-dimensional");
  if (spec.lambda != 0.0 && spec.lambda1)
    require(spec.lambda < 0.98 * *spec.lambda1, ErrorCode::SupercriticalLambda,
            "lambda must stay 2% below the first eigenvalue estimate");
  if (initial)
    require(initial->mesh_ptr() == spec.mesh, ErrorCode::MeshMismatch, "initial guess mesh differs");
  const auto& c = spec.controls;
  const Eigen::VectorXd bvals = boundary_vector(spec);
  const Eigen::VectorXd b = load_vector(*spec.mesh, spec.source);

  SolveResult out;
  if (b.cwiseAbs().maxCoeff() == 0.0 && bvals.cwiseAbs().maxCoeff() == 0.0) {
    out.u = ScalarField::zeros(spec.mesh);
    return out;
  }

  Eigen::VectorXd u;
  if (initial) {
    u = initial->values();
  } else if (spec.p == 2.0) {
    u = bvals;
  } else {
    // Quadratic solve, rescaled to the optimal multiple when g = 0, then
    // continuation in p.
    ProblemSpec lin = spec;
    lin.p = 2.0;
    lin.lambda = 0.0;
    lin.controls.verify_positivity = false;
    u = solve_dirichlet(lin).u.values();
    if (bvals.cwiseAbs().maxCoeff() == 0.0) {
      const Eigen::VectorXd none = Eigen::VectorXd::Zero(u.size());
      const double denom = spec.p * energy_parts(*spec.mesh, u, spec.p, spec.lambda, 0.0, none).value;
      const double load = b.dot(u);
      if (denom > 0 && load > 0) u *= std::pow(load / denom, 1.0 / (spec.p - 1.0));
    }
    const int steps = static_cast<int>(std::ceil(std::abs(spec.p - 2.0) / c.p_step - 1e-12));
    for (int k = 1; k < steps; ++k) {
      ProblemSpec sub = spec;
      sub.p = 2.0 + (spec.p - 2.0) * k / steps;
      sub.controls.newton_tol = std::max(c.newton_tol, 1e-7);
      sub.controls.verify_positivity = false;
      const ScalarField guess(spec.mesh, u);
      u = solve_dirichlet(sub, &guess).u.values();
    }
  }
  const auto mask = free_vertices(*spec.mesh);
  for (Eigen::Index v = 0; v < u.size(); ++v)
    if (!mask[static_cast<std::size_t>(v)]) u[v] = bvals[v];

  auto pat = pattern_for(spec.mesh);
  std::lock_guard<std::mutex> lock(pat->mutex);
  Newton newton(spec, *pat, b);
  if (spec.p == 2.0) {
    newton.level(u, 0.0, 0.0, c.newton_tol, c.max_iterations, true);
  } else {
    double eps = c.eps_start;
    for (; eps > c.eps_end * (1 + 1e-9); eps *= c.eps_factor) {
      const double g0 = free_norm(*pat, gradient_values(*spec.mesh, u, spec.p, spec.lambda, eps, b));
      newton.level(u, eps, eps, std::max(c.newton_tol, 1e-3 * g0), c.max_iterations, false);
    }
    newton.level(u, c.eps_end, c.eps_end, c.newton_tol, c.max_iterations, true);
    if (c.polish_true_energy) newton.level(u, 0.0, c.eps_end, c.newton_tol, c.max_iterations, true);
  }
  out.trace = std::move(newton.trace);
  out.gradient_norm = out.trace.back().gradient_norm;
  out.u = ScalarField(spec.mesh, u);

  if (c.verify_positivity && b.minCoeff() >= 0.0 && bvals.minCoeff() >= 0.0) {
    const double worst = u.minCoeff();
    require(worst >= -c.newton_tol * std::max(1.0, u.cwiseAbs().maxCoeff()), ErrorCode::NegativeField,
            "nonnegative data produced a negative solution value " + std::to_string(worst));
  }
  return out;
}

}  // namespace plap
