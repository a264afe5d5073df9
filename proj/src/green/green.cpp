#include "plap/green.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "plap/error.hpp"
#include "plap/spectral.hpp"

namespace plap {
namespace {

constexpr double kNoiseFraction = 1e-3;

double domain_distance(const ProblemSpec& spec) {
  const auto& mesh = *spec.mesh;
  const auto& dom = mesh.domain ? *mesh.domain : spec.domain;
  return dom.distance_to_boundary(mesh.pole);
}

double phi(double x, double p) { return x == 0.0 ? 0.0 : std::copysign(std::pow(std::abs(x), p - 1.0), x); }

struct LinearFit {
  double h0 = 0.0, c = 0.0, sse = 0.0;
};

LinearFit fit_fixed_alpha(const std::vector<double>& r, const std::vector<double>& y, double alpha) {
  const double n = static_cast<double>(r.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double x = std::pow(r[i], alpha);
    sx += x;
    sy += y[i];
    sxx += x * x;
    sxy += x * y[i];
  }
  LinearFit f;
  const double det = n * sxx - sx * sx;
  f.c = det != 0.0 ? (n * sxy - sx * sy) / det : 0.0;
  f.h0 = (sy - f.c * sx) / n;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double e = y[i] - f.h0 - f.c * std::pow(r[i], alpha);
    f.sse += e * e;
  }
  return f;
}

double ring_average(const GreenSolution& gs, double r) {
  const auto pts = geometry::extract_ring(*gs.spec.mesh, gs.pole(), r * (1 - kRingWidth / 2), r * (1 + kRingWidth / 2));
  double num = 0.0, den = 0.0;
  for (const auto& q : pts) {
    num += q.weight * gs.regular_part(q.tri, q.bary);
    den += q.weight;
  }
  return num / den;
}

double max_abs_regular(const ScalarField& g, const std::vector<char>& resolved, const FundamentalSolutionParams& gamma,
                       const Vec2& pole) {
  const auto& m = g.mesh();
  double worst = 0.0;
  for (std::size_t v = 0; v < m.num_vertices(); ++v)
    if (resolved[v]) worst = std::max(worst, std::abs(g[v] - gamma.value((m.vertices[v] - pole).norm())));
  return worst;
}

double gradient_norm_outside(const ScalarField& g, const std::vector<char>& resolved,
                             const FundamentalSolutionParams& gamma, const Vec2& pole, double q) {
  const auto& m = g.mesh();
  double s = 0.0;
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    const auto& tr = m.triangles[t];
    if (!resolved[tr[0]] || !resolved[tr[1]] || !resolved[tr[2]]) continue;
    const Vec2 gg = g.gradient(static_cast<int>(t));
    const auto& rule = geometry::triangle_rule(m.quad_order[t]);
    for (std::size_t k = 0; k < rule.weights.size(); ++k) {
      const Vec2 x = m.point(static_cast<int>(t), rule.bary[k]);
      const Vec2 d = x - pole;
      const double r = d.norm();
      const Vec2 grad_gamma = gamma.slope(r) / r * d;
      s += rule.weights[k] * m.area[t] * std::pow((gg - grad_gamma).norm(), q);
    }
  }
  return std::pow(s, 1.0 / q);
}

}  // namespace

ScalarField mollified_delta(double rho, const Vec2& pole, const MeshPtr& mesh) {
  require(mesh != nullptr, ErrorCode::MeshMismatch, "mollifier without a mesh");
  const double edge = mesh->edge_length_near_pole();
  require(rho >= 3.0 * edge, ErrorCode::UnresolvedMollifier,
          "mollifier radius " + std::to_string(rho) + " is below three pole-edge lengths");
  Eigen::VectorXd f(static_cast<Eigen::Index>(mesh->num_vertices()));
  for (std::size_t v = 0; v < mesh->num_vertices(); ++v) {
    const double s = 1.0 - (mesh->vertices[v] - pole).squaredNorm() / (rho * rho);
    f[static_cast<Eigen::Index>(v)] = s > 0.0 ? s * s * s : 0.0;
  }
  const double mass = integrate(*mesh, nodal_source(ScalarField(mesh, f)));
  require(mass > 0.0, ErrorCode::UnresolvedMollifier, "mollifier has no mass on the mesh");
  return ScalarField(mesh, f / mass);
}

std::vector<double> default_schedule(const geometry::Mesh& mesh, double pole_distance, int min_pole_edges) {
  const double floor = min_pole_edges * mesh.edge_length_near_pole();
  std::vector<double> out;
  for (double rho = 0.25 * pole_distance; rho >= floor; rho *= 0.5) out.push_back(rho);
  require(!out.empty(), ErrorCode::UnresolvedMollifier, "mesh too coarse for any mollifier stage");
  return out;
}

namespace {

struct ModelFit {
  double alpha = 1.0, h0 = 0.0, c = 0.0, sse = 0.0;
};

ModelFit best_model(const std::vector<double>& radii, const std::vector<double>& values) {
  constexpr int grid = 200;
  int best = 1;
  double best_sse = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= grid; ++k) {
    const double sse = fit_fixed_alpha(radii, values, static_cast<double>(k) / grid).sse;
    if (sse < best_sse) {
      best_sse = sse;
      best = k;
    }
  }
  const double a = std::max(1e-6, (best - 1.0) / grid), b = std::min(1.0, (best + 1.0) / grid);
  const auto found = boost::math::tools::brent_find_minima(
      [&](double al) { return fit_fixed_alpha(radii, values, al).sse; }, a, b, std::numeric_limits<double>::digits);
  const auto lf = fit_fixed_alpha(radii, values, found.first);
  return {found.first, lf.h0, lf.c, std::max(found.second, 0.0)};
}

}  // namespace

PoleFit fit_pole_model(const std::vector<double>& radii, const std::vector<double>& values, double noise_floor) {
  require(radii.size() == values.size() && radii.size() >= 3, ErrorCode::PreconditionViolation,
          "pole fit needs at least three ring values");
  PoleFit fit;
  fit.radii = radii;
  fit.values = values;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double spread = *hi - *lo;
  const double n = static_cast<double>(values.size());
  if (spread <= noise_floor) {
    fit.degenerate = true;
    fit.h0 = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double s = 0.0;
    for (double v : values) s += (v - fit.h0) * (v - fit.h0);
    fit.residual = std::sqrt(s / n);
    fit.uncertainty = std::max(fit.residual, 0.5 * spread);
    return fit;
  }
  const auto m = best_model(radii, values);
  fit.alpha = m.alpha;
  fit.h0 = m.h0;
  fit.coefficient = m.c;
  fit.residual = std::sqrt(m.sse / n);
  require(fit.residual <= 0.1 * spread, ErrorCode::PoorFit,
          "regular-part model misfit " + std::to_string(fit.residual) + " exceeds a tenth of the ring spread");
  fit.uncertainty = fit.residual;
  if (radii.size() >= 4) {
    // Refit without the outermost ring; a bias linear in the largest radius
    // shrinks by r_next/r_outer, which scales the drift up to a bias estimate.
    const auto outer = static_cast<std::size_t>(std::max_element(radii.begin(), radii.end()) - radii.begin());
    std::vector<double> r2, v2;
    for (std::size_t i = 0; i < radii.size(); ++i)
      if (i != outer) {
        r2.push_back(radii[i]);
        v2.push_back(values[i]);
      }
    const double r_next = *std::max_element(r2.begin(), r2.end());
    const double drift = std::abs(best_model(r2, v2).h0 - fit.h0);
    fit.uncertainty = fit.residual + drift / (1.0 - r_next / radii[outer]);
  }
  return fit;
}

double GreenSolution::regular_part(int tri, const std::array<double, 3>& bary) const {
  const Vec2 x = spec.mesh->point(tri, bary);
  return g_extrapolated.at(tri, bary) - gamma.value((x - pole()).norm());
}

GreenSolution green_function(const ProblemSpec& spec, const GreenControls& controls) {
  require(spec.mesh != nullptr, ErrorCode::MeshMismatch, "Green problem has no mesh");
  require(spec.dimension == 2.0, ErrorCode::PreconditionViolation, "finite-element Green functions are planar");
  GreenSolution gs;
  gs.gamma = FundamentalSolutionParams::make(spec.p, spec.dimension);
  require(admissibility(spec.p, spec.dimension, spec.lambda).admissible, ErrorCode::InvalidExponent,
          "exponent below the admissibility threshold for nonzero lambda");
  const MeshPtr& mesh = spec.mesh;
  require(mesh->pole_vertex >= 0, ErrorCode::PreconditionViolation, "mesh has no pole vertex");
  const Vec2 pole = mesh->pole;
  const double dist = domain_distance(spec);

  gs.spec = spec;
  gs.spec.source = {};
  gs.spec.boundary_values.reset();
  if (spec.lambda != 0.0) {
    gs.lambda1 = spec.lambda1 ? *spec.lambda1 : first_eigenvalue(spec.p, mesh).lambda1;
    require(spec.lambda < 0.98 * gs.lambda1, ErrorCode::SupercriticalLambda,
            "lambda must stay 2% below the first eigenvalue estimate");
    gs.spec.lambda1 = gs.lambda1;
  }

  const std::vector<double> schedule =
      controls.schedule.empty() ? default_schedule(*mesh, dist, controls.min_pole_edges) : controls.schedule;
  for (std::size_t i = 1; i < schedule.size(); ++i)
    require(schedule[i] < schedule[i - 1], ErrorCode::PreconditionViolation, "schedule must decrease");
  require(schedule.front() < dist, ErrorCode::PreconditionViolation, "mollifier support leaves the domain");

  ProblemSpec stage_spec = gs.spec;
  stage_spec.controls = controls.solver;
  for (double rho : schedule) {
    const ScalarField f = mollified_delta(rho, pole, mesh);
    stage_spec.source = nodal_source(f);
    const ScalarField* warm = nullptr;
    if (!gs.stages.empty() && spec.p != 2.0) {
      warm = &gs.stages.back().g;
      stage_spec.controls.eps_start = std::max(controls.solver.eps_end, 1e-3 * controls.solver.eps_start);
    }
    auto res = solve_dirichlet(stage_spec, warm);
    GreenStage st;
    st.rho = rho;
    st.newton_iterations = res.trace.empty() ? 0 : res.trace.back().iteration;
    st.g = std::move(res.u);
    if (!gs.stages.empty()) {
      st.change = lq_norm(ScalarField(mesh, st.g.values() - gs.stages.back().g.values()), spec.p - 1.0);
      if (gs.stages.size() >= 2)
        require(st.change < gs.stages.back().change, ErrorCode::ScheduleTooAggressive,
                "stage-to-stage change grew at rho = " + std::to_string(rho));
    }
    gs.stages.push_back(std::move(st));
  }

  const std::size_t n = gs.stages.size();
  const bool richardson = controls.extrapolate && n >= 2;
  const double support = richardson ? gs.stages[n - 2].rho : gs.stages[n - 1].rho;
  gs.g = gs.stages.back().g;
  gs.g_extrapolated =
      richardson ? ScalarField(mesh, 2.0 * gs.g.values() - gs.stages[n - 2].g.values()) : gs.g;

  const std::size_t nv = mesh->num_vertices();
  gs.resolved.assign(nv, 1);
  for (const auto& tr : mesh->triangles) {
    bool inside = false;
    for (int v : tr) inside = inside || (mesh->vertices[v] - pole).norm() < support;
    if (inside)
      for (int v : tr) gs.resolved[v] = 0;
  }
  gs.resolved[mesh->pole_vertex] = 0;
  for (std::size_t v = 0; v < nv; ++v)
    if (!gs.resolved[v]) gs.resolved_radius = std::max(gs.resolved_radius, (mesh->vertices[v] - pole).norm());

  auto& d = gs.diagnostics;
  d.min_g = gs.g.values().minCoeff();
  d.max_abs_h = max_abs_regular(gs.g_extrapolated, gs.resolved, gs.gamma, pole);
  d.max_abs_h_last = max_abs_regular(gs.g, gs.resolved, gs.gamma, pole);
  d.max_abs_h_previous = n >= 2 ? max_abs_regular(gs.stages[n - 2].g, gs.resolved, gs.gamma, pole) : d.max_abs_h_last;
  d.q_bar = spec.dimension * (spec.p - 1.0) / (spec.dimension - 1.0);
  d.q_bar_norm = gradient_norm_outside(gs.g_extrapolated, gs.resolved, gs.gamma, pole, d.q_bar);
  d.q_bar_norm_previous =
      gradient_norm_outside(n >= 2 ? gs.stages[n - 2].g : gs.g, gs.resolved, gs.gamma, pole, d.q_bar);
  for (std::size_t v = 0; v < nv; ++v) {
    const double r = (mesh->vertices[v] - pole).norm();
    if (!gs.resolved[v] || r > 0.5 * dist) continue;
    const double gam = gs.gamma.value(r), gv = gs.g_extrapolated[v];
    if (gam <= 0.0) continue;
    d.two_sided_c = gv > 0.0 ? std::max({d.two_sided_c, gv / gam, gam / gv}) : std::numeric_limits<double>::infinity();
  }

  gs.pole_fit = regular_part_at_pole(gs, default_pole_rings(gs));
  gs.h_pole = {gs.pole_fit.h0, gs.pole_fit.uncertainty, gs.pole_fit.degenerate ? "ring-mean" : "hoelder-fit"};

  Eigen::VectorXd h(static_cast<Eigen::Index>(nv));
  for (std::size_t v = 0; v < nv; ++v) {
    const auto i = static_cast<Eigen::Index>(v);
    if (static_cast<int>(v) == mesh->pole_vertex) {
      h[i] = gs.h_pole.value;
      continue;
    }
    const double gam = gs.gamma.value((mesh->vertices[v] - pole).norm());
    h[i] = (gs.resolved[v] ? gs.g_extrapolated[v] : gs.g[v]) - gam;
  }
  gs.h = ScalarField(mesh, h);
  return gs;
}

std::vector<double> default_pole_rings(const GreenSolution& gs, int count) {
  const double edge = gs.spec.mesh->edge_length_near_pole();
  const double lo = std::max(gs.resolved_radius, 5.0 * edge) / (1 - kRingWidth / 2) * 1.01;
  const double hi = 0.5 * domain_distance(gs.spec) / (1 + kRingWidth / 2);
  require(lo < hi && count >= 2, ErrorCode::PreconditionViolation, "no room for pole rings on this mesh");
  std::vector<double> r(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) r[static_cast<std::size_t>(k)] = lo * std::pow(hi / lo, k / (count - 1.0));
  return r;
}

PoleFit regular_part_at_pole(const GreenSolution& gs, const std::vector<double>& radii) {
  require(radii.size() >= 4, ErrorCode::PreconditionViolation, "pole fit needs at least four rings");
  const double edge = gs.spec.mesh->edge_length_near_pole();
  const double dist = domain_distance(gs.spec);
  std::vector<double> values;
  for (double r : radii) {
    const double inner = r * (1 - kRingWidth / 2);
    require(inner >= 5.0 * edge && inner >= gs.resolved_radius, ErrorCode::PreconditionViolation,
            "ring at " + std::to_string(r) + " is inside the unresolved core");
    require(r * (1 + kRingWidth / 2) < dist, ErrorCode::PreconditionViolation, "ring leaves the domain");
    values.push_back(ring_average(gs, r));
  }
  double mean = 0.0;
  for (double v : values) mean += v / static_cast<double>(values.size());
  return fit_pole_model(radii, values, kNoiseFraction * (std::abs(mean) + gs.gamma.c0));
}

PoleFit regular_part_at_pole(const radial::RadialGreen& green, const std::vector<double>& radii) {
  std::vector<double> r = radii;
  if (r.empty())
    for (int k = 0; k < 6; ++k) r.push_back(green.radius * 1e-4 * std::pow(50.0, k / 5.0));
  require(r.size() >= 4, ErrorCode::PreconditionViolation, "pole fit needs at least four rings");
  std::vector<double> values;
  for (double x : r) {
    require(x > 0.0 && x < green.radius, ErrorCode::PreconditionViolation, "ring radius outside the ball");
    values.push_back(green.state_at(x).h);
  }
  const double c0 = FundamentalSolutionParams::make(green.p, green.dimension).c0;
  return fit_pole_model(r, values, 1e-9 * (std::abs(green.h0) + c0));
}

double radial_lq_distance(const radial::RadialProfile& a, const radial::RadialProfile& b, double q) {
  require(a.r == b.r, ErrorCode::MeshMismatch, "radial profiles live on different grids");
  const double area = a.dimension * unit_ball_volume(a.dimension);
  auto integrand = [&](std::size_t i) {
    return area * std::pow(a.r[i], a.dimension - 1.0) * std::pow(std::abs(a.values[i] - b.values[i]), q);
  };
  double s = 0.0;
  for (std::size_t i = 1; i < a.r.size(); ++i) s += 0.5 * (a.r[i] - a.r[i - 1]) * (integrand(i) + integrand(i - 1));
  return std::pow(s, 1.0 / q);
}

RadialMollifiedGreen radial_mollified_green(double p, double dimension, double radius, double lambda,
                                            const std::vector<double>& schedule) {
  FundamentalSolutionParams::make(p, dimension);
  require(admissibility(p, dimension, lambda).admissible, ErrorCode::InvalidExponent,
          "exponent below the admissibility threshold for nonzero lambda");
  require(!schedule.empty() && schedule.front() < radius, ErrorCode::PreconditionViolation,
          "mollifier support leaves the ball");
  const double area = dimension * unit_ball_volume(dimension);
  const auto grid = radial::radial_grid(radius);
  const double lambda1 = radial::radial_eigen(p, dimension, radius);
  RadialMollifiedGreen out;
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    const double rho = schedule[k];
    require(k == 0 || rho < schedule[k - 1], ErrorCode::PreconditionViolation, "schedule must decrease");
    const double mass = area * std::pow(rho, dimension) * 0.5 * std::beta(0.5 * dimension, 4.0);
    radial::RadialProblem pr;
    pr.p = p;
    pr.dimension = dimension;
    pr.radius = radius;
    pr.lambda = lambda;
    pr.lambda1 = lambda1;
    pr.source = [rho, mass](double r) {
      const double s = 1.0 - (r / rho) * (r / rho);
      return s > 0.0 ? s * s * s / mass : 0.0;
    };
    if (!out.stages.empty()) pr.center_guess = 2.0 * out.stages.back().values.front();
    auto sol = radial::radial_dirichlet(pr, grid);
    double change = 0.0;
    if (!out.stages.empty()) {
      change = radial_lq_distance(sol.u, out.stages.back(), p - 1.0);
      if (out.changes.size() >= 2)
        require(change < out.changes.back(), ErrorCode::ScheduleTooAggressive,
                "stage-to-stage change grew at rho = " + std::to_string(rho));
    }
    out.rho.push_back(rho);
    out.changes.push_back(change);
    out.stages.push_back(std::move(sol.u));
  }
  return out;
}

ScalarField punctured_green(const ProblemSpec& spec) {
  require(spec.mesh != nullptr, ErrorCode::MeshMismatch, "punctured problem has no mesh");
  const auto& m = *spec.mesh;
  require(std::any_of(m.inner_boundary.begin(), m.inner_boundary.end(), [](char c) { return c != 0; }),
          ErrorCode::PreconditionViolation, "punctured scheme needs a mesh with a hole");
  require(spec.lambda == 0.0, ErrorCode::PreconditionViolation, "punctured scheme is for lambda = 0");
  const auto gamma = FundamentalSolutionParams::make(spec.p, spec.dimension);
  Eigen::VectorXd bv = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m.num_vertices()));
  for (std::size_t v = 0; v < m.num_vertices(); ++v)
    if (m.inner_boundary[v]) bv[static_cast<Eigen::Index>(v)] = gamma.value((m.vertices[v] - m.pole).norm());
  ProblemSpec sub = spec;
  sub.source = {};
  sub.boundary_values = bv;
  return solve_dirichlet(sub).u;
}

PohozaevConstant pohozaev_constant(double p, double dimension) {
  const double n = dimension;
  require(p >= 2.0 && p < n, ErrorCode::InvalidExponent, "Pohozaev constant needs 2 <= p < N");
  const double a = p / (p - 1.0);
  const double e = n / p - n - 2.0;
  // Both integrands decay at least like r^{-3}; beyond 1e30 they are zero in double precision.
  const auto weight = [&](double r) {
    return r <= 0.0 || r > 1e30 ? 0.0 : std::pow(r, n - 1.0) * std::pow(1.0 + std::pow(r, a), e);
  };
  boost::math::quadrature::exp_sinh<double> quad;
  double err1 = 0.0, err2 = 0.0;
  const double direct = quad.integrate(
      [&](double r) { return weight(r) * (std::pow(r, a) - (p - 1.0)); },
      0.0, std::numeric_limits<double>::infinity(), 1e-13, &err1);
  const double base = quad.integrate(
      weight, 0.0,
      std::numeric_limits<double>::infinity(), 1e-13, &err2);
  PohozaevConstant out;
  out.direct_integral = direct;
  out.reduced_integral = (n - p) * (p - 1.0) / p * base;
  require(std::abs(out.direct_integral - out.reduced_integral) <= 1e-8 * std::abs(out.reduced_integral),
          ErrorCode::NonconvergentQuadrature, "the two Pohozaev integrals disagree");
  const auto fs = FundamentalSolutionParams::make(p, n);
  const double pstar = n * p / (n - p);
  out.value = (pstar - 1.0) * (n - p) / (p * (p - 1.0)) * std::pow(fs.c0, p - 1.0) *
              std::pow(bubble_amplitude(p, n), p * p / (n - p)) * fs.sphere_area() * direct;
  return out;
}

PohozaevReport pohozaev_residue(const radial::RadialGreen& green, const std::vector<double>& deltas) {
  const double p = green.p, n = green.dimension, lam = green.lambda;
  require(!deltas.empty(), ErrorCode::PreconditionViolation, "no radii for the Pohozaev residue");
  PohozaevReport rep;
  rep.constant = pohozaev_constant(p, n).value;
  const double area = FundamentalSolutionParams::make(p, n).sphere_area();
  for (double delta : deltas) {
    require(delta > 0.0 && delta < green.radius, ErrorCode::EmptyRing, "sphere radius outside the ball");
    const auto st = green.state_at(delta);
    const double grad_p = std::pow(std::abs(st.dg), p);
    const double gp = std::pow(std::max(st.g, 0.0), p);
    const double surface = delta * grad_p * (1.0 / p - 1.0) - lam * delta * gp / p - (n - p) / p * st.g * phi(st.dg, p);
    const double residue = lam * st.mass + area * std::pow(delta, n - 1.0) * surface;
    rep.deltas.push_back(delta);
    rep.residues.push_back(residue);
    rep.estimates.push_back(residue / rep.constant);
  }
  rep.mean = std::accumulate(rep.estimates.begin(), rep.estimates.end(), 0.0) / static_cast<double>(deltas.size());
  for (double e : rep.estimates) rep.abs_spread = std::max(rep.abs_spread, std::abs(e - rep.mean));
  rep.spread = rep.mean != 0.0 ? rep.abs_spread / std::abs(rep.mean) : rep.abs_spread;
  return rep;
}

}  // namespace plap
