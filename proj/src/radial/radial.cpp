#include "plap/radial.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "plap/error.hpp"

namespace plap::radial {
namespace {

namespace odeint = boost::numeric::odeint;
using State = std::vector<double>;

constexpr double kRelTol = 1e-10;
constexpr double kAbsTol = 1e-20;
constexpr double kStartFraction = 1e-6;

double phi(double s, double p) { return s == 0.0 ? 0.0 : std::copysign(std::pow(std::abs(s), p - 1.0), s); }
double phi_inv(double s, double p) {
  return s == 0.0 ? 0.0 : std::copysign(std::pow(std::abs(s), 1.0 / (p - 1.0)), s);
}

auto make_stepper() { return odeint::make_dense_output(kAbsTol, kRelTol, odeint::runge_kutta_dopri5<State>()); }

template <class System, class Observer>
void integrate_through(System&& sys, State& x, const std::vector<double>& radii, Observer&& obs) {
  auto stepper = make_stepper();
  double t = std::log(radii.front());
  stepper.initialize(x, t, 1e-3);
  obs(x, t);
  long steps = 0;
  for (std::size_t i = 1; i < radii.size(); ++i) {
    t = std::log(radii[i]);
    while (stepper.current_time() < t) {
      stepper.do_step(sys);
      require(++steps < 1000000 && std::isfinite(stepper.current_state()[0]), ErrorCode::ShootingDivergence,
              "radial integration failed to progress");
    }
    if (steps > 0) stepper.calc_state(t, x);
    obs(x, t);
  }
  for (double v : x)
    require(std::isfinite(v), ErrorCode::ShootingDivergence, "radial integration produced non-finite values");
}

template <class System>
void integrate_to(System&& sys, State& x, double r_from, double r_to) {
  if (r_to <= r_from) return;
  integrate_through(sys, x, {r_from, r_to}, [](const State&, double) {});
}

// -(r^{N-1} φ_p(u'))' = r^{N-1}(λ φ_p(u) + f) in t = ln r, with s = φ_p(u').
struct DirichletSystem {
  double p, n, lambda;
  const RadialFunction* source;
  const std::vector<Moment>* moments;

  void operator()(const State& x, State& dx, double t) const {
    const double r = std::exp(t);
    const double du = phi_inv(x[1], p);
    const double f = (source && *source) ? (*source)(r) : 0.0;
    dx[0] = r * du;
    dx[1] = -r * (lambda * phi(x[0], p) + f) - (n - 1.0) * x[1];
    const double w = std::pow(r, n);
    for (std::size_t j = 0; j < moments->size(); ++j) dx[2 + j] = w * (*moments)[j](r, x[0], du);
  }
};

State dirichlet_start(const DirichletSystem& sys, double center, double r0) {
  const double f0 = (sys.source && *sys.source) ? (*sys.source)(0.0) : 0.0;
  const double c = sys.lambda * phi(center, sys.p) + f0;
  State x(2 + sys.moments->size());
  const double s = -c * r0 / sys.n;
  x[1] = s;
  x[0] = center + (sys.p - 1.0) / sys.p * r0 * phi_inv(s, sys.p);
  for (std::size_t j = 0; j < sys.moments->size(); ++j)
    x[2 + j] = (*sys.moments)[j](0.0, center, 0.0) * std::pow(r0, sys.n) / sys.n;
  return x;
}

// Regular part H = G - Γ and V = λ ∫_{B_r} G^{p-1} (flux minus one) in t = ln r;
// the third component accumulates ∫_0^r s^{N-1} |G|^p ds.
struct GreenSystem {
  FundamentalSolutionParams fs;
  double lambda;

  void operator()(const State& x, State& dx, double t) const {
    const double r = std::exp(t);
    const double n = fs.dimension, p = fs.p;
    const double a = -fs.slope(r);
    const double g = fs.value(r) + x[0];
    const double flux = 1.0 + x[1];
    const double excess = flux > 0.0 ? std::expm1(std::log1p(x[1]) / (p - 1.0)) : -1.0 - phi_inv(-flux, p);
    const double rn = std::pow(r, n);
    dx[0] = -r * a * excess;
    dx[1] = lambda * fs.sphere_area() * rn * phi(g, p);
    dx[2] = rn * std::pow(std::abs(g), p);
  }
};

State green_start(const FundamentalSolutionParams& fs, double lambda, double h0, double r0) {
  const double n = fs.dimension, p = fs.p;
  State x(3, 0.0);
  if (fs.logarithmic) {
    // N = 2: λ ∫_{B_r} Γ = λ r² (1/4 - log(r)/2).
    x[1] = lambda * r0 * r0 * (0.25 - 0.5 * std::log(r0));
    x[0] = h0;
    return x;
  }
  const double k = fs.decay();
  x[1] = lambda * fs.sphere_area() * std::pow(fs.c0, p - 1.0) * std::pow(r0, p) / p;
  const double beta = p - (n - 1.0) / (p - 1.0);
  const double dh = fs.slope(r0) * std::expm1(std::log1p(x[1]) / (p - 1.0));
  x[0] = h0 + r0 * dh / (beta + 1.0);
  x[2] = std::pow(fs.c0, p) * std::pow(r0, n - k * p) / (n - k * p);
  return x;
}

struct Secant {
  double x0, f0, x1, f1;
  double next() const {
    const double d = f1 - f0;
    require(d != 0.0 && std::isfinite(d), ErrorCode::ShootingDivergence, "shooting map is flat");
    return x1 - f1 * (x1 - x0) / d;
  }
  void push(double x, double f) {
    x0 = x1;
    f0 = f1;
    x1 = x;
    f1 = f;
  }
};

void check_lambda(double p, double n, double radius, double lambda, std::optional<double> lambda1) {
  if (lambda <= 0.0) return;
  const double l1 = lambda1 ? *lambda1 : radial_eigen(p, n, radius);
  require(lambda < l1 * (1.0 - 1e-8), ErrorCode::SupercriticalLambda, "lambda must stay below the first eigenvalue of the ball");
}

}  // namespace

double RadialProfile::at(double x) const {
  require(!r.empty() && x >= r.front() && x <= r.back() * (1 + 1e-14), ErrorCode::PreconditionViolation,
          "radius outside the profile grid");
  const auto it = std::upper_bound(r.begin(), r.end(), x);
  const std::size_t i = it == r.end() ? r.size() - 2 : static_cast<std::size_t>(it - r.begin()) - 1;
  const double h = r[i + 1] - r[i];
  const double s = (x - r[i]) / h;
  const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
  const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
  return h00 * values[i] + h10 * h * slopes[i] + h01 * values[i + 1] + h11 * h * slopes[i + 1];
}

std::vector<double> radial_grid(double radius, int points_per_decade, int uniform_points) {
  require(radius > 0.0 && points_per_decade > 0 && uniform_points > 1, ErrorCode::PreconditionViolation,
          "invalid radial grid request");
  std::vector<double> r{0.0};
  const double lo = kStartFraction * radius, mid = 0.1 * radius;
  const int geo = static_cast<int>(std::ceil(std::log10(mid / lo) * points_per_decade));
  for (int i = 0; i < geo; ++i) r.push_back(lo * std::pow(mid / lo, static_cast<double>(i) / geo));
  for (int i = 0; i <= uniform_points; ++i) r.push_back(mid + (radius - mid) * i / uniform_points);
  r.back() = radius;
  return r;
}

RadialProfile radial_solve_lambda0(double p, double dimension, double radius, const RadialFunction& f) {
  require(p > 1.0 && dimension >= 2.0 && radius > 0.0, ErrorCode::PreconditionViolation,
          "radial solve needs p > 1, N >= 2, R > 0");
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  RadialProfile prof;
  prof.p = p;
  prof.dimension = dimension;
  prof.r = radial_grid(radius);
  const std::size_t m = prof.r.size();
  std::vector<double> flux(m, 0.0);
  double worst = 0.0, scale = 0.0;
  auto weighted = [&](double s) { return f ? std::pow(s, dimension - 1.0) * f(s) : 0.0; };
  for (std::size_t i = 0; i + 1 < m; ++i) {
    double err = 0.0;
    flux[i + 1] = flux[i] + GK::integrate(weighted, prof.r[i], prof.r[i + 1], 0, 0.0, &err);
    worst = std::max(worst, err);
    scale = std::max(scale, std::abs(flux[i + 1]));
  }
  auto slope_from_flux = [&](double s, double fl) {
    return s == 0.0 ? 0.0 : -phi_inv(fl / std::pow(s, dimension - 1.0), p);
  };
  prof.slopes.resize(m);
  for (std::size_t i = 0; i < m; ++i) prof.slopes[i] = slope_from_flux(prof.r[i], flux[i]);
  prof.values.assign(m, 0.0);
  double uscale = 0.0, uerr = 0.0;
  for (std::size_t i = m - 1; i-- > 0;) {
    const double a = prof.r[i], b = prof.r[i + 1], fa = flux[i];
    auto du = [&](double s) {
      const double fl = s == a ? fa : fa + boost::math::quadrature::gauss<double, 30>::integrate(weighted, a, s);
      return slope_from_flux(s, fl);
    };
    double err = 0.0;
    if (i == 0) {
      // Power-law behaviour at the center: u' ~ -φ_p^{-1}(f(0) s / N).
      prof.values[0] = prof.values[1] - (p - 1.0) / p * b * prof.slopes[1];
    } else {
      prof.values[i] = prof.values[i + 1] - GK::integrate(du, a, b, 6, 1e-12, &err);
    }
    uerr += err;
    uscale = std::max(uscale, std::abs(prof.values[i]));
  }
  require(std::isfinite(uscale) && worst <= 1e-10 * std::max(scale, 1e-300) + 1e-300 &&
              uerr <= 1e-10 * std::max(uscale, 1e-300) + 1e-300,
          ErrorCode::QuadratureFailure, "radial quadrature did not converge");
  return prof;
}

double radial_eigen(double p, double dimension, double radius) {
  require(p > 1.0 && p <= dimension, ErrorCode::InvalidExponent, "radial eigenvalue needs 1 < p <= N");
  require(radius > 0.0, ErrorCode::PreconditionViolation, "radius must be positive");
  const std::vector<Moment> none;
  const DirichletSystem sys{p, dimension, 1.0, nullptr, &none};
  const double r0 = 1e-6;
  State x = dirichlet_start(sys, 1.0, r0);
  auto stepper = make_stepper();
  stepper.initialize(x, std::log(r0), 1e-3);
  const double t_max = std::log(1e4);
  while (true) {
    const auto [t_old, t_new] = stepper.do_step(sys);
    require(t_new < t_max && std::isfinite(stepper.current_state()[0]), ErrorCode::ShootingDivergence,
            "eigenfunction shooting found no zero");
    if (stepper.current_state()[0] > 0.0) continue;
    double lo = t_old, hi = t_new;
    State mid(x.size());
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::abs(hi) + 1e-300; ++it) {
      const double t = 0.5 * (lo + hi);
      stepper.calc_state(t, mid);
      (mid[0] > 0.0 ? lo : hi) = t;
    }
    const double zero = std::exp(0.5 * (lo + hi));
    return std::pow(zero / radius, p);
  }
}

RadialSolution radial_dirichlet(const RadialProblem& pr, const std::vector<double>& grid_in) {
  require(pr.p > 1.0 && pr.dimension >= 2.0 && pr.radius > 0.0, ErrorCode::PreconditionViolation,
          "radial problem needs p > 1, N >= 2, R > 0");
  check_lambda(pr.p, pr.dimension, pr.radius, pr.lambda, pr.lambda1);
  const std::vector<double> grid = grid_in.empty() ? radial_grid(pr.radius) : grid_in;
  require(grid.size() >= 3 && grid.front() == 0.0 && std::abs(grid.back() - pr.radius) <= 1e-14 * pr.radius &&
              std::is_sorted(grid.begin(), grid.end()) && grid[1] <= kStartFraction * pr.radius * (1 + 1e-12),
          ErrorCode::PreconditionViolation, "radial grid must start at 0, reach R, and resolve 1e-6 R");
  const DirichletSystem sys{pr.p, pr.dimension, pr.lambda, &pr.source, &pr.moments};
  const double r0 = grid[1];
  const std::vector<double> tail(grid.begin() + 1, grid.end());

  RadialSolution out;
  auto shoot = [&](double center, bool record) {
    State x = dirichlet_start(sys, center, r0);
    ++out.shots;
    if (!record) {
      integrate_to(sys, x, r0, pr.radius);
      return x;
    }
    out.u.r = grid;
    out.u.values.assign(1, center);
    out.u.slopes.assign(1, 0.0);
    integrate_through(sys, x, tail, [&](const State& s, double) {
      out.u.values.push_back(s[0]);
      out.u.slopes.push_back(phi_inv(s[1], pr.p));
    });
    return x;
  };

  double a = pr.center_guess.value_or(1.0);
  double fa = shoot(a, false)[0];
  double b = a - fa;
  if (b == a) b = a * (1 + 1e-3) + 1e-3;
  Secant sec{a, fa, b, shoot(b, false)[0]};
  for (int it = 0; it < 60; ++it) {
    const double scale = std::max({std::abs(sec.x1), std::abs(sec.x0), 1e-300});
    if (std::abs(sec.f1) <= 1e-12 * scale || std::abs(sec.x1 - sec.x0) <= 1e-14 * scale || sec.f1 == 0.0) break;
    const double c = sec.next();
    sec.push(c, shoot(c, false)[0]);
  }
  const double center = sec.x1;
  State last = shoot(center, true);
  require(std::abs(last[0]) <= 1e-8 * std::max(std::abs(center), 1e-300) + 1e-300, ErrorCode::ShootingDivergence,
          "shooting did not meet the boundary condition");
  out.u.values.back() = 0.0;
  out.u.p = pr.p;
  out.u.dimension = pr.dimension;
  out.moments.assign(last.begin() + 2, last.end());
  return out;
}

GreenState RadialGreen::state_at(double r) const {
  require(r > 0.0 && r <= radius * (1 + 1e-14), ErrorCode::PreconditionViolation, "radius outside (0, R]");
  const auto fs = FundamentalSolutionParams::make(p, dimension);
  GreenState st;
  State x;
  if (checkpoints_.empty()) {
    // Closed form: H is constant, the flux is exactly one.
    st.h = h0;
    st.g = fs.value(r) + h0;
    st.dg = fs.slope(r);
    st.flux = 1.0;
    auto integrand = [&](double s) {
      if (s <= 0.0) return 0.0;
      if (fs.logarithmic) return std::pow(s, dimension - 1.0) * std::pow(std::abs(fs.value(s) + h0), p);
      const double k = fs.decay();
      return std::pow(s, dimension - 1.0 - k * p) * std::pow(std::abs(fs.c0 + h0 * std::pow(s, k)), p);
    };
    boost::math::quadrature::tanh_sinh<double> ts;
    st.mass = fs.sphere_area() * ts.integrate(integrand, 0.0, r);
    return st;
  }
  if (r <= start_radius) {
    x = green_start(fs, lambda, h0, r);
  } else {
    const auto it = std::upper_bound(h.r.begin() + 1, h.r.end(), r);
    const std::size_t i = static_cast<std::size_t>(it - h.r.begin()) - 1;
    x = checkpoints_[i - 1];
    integrate_to(GreenSystem{fs, lambda}, x, h.r[i], r);
  }
  st.h = x[0];
  st.g = fs.value(r) + x[0];
  st.flux = 1.0 + x[1];
  st.dg = -phi_inv(st.flux / (fs.sphere_area() * std::pow(r, dimension - 1.0)), p);
  st.mass = fs.sphere_area() * x[2];
  return st;
}

RadialGreen radial_green(double p, double dimension, double radius, double lambda, std::optional<double> lambda1) {
  require(p < dimension || (p == 2.0 && dimension == 2.0), ErrorCode::InvalidExponent,
          "radial Green function needs p < N or p = N = 2");
  require(radius > 0.0, ErrorCode::PreconditionViolation, "radius must be positive");
  const auto fs = FundamentalSolutionParams::make(p, dimension);
  check_lambda(p, dimension, radius, lambda, lambda1);

  RadialGreen out;
  out.p = p;
  out.dimension = dimension;
  out.radius = radius;
  out.lambda = lambda;
  out.h.p = p;
  out.h.dimension = dimension;
  out.h.r = radial_grid(radius);
  const auto& grid = out.h.r;
  out.start_radius = grid[1];
  const double h_closed = -fs.value(radius);

  if (lambda == 0.0) {
    out.h0 = h_closed;
    out.h.values.assign(grid.size(), h_closed);
    out.h.slopes.assign(grid.size(), 0.0);
    out.g.push_back(std::numeric_limits<double>::infinity());
    for (std::size_t i = 1; i < grid.size(); ++i) out.g.push_back(fs.value(grid[i]) + h_closed);
    out.g.back() = 0.0;
    return out;
  }

  const GreenSystem sys{fs, lambda};
  const double r0 = out.start_radius;
  auto boundary_value = [&](double h0) {
    State x = green_start(fs, lambda, h0, r0);
    ++out.shots;
    integrate_to(sys, x, r0, radius);
    return fs.value(radius) + x[0];
  };
  const double a = h_closed;
  const double b = a + 0.05 * std::max(std::abs(a), fs.c0);
  Secant sec{a, boundary_value(a), b, boundary_value(b)};
  for (int it = 0; it < 60; ++it) {
    const double scale = std::max({std::abs(sec.x1), fs.c0});
    if (std::abs(sec.f1) <= 1e-13 * scale || std::abs(sec.x1 - sec.x0) <= 1e-15 * scale) break;
    const double c = sec.next();
    sec.push(c, boundary_value(c));
  }
  out.h0 = sec.x1;

  State x = green_start(fs, lambda, out.h0, r0);
  out.start_flux = 1.0 + x[1];
  out.h.values.assign(1, out.h0);
  out.h.slopes.assign(1, 0.0);
  out.g.assign(1, std::numeric_limits<double>::infinity());
  const std::vector<double> tail(grid.begin() + 1, grid.end());
  State dx(3);
  integrate_through(sys, x, tail, [&](const State& s, double t) {
    sys(s, dx, t);
    const double r = std::exp(t);
    out.checkpoints_.push_back(s);
    out.h.values.push_back(s[0]);
    out.h.slopes.push_back(dx[0] / r);
    out.g.push_back(fs.value(r) + s[0]);
  });
  out.h.slopes[0] = out.h.slopes[1];
  require(std::abs(out.g.back()) <= 1e-8 * std::max(std::abs(out.h0), fs.c0), ErrorCode::ShootingDivergence,
          "Green shooting did not meet the boundary condition");
  out.g.back() = 0.0;
  return out;
}

void write_profile_csv(std::ostream& os, const RadialGreen& green) {
  os << "r,G,H\n";
  os.precision(17);
  for (std::size_t i = 0; i < green.h.r.size(); ++i)
    os << green.h.r[i] << ',' << green.g[i] << ',' << green.h.values[i] << '\n';
}

void write_profile_csv(std::ostream& os, const RadialProfile& profile) {
  os << "r,u,du\n";
  os.precision(17);
  for (std::size_t i = 0; i < profile.r.size(); ++i)
    os << profile.r[i] << ',' << profile.values[i] << ',' << profile.slopes[i] << '\n';
}

}  // namespace plap::radial
