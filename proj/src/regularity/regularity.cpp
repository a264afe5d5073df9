#include "plap/regularity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "plap/error.hpp"

namespace plap {

double sigma_exponent(double p, double dimension, double q0) {
  const double n = dimension;
  require(p > 1.0, ErrorCode::InvalidExponent, "sigma needs p > 1");
  const double sigma = p <= 2.0 ? (p * p - n) / (p * (p - 1.0)) : (p * q0 - n) / (q0 * (p - 1.0));
  require(sigma > 0.0, ErrorCode::NonpositiveSigma,
          "sigma = " + std::to_string(sigma) + (p <= 2.0 ? " (needs p > sqrt(N))" : " (needs q0 > N/p)"));
  return sigma;
}

double default_q0(double p, double dimension) {
  require(p > 1.0 && p <= dimension, ErrorCode::InvalidExponent, "q0 window needs 1 < p <= N");
  if (p == dimension) return 2.0;
  return 0.5 * (dimension / p + dimension / (dimension - p));
}

namespace {

using Sample = std::pair<double, double>;

Extremes prefix_extremes(const std::vector<Sample>& sorted, double radius) {
  Extremes e{-INFINITY, INFINITY};
  for (const auto& s : sorted) {
    if (s.first > radius) break;
    e.sup = std::max(e.sup, s.second);
    e.inf = std::min(e.inf, s.second);
  }
  require(std::isfinite(e.sup), ErrorCode::EmptyRing, "no resolved sample inside radius " + std::to_string(radius));
  return e;
}

std::vector<Sample> fem_samples(const GreenSolution& gs) {
  const auto& mesh = *gs.spec.mesh;
  std::vector<Sample> out;
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v)
    if (gs.resolved[v]) out.push_back({(mesh.vertices[v] - gs.pole()).norm(), gs.h[v]});
  for_each_quad_point(mesh, [&](const QuadPoint& q) {
    const auto& t = mesh.triangles[static_cast<std::size_t>(q.tri)];
    if (gs.resolved[static_cast<std::size_t>(t[0])] && gs.resolved[static_cast<std::size_t>(t[1])] &&
        gs.resolved[static_cast<std::size_t>(t[2])])
      out.push_back({(q.x - gs.pole()).norm(), gs.regular_part(q.tri, q.bary)});
  });
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

FemRegularPart::FemRegularPart(const GreenSolution& gs) : gs_(&gs) {
  require(gs.spec.mesh != nullptr && gs.h.mesh_ptr() == gs.spec.mesh, ErrorCode::MeshMismatch,
          "Green solution has no regular part on its mesh");
  min_radius_ = gs.resolved_radius;
  const auto& mesh = *gs.spec.mesh;
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v)
    if (gs.resolved[v]) noise_ = std::max(noise_, std::abs(gs.g_extrapolated[v] - gs.g[v]));
  noise_ = std::max(noise_, 1e-3 * (std::abs(gs.h_pole.value) + gs.gamma.c0));
  samples_ = fem_samples(gs);
}

Extremes FemRegularPart::extremes(double radius) const {
  require(radius > min_radius_, ErrorCode::PreconditionViolation, "ball inside the unresolved core");
  return prefix_extremes(samples_, radius);
}

double FemRegularPart::source_norm(double radius, double q) const {
  const auto& mesh = *gs_->spec.mesh;
  const double p = gs_->spec.p;
  double sum = 0.0;
  for_each_quad_point(mesh, [&](const QuadPoint& qp) {
    if ((qp.x - gs_->pole()).norm() > radius) return;
    const double g = std::max(gs_->g.at(qp.tri, qp.bary), 0.0);
    sum += qp.weight * std::pow(g, (p - 1.0) * q);
  });
  return std::pow(sum, 1.0 / q);
}

RadialRegularPart::RadialRegularPart(const radial::RadialGreen& green) : green_(&green) {}

double RadialRegularPart::noise_floor() const {
  return 1e-9 * (std::abs(green_->h0) + FundamentalSolutionParams::make(green_->p, green_->dimension).c0);
}

Extremes RadialRegularPart::extremes(double radius) const {
  require(radius >= min_radius() && radius <= green_->radius, ErrorCode::PreconditionViolation,
          "ball radius outside the radial grid");
  const auto& h = green_->h;
  Extremes e{h.at(radius), h.at(radius)};
  for (std::size_t i = 1; i < h.r.size() && h.r[i] <= radius; ++i) {
    e.sup = std::max(e.sup, h.values[i]);
    e.inf = std::min(e.inf, h.values[i]);
  }
  return e;
}

double RadialRegularPart::source_norm(double radius, double q) const {
  const double p = green_->p, n = green_->dimension;
  const auto fs = FundamentalSolutionParams::make(p, n);
  const auto& r = green_->h.r;
  const double top = std::min(radius, green_->radius);
  const double e = (p - 1.0) * q;
  const auto integrand = [&](std::size_t i) { return std::pow(r[i], n - 1.0) * std::pow(std::max(green_->g[i], 0.0), e); };
  // Below the first grid radius G is Γ-dominated: integrate c0^e r^{N-1-e·decay} exactly.
  double sum = 0.0;
  if (!fs.logarithmic) {
    const double k = n - e * fs.decay();
    require(k > 0.0, ErrorCode::PreconditionViolation, "G^{p-1} is not q-integrable at the pole");
    sum = std::pow(fs.c0, e) * std::pow(r[1], k) / k;
  }
  for (std::size_t i = 1; i + 1 < r.size() && r[i] < top; ++i) {
    const double b = std::min(r[i + 1], top);
    const double frac = (b - r[i]) / (r[i + 1] - r[i]);
    const double right = integrand(i) + frac * (integrand(i + 1) - integrand(i));
    sum += 0.5 * (b - r[i]) * (integrand(i) + right);
  }
  return std::pow(fs.sphere_area() * sum, 1.0 / q);
}

ProfileRegularPart::ProfileRegularPart(std::function<double(double)> profile, double p, double dimension,
                                       double noise_floor)
    : profile_(std::move(profile)), p_(p), dimension_(dimension), noise_(noise_floor) {}

Extremes ProfileRegularPart::extremes(double radius) const {
  Extremes e{profile_(radius), profile_(radius)};
  constexpr int kUniform = 2000, kGeometric = 600;
  for (int k = 1; k < kUniform; ++k) {
    const double v = profile_(radius * k / kUniform);
    e.sup = std::max(e.sup, v);
    e.inf = std::min(e.inf, v);
  }
  for (int k = 1; k <= kGeometric; ++k) {
    const double v = profile_(radius * std::pow(10.0, -12.0 * k / kGeometric));
    e.sup = std::max(e.sup, v);
    e.inf = std::min(e.inf, v);
  }
  return e;
}

std::vector<double> geometric_radii(double lo, double hi, int n) {
  require(lo > 0.0 && hi > lo && n >= 2, ErrorCode::PreconditionViolation, "bad geometric radius range");
  std::vector<double> r(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) r[static_cast<std::size_t>(k)] = lo * std::pow(hi / lo, k / (n - 1.0));
  r.back() = hi;
  return r;
}

HarnackReport harnack_report(const RegularPartSampler& h, int sign, double shift, std::vector<double> radii,
                             double q0) {
  require(sign == 1 || sign == -1, ErrorCode::PreconditionViolation, "sign must be +1 or -1");
  require(!radii.empty(), ErrorCode::PreconditionViolation, "no radii for the Harnack report");
  std::sort(radii.begin(), radii.end());
  require(radii.front() > h.min_radius(), ErrorCode::PreconditionViolation, "Harnack ball inside the unresolved core");
  const double p = h.p(), n = h.dimension(), lambda = h.lambda();
  const auto fs = FundamentalSolutionParams::make(p, n);
  HarnackReport rep;
  rep.sign = sign;
  rep.shift = shift;
  rep.q0 = q0 > 0.0 ? q0 : default_q0(p, n);
  const double q = p >= 2.0 ? rep.q0 : p / (p - 1.0);
  const double power = p >= 2.0 ? 1.0 / (p - 1.0) : 1.0;

  const auto outer = h.extremes(radii.back());
  const double outer_inf = sign > 0 ? outer.inf + shift : -outer.sup + shift;
  require(outer_inf >= 0.0, ErrorCode::NegativeShiftedField,
          "shifted regular part reaches " + std::to_string(outer_inf) + " on the largest ball");

  for (double radius : radii) {
    const auto e = h.extremes(radius);
    const double scale = std::pow(radius, fs.decay());
    const double sup = scale * (sign > 0 ? e.sup + shift : -e.inf + shift);
    const double inf = scale * (sign > 0 ? e.inf + shift : -e.sup + shift);
    double lam = 0.0;
    if (lambda != 0.0)
      lam = std::pow(std::abs(lambda) * std::pow(radius, n - n / q) * h.source_norm(2.0 * radius, q), power);
    rep.radii.push_back(radius);
    rep.sup.push_back(sup);
    rep.inf.push_back(inf);
    rep.lambda_term.push_back(lam);
    rep.quotient.push_back(sup / (inf + lam));
  }
  // radii ascend, so "growing as R decreases" reads right to left
  bool monotone = true;
  for (std::size_t i = 0; i + 1 < rep.quotient.size(); ++i) monotone = monotone && rep.quotient[i] >= rep.quotient[i + 1];
  // C(R) <= sup/inf -> 1 for a continuous positive field, so growth up to 1 is not counted.
  rep.growth_flag = rep.quotient.size() >= 2 && monotone && rep.quotient.front() > 2.0 * std::max(rep.quotient.back(), 1.0);
  return rep;
}

HolderFit oscillation_decay(const RegularPartSampler& h, std::vector<double> radii) {
  require(radii.size() >= 5, ErrorCode::PreconditionViolation, "oscillation decay needs at least five radii");
  std::sort(radii.begin(), radii.end());
  require(radii.front() > h.min_radius(), ErrorCode::PreconditionViolation, "radius inside the unresolved core");
  const double ratio = radii[1] / radii[0];
  for (std::size_t i = 1; i < radii.size(); ++i)
    require(std::abs(radii[i] / radii[i - 1] - ratio) <= 1e-6 * ratio, ErrorCode::PreconditionViolation,
            "oscillation radii are not in geometric progression");

  const auto omega = [&h](double radius) {
    const auto e = h.extremes(radius);
    return e.sup - e.inf;
  };
  HolderFit fit;
  fit.radii = radii;
  for (double r : radii) fit.omega.push_back(omega(r));
  const double floor = h.noise_floor();
  for (double r : radii) {
    if (r / 2 <= h.min_radius()) continue;
    const double w = omega(r);
    if (w <= floor) continue;
    fit.theta_radii.push_back(r);
    fit.theta_hat.push_back(omega(r / 2) / w);
  }

  std::vector<double> x, y;
  for (std::size_t i = 0; i < radii.size(); ++i)
    if (fit.omega[i] > floor) {
      x.push_back(std::log(radii[i]));
      y.push_back(std::log(fit.omega[i]));
    }
  if (x.size() < 3) {
    fit.degenerate = true;
    fit.alpha = 1.0;
    fit.c0 = 0.0;
    return fit;
  }
  const double m = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / m;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / m;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  const double slope = sxy / sxx;
  require(slope > 0.0, ErrorCode::PoorFit, "oscillation does not decay toward the pole");
  double sse = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) sse += std::pow(y[i] - my - slope * (x[i] - mx), 2);
  fit.residual = std::sqrt(sse / m);
  fit.alpha = std::min(slope, 1.0);
  for (std::size_t i = 0; i < x.size(); ++i) fit.c0 = std::max(fit.c0, std::exp(y[i] - fit.alpha * x[i]));
  require(fit.residual <= 0.25, ErrorCode::PoorFit,
          "log-log oscillation misfit " + std::to_string(fit.residual) + " exceeds 0.25");
  return fit;
}

void write_harnack_csv(std::ostream& os, const HarnackReport& rep) {
  os << "R,sup,inf,Lambda,C\n";
  os.precision(17);
  for (std::size_t i = 0; i < rep.radii.size(); ++i)
    os << rep.radii[i] << ',' << rep.sup[i] << ',' << rep.inf[i] << ',' << rep.lambda_term[i] << ','
       << rep.quotient[i] << '\n';
}

void write_holder_csv(std::ostream& os, const HolderFit& fit) {
  os << "R,omega,theta_hat\n";
  os.precision(17);
  for (std::size_t i = 0; i < fit.radii.size(); ++i) {
    os << fit.radii[i] << ',' << fit.omega[i] << ',';
    const auto it = std::find(fit.theta_radii.begin(), fit.theta_radii.end(), fit.radii[i]);
    if (it != fit.theta_radii.end()) os << fit.theta_hat[static_cast<std::size_t>(it - fit.theta_radii.begin())];
    os << '\n';
  }
}

}  // namespace plap
