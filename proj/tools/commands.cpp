#include "commands.hpp"

#include <Eigen/Core>
#include <boost/version.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <random>
#include <sstream>

#include "plap/brezis_nirenberg.hpp"
#include "plap/convexity.hpp"
#include "plap/error.hpp"
#include "plap/green.hpp"
#include "plap/regularity.hpp"
#include "plap/spectral.hpp"

#ifndef PLAP_VERSION
#define PLAP_VERSION "unknown"
#endif

namespace plap::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

using Files = std::vector<std::pair<std::string, std::string>>;

struct PointResult {
  json summary;
  Files files;
};

template <class Writer>
std::string render(Writer&& w) {
  std::ostringstream os;
  w(os);
  return os.str();
}

class Stopwatch {
 public:
  explicit Stopwatch(json& sink) : sink_(sink) {}
  template <class Fn>
  auto time(const std::string& name, Fn&& fn) {
    const auto start = std::chrono::steady_clock::now();
    auto result = fn();
    sink_[name] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return result;
  }

 private:
  json& sink_;
};

const geometry::RadialBall& ball_of(const geometry::DomainSpec& d) { return std::get<geometry::RadialBall>(d.shape); }

ProblemSpec planar_spec(const RunConfig& c, double lambda) {
  ProblemSpec s;
  s.p = c.p;
  s.lambda = lambda;
  s.dimension = 2.0;
  s.domain = c.domain_spec();
  s.mesh = geometry::build_mesh(s.domain, c.h, c.gamma);
  return s;
}

GreenControls green_controls(const RunConfig& c) {
  GreenControls g;
  g.schedule = c.schedule;
  g.min_pole_edges = c.min_pole_edges;
  return g;
}

bool pohozaev_applies(double p, double n) { return p >= 2.0 && p < n; }

std::string suffix(const std::string& name, int index) {
  if (index < 0) return name + ".csv";
  return name + "_" + std::to_string(index) + ".csv";
}

PointResult green_point(const RunConfig& c, double lambda, int index) {
  PointResult out;
  const auto d = c.domain_spec();
  json& s = out.summary;
  s["p"] = c.p;
  s["lambda"] = lambda;
  if (d.is_radial()) {
    const auto& b = ball_of(d);
    const auto rg = radial::radial_green(c.p, b.dimension, b.radius, lambda);
    const auto fit = regular_part_at_pole(rg);
    s["H_pole_fit"] = fit.h0;
    s["H_pole_uncertainty"] = fit.uncertainty;
    s["H_pole_shooting"] = rg.h0;
    s["alpha"] = fit.alpha;
    s["H_pole_pohozaev"] =
        pohozaev_applies(c.p, b.dimension) ? json(pohozaev_residue(rg, c.deltas).mean) : json(nullptr);
    s["C_twosided"] = nullptr;
    s["q_bar_norm"] = nullptr;
    out.files.emplace_back(suffix("profile", index), render([&](std::ostream& os) { radial::write_profile_csv(os, rg); }));
    return out;
  }
  const auto gs = green_function(planar_spec(c, lambda), green_controls(c));
  s["H_pole_fit"] = gs.h_pole.value;
  s["H_pole_uncertainty"] = gs.h_pole.uncertainty;
  s["H_pole_method"] = gs.h_pole.method;
  s["H_pole_pohozaev"] = nullptr;
  s["alpha"] = gs.pole_fit.alpha;
  s["C_twosided"] = gs.diagnostics.two_sided_c;
  s["q_bar"] = gs.diagnostics.q_bar;
  s["q_bar_norm"] = gs.diagnostics.q_bar_norm;
  s["stages"] = gs.stages.size();
  s["vertices"] = gs.spec.mesh->num_vertices();
  out.files.emplace_back(suffix("green", index), render([&](std::ostream& os) { write_field_csv(os, gs.g); }));
  out.files.emplace_back(suffix("regular_part", index), render([&](std::ostream& os) { write_field_csv(os, gs.h); }));
  return out;
}

PointResult cmd_green(const RunConfig& c) {
  if (c.lambdas.empty()) return green_point(c, c.lambda, -1);
  std::vector<std::future<PointResult>> jobs;
  for (std::size_t i = 0; i < c.lambdas.size(); ++i)
    jobs.push_back(std::async(std::launch::async, green_point, std::cref(c), c.lambdas[i], static_cast<int>(i)));
  PointResult out;
  out.summary["sweep"] = json::array();
  for (auto& j : jobs) {
    auto r = j.get();
    out.summary["sweep"].push_back(std::move(r.summary));
    for (auto& f : r.files) out.files.push_back(std::move(f));
  }
  return out;
}

/// Regular-part samplers keep a pointer to their solution, so both live here.
struct Sampled {
  std::optional<GreenSolution> fem;
  std::optional<radial::RadialGreen> ball;
  std::unique_ptr<RegularPartSampler> sampler;
  double h_pole = 0.0;
  std::vector<double> radii;
};

Sampled sample_regular_part(const RunConfig& c) {
  Sampled s;
  const auto d = c.domain_spec();
  if (d.is_radial()) {
    const auto& b = ball_of(d);
    s.ball = radial::radial_green(c.p, b.dimension, b.radius, c.lambda);
    s.sampler = std::make_unique<RadialRegularPart>(*s.ball);
    s.h_pole = s.ball->h0;
    s.radii = geometric_radii(1e-3 * b.radius, 0.3 * b.radius, c.radii);
  } else {
    s.fem = green_function(planar_spec(c, c.lambda), green_controls(c));
    s.sampler = std::make_unique<FemRegularPart>(*s.fem);
    s.h_pole = s.fem->h_pole.value;
    s.radii = geometric_radii(1.2 * s.fem->resolved_radius, 0.4 * d.distance_to_boundary(c.pole), c.radii);
  }
  return s;
}

PointResult cmd_harnack(const RunConfig& c) {
  const auto s = sample_regular_part(c);
  const auto far = s.sampler->extremes(s.radii.back());
  const double shift = c.shift.value_or(2.0 * std::max({std::abs(s.h_pole), std::abs(far.sup), std::abs(far.inf)}));
  const auto rep = harnack_report(*s.sampler, c.sign, shift, s.radii);
  PointResult out;
  double lo = INFINITY, hi = -INFINITY;
  for (double q : rep.quotient) lo = std::min(lo, q), hi = std::max(hi, q);
  out.summary = {{"sign", c.sign}, {"shift", shift}, {"q0", rep.q0}, {"H_pole", s.h_pole},
                 {"min_C", lo},    {"max_C", hi},    {"growth_flag", rep.growth_flag}};
  out.files.emplace_back("harnack.csv", render([&](std::ostream& os) { write_harnack_csv(os, rep); }));
  return out;
}

PointResult cmd_hoelder(const RunConfig& c) {
  const auto s = sample_regular_part(c);
  const auto fit = oscillation_decay(*s.sampler, s.radii);
  PointResult out;
  out.summary = {{"alpha", fit.alpha}, {"C0", fit.c0}, {"residual", fit.residual}, {"degenerate", fit.degenerate}};
  out.files.emplace_back("hoelder.csv", render([&](std::ostream& os) { write_holder_csv(os, fit); }));
  return out;
}

PointResult cmd_mesh(const RunConfig& c) {
  const auto mesh = geometry::build_mesh(c.domain_spec(), c.h, c.gamma);
  const auto q = geometry::assess(*mesh);
  PointResult out;
  out.summary = {{"vertices", mesh->num_vertices()},       {"triangles", mesh->num_triangles()},
                 {"min_angle_deg", q.min_angle_deg},       {"max_edge", q.max_edge},
                 {"pole_edge", mesh->edge_length_near_pole()}, {"area", mesh->total_area()}};
  out.files.emplace_back("mesh.txt", render([&](std::ostream& os) { geometry::write_mesh(os, *mesh); }));
  return out;
}

PointResult cmd_eigen(const RunConfig& c) {
  PointResult out;
  const auto d = c.domain_spec();
  if (d.is_radial()) {
    out.summary = {{"lambda1", first_eigenvalue(c.p, ball_of(d))}};
    return out;
  }
  const auto mesh = geometry::build_mesh(d, c.h, c.gamma);
  const auto r = first_eigenvalue(c.p, mesh);
  out.summary = {{"lambda1", r.lambda1}, {"iterations", r.history.size()}, {"vertices", mesh->num_vertices()}};
  out.files.emplace_back("eigenfunction.csv", render([&](std::ostream& os) { write_field_csv(os, r.eigenfunction); }));
  return out;
}

PointResult cmd_pohozaev(const RunConfig& c) {
  const auto& b = ball_of(c.domain_spec());
  const auto rg = radial::radial_green(c.p, b.dimension, b.radius, c.lambda);
  const auto rep = pohozaev_residue(rg, c.deltas);
  PointResult out;
  out.summary = {{"constant", rep.constant}, {"mean", rep.mean},       {"spread", rep.spread},
                 {"H_pole", rg.h0},          {"lambda", c.lambda}, {"p", c.p}};
  out.files.emplace_back("pohozaev.csv", render([&](std::ostream& os) {
                           os << "delta,residue,estimate\n";
                           os.precision(12);
                           for (std::size_t i = 0; i < rep.deltas.size(); ++i)
                             os << rep.deltas[i] << ',' << rep.residues[i] << ',' << rep.estimates[i] << '\n';
                         }));
  return out;
}

PointResult cmd_radial(const RunConfig& c) {
  const auto& b = ball_of(c.domain_spec());
  const auto rg = radial::radial_green(c.p, b.dimension, b.radius, c.lambda);
  PointResult out;
  out.summary = {{"H_pole", rg.h0},
                 {"lambda1", radial::radial_eigen(c.p, b.dimension, b.radius)},
                 {"shots", rg.shots},
                 {"p", c.p},
                 {"lambda", c.lambda},
                 {"dimension", b.dimension}};
  out.files.emplace_back("profile.csv", render([&](std::ostream& os) { radial::write_profile_csv(os, rg); }));
  return out;
}

PointResult cmd_bn_expansion(const RunConfig& c) {
  const auto& b = ball_of(c.domain_spec());
  const BallProblem ball{c.p, b.dimension, b.radius, c.lambda, {}};
  const auto rep = expansion_sweep(ball, default_epsilon_grid(c.p, 2.0 * b.radius, c.eps_count, c.eps_decades));
  double min_q = INFINITY;
  for (double q : rep.quotient) min_q = std::min(min_q, q);
  const json report = {{"epsilon", rep.epsilon},
                       {"Q", rep.quotient},
                       {"scaled_gap", rep.scaled_gap},
                       {"S0", rep.s0},
                       {"H_pole", rep.regular_part},
                       {"slope", rep.slope},
                       {"predicted_slope", rep.predicted_slope},
                       {"deviation", rep.deviation},
                       {"dropped", rep.dropped}};
  PointResult out;
  out.summary = {{"S0", rep.s0},         {"H_pole", rep.regular_part},      {"slope", rep.slope},
                 {"predicted_slope", rep.predicted_slope}, {"deviation", rep.deviation}, {"min_Q", min_q},
                 {"below_S0", min_q < rep.s0}};
  out.files.emplace_back("expansion.csv", render([&](std::ostream& os) { write_expansion_csv(os, rep); }));
  out.files.emplace_back("expansion.json", report.dump(2) + "\n");
  return out;
}

PointResult cmd_lambda_star(const RunConfig& c) {
  const auto d = c.domain_spec();
  LambdaStarResult res;
  double lambda1 = 0.0;
  if (d.is_radial()) {
    const auto& b = ball_of(d);
    lambda1 = radial::radial_eigen(c.p, b.dimension, b.radius);
    res = lambda_star(BallProblem{c.p, b.dimension, b.radius, 0.0, lambda1}, c.lo, c.hi.value_or(0.99 * lambda1),
                      c.tol.value_or(0.0));
  } else {
    lambda1 = first_eigenvalue(c.p, geometry::build_mesh(d, c.h, c.gamma)).lambda1;
    PlanarThresholdProblem pr;
    pr.domain = d;
    pr.h = c.h;
    pr.gamma = c.gamma;
    pr.p = c.p;
    res = lambda_star(pr, c.lo, c.hi.value_or(0.95 * lambda1), c.tol.value_or(1e-3 * lambda1));
  }
  PointResult out;
  out.summary = {{"lambda_star", res.lambda_star},
                 {"lo", res.lo},
                 {"hi", res.hi},
                 {"lambda1", lambda1},
                 {"evaluations", res.samples.size()}};
  out.files.emplace_back("lambda.csv", render([&](std::ostream& os) { write_lambda_csv(os, res); }));
  return out;
}

struct Check {
  std::string name;
  double value;
  double threshold;
  bool pass;
};

PointResult cmd_selftest(const RunConfig& c) {
  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0), positive(0.1, 2.0);
  std::vector<Check> checks;
  for (double p : {2.0, 2.5, 3.0}) {
    double worst = INFINITY;
    for (int i = 0; i < c.samples; ++i) {
      Eigen::VectorXd x(3), y(3);
      for (int k = 0; k < 3; ++k) x[k] = unit(rng), y[k] = unit(rng);
      worst = std::min(worst, coercivity_ratio(x, y, p));
    }
    checks.push_back({"coercivity_ratio_min_p" + std::to_string(p).substr(0, 3), worst, 0.0, worst > 0.0});
  }
  for (double p : {2.0, 2.5, 3.0}) {
    const auto k = ConvexityConstants::make(p);
    double worst = INFINITY;
    for (int i = 0; i < c.samples; ++i) {
      const double w = positive(rng), f = unit(rng);
      const Vec2 gw(unit(rng), unit(rng)), gf(unit(rng), unit(rng));
      const double rho = rho_pointwise(k, w, gw, f, gf);
      const double bound = rho_lower_bound(k, w, gw, f, gf);
      worst = std::min(worst, (rho - bound) / std::max(1.0, std::abs(rho)));
      worst = std::min(worst, rho);
    }
    checks.push_back({"rho_above_square_completion_p" + std::to_string(p).substr(0, 3), worst, -1e-12, worst >= -1e-12});
  }
  for (auto [p, n] : {std::pair{2.0, 3.0}, std::pair{2.2, 4.0}}) {
    auto grid = radial::radial_grid(20.0);
    grid.erase(grid.begin());
    const double res = bubble_residual(BubbleParams::make(1.0, p, n), grid);
    checks.push_back({"bubble_residual_" + std::to_string(p).substr(0, 3) + "_" + std::to_string(n).substr(0, 3), res,
                      1e-8, res <= 1e-8});
    const auto s0 = sobolev_constant(p, n);
    const double gap = std::abs(s0.quotient - s0.power_form) / s0.power_form;
    checks.push_back({"sobolev_forms_" + std::to_string(p).substr(0, 3) + "_" + std::to_string(n).substr(0, 3), gap,
                      1e-6, gap <= 1e-6});
  }
  PointResult out;
  out.summary["checks"] = json::array();
  bool all = true;
  for (const auto& ch : checks) {
    out.summary["checks"].push_back({{"name", ch.name}, {"value", ch.value}, {"threshold", ch.threshold}, {"pass", ch.pass}});
    all = all && ch.pass;
  }
  out.summary["pass"] = all;
  out.summary["seed"] = c.seed;
  out.files.emplace_back("selftest.csv", render([&](std::ostream& os) {
                           os << "check,value,threshold,pass\n";
                           os.precision(12);
                           for (const auto& ch : checks)
                             os << ch.name << ',' << ch.value << ',' << ch.threshold << ',' << (ch.pass ? 1 : 0) << '\n';
                         }));
  return out;
}

PointResult dispatch(const RunConfig& c) {
  static const std::vector<std::pair<std::string, std::function<PointResult(const RunConfig&)>>> table{
      {"mesh", cmd_mesh},         {"eigen", cmd_eigen},   {"green", cmd_green},
      {"harnack", cmd_harnack},   {"hoelder", cmd_hoelder}, {"pohozaev", cmd_pohozaev},
      {"radial", cmd_radial},     {"bn-expansion", cmd_bn_expansion}, {"lambda-star", cmd_lambda_star},
      {"selftest", cmd_selftest}};
  for (const auto& [name, fn] : table)
    if (name == c.command) return fn(c);
  raise(ErrorCode::ConfigError, "field command: unknown subcommand '" + c.command + "'");
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  os << content;
  require(static_cast<bool>(os), ErrorCode::IoError, "cannot write " + path.string());
}

}  // namespace

RunOutcome run(const RunConfig& config) {
  validate(config);
  RunOutcome outcome;
  outcome.directory = output_directory(config);
  json& m = outcome.manifest;
  m["tool"] = "plap";
  m["version"] = PLAP_VERSION;
  m["command"] = config.command;
  json cfg = json::object();
  for (const auto& [k, v] : config_entries(config)) cfg[k] = v;
  m["config"] = cfg;
  m["versions"] = {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                 std::to_string(EIGEN_MINOR_VERSION)},
                   {"boost", BOOST_LIB_VERSION},
                   {"compiler", __VERSION__}};
  m["timings_ms"] = json::object();
  Stopwatch clock(m["timings_ms"]);
  auto result = clock.time(config.command, [&] { return dispatch(config); });
  m["summary"] = result.summary;

  std::error_code ec;
  fs::create_directories(outcome.directory, ec);
  require(!ec, ErrorCode::IoError, "cannot create output directory " + outcome.directory);
  m["artifacts"] = json::array();
  for (const auto& [name, content] : result.files) {
    write_file(fs::path(outcome.directory) / name, content);
    m["artifacts"].push_back(name);
  }
  write_file(fs::path(outcome.directory) / "manifest.json", m.dump(2) + "\n");
  if (config.command == "selftest" && !result.summary["pass"].get<bool>()) outcome.exit_code = 3;
  return outcome;
}

}  // namespace plap::cli
