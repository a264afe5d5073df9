#include "run_config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>

#include "plap/error.hpp"

namespace plap::cli {
namespace {

[[noreturn]] void config_error(const std::string& key, const std::string& message) {
  raise(ErrorCode::ConfigError, "field " + key + ": " + message);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string part;
  std::istringstream is(s);
  while (std::getline(is, part, sep)) out.push_back(trim(part));
  return out;
}

double to_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty() || !std::isfinite(v))
    config_error(key, "cannot parse '" + text + "' as a finite number");
  return v;
}

long long to_integer(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    config_error(key, "cannot parse '" + text + "' as an integer");
  return v;
}

std::vector<double> to_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  if (trim(text).empty()) return out;
  for (const auto& part : split(text, ',')) out.push_back(to_double(key, part));
  return out;
}

std::optional<double> to_optional(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t.empty() || t == "auto") return std::nullopt;
  return to_double(key, t);
}

std::string format(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string format(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + format(v[i]);
  return out;
}

std::string format(const std::optional<double>& v) { return v ? format(*v) : "auto"; }

bool needs_ball(const std::string& command) {
  return command == "pohozaev" || command == "radial" || command == "bn-expansion";
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"mesh",     "eigen",  "green",        "harnack",     "hoelder",
                                              "pohozaev", "radial", "bn-expansion", "lambda-star", "selftest"};
  return names;
}

geometry::DomainSpec parse_domain(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) config_error("domain", "expected kind:parameters, got '" + text + "'");
  const std::string kind = trim(text.substr(0, colon)), args = text.substr(colon + 1);
  geometry::DomainSpec d;
  if (kind == "disk") {
    d.shape = geometry::Disk{to_double("domain", args)};
  } else if (kind == "square") {
    d.shape = geometry::Square{to_double("domain", args)};
  } else if (kind == "annulus") {
    const auto r = to_list("domain", args);
    if (r.size() != 2) config_error("domain", "annulus needs inner,outer radii");
    d.shape = geometry::Annulus{r[0], r[1]};
  } else if (kind == "polygon") {
    geometry::Polygon poly;
    for (const auto& pt : split(args, ';')) {
      const auto xy = to_list("domain", pt);
      if (xy.size() != 2) config_error("domain", "polygon vertices are x,y pairs separated by ';'");
      poly.vertices.emplace_back(xy[0], xy[1]);
    }
    d.shape = std::move(poly);
  } else if (kind.rfind("ball", 0) == 0 && kind.size() > 4) {
    d.shape = geometry::RadialBall{to_double("domain", kind.substr(4)), to_double("domain", args)};
  } else {
    config_error("domain", "unknown domain kind '" + kind + "'");
  }
  return d;
}

double RunConfig::dimension() const {
  const auto d = parse_domain(domain);
  if (const auto* b = std::get_if<geometry::RadialBall>(&d.shape)) return b->dimension;
  return 2.0;
}

geometry::DomainSpec RunConfig::domain_spec() const {
  auto d = parse_domain(domain);
  d.pole = pole;
  return d;
}

void set_field(RunConfig& c, const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  if (key == "command") {
    c.command = v;
  } else if (key == "domain") {
    parse_domain(v);
    c.domain = v;
  } else if (key == "pole") {
    const auto xy = to_list(key, v);
    if (xy.size() != 2) config_error(key, "expected x,y");
    c.pole = {xy[0], xy[1]};
  } else if (key == "p") {
    c.p = to_double(key, v);
  } else if (key == "lambda") {
    c.lambda = to_double(key, v);
  } else if (key == "lambdas") {
    c.lambdas = to_list(key, v);
  } else if (key == "h") {
    c.h = to_double(key, v);
  } else if (key == "gamma") {
    c.gamma = to_double(key, v);
  } else if (key == "schedule") {
    c.schedule = to_list(key, v);
  } else if (key == "min_pole_edges") {
    c.min_pole_edges = static_cast<int>(to_integer(key, v));
  } else if (key == "sign") {
    c.sign = static_cast<int>(to_integer(key, v));
  } else if (key == "shift") {
    c.shift = to_optional(key, v);
  } else if (key == "radii") {
    c.radii = static_cast<int>(to_integer(key, v));
  } else if (key == "deltas") {
    c.deltas = to_list(key, v);
  } else if (key == "eps_count") {
    c.eps_count = static_cast<int>(to_integer(key, v));
  } else if (key == "eps_decades") {
    c.eps_decades = to_double(key, v);
  } else if (key == "lo") {
    c.lo = to_double(key, v);
  } else if (key == "hi") {
    c.hi = to_optional(key, v);
  } else if (key == "tol") {
    c.tol = to_optional(key, v);
  } else if (key == "samples") {
    c.samples = static_cast<int>(to_integer(key, v));
  } else if (key == "seed") {
    const auto s = to_integer(key, v);
    if (s < 0) config_error(key, "must be nonnegative");
    c.seed = static_cast<std::uint64_t>(s);
  } else if (key == "output") {
    c.output = v;
  } else {
    raise(ErrorCode::ConfigError, "unknown key '" + key + "'");
  }
}

RunConfig parse_config(std::istream& is) {
  RunConfig c;
  std::string line;
  int number = 0;
  while (std::getline(is, line)) {
    ++number;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      raise(ErrorCode::ConfigError, "line " + std::to_string(number) + ": expected key = value");
    set_field(c, trim(t.substr(0, eq)), t.substr(eq + 1));
  }
  return c;
}

std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& c) {
  return {{"command", c.command},
          {"domain", c.domain},
          {"pole", format(c.pole.x()) + "," + format(c.pole.y())},
          {"p", format(c.p)},
          {"lambda", format(c.lambda)},
          {"lambdas", format(c.lambdas)},
          {"h", format(c.h)},
          {"gamma", format(c.gamma)},
          {"schedule", format(c.schedule)},
          {"min_pole_edges", std::to_string(c.min_pole_edges)},
          {"sign", std::to_string(c.sign)},
          {"shift", format(c.shift)},
          {"radii", std::to_string(c.radii)},
          {"deltas", format(c.deltas)},
          {"eps_count", std::to_string(c.eps_count)},
          {"eps_decades", format(c.eps_decades)},
          {"lo", format(c.lo)},
          {"hi", format(c.hi)},
          {"tol", format(c.tol)},
          {"samples", std::to_string(c.samples)},
          {"seed", std::to_string(c.seed)},
          {"output", c.output}};
}

void write_config(std::ostream& os, const RunConfig& c) {
  for (const auto& [k, v] : config_entries(c)) os << k << " = " << v << '\n';
}

void validate(const RunConfig& c) {
  const auto& names = subcommands();
  if (std::find(names.begin(), names.end(), c.command) == names.end())
    config_error("command", "unknown subcommand '" + c.command + "'");
  const auto d = c.domain_spec();
  const double n = c.dimension();
  if (!(c.p > 1.0 && c.p <= n)) {
    std::ostringstream os;
    os << "must lie in (1, N] with N = " << n << ", got " << c.p;
    config_error("p", os.str());
  }
  if (d.is_radial()) {
    if (c.pole.norm() != 0.0) config_error("pole", "radial problems put the pole at the center");
    try {
      d.validate(false);
    } catch (const Error& e) {
      config_error("domain", e.what());
    }
  } else {
    try {
      d.validate(c.command != "mesh" && c.command != "eigen");
    } catch (const Error& e) {
      config_error(e.code() == ErrorCode::PoleOutsideDomain ? "pole" : "domain", e.what());
    }
  }
  if (needs_ball(c.command) && !d.is_radial())
    config_error("domain", c.command + " needs a ball descriptor ballN:R");
  if (c.command == "mesh" && d.is_radial()) config_error("domain", "balls are not meshed; use disk:R");
  if (!(c.h > 0.0)) config_error("h", "must be positive");
  if (!(c.gamma > 0.0 && c.gamma <= 1.0)) config_error("gamma", "must lie in (0, 1]");
  for (double r : c.schedule)
    if (!(r > 0.0)) config_error("schedule", "mollifier radii must be positive");
  if (c.min_pole_edges < 3) config_error("min_pole_edges", "must be at least 3");
  if (c.sign != 1 && c.sign != -1) config_error("sign", "must be 1 or -1");
  if (c.shift && *c.shift < 0.0) config_error("shift", "must be nonnegative");
  if (c.radii < (c.command == "hoelder" ? 5 : 2))
    config_error("radii", c.command == "hoelder" ? "oscillation fits need at least 5 radii" : "must be at least 2");
  for (double x : c.deltas)
    if (!(x > 0.0)) config_error("deltas", "sphere radii must be positive");
  if (c.eps_count < 2) config_error("eps_count", "must be at least 2");
  if (!(c.eps_decades > 0.0)) config_error("eps_decades", "must be positive");
  if (c.hi && !(*c.hi > c.lo)) config_error("hi", "must exceed lo");
  if (c.tol && !(*c.tol > 0.0)) config_error("tol", "must be positive");
  if (c.samples < 1) config_error("samples", "must be at least 1");
}

std::string output_directory(const RunConfig& c) {
  if (const char* env = std::getenv(kOutputEnv); env != nullptr && *env != '\0') return env;
  return c.output.empty() ? "plap-out/" + c.command : c.output;
}

}  // namespace plap::cli
