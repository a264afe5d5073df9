#pragma once

// Flat key=value run configuration shared by the command-line front end and
// configuration files.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "plap/geometry.hpp"

namespace plap::cli {

inline constexpr const char* kOutputEnv = "PLAP_OUTPUT_DIR";

const std::vector<std::string>& subcommands();

struct RunConfig {
  std::string command;
  std::string domain = "disk:1";
  geometry::Vec2 pole = geometry::Vec2::Zero();
  double p = 2.0;
  double lambda = 0.0;
  std::vector<double> lambdas;  ///< sweep grid; empty runs the single lambda
  double h = 0.05;
  double gamma = 0.1;
  std::vector<double> schedule;  ///< mollifier radii; empty selects the default
  int min_pole_edges = 6;
  int sign = 1;
  std::optional<double> shift;  ///< empty means twice the largest |H| at the pole and on the largest ball
  int radii = 6;
  std::vector<double> deltas{0.1, 0.2, 0.3, 0.4, 0.5};
  int eps_count = 8;
  double eps_decades = 2.0;
  double lo = 0.0;
  std::optional<double> hi;   ///< empty means just below the first eigenvalue
  std::optional<double> tol;  ///< empty means the module default
  int samples = 1000;
  std::uint64_t seed = 1;
  std::string output;  ///< empty means plap-out/<command>

  /// Spatial dimension implied by the domain descriptor.
  double dimension() const;
  geometry::DomainSpec domain_spec() const;
};

/// "disk:R", "annulus:a,b", "square:s", "polygon:x,y;x,y;...", "ballN:R".
/// Raises ConfigError.
geometry::DomainSpec parse_domain(const std::string& text);

/// Sets one field from its textual value. Raises ConfigError naming the key.
void set_field(RunConfig& config, const std::string& key, const std::string& value);

/// Reads "key = value" lines; blank lines and lines starting with # are skipped.
RunConfig parse_config(std::istream& is);
/// Every key in a fixed order, numbers in shortest round-trip form.
void write_config(std::ostream& os, const RunConfig& config);
std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& config);

/// Field-level range checks. Raises ConfigError.
void validate(const RunConfig& config);

/// The environment override wins over the configured directory.
std::string output_directory(const RunConfig& config);

}  // namespace plap::cli
