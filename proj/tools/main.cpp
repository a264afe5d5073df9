#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>

#include "commands.hpp"
#include "plap/error.hpp"

namespace {

std::string flag_name(std::string key) {
  for (auto& ch : key)
    if (ch == '_') ch = '-';
  return "--" + key;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace plap::cli;
  CLI::App app{"p-Laplacian Green functions, regular parts and critical-exponent tests"};
  app.require_subcommand(1);

  const RunConfig defaults;
  std::map<std::string, std::map<std::string, std::string>> overrides;
  std::map<std::string, std::string> config_files;
  std::map<std::string, bool> print_only;

  for (const auto& name : subcommands()) {
    auto* sub = app.add_subcommand(name);
    sub->set_help_flag("--help", "print this help and exit");
    sub->add_option("--config", config_files[name], "key = value file; command-line options override it")
        ->check(CLI::ExistingFile);
    sub->add_flag("--print-config", print_only[name], "print the resolved configuration and exit");
    for (const auto& [key, value] : config_entries(defaults)) {
      if (key == "command") continue;
      sub->add_option(flag_name(key), overrides[name][key], "default: " + (value.empty() ? "none" : value));
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    const std::string name = app.get_subcommands().front()->get_name();
    RunConfig config;
    if (!config_files[name].empty()) {
      std::ifstream is(config_files[name]);
      config = parse_config(is);
    }
    config.command = name;
    for (const auto& [key, _] : config_entries(defaults)) {
      if (key == "command") continue;
      if (app.get_subcommands().front()->count(flag_name(key)) > 0) set_field(config, key, overrides[name][key]);
    }
    if (print_only[name]) {
      validate(config);
      write_config(std::cout, config);
      return 0;
    }
    const auto outcome = run(config);
    std::cout << outcome.manifest["summary"].dump(2) << '\n';
    std::cerr << "wrote " << outcome.directory << '\n';
    return outcome.exit_code;
  } catch (const plap::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == plap::ErrorCode::ConfigError ? 2 : 1;
  }
}
